use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Oracle, OracleError, Request, DEFAULT_RETRIES};

pub const ENV_ENDPOINT: &str = "TASKSCOPE_LLM_ENDPOINT";
pub const ENV_MODEL: &str = "TASKSCOPE_LLM_MODEL";
pub const ENV_API_KEY: &str = "TASKSCOPE_LLM_API_KEY";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub retries: u32,
    pub timeout_secs: u64,
    #[serde(skip_serializing)]
    pub api_key: Option<String>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            model: String::new(),
            temperature: 0.0,
            retries: DEFAULT_RETRIES,
            timeout_secs: 60,
            api_key: None,
        }
    }
}

impl OracleConfig {
    /// Overlays whichever of the `TASKSCOPE_LLM_*` variables are set.
    pub fn with_env(mut self) -> Self {
        if let Ok(v) = std::env::var(ENV_ENDPOINT) {
            self.endpoint = v;
        }
        if let Ok(v) = std::env::var(ENV_MODEL) {
            self.model = v;
        }
        if let Ok(v) = std::env::var(ENV_API_KEY) {
            self.api_key = Some(v);
        }
        self
    }

    pub fn check(&self) -> Result<(), OracleError> {
        if self.endpoint.trim().is_empty() {
            return Err(OracleError::Config(format!(
                "no endpoint configured (set {ENV_ENDPOINT} or the oracle endpoint option)"
            )));
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(OracleError::Config(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

/// Client for an OpenAI-compatible chat-completion endpoint.
pub struct RemoteOracle {
    config: OracleConfig,
    url: String,
    client: reqwest::blocking::Client,
}

impl RemoteOracle {
    pub fn new(config: OracleConfig) -> Result<Self, OracleError> {
        config.check()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs.max(1)))
            .build()
            .map_err(|e| OracleError::Transport(e.to_string()))?;
        let url = format!("{}/chat/completions", config.endpoint.trim_end_matches('/'));
        Ok(Self { config, url, client })
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }
}

impl Oracle for RemoteOracle {
    fn answer(&self, _request: &Request<'_>, prompt: &str) -> Result<String, OracleError> {
        let body = json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut req = self.client.post(&self.url).json(&body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| OracleError::Transport(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| OracleError::Transport(e.to_string()))?;
        if !status.is_success() {
            let snippet: String = text.chars().take(200).collect();
            return Err(OracleError::Transport(format!("HTTP {status}: {snippet}")));
        }
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| OracleError::Transport(format!("completion body is not JSON: {e}")))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| OracleError::Transport("completion has no choices[0].message.content".into()))
    }
}

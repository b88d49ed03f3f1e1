use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;
use taskscope::oracle::OracleConfig;
use taskscope::planners::{MctsConfig, PolicyConfig};
use taskscope::reduction::ReduceConfig;

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    /// Answers from the structurally necessary objects of the goal.
    #[default]
    GroundTruth,
    /// Ground truth with seeded random drops and additions.
    Noisy,
    /// Keeps every candidate.
    KeepAll,
    /// Canned replies read from a JSON array of strings.
    Scripted,
    /// OpenAI-compatible chat-completion endpoint.
    Remote,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub kind: OracleKind,
    pub p_drop: f64,
    pub p_add: f64,
    pub seed: u64,
    pub script: Option<PathBuf>,
    pub remote: OracleConfig,
}

/// Settings shared by all commands. Loaded from TOML, then overlaid with the
/// oracle environment variables, then with command-line flags.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub jobs: Option<usize>,
    pub log_level: Option<String>,
    pub oracle: OracleSection,
    pub mcts: MctsConfig,
    pub policy: PolicyConfig,
    pub reduce: ReduceConfig,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                toml::from_str::<Config>(&text)
                    .map_err(|e| CliError::Usage(format!("{}: {}", p.display(), e.message())))?
            }
            None => Config::default(),
        };
        cfg.oracle.remote = cfg.oracle.remote.with_env();
        Ok(cfg)
    }
}

//! Relevance oracles: prompt rendering, reply parsing, and the interchangeable
//! backends that answer "which of these candidates matter for this goal".
//!
//! Every backend only produces reply text. [`ask`] owns rendering, parsing and
//! the retry budget, so a remote model, a ground-truth stub and a noisy wrapper
//! all fail in exactly the same way.

mod offline;
mod prompt;
mod remote;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::world::ObjectId;

pub use offline::{
    fault_scheduled, FormatFaultOracle, GroundTruthOracle, KeepAllOracle, NoisyOracle,
    ScriptedOracle,
};
pub use prompt::{
    object_label, parse_selection, relation_sentence, render_action_prompt,
    render_relational_prompt, render_taxonomy_prompt, ActionQuery, Mode, QueryKind,
    RelationalQuery, Request, Selection, SelectionResponse, TaxonomyQuery,
};
pub use remote::{OracleConfig, RemoteOracle, ENV_API_KEY, ENV_ENDPOINT, ENV_MODEL};

pub const DEFAULT_RETRIES: u32 = 3;

/// A source of reply text. Implementations must be safe to share across
/// threads; any per-call state lives in the caller.
pub trait Oracle: Send + Sync {
    fn answer(&self, request: &Request<'_>, prompt: &str) -> Result<String, OracleError>;
}

impl<O: Oracle + ?Sized> Oracle for Box<O> {
    fn answer(&self, request: &Request<'_>, prompt: &str) -> Result<String, OracleError> {
        (**self).answer(request, prompt)
    }
}

impl<O: Oracle + ?Sized> Oracle for std::sync::Arc<O> {
    fn answer(&self, request: &Request<'_>, prompt: &str) -> Result<String, OracleError> {
        (**self).answer(request, prompt)
    }
}

/// One logical oracle call, including every retry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallRecord {
    pub kind: QueryKind,
    pub prompt_sha256: String,
    pub responses: Vec<String>,
    pub parsed: Option<Selection>,
    pub retries: u32,
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle reply unusable after {} request(s)", .0.responses.len())]
    Format(Box<CallRecord>),
    #[error("oracle transport error: {0}")]
    Transport(String),
    #[error("oracle configuration error: {0}")]
    Config(String),
    #[error("this oracle cannot answer {0:?} queries")]
    Unsupported(QueryKind),
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Renders, asks, parses; re-sends the identical prompt while the reply fails
/// to parse or `accept` rejects it, up to `retries` extra requests.
pub fn ask<T>(
    oracle: &dyn Oracle,
    request: Request<'_>,
    retries: u32,
    accept: impl Fn(&Selection) -> Option<T>,
) -> Result<(T, CallRecord), OracleError> {
    let prompt = request.prompt();
    let mut record = CallRecord {
        kind: request.kind(),
        prompt_sha256: sha256_hex(prompt.as_bytes()),
        responses: Vec::new(),
        parsed: None,
        retries: 0,
    };
    for attempt in 0..=retries {
        let raw = oracle.answer(&request, &prompt)?;
        let parsed = parse_selection(&raw, request.mode()).parsed;
        record.responses.push(raw);
        record.retries = attempt;
        if let Some(sel) = parsed {
            if let Some(value) = accept(&sel) {
                record.parsed = Some(sel);
                return Ok((value, record));
            }
        }
        log::debug!("unusable {:?} reply on attempt {}", record.kind, attempt + 1);
    }
    Err(OracleError::Format(Box::new(record)))
}

pub fn query_taxonomy(
    oracle: &dyn Oracle,
    query: &TaxonomyQuery,
    retries: u32,
) -> Result<(Vec<String>, CallRecord), OracleError> {
    ask(oracle, Request::Taxonomy(query), retries, |s| match s {
        Selection::Names(n) => Some(n.clone()),
        Selection::Ids(_) => None,
    })
}

pub fn query_relational(
    oracle: &dyn Oracle,
    query: &RelationalQuery,
    retries: u32,
) -> Result<(Vec<ObjectId>, CallRecord), OracleError> {
    ask(oracle, Request::Relational(query), retries, |s| match s {
        Selection::Ids(ids) => Some(ids.iter().map(|i| ObjectId(*i)).collect()),
        Selection::Names(_) => None,
    })
}

/// Index of the chosen action; anything but exactly one in-range index is
/// treated like a malformed reply.
pub fn query_action(
    oracle: &dyn Oracle,
    query: &ActionQuery,
    retries: u32,
) -> Result<(usize, CallRecord), OracleError> {
    let n = query.actions.len();
    ask(oracle, Request::Action(query), retries, |s| match s {
        Selection::Ids(ids) if ids.len() == 1 && (ids[0] as usize) < n => Some(ids[0] as usize),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tq() -> TaxonomyQuery {
        TaxonomyQuery {
            level: 1,
            class_level: false,
            candidates: vec!["food".into(), "furniture".into()],
            goal_text: "g".into(),
        }
    }

    #[test]
    fn first_reply_accepted() {
        let o = ScriptedOracle::new([r#"["food"]"#]);
        let (sel, rec) = query_taxonomy(&o, &tq(), 3).unwrap();
        assert_eq!(sel, vec!["food"]);
        assert_eq!(rec.retries, 0);
        assert_eq!(o.requests(), 1);
    }

    #[test]
    fn prose_then_valid() {
        let o = ScriptedOracle::new(["Sure!", "Here it is", r#"["food"]"#]);
        let (_, rec) = query_taxonomy(&o, &tq(), 3).unwrap();
        assert_eq!(rec.retries, 2);
        assert_eq!(rec.responses.len(), 3);
    }

    #[test]
    fn budget_exhausted() {
        let o = ScriptedOracle::new(["no json here"]);
        match query_taxonomy(&o, &tq(), 3) {
            Err(OracleError::Format(rec)) => {
                assert_eq!(rec.responses.len(), 4);
                assert!(rec.parsed.is_none());
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(o.requests(), 4);

        let o = ScriptedOracle::new(["no"]);
        assert!(query_taxonomy(&o, &tq(), 0).is_err());
        assert_eq!(o.requests(), 1);
    }

    #[test]
    fn action_index_must_be_in_range() {
        let q = ActionQuery {
            goal_text: "g".into(),
            object_lines: vec![],
            relation_lines: vec![],
            actions: vec!["a".into(), "b".into()],
        };
        let o = ScriptedOracle::new(["[2]", "[0,1]", "[1]"]);
        let (i, rec) = query_action(&o, &q, 3).unwrap();
        assert_eq!((i, rec.retries), (1, 2));
        let o = ScriptedOracle::new(["[7]"]);
        assert!(matches!(query_action(&o, &q, 3), Err(OracleError::Format(_))));
        assert_eq!(o.requests(), 4);
    }

    #[test]
    fn prompt_hash_recorded() {
        let o = ScriptedOracle::new(["[]"]);
        let (_, rec) = query_taxonomy(&o, &tq(), 3).unwrap();
        assert_eq!(rec.prompt_sha256, sha256_hex(render_taxonomy_prompt(&tq()).as_bytes()));
        assert_eq!(rec.prompt_sha256.len(), 64);
    }
}

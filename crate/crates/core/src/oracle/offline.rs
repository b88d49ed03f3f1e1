use std::collections::{BTreeSet, VecDeque};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::{parse_selection, Oracle, OracleError, Request, Selection};
use crate::taxonomy::TaxonomyGraph;
use crate::world::{ObjectId, StateGraph};

/// Answers from a known set of necessary objects: taxonomy queries keep the
/// candidates on the path to any necessary object's class, relational queries
/// keep necessary frontier ids.
#[derive(Clone, Debug)]
pub struct GroundTruthOracle {
    names: BTreeSet<String>,
    ids: BTreeSet<ObjectId>,
}

impl GroundTruthOracle {
    pub fn new(taxonomy: &TaxonomyGraph, world: &StateGraph, truth: &BTreeSet<ObjectId>) -> Self {
        let mut names = BTreeSet::new();
        for id in truth {
            let Some(o) = world.object(*id) else { continue };
            names.insert(o.class.to_string());
            names.extend(taxonomy.ancestors(o.class.as_str()).into_iter().map(str::to_string));
        }
        Self { names, ids: truth.clone() }
    }
}

impl Oracle for GroundTruthOracle {
    fn answer(&self, request: &Request<'_>, _prompt: &str) -> Result<String, OracleError> {
        match request {
            Request::Taxonomy(q) => Ok(Selection::Names(
                q.candidates.iter().filter(|c| self.names.contains(*c)).cloned().collect(),
            )
            .render()),
            Request::Relational(q) => Ok(Selection::Ids(
                q.frontier.iter().filter(|i| self.ids.contains(i)).map(|i| i.0).collect(),
            )
            .render()),
            Request::Action(_) => Err(OracleError::Unsupported(request.kind())),
        }
    }
}

/// Selects every candidate offered.
#[derive(Clone, Copy, Debug, Default)]
pub struct KeepAllOracle;

impl Oracle for KeepAllOracle {
    fn answer(&self, request: &Request<'_>, _prompt: &str) -> Result<String, OracleError> {
        match request {
            Request::Taxonomy(q) => Ok(Selection::Names(q.candidates.clone()).render()),
            Request::Relational(q) => {
                Ok(Selection::Ids(q.frontier.iter().map(|i| i.0).collect()).render())
            }
            Request::Action(_) => Err(OracleError::Unsupported(request.kind())),
        }
    }
}

/// Perturbs another oracle's selections. The random stream for a query is
/// derived from the seed and the prompt bytes, so answers do not depend on
/// call order or thread scheduling.
pub struct NoisyOracle<O> {
    inner: O,
    seed: u64,
    p_drop: f64,
    p_add: f64,
}

impl<O: Oracle> NoisyOracle<O> {
    pub fn new(inner: O, seed: u64, p_drop: f64, p_add: f64) -> Result<Self, OracleError> {
        for (name, p) in [("p_drop", p_drop), ("p_add", p_add)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(OracleError::Config(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        Ok(Self { inner, seed, p_drop, p_add })
    }

    fn rng(&self, prompt: &str) -> ChaCha8Rng {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(prompt.as_bytes());
        let digest = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        ChaCha8Rng::from_seed(key)
    }

    fn perturb<T: PartialEq + Clone>(&self, rng: &mut ChaCha8Rng, candidates: &[T], picked: &[T]) -> Vec<T> {
        candidates
            .iter()
            .filter(|c| {
                let draw: f64 = rng.gen();
                if picked.contains(c) {
                    draw >= self.p_drop
                } else {
                    draw < self.p_add
                }
            })
            .cloned()
            .collect()
    }
}

impl<O: Oracle> Oracle for NoisyOracle<O> {
    fn answer(&self, request: &Request<'_>, prompt: &str) -> Result<String, OracleError> {
        let raw = self.inner.answer(request, prompt)?;
        let Some(parsed) = parse_selection(&raw, request.mode()).parsed else {
            return Ok(raw);
        };
        let mut rng = self.rng(prompt);
        match (request, parsed) {
            (Request::Taxonomy(q), Selection::Names(picked)) => {
                Ok(Selection::Names(self.perturb(&mut rng, &q.candidates, &picked)).render())
            }
            (Request::Relational(q), Selection::Ids(picked)) => {
                let frontier: Vec<u32> = q.frontier.iter().map(|i| i.0).collect();
                Ok(Selection::Ids(self.perturb(&mut rng, &frontier, &picked)).render())
            }
            _ => Ok(raw),
        }
    }
}

/// Replays canned replies in order, repeating the last one once the script
/// runs out.
#[derive(Debug)]
pub struct ScriptedOracle {
    replies: Mutex<VecDeque<String>>,
    last: Mutex<Option<String>>,
    requests: AtomicUsize,
}

impl ScriptedOracle {
    pub fn new<I, S>(replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            replies: Mutex::new(replies.into_iter().map(Into::into).collect()),
            last: Mutex::new(None),
            requests: AtomicUsize::new(0),
        }
    }

    /// Number of replies served so far.
    pub fn requests(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

impl Oracle for ScriptedOracle {
    fn answer(&self, _request: &Request<'_>, _prompt: &str) -> Result<String, OracleError> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        let mut last = self.last.lock().expect("script lock");
        if let Some(next) = self.replies.lock().expect("script lock").pop_front() {
            *last = Some(next);
        }
        last.clone()
            .ok_or_else(|| OracleError::Transport("scripted oracle has no replies".into()))
    }
}

/// Whether run `k` of a sequence is scheduled to receive malformed replies
/// when a fraction `q` of runs should. Spreads faults evenly: over any `n`
/// consecutive runs starting at 0 exactly `floor(n * q)` are faulted.
pub fn fault_scheduled(q: f64, k: u64) -> bool {
    ((k + 1) as f64 * q).floor() > (k as f64 * q).floor()
}

const PROSE_REPLY: &str = "Sure! The objects most relevant to this goal are the ones the robot \
will need to interact with, along with anything they are stored in.";

/// Replies with prose for every query when the run is scheduled to fail,
/// otherwise defers to the inner oracle.
pub struct FormatFaultOracle<O> {
    inner: O,
    broken: bool,
}

impl<O: Oracle> FormatFaultOracle<O> {
    pub fn new(inner: O, broken: bool) -> Self {
        Self { inner, broken }
    }

    pub fn for_run(inner: O, q: f64, k: u64) -> Self {
        Self::new(inner, fault_scheduled(q, k))
    }

    pub fn is_broken(&self) -> bool {
        self.broken
    }
}

impl<O: Oracle> Oracle for FormatFaultOracle<O> {
    fn answer(&self, request: &Request<'_>, prompt: &str) -> Result<String, OracleError> {
        if self.broken {
            Ok(PROSE_REPLY.to_string())
        } else {
            self.inner.answer(request, prompt)
        }
    }
}

//! Two-step object selection: taxonomy descent seeds a set of objects, then
//! relation frontiers grow it until the oracle stops adding anything. The
//! result is the induced subgraph on what was kept.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{
    object_label, query_relational, query_taxonomy, relation_sentence, CallRecord, Oracle,
    OracleError, RelationalQuery, TaxonomyQuery, DEFAULT_RETRIES,
};
use crate::taxonomy::{instances_of_classes, LevelSelection, TaxonomyError, TaxonomyGraph, ROOT};
use crate::world::{GoalSpec, ObjectId, RelationEdge, RelationKind, StateGraph, WorldError};

pub const DEFAULT_MAX_ITERS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReduceConfig {
    /// Upper bound on frontier-expansion rounds.
    pub max_iters: usize,
    pub retries: u32,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        Self { max_iters: DEFAULT_MAX_ITERS, retries: DEFAULT_RETRIES }
    }
}

/// Objects adjacent to the current selection, and the edges that connect them.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontierGraph {
    pub objects: BTreeSet<ObjectId>,
    pub edges: BTreeSet<RelationEdge>,
}

/// Every non-`IN_ROOM` edge with exactly one endpoint in `selected`.
pub fn phi(world: &StateGraph, selected: &BTreeSet<ObjectId>) -> FrontierGraph {
    let mut f = FrontierGraph::default();
    for e in world.edges() {
        if e.kind == RelationKind::InRoom {
            continue;
        }
        let (a, b) = (selected.contains(&e.src), selected.contains(&e.dst));
        if a != b {
            f.objects.insert(if a { e.dst } else { e.src });
            f.edges.insert(*e);
        }
    }
    f
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    ObjectsMissing,
    FormatError,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRecord {
    #[serde(flatten)]
    pub selection: LevelSelection,
    /// Names the oracle returned that were not among the candidates.
    pub dropped: Vec<String>,
    pub call: CallRecord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub frontier_size: usize,
    pub picked: Vec<ObjectId>,
    pub dropped: Vec<ObjectId>,
    pub retries: u32,
    /// Absent when the frontier was empty and no query was made.
    pub call: Option<CallRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub levels: Vec<LevelRecord>,
    /// Level at which descent stopped because nothing was selected.
    pub early_stop: Option<usize>,
    pub iterations: Vec<IterationRecord>,
    /// The call that exhausted its retry budget, if any.
    pub failed_call: Option<CallRecord>,
    pub retained_by_rule: Vec<ObjectId>,
    pub outcome: Outcome,
}

impl ReductionTrace {
    fn new() -> Self {
        Self {
            levels: Vec::new(),
            early_stop: None,
            iterations: Vec::new(),
            failed_call: None,
            retained_by_rule: Vec::new(),
            outcome: Outcome::Success,
        }
    }

    /// Total oracle requests made, retries included.
    pub fn requests(&self) -> usize {
        let levels: usize = self.levels.iter().map(|l| l.call.responses.len()).sum();
        let iters: usize = self
            .iterations
            .iter()
            .filter_map(|i| i.call.as_ref())
            .map(|c| c.responses.len())
            .sum();
        levels + iters + self.failed_call.as_ref().map_or(0, |c| c.responses.len())
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("trace serializes");
        out.push(b'\n');
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedState {
    /// Oracle-selected objects plus the agent and the rooms they occupy.
    pub kept: BTreeSet<ObjectId>,
    pub taxonomy_selected: BTreeSet<ObjectId>,
    pub relational_selected: BTreeSet<ObjectId>,
    pub graph: StateGraph,
}

impl ReducedState {
    /// Objects chosen by the oracle, excluding anything retained by rule.
    pub fn selected(&self) -> BTreeSet<ObjectId> {
        self.taxonomy_selected
            .union(&self.relational_selected)
            .filter(|id| self.graph.object(**id).is_some_and(|o| !o.is_room() && !o.is_agent()))
            .copied()
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("{source}")]
    Oracle { source: OracleError, trace: Box<ReductionTrace> },
    #[error("the oracle selected no objects")]
    EmptySelection { trace: Box<ReductionTrace> },
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    World(#[from] WorldError),
}

impl ReductionError {
    pub fn trace(&self) -> Option<&ReductionTrace> {
        match self {
            ReductionError::Oracle { trace, .. } | ReductionError::EmptySelection { trace } => {
                Some(trace)
            }
            _ => None,
        }
    }

    pub fn is_format_error(&self) -> bool {
        matches!(self, ReductionError::Oracle { source: OracleError::Format(_), .. })
    }
}

fn note_failure(trace: &mut ReductionTrace, err: &OracleError) {
    if let OracleError::Format(rec) = err {
        trace.failed_call = Some((**rec).clone());
        trace.outcome = Outcome::FormatError;
    }
}

fn check_coverage(taxonomy: &TaxonomyGraph, world: &StateGraph) -> Result<(), TaxonomyError> {
    for o in world.objects() {
        if !o.is_room() && !o.is_agent() && !taxonomy.is_class(o.class.as_str()) {
            return Err(TaxonomyError::MissingClass(o.class.to_string()));
        }
    }
    Ok(())
}

/// Taxonomy descent from the root to the class level, returning every
/// instance of the classes kept at the bottom.
pub fn select_taxonomy(
    taxonomy: &TaxonomyGraph,
    world: &StateGraph,
    goal: &GoalSpec,
    oracle: &dyn Oracle,
    retries: u32,
    trace: &mut ReductionTrace,
) -> Result<BTreeSet<ObjectId>, OracleError> {
    let goal_text = goal.describe(Some(world));
    let mut selected = vec![ROOT.to_string()];
    for level in 1..=taxonomy.depth() {
        let candidates = taxonomy.psi(level - 1, &selected).expect("selection comes from psi");
        let query = TaxonomyQuery {
            level,
            class_level: level == taxonomy.depth(),
            candidates: candidates.clone(),
            goal_text: goal_text.clone(),
        };
        let (reply, call) = query_taxonomy(oracle, &query, retries).inspect_err(|e| note_failure(trace, e))?;
        let offered: BTreeSet<&String> = candidates.iter().collect();
        let mut dropped: Vec<String> = reply.iter().filter(|n| !offered.contains(n)).cloned().collect();
        dropped.dedup();
        if !dropped.is_empty() {
            log::warn!("level {level}: oracle named unknown candidates {dropped:?}; ignoring them");
        }
        let picked: BTreeSet<&String> = reply.iter().collect();
        selected = candidates.iter().filter(|c| picked.contains(c)).cloned().collect();
        trace.levels.push(LevelRecord {
            selection: LevelSelection { level, candidates, selected: selected.clone() },
            dropped,
            call,
        });
        if selected.is_empty() {
            trace.early_stop = Some(level);
            return Ok(BTreeSet::new());
        }
    }
    Ok(instances_of_classes(world, &selected))
}

/// Frontier expansion from `seed`. Returns only the objects added.
pub fn select_relational(
    world: &StateGraph,
    seed: &BTreeSet<ObjectId>,
    goal: &GoalSpec,
    oracle: &dyn Oracle,
    max_iters: usize,
    retries: u32,
    trace: &mut ReductionTrace,
) -> Result<BTreeSet<ObjectId>, OracleError> {
    let goal_text = goal.describe(Some(world));
    let mut acc = seed.clone();
    for iteration in 0..max_iters {
        let frontier = phi(world, &acc);
        if frontier.objects.is_empty() {
            trace.iterations.push(IterationRecord {
                iteration,
                frontier_size: 0,
                picked: vec![],
                dropped: vec![],
                retries: 0,
                call: None,
            });
            break;
        }
        let mut frontier_lines = Vec::with_capacity(frontier.edges.len());
        for f in &frontier.objects {
            for e in frontier.edges.iter().filter(|e| e.touches(*f)) {
                frontier_lines.push(relation_sentence(world, e));
            }
        }
        let query = RelationalQuery {
            selected_summary: acc.iter().map(|id| object_label(world, *id)).collect(),
            frontier_lines,
            frontier: frontier.objects.iter().copied().collect(),
            goal_text: goal_text.clone(),
        };
        let (reply, call) =
            query_relational(oracle, &query, retries).inspect_err(|e| note_failure(trace, e))?;
        let (mut picked, mut dropped): (Vec<_>, Vec<_>) =
            reply.into_iter().partition(|id| frontier.objects.contains(id));
        picked.sort();
        picked.dedup();
        dropped.sort();
        dropped.dedup();
        if !dropped.is_empty() {
            log::warn!("iteration {iteration}: oracle named ids outside the frontier {dropped:?}");
        }
        trace.iterations.push(IterationRecord {
            iteration,
            frontier_size: frontier.objects.len(),
            picked: picked.clone(),
            dropped,
            retries: call.retries,
            call: Some(call),
        });
        if picked.is_empty() {
            break;
        }
        acc.extend(picked);
    }
    Ok(acc.difference(seed).copied().collect())
}

/// Full pipeline. The trace outcome is `success` unless an oracle reply
/// failed to parse; use [`classify`] to compare against known necessities.
pub fn reduce(
    world: &StateGraph,
    taxonomy: &TaxonomyGraph,
    goal: &GoalSpec,
    oracle: &dyn Oracle,
    config: &ReduceConfig,
) -> Result<(ReducedState, ReductionTrace), ReductionError> {
    check_coverage(taxonomy, world)?;
    let mut trace = ReductionTrace::new();
    let wrap = |source: OracleError, trace: ReductionTrace| ReductionError::Oracle {
        source,
        trace: Box::new(trace),
    };

    let tax = match select_taxonomy(taxonomy, world, goal, oracle, config.retries, &mut trace) {
        Ok(t) => t,
        Err(e) => return Err(wrap(e, trace)),
    };
    if tax.is_empty() {
        return Err(ReductionError::EmptySelection { trace: Box::new(trace) });
    }
    let rel = match select_relational(world, &tax, goal, oracle, config.max_iters, config.retries, &mut trace) {
        Ok(r) => r,
        Err(e) => return Err(wrap(e, trace)),
    };

    let mut kept: BTreeSet<ObjectId> = tax.union(&rel).copied().collect();
    let mut by_rule = BTreeSet::new();
    if let Some(agent) = world.agent() {
        by_rule.insert(agent);
    }
    for id in kept.iter().chain(by_rule.clone().iter()) {
        if let Some(room) = world.room_of(*id) {
            by_rule.insert(room);
        }
    }
    let by_rule: BTreeSet<ObjectId> = by_rule.difference(&kept).copied().collect();
    kept.extend(by_rule.iter().copied());
    trace.retained_by_rule = by_rule.into_iter().collect();

    let graph = world.induced_subgraph(&kept)?;
    Ok((ReducedState { kept, taxonomy_selected: tax, relational_selected: rel, graph }, trace))
}

/// Reduction outcome against a known set of necessary objects. Transport and
/// configuration errors are not reduction outcomes and yield `None`.
pub fn classify(
    result: &Result<(ReducedState, ReductionTrace), ReductionError>,
    necessary: &BTreeSet<ObjectId>,
) -> Option<Outcome> {
    match result {
        Ok((state, _)) if necessary.is_subset(&state.kept) => Some(Outcome::Success),
        Ok(_) => Some(Outcome::ObjectsMissing),
        Err(e) if e.is_format_error() => Some(Outcome::FormatError),
        Err(ReductionError::EmptySelection { .. }) if necessary.is_empty() => Some(Outcome::Success),
        Err(ReductionError::EmptySelection { .. }) => Some(Outcome::ObjectsMissing),
        Err(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{GroundTruthOracle, KeepAllOracle, NoisyOracle, ScriptedOracle};
    use crate::taxonomy::{build_taxonomy, TaxonomySpec};
    use crate::world::fixtures::{edge, node};
    use crate::world::{Capability as C, Flag, ObjectNode, RelationKind as K};

    fn ids(v: &[u32]) -> BTreeSet<ObjectId> {
        v.iter().map(|i| ObjectId(*i)).collect()
    }

    // kitchen 2 with fridge 70 holding container 40 holding banana 34;
    // a second banana 35 on the table 3; lamp 5 on the table; bedroom 8 with a bed.
    fn world() -> StateGraph {
        let closed = |mut n: ObjectNode| {
            n.attributes.set(Flag::Open, false);
            n
        };
        StateGraph::new(
            vec![
                node(1, "character", &[C::Agent]),
                node(2, "kitchen", &[C::Room]),
                node(8, "bedroom", &[C::Room]),
                node(3, "kitchen_table", &[C::Surface]),
                node(5, "table_lamp", &[C::Switchable]),
                closed(node(70, "fridge", &[C::Openable, C::Container])),
                closed(node(40, "plastic_container", &[C::Openable, C::Container, C::Grabbable])),
                node(34, "banana", &[C::Grabbable]),
                node(35, "banana", &[C::Grabbable]),
                node(9, "bed", &[C::Surface]),
            ],
            vec![
                edge(1, 2, K::InRoom),
                edge(3, 2, K::InRoom),
                edge(5, 2, K::InRoom),
                edge(70, 2, K::InRoom),
                edge(40, 2, K::InRoom),
                edge(34, 2, K::InRoom),
                edge(35, 2, K::InRoom),
                edge(9, 8, K::InRoom),
                edge(5, 3, K::On),
                edge(35, 3, K::On),
                edge(40, 70, K::Inside),
                edge(34, 40, K::Inside),
            ],
        )
        .unwrap()
    }

    fn tax() -> TaxonomyGraph {
        build_taxonomy(&TaxonomySpec::household(), &BTreeSet::new()).unwrap()
    }

    fn goal() -> GoalSpec {
        "on(banana#34,kitchen_table#3)=true".parse().unwrap()
    }

    #[test]
    fn phi_examples() {
        let w = world();
        let f = phi(&w, &ids(&[34]));
        assert_eq!(f.objects, ids(&[40]));
        assert_eq!(f.edges.len(), 1);
        // IN_ROOM edges never enter the frontier
        let f = phi(&w, &ids(&[40]));
        assert_eq!(f.objects, ids(&[34, 70]));
        let f = phi(&w, &ids(&[70]));
        assert_eq!(f.objects, ids(&[40]));
        assert!(phi(&w, &ids(&[9])).objects.is_empty());
    }

    #[test]
    fn taxonomy_descent_with_ground_truth() {
        let w = world();
        let t = tax();
        let o = GroundTruthOracle::new(&t, &w, &ids(&[34, 3]));
        let mut trace = ReductionTrace::new();
        let sel = select_taxonomy(&t, &w, &goal(), &o, 3, &mut trace).unwrap();
        // every banana and every kitchen table
        assert_eq!(sel, ids(&[3, 34, 35]));
        assert_eq!(trace.levels.len(), 3);
        assert_eq!(trace.levels[0].selection.selected, vec!["food", "furniture"]);
        assert_eq!(trace.levels[1].selection.selected, vec!["fruit", "tables"]);
        assert_eq!(trace.levels[2].selection.selected, vec!["banana", "kitchen_table"]);
    }

    #[test]
    fn empty_first_level_stops_early() {
        let w = world();
        let o = ScriptedOracle::new(["[]"]);
        let mut trace = ReductionTrace::new();
        let sel = select_taxonomy(&tax(), &w, &goal(), &o, 3, &mut trace).unwrap();
        assert!(sel.is_empty());
        assert_eq!(trace.early_stop, Some(1));
        assert_eq!(o.requests(), 1);
    }

    #[test]
    fn hallucinated_names_are_dropped() {
        let w = world();
        let o = ScriptedOracle::new([
            r#"["food","spaceships"]"#,
            r#"["fruit"]"#,
            r#"["banana","unicorn"]"#,
        ]);
        let mut trace = ReductionTrace::new();
        let sel = select_taxonomy(&tax(), &w, &goal(), &o, 3, &mut trace).unwrap();
        assert_eq!(sel, ids(&[34, 35]));
        assert_eq!(trace.levels[0].dropped, vec!["spaceships"]);
        assert_eq!(trace.levels[2].dropped, vec!["unicorn"]);
    }

    #[test]
    fn relational_chain() {
        let w = world();
        let o = KeepAllOracle;
        let mut trace = ReductionTrace::new();
        let rel = select_relational(&w, &ids(&[34, 3]), &goal(), &o, 3, 3, &mut trace).unwrap();
        // iteration 0 adds the container and the lamp/other banana on the table
        assert!(rel.is_superset(&ids(&[40, 70])));

        let o = GroundTruthOracle::new(&tax(), &w, &ids(&[34, 3, 40, 70]));
        let mut trace = ReductionTrace::new();
        let rel = select_relational(&w, &ids(&[34, 3]), &goal(), &o, 3, 3, &mut trace).unwrap();
        assert_eq!(rel, ids(&[40, 70]));
        let picked: Vec<_> = trace.iterations.iter().map(|i| i.picked.clone()).collect();
        assert_eq!(picked, vec![vec![ObjectId(40)], vec![ObjectId(70)], vec![]]);

        let mut trace = ReductionTrace::new();
        let rel = select_relational(&w, &ids(&[34, 3]), &goal(), &o, 1, 3, &mut trace).unwrap();
        assert_eq!(rel, ids(&[40]));

        let mut trace = ReductionTrace::new();
        let rel = select_relational(&w, &ids(&[9]), &goal(), &o, 3, 3, &mut trace).unwrap();
        assert!(rel.is_empty());
        assert_eq!(trace.iterations.len(), 1);
        assert_eq!(trace.iterations[0].frontier_size, 0);
    }

    #[test]
    fn reduce_ground_truth() {
        let w = world();
        let t = tax();
        let truth = ids(&[34, 3, 40, 70]);
        let o = GroundTruthOracle::new(&t, &w, &truth);
        let res = reduce(&w, &t, &goal(), &o, &ReduceConfig::default());
        assert_eq!(classify(&res, &truth), Some(Outcome::Success));
        let (state, trace) = res.unwrap();
        assert_eq!(state.kept, ids(&[1, 2, 3, 34, 35, 40, 70]));
        assert_eq!(state.selected(), ids(&[3, 34, 35, 40, 70]));
        assert_eq!(trace.retained_by_rule, vec![ObjectId(1), ObjectId(2)]);
        assert!(state.graph.validate().is_empty());
        assert_eq!(state.graph, w.induced_subgraph(&state.kept).unwrap());

        // same decisions on the reduced graph keep the same set
        let again = reduce(&state.graph, &t, &goal(), &o, &ReduceConfig::default()).unwrap().0;
        assert_eq!(again.kept, state.kept);
    }

    #[test]
    fn reduce_keep_all_and_drop_all() {
        let w = world();
        let t = tax();
        let (state, _) = reduce(&w, &t, &goal(), &KeepAllOracle, &ReduceConfig::default()).unwrap();
        assert_eq!(state.kept, w.ids());

        let o = NoisyOracle::new(KeepAllOracle, 1, 1.0, 0.0).unwrap();
        let res = reduce(&w, &t, &goal(), &o, &ReduceConfig::default());
        assert!(matches!(res, Err(ReductionError::EmptySelection { .. })));
        assert_eq!(classify(&res, &ids(&[34])), Some(Outcome::ObjectsMissing));
    }

    #[test]
    fn format_error_keeps_partial_trace() {
        let w = world();
        let o = ScriptedOracle::new([r#"["food"]"#, "hmm", "hmm", "hmm", "hmm"]);
        let res = reduce(&w, &tax(), &goal(), &o, &ReduceConfig::default());
        assert_eq!(classify(&res, &ids(&[34])), Some(Outcome::FormatError));
        let err = res.unwrap_err();
        let trace = err.trace().unwrap();
        assert_eq!(trace.levels.len(), 1);
        assert_eq!(trace.outcome, Outcome::FormatError);
        assert_eq!(trace.failed_call.as_ref().unwrap().responses.len(), 4);
        assert_eq!(trace.requests(), 5);
    }

    #[test]
    fn missing_taxonomy_class_rejected() {
        let mut objs: Vec<_> = world().objects().cloned().collect();
        objs.push(node(99, "hoverboard", &[]));
        let mut edges: Vec<_> = world().edges().copied().collect();
        edges.push(edge(99, 2, K::InRoom));
        let w = StateGraph::new(objs, edges).unwrap();
        let res = reduce(&w, &tax(), &goal(), &KeepAllOracle, &ReduceConfig::default());
        assert!(matches!(res, Err(ReductionError::Taxonomy(TaxonomyError::MissingClass(_)))));
    }

    #[test]
    fn trace_serializes() {
        let w = world();
        let t = tax();
        let o = GroundTruthOracle::new(&t, &w, &ids(&[34, 3]));
        let (_, trace) = reduce(&w, &t, &goal(), &o, &ReduceConfig::default()).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&trace.to_json()).unwrap();
        assert_eq!(v["outcome"], "success");
        assert_eq!(v["levels"][0]["level"], 1);
        assert_eq!(v["levels"][0]["call"]["prompt_sha256"].as_str().unwrap().len(), 64);
    }

    mod props {
        use super::*;
        use crate::benchgen::{compose_task, ground_truth_necessary};
        use crate::world::fixtures::walked;
        use proptest::prelude::*;

        fn component(g: &StateGraph, seed: &BTreeSet<ObjectId>) -> BTreeSet<ObjectId> {
            let mut seen = seed.clone();
            let mut stack: Vec<ObjectId> = seed.iter().copied().collect();
            while let Some(x) = stack.pop() {
                for e in g.edges().filter(|e| e.kind != RelationKind::InRoom && e.touches(x)) {
                    let y = if e.src == x { e.dst } else { e.src };
                    if seen.insert(y) {
                        stack.push(y);
                    }
                }
            }
            seen
        }

        fn taxonomy(g: &StateGraph) -> crate::taxonomy::TaxonomyGraph {
            let registry = g.objects().filter(|o| !o.is_room() && !o.is_agent()).map(|o| o.class.clone()).collect();
            build_taxonomy(&TaxonomySpec::household(), &registry).unwrap()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn phi_grows_to_the_connected_component(seed in 0u64..40, steps in 0usize..20, mask in any::<u64>()) {
                let g = walked(seed, 80, steps);
                let start: BTreeSet<ObjectId> =
                    g.ids().into_iter().enumerate().filter(|(i, _)| mask >> (i % 64) & 1 == 1).map(|(_, id)| id).collect();
                let mut acc = start.clone();
                let mut rounds = 0;
                loop {
                    let f = phi(&g, &acc);
                    prop_assert!(f.objects.is_disjoint(&acc));
                    for e in &f.edges {
                        prop_assert!(acc.contains(&e.src) != acc.contains(&e.dst));
                    }
                    if f.objects.is_empty() {
                        break;
                    }
                    acc.extend(f.objects);
                    rounds += 1;
                    prop_assert!(rounds <= g.len());
                }
                prop_assert_eq!(acc, component(&g, &start));
            }

            #[test]
            fn ground_truth_reduction_keeps_necessary_and_is_idempotent(
                seed in 0u64..6, task in 0u64..10_000, n in 1usize..=5
            ) {
                let g = crate::benchgen::generate_world(&crate::benchgen::WorldSpec::new(seed, 280)).unwrap();
                let Ok((_, goal)) = compose_task(&g, task, n) else { return Ok(()) };
                let truth = ground_truth_necessary(&g, &goal).necessary;
                let t = taxonomy(&g);
                let (first, _) = reduce(&g, &t, &goal, &GroundTruthOracle::new(&t, &g, &truth), &ReduceConfig::default()).unwrap();
                prop_assert!(truth.is_subset(&first.kept));
                let t2 = taxonomy(&first.graph);
                let (second, _) = reduce(&first.graph, &t2, &goal, &GroundTruthOracle::new(&t2, &first.graph, &truth), &ReduceConfig::default()).unwrap();
                prop_assert_eq!(second.kept, first.kept);
            }
        }
    }
}

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{compose_task, generate_world, ground_truth_necessary, BenchError, WorldSpec, MAX_SUBTASKS};
use crate::domain::Domain;
use crate::oracle::{
    FormatFaultOracle, GroundTruthOracle, KeepAllOracle, NoisyOracle, Oracle, OracleConfig, RemoteOracle,
};
use crate::planners::{mcts_plan, policy_plan, replay, Failure, MctsConfig, PlanResult, PolicyConfig};
use crate::reduction::{classify, reduce, Outcome, ReduceConfig};
use crate::taxonomy::{build_taxonomy, TaxonomyGraph, TaxonomySpec};
use crate::world::{ObjectId, StateGraph};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleChoice {
    GroundTruth,
    KeepAll,
    Noisy { p_drop: f64, p_add: f64 },
    Remote(OracleConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerKind {
    /// UCT on the reduced graph.
    Mcts,
    /// UCT on the unreduced world, for comparison.
    MctsFull,
    /// Oracle-driven per-step policy on the reduced graph.
    Policy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchMatrix {
    /// World seeds; one generated world each.
    pub worlds: Vec<u64>,
    pub n_objects: usize,
    pub n_rooms: usize,
    pub subtasks: Vec<usize>,
    pub tasks_per_n: usize,
    pub oracle: OracleChoice,
    /// Share of runs per subtask count whose oracle replies are all malformed.
    pub format_fault_rate: f64,
    pub planners: Vec<PlannerKind>,
    pub mcts: MctsConfig,
    pub policy: PolicyConfig,
    pub reduce: ReduceConfig,
}

impl Default for BenchMatrix {
    fn default() -> Self {
        Self {
            worlds: (0..6).collect(),
            n_objects: 280,
            n_rooms: 6,
            subtasks: (1..=MAX_SUBTASKS).collect(),
            tasks_per_n: 30,
            oracle: OracleChoice::GroundTruth,
            format_fault_rate: 0.0,
            planners: vec![PlannerKind::Mcts],
            mcts: MctsConfig::default(),
            policy: PolicyConfig::default(),
            reduce: ReduceConfig::default(),
        }
    }
}

impl BenchMatrix {
    pub fn check(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::InvalidSpec(m.to_string()));
        if self.worlds.is_empty() || self.subtasks.is_empty() || self.tasks_per_n == 0 {
            return bad("matrix needs at least one world, subtask count and task");
        }
        if let Some(n) = self.subtasks.iter().find(|n| !(1..=MAX_SUBTASKS).contains(*n)) {
            return bad(&format!("subtask count {n} outside 1..={MAX_SUBTASKS}"));
        }
        if !(0.0..=1.0).contains(&self.format_fault_rate) {
            return bad("format_fault_rate must be in [0, 1]");
        }
        match &self.oracle {
            OracleChoice::Noisy { p_drop, p_add } if !(0.0..=1.0).contains(p_drop) || !(0.0..=1.0).contains(p_add) => {
                return bad("noise probabilities must be in [0, 1]")
            }
            OracleChoice::Remote(cfg) => cfg.check().map_err(|e| BenchError::InvalidSpec(e.to_string()))?,
            _ => {}
        }
        if self.planners.contains(&PlannerKind::Policy) && !matches!(self.oracle, OracleChoice::Remote(_)) {
            return bad("the policy planner needs a remote oracle");
        }
        self.mcts.check().map_err(BenchError::InvalidSpec)?;
        if self.policy.max_len == 0 {
            return bad("policy max_len must be positive");
        }
        for seed in &self.worlds {
            WorldSpec { seed: *seed, n_rooms: self.n_rooms, n_objects: self.n_objects, ..WorldSpec::default() }
                .check()?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellOutcome {
    Success,
    ObjectsMissing,
    FormatError,
    TransportError,
    /// The task could not be composed or the run could not start.
    Error,
}

impl From<Outcome> for CellOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Success => CellOutcome::Success,
            Outcome::ObjectsMissing => CellOutcome::ObjectsMissing,
            Outcome::FormatError => CellOutcome::FormatError,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerRow {
    pub planner: PlannerKind,
    pub success: bool,
    pub steps: usize,
    pub raw_steps: usize,
    pub iterations_used: u64,
    pub wall_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<Failure>,
    /// Replay of the plan on the graph it was planned for, and on the full world.
    pub replay_planned: bool,
    pub replay_full: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub world_seed: u64,
    pub n: usize,
    pub task_index: usize,
    pub task_seed: u64,
    pub goal: String,
    /// |O|, |O_g| and |Ō|; the last only when reduction returned a graph.
    pub objects: usize,
    pub necessary: usize,
    pub selected: Option<usize>,
    pub retained_by_rule: usize,
    pub outcome: CellOutcome,
    pub format_fault: bool,
    pub oracle_requests: usize,
    pub reduce_ms: u64,
    pub planners: Vec<PlannerRow>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl Stat {
    pub fn of(xs: impl IntoIterator<Item = f64>) -> Self {
        let xs: Vec<f64> = xs.into_iter().collect();
        if xs.is_empty() {
            return Self::default();
        }
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt(), count: xs.len() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerAggregate {
    /// Over runs whose reduction succeeded.
    pub planning_success: f64,
    /// Over all runs; a failed reduction counts as a failed plan.
    pub overall_success: f64,
    pub steps: Stat,
    pub raw_steps: Stat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub runs: usize,
    pub objects: Stat,
    pub necessary: Stat,
    /// Over successful reductions only.
    pub selected: Stat,
    pub rates: BTreeMap<CellOutcome, f64>,
    pub planners: BTreeMap<PlannerKind, PlannerAggregate>,
}

impl Aggregate {
    pub fn rate(&self, outcome: CellOutcome) -> f64 {
        self.rates.get(&outcome).copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub per_n: Vec<Aggregate>,
    /// Per world seed and subtask count.
    pub per_world: Vec<(u64, Aggregate)>,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summary: BenchSummary,
}

/// Seed of task `i` for subtask count `n` in world `w`.
pub fn task_seed(world_seed: u64, n: usize, i: usize) -> u64 {
    world_seed.wrapping_mul(1_000_003) ^ ((n as u64) << 32) ^ i as u64
}

struct World {
    seed: u64,
    graph: StateGraph,
    taxonomy: TaxonomyGraph,
}

fn planner_row(kind: PlannerKind, r: &PlanResult, planned: &StateGraph, full: &StateGraph, goal: &crate::world::GoalSpec) -> PlannerRow {
    PlannerRow {
        planner: kind,
        success: r.success,
        steps: r.steps,
        raw_steps: r.raw_steps,
        iterations_used: r.iterations_used,
        wall_ms: r.wall_ms,
        failure: r.failure,
        replay_planned: r.success && replay(planned, &r.plan, goal),
        replay_full: r.success && replay(full, &r.plan, goal),
    }
}

fn run_cell(m: &BenchMatrix, world: &World, n: usize, i: usize, k: u64) -> BenchRow {
    let seed = task_seed(world.seed, n, i);
    let mut row = BenchRow {
        world_seed: world.seed,
        n,
        task_index: i,
        task_seed: seed,
        goal: String::new(),
        objects: world.graph.len(),
        necessary: 0,
        selected: None,
        retained_by_rule: 0,
        outcome: CellOutcome::Error,
        format_fault: false,
        oracle_requests: 0,
        reduce_ms: 0,
        planners: Vec::new(),
        error: None,
    };
    let (_, goal) = match compose_task(&world.graph, seed, n) {
        Ok(t) => t,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.goal = goal.to_string();
    let truth: BTreeSet<ObjectId> = ground_truth_necessary(&world.graph, &goal).necessary;
    row.necessary = truth.len();

    let base: Box<dyn Oracle> = match &m.oracle {
        OracleChoice::GroundTruth => Box::new(GroundTruthOracle::new(&world.taxonomy, &world.graph, &truth)),
        OracleChoice::KeepAll => Box::new(KeepAllOracle),
        OracleChoice::Noisy { p_drop, p_add } => {
            let gt = GroundTruthOracle::new(&world.taxonomy, &world.graph, &truth);
            match NoisyOracle::new(gt, seed, *p_drop, *p_add) {
                Ok(o) => Box::new(o),
                Err(e) => {
                    row.error = Some(e.to_string());
                    return row;
                }
            }
        }
        OracleChoice::Remote(cfg) => match RemoteOracle::new(cfg.clone()) {
            Ok(o) => Box::new(o),
            Err(e) => {
                row.error = Some(e.to_string());
                return row;
            }
        },
    };
    let oracle = FormatFaultOracle::for_run(base, m.format_fault_rate, k);
    row.format_fault = oracle.is_broken();

    let start = Instant::now();
    let result = reduce(&world.graph, &world.taxonomy, &goal, &oracle, &m.reduce);
    row.reduce_ms = start.elapsed().as_millis() as u64;
    row.outcome = match classify(&result, &truth) {
        Some(o) => o.into(),
        None => CellOutcome::TransportError,
    };
    match &result {
        Ok((state, trace)) => {
            row.selected = Some(state.selected().len());
            row.retained_by_rule = trace.retained_by_rule.len();
            row.oracle_requests = trace.requests();
        }
        Err(e) => {
            row.oracle_requests = e.trace().map_or(0, |t| t.requests());
            if row.outcome == CellOutcome::TransportError {
                row.error = Some(e.to_string());
            }
        }
    }

    let domain = Domain::household();
    let mcts_cfg = MctsConfig { seed, ..m.mcts };
    for kind in &m.planners {
        let planned = match (kind, &result) {
            (PlannerKind::MctsFull, _) => &world.graph,
            (_, Ok((state, _))) => &state.graph,
            _ => continue,
        };
        let r = match kind {
            PlannerKind::Mcts | PlannerKind::MctsFull => mcts_plan(planned, &goal, &domain, &mcts_cfg),
            PlannerKind::Policy => match policy_plan(planned, &goal, &domain, &oracle, &m.policy) {
                Ok(r) => r,
                Err(e) => {
                    row.error = Some(format!("policy: {e}"));
                    continue;
                }
            },
        };
        row.planners.push(planner_row(*kind, &r, planned, &world.graph, &goal));
    }
    row
}

fn aggregate(n: usize, rows: &[&BenchRow], planners: &[PlannerKind]) -> Aggregate {
    let runs = rows.len();
    let share = |count: usize| if runs == 0 { 0.0 } else { count as f64 / runs as f64 };
    let ok: Vec<&&BenchRow> = rows.iter().filter(|r| r.outcome == CellOutcome::Success).collect();
    let mut rates = BTreeMap::new();
    for o in [
        CellOutcome::Success,
        CellOutcome::ObjectsMissing,
        CellOutcome::FormatError,
        CellOutcome::TransportError,
        CellOutcome::Error,
    ] {
        rates.insert(o, share(rows.iter().filter(|r| r.outcome == o).count()));
    }
    let mut per_planner = BTreeMap::new();
    for kind in planners {
        let runs_of = |rs: &[&&BenchRow]| -> Vec<PlannerRow> {
            rs.iter().filter_map(|r| r.planners.iter().find(|p| p.planner == *kind)).cloned().collect()
        };
        let base: Vec<&&BenchRow> = if *kind == PlannerKind::MctsFull { rows.iter().collect() } else { ok.clone() };
        let done = runs_of(&base);
        let wins: Vec<&PlannerRow> = done.iter().filter(|p| p.success).collect();
        let overall = rows
            .iter()
            .filter(|r| r.planners.iter().any(|p| p.planner == *kind && p.success))
            .filter(|r| *kind == PlannerKind::MctsFull || r.outcome == CellOutcome::Success)
            .count();
        per_planner.insert(
            *kind,
            PlannerAggregate {
                planning_success: if base.is_empty() { 0.0 } else { wins.len() as f64 / base.len() as f64 },
                overall_success: share(overall),
                steps: Stat::of(wins.iter().map(|p| p.steps as f64)),
                raw_steps: Stat::of(wins.iter().map(|p| p.raw_steps as f64)),
            },
        );
    }
    Aggregate {
        n,
        runs,
        objects: Stat::of(rows.iter().map(|r| r.objects as f64)),
        necessary: Stat::of(rows.iter().map(|r| r.necessary as f64)),
        selected: Stat::of(ok.iter().filter_map(|r| r.selected.map(|s| s as f64))),
        rates,
        planners: per_planner,
    }
}

/// Aggregates rows per subtask count (pooled over worlds) and per world.
pub fn summarize(rows: &[BenchRow], planners: &[PlannerKind], wall_ms: u64) -> BenchSummary {
    let ns: BTreeSet<usize> = rows.iter().map(|r| r.n).collect();
    let worlds: BTreeSet<u64> = rows.iter().map(|r| r.world_seed).collect();
    let per_n = ns
        .iter()
        .map(|n| aggregate(*n, &rows.iter().filter(|r| r.n == *n).collect::<Vec<_>>(), planners))
        .collect();
    let mut per_world = Vec::new();
    for w in &worlds {
        for n in &ns {
            let sel: Vec<&BenchRow> = rows.iter().filter(|r| r.world_seed == *w && r.n == *n).collect();
            per_world.push((*w, aggregate(*n, &sel, planners)));
        }
    }
    BenchSummary { per_n, per_world, wall_ms }
}

/// Runs every (world, subtask count, task) cell of the matrix on up to `jobs`
/// threads. Per-task failures are recorded in the rows; only an invalid
/// matrix is an error.
pub fn run_bench(m: &BenchMatrix, taxonomy: &TaxonomySpec, jobs: usize) -> Result<BenchReport, BenchError> {
    m.check()?;
    let start = Instant::now();
    let worlds: Vec<Arc<World>> = m
        .worlds
        .iter()
        .map(|seed| {
            let graph = generate_world(&WorldSpec {
                seed: *seed,
                n_rooms: m.n_rooms,
                n_objects: m.n_objects,
                ..WorldSpec::default()
            })?;
            let registry = graph.objects().filter(|o| !o.is_room() && !o.is_agent()).map(|o| o.class.clone()).collect();
            let taxonomy = build_taxonomy(taxonomy, &registry).map_err(|e| BenchError::InvalidSpec(e.to_string()))?;
            Ok(Arc::new(World { seed: *seed, graph, taxonomy }))
        })
        .collect::<Result<_, BenchError>>()?;

    // k numbers the runs of one subtask count, for the fault schedule
    let mut cells = Vec::new();
    for &n in &m.subtasks {
        let mut k = 0u64;
        for w in &worlds {
            for i in 0..m.tasks_per_n {
                cells.push((w.clone(), n, i, k));
                k += 1;
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| BenchError::InvalidSpec(e.to_string()))?;
    let mut rows: Vec<BenchRow> =
        pool.install(|| cells.par_iter().map(|(w, n, i, k)| run_cell(m, w, *n, *i, *k)).collect());
    rows.sort_by_key(|r| (r.world_seed, r.n, r.task_index));
    let wall_ms = start.elapsed().as_millis() as u64;
    let summary = summarize(&rows, &m.planners, wall_ms);
    Ok(BenchReport { rows, summary })
}

impl BenchReport {
    pub fn to_jsonl(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for r in &self.rows {
            out.extend(serde_json::to_vec(r).expect("row serializes"));
            out.push(b'\n');
        }
        out
    }
}

impl BenchSummary {
    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("summary serializes");
        out.push(b'\n');
        out
    }

    /// Aligned text tables: object counts, reduction outcomes and planner
    /// results per subtask count.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let ms = |st: &Stat| format!("{:.2} ± {:.2}", st.mean, st.std);
        let _ = writeln!(s, "Selected objects (successful reductions)");
        let _ = writeln!(s, "{:>2}  {:>16}  {:>14}  {:>14}", "N", "|O|", "|O_g|", "|Ō|");
        for a in &self.per_n {
            let _ = writeln!(s, "{:>2}  {:>16}  {:>14}  {:>14}", a.n, ms(&a.objects), ms(&a.necessary), ms(&a.selected));
        }
        let _ = writeln!(s, "\nReduction outcomes");
        let _ = writeln!(
            s,
            "{:>2}  {:>5}  {:>8}  {:>15}  {:>12}  {:>9}",
            "N", "runs", "success", "objects_missing", "format_error", "transport"
        );
        for a in &self.per_n {
            let _ = writeln!(
                s,
                "{:>2}  {:>5}  {:>8.3}  {:>15.3}  {:>12.3}  {:>9.3}",
                a.n,
                a.runs,
                a.rate(CellOutcome::Success),
                a.rate(CellOutcome::ObjectsMissing),
                a.rate(CellOutcome::FormatError),
                a.rate(CellOutcome::TransportError),
            );
        }
        let kinds: BTreeSet<PlannerKind> = self.per_n.iter().flat_map(|a| a.planners.keys().copied()).collect();
        if !kinds.is_empty() {
            let _ = writeln!(s, "\nPlanning");
            let mut header = format!("{:>2}", "N");
            for k in &kinds {
                let name = serde_json::to_value(k).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
                let _ = write!(header, "  {:>9} {:>8} {:>7}", name, "overall", "steps");
            }
            let _ = writeln!(s, "{header}");
            for a in &self.per_n {
                let mut line = format!("{:>2}", a.n);
                for k in &kinds {
                    match a.planners.get(k) {
                        Some(p) => {
                            let _ = write!(line, "  {:>9.3} {:>8.3} {:>7.2}", p.planning_success, p.overall_success, p.steps.mean);
                        }
                        None => {
                            let _ = write!(line, "  {:>9} {:>8} {:>7}", "-", "-", "-");
                        }
                    }
                }
                let _ = writeln!(s, "{line}");
            }
        }
        let _ = writeln!(s, "\nwall time {:.1} s", self.wall_ms as f64 / 1000.0);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BenchMatrix {
        BenchMatrix {
            worlds: vec![0, 1],
            n_objects: 120,
            subtasks: vec![1, 2],
            tasks_per_n: 4,
            mcts: MctsConfig { budget: 3000, ..MctsConfig::default() },
            ..BenchMatrix::default()
        }
    }

    #[test]
    fn ground_truth_rows_are_successes_with_sound_plans() {
        let report = run_bench(&small(), &TaxonomySpec::household(), 2).unwrap();
        assert_eq!(report.rows.len(), 16);
        for r in &report.rows {
            assert_eq!(r.outcome, CellOutcome::Success, "{r:?}");
            assert!(r.selected.unwrap() >= r.necessary);
            for p in r.planners.iter().filter(|p| p.success) {
                assert!(p.replay_planned && p.replay_full, "{r:?}");
            }
        }
        assert_eq!(report.summary.per_n.len(), 2);
        assert_eq!(report.summary.per_world.len(), 4);
        assert_eq!(report.summary.per_n[0].rate(CellOutcome::Success), 1.0);
    }

    #[test]
    fn report_is_independent_of_thread_count() {
        let m = BenchMatrix { planners: vec![], ..small() };
        let strip = |mut r: BenchReport| {
            for row in &mut r.rows {
                row.reduce_ms = 0;
            }
            r.rows
        };
        let a = strip(run_bench(&m, &TaxonomySpec::household(), 1).unwrap());
        let b = strip(run_bench(&m, &TaxonomySpec::household(), 4).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn outcome_matches_subset_definition() {
        let m = BenchMatrix {
            oracle: OracleChoice::Noisy { p_drop: 0.3, p_add: 0.0 },
            planners: vec![],
            ..small()
        };
        let report = run_bench(&m, &TaxonomySpec::household(), 2).unwrap();
        assert!(report.rows.iter().any(|r| r.outcome != CellOutcome::Success));
        // re-derive every label from the kept set
        let tax = TaxonomySpec::household();
        for r in &report.rows {
            let world = generate_world(&WorldSpec { seed: r.world_seed, n_objects: m.n_objects, ..WorldSpec::default() }).unwrap();
            let reg = world.objects().filter(|o| !o.is_room() && !o.is_agent()).map(|o| o.class.clone()).collect();
            let taxonomy = build_taxonomy(&tax, &reg).unwrap();
            let goal: crate::world::GoalSpec = r.goal.parse().unwrap();
            let truth = ground_truth_necessary(&world, &goal).necessary;
            let gt = GroundTruthOracle::new(&taxonomy, &world, &truth);
            let oracle = NoisyOracle::new(gt, r.task_seed, 0.3, 0.0).unwrap();
            let expect = match reduce(&world, &taxonomy, &goal, &oracle, &m.reduce) {
                Ok((s, _)) if truth.is_subset(&s.kept) => CellOutcome::Success,
                Ok(_) | Err(crate::reduction::ReductionError::EmptySelection { .. }) => CellOutcome::ObjectsMissing,
                Err(e) => panic!("{e}"),
            };
            assert_eq!(r.outcome, expect);
        }
    }

    #[test]
    fn format_faults_hit_the_configured_share() {
        let m = BenchMatrix { format_fault_rate: 0.25, planners: vec![], ..small() };
        let report = run_bench(&m, &TaxonomySpec::household(), 2).unwrap();
        for a in &report.summary.per_n {
            assert_eq!(a.rate(CellOutcome::FormatError), 0.25);
        }
        assert!(report.rows.iter().all(|r| r.format_fault == (r.outcome == CellOutcome::FormatError)));
    }

    #[test]
    fn bad_matrices_are_rejected() {
        let tax = TaxonomySpec::household();
        for m in [
            BenchMatrix { subtasks: vec![6], ..BenchMatrix::default() },
            BenchMatrix { worlds: vec![], ..BenchMatrix::default() },
            BenchMatrix { format_fault_rate: 1.5, ..BenchMatrix::default() },
            BenchMatrix { planners: vec![PlannerKind::Policy], ..BenchMatrix::default() },
            BenchMatrix { oracle: OracleChoice::Remote(OracleConfig::default()), ..BenchMatrix::default() },
        ] {
            assert!(run_bench(&m, &tax, 1).is_err(), "{m:?}");
        }
    }

    #[test]
    fn stats() {
        let s = Stat::of([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std - 1.118_033_988_749_895).abs() < 1e-12);
        assert_eq!(Stat::of([]).count, 0);
    }

    #[test]
    fn summary_renders_tables() {
        let report = run_bench(&BenchMatrix { planners: vec![PlannerKind::Mcts], ..small() }, &TaxonomySpec::household(), 2).unwrap();
        let t = report.summary.table();
        assert!(t.contains("|O_g|") && t.contains("objects_missing") && t.contains("mcts"), "{t}");
        let jsonl = report.to_jsonl();
        assert_eq!(jsonl.iter().filter(|b| **b == b'\n').count(), 16);
        let back: BenchSummary = serde_json::from_slice(&report.summary.to_json()).unwrap();
        assert_eq!(back, report.summary);
    }
}

//! Synthetic household benchmark: seeded worlds, composed multi-part tasks,
//! necessary-object ground truth and the experiment runner.

mod bench;
mod generate;
pub mod registry;
mod tasks;

use thiserror::Error;

pub use bench::{
    run_bench, summarize, task_seed, Aggregate, BenchMatrix, BenchReport, BenchRow, BenchSummary, CellOutcome,
    OracleChoice, PlannerAggregate, PlannerKind, PlannerRow, Stat,
};
pub use generate::{generate_world, WorldSpec};
pub use tasks::{
    brute_force_necessary, compose_task, ground_truth_necessary, GroundTruth, Subtask, TaskSpec,
    BRUTE_FORCE_MAX_OBJECTS, MAX_SUBTASKS,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchError {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("world cannot host {n} disjoint subtasks (found {found})")]
    Infeasible { n: usize, found: usize },
    #[error("no plan reaches the goal")]
    Unsolvable,
    #[error("world has {0} objects; exhaustive search is limited to {max}", max = BRUTE_FORCE_MAX_OBJECTS)]
    TooLarge(usize),
    #[error("invalid world: {0}")]
    InvalidWorld(String),
}

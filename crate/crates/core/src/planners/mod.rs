//! Planners over the household domain: UCT search and an oracle-driven
//! per-step policy, plus plan replay and trimming.

mod mcts;
mod policy;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::domain::{CompiledGoal, Domain, DomainError, GroundAction, PlanState};
use crate::world::{satisfies, GoalSpec, StateGraph};

pub use mcts::{mcts_plan, mcts_search, MctsConfig};
pub use policy::{policy_plan, render_state, PolicyConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Failure {
    BudgetExhausted,
    FormatError,
    LengthExceeded,
    InvalidInput,
}

/// Planner output. `steps` counts the trimmed plan; `raw_steps` the actions
/// the search actually found before trimming.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub success: bool,
    pub steps: usize,
    pub plan: Vec<GroundAction>,
    pub iterations_used: u64,
    pub wall_ms: u64,
    pub raw_steps: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure: Option<Failure>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub message: Option<String>,
}

impl PlanResult {
    pub(crate) fn failed(failure: Failure, iterations_used: u64, message: Option<String>) -> Self {
        Self {
            success: false,
            steps: 0,
            plan: Vec::new(),
            iterations_used,
            wall_ms: 0,
            raw_steps: 0,
            failure: Some(failure),
            message,
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("plan serializes");
        out.push(b'\n');
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub ok: bool,
    /// Index of the first action that was not applicable.
    pub failed_step: Option<usize>,
    pub goal_satisfied: bool,
    pub message: Option<String>,
}

/// Replays `plan` from `s0` through the transition function.
pub fn replay_report(domain: &Domain, s0: &StateGraph, plan: &[GroundAction], goal: &GoalSpec) -> ReplayReport {
    let fail = |step, message: String| ReplayReport {
        ok: false,
        failed_step: step,
        goal_satisfied: false,
        message: Some(message),
    };
    let mut s = match PlanState::from_graph(s0) {
        Ok(s) => s,
        Err(v) => return fail(None, DomainError::InvalidState(v).to_string()),
    };
    for (i, a) in plan.iter().enumerate() {
        match domain.step(&s, a) {
            Ok(next) => s = next,
            Err(e) => return fail(Some(i), format!("step {i}: {e}")),
        }
    }
    match satisfies(&s.to_graph(), goal) {
        Ok(true) => ReplayReport { ok: true, failed_step: None, goal_satisfied: true, message: None },
        Ok(false) => ReplayReport {
            ok: false,
            failed_step: None,
            goal_satisfied: false,
            message: Some("goal not satisfied after the last action".into()),
        },
        Err(e) => fail(None, e.to_string()),
    }
}

/// True iff every action is applicable in turn and the final state satisfies
/// the goal.
pub fn replay(s0: &StateGraph, plan: &[GroundAction], goal: &GoalSpec) -> bool {
    replay_report(&Domain::household(), s0, plan, goal).ok
}

type Bound = (usize, Vec<u32>);

fn reaches_goal(domain: &Domain, s0: &PlanState, goal: &CompiledGoal, plan: &[&Bound]) -> bool {
    let mut s = s0.clone();
    for (k, args) in plan {
        match domain.apply_indexed(&s, *k, args) {
            Some(next) => s = next,
            None => return false,
        }
    }
    goal.satisfied(&s)
}

/// Drops revisited-state cycles, then removes action groups, contiguous
/// segments and single actions while the plan still reaches the goal. The
/// result is 1-minimal: removing any one action breaks it.
pub(crate) fn trim(domain: &Domain, s0: &PlanState, goal: &CompiledGoal, plan: Vec<Bound>) -> Vec<Bound> {
    // cycles: keep the path from the last visit of each state
    let mut plan = plan;
    loop {
        let mut seen: HashMap<PlanState, usize> = HashMap::new();
        let mut s = s0.clone();
        seen.insert(s.clone(), 0);
        let mut cut = None;
        for (i, (k, args)) in plan.iter().enumerate() {
            s = domain.apply_unchecked(&s, *k, args);
            if let Some(&j) = seen.get(&s) {
                cut = Some((j, i + 1));
                break;
            }
            seen.insert(s.clone(), i + 1);
        }
        match cut {
            Some((j, end)) => {
                plan.drain(j..end);
            }
            None => break,
        }
    }

    let try_without = |plan: &[Bound], drop: &dyn Fn(usize) -> bool| -> Option<Vec<Bound>> {
        let kept: Vec<&Bound> = plan.iter().enumerate().filter(|(i, _)| !drop(*i)).map(|(_, b)| b).collect();
        (kept.len() < plan.len() && reaches_goal(domain, s0, goal, &kept))
            .then(|| kept.into_iter().cloned().collect())
    };

    // every action touching one object
    let mut objects: Vec<u32> = plan.iter().flat_map(|(_, a)| a.iter().copied()).collect();
    objects.sort_unstable();
    objects.dedup();
    for o in objects {
        if let Some(p) = try_without(&plan, &|i| plan[i].1.contains(&o)) {
            plan = p;
        }
    }

    // contiguous segments, longest first, then single actions
    let mut changed = true;
    while changed {
        changed = false;
        let n = plan.len();
        'outer: for len in (1..=n.min(16)).rev() {
            for start in 0..=n - len {
                if let Some(p) = try_without(&plan, &|i| i >= start && i < start + len) {
                    plan = p;
                    changed = true;
                    break 'outer;
                }
            }
        }
    }
    plan
}

#[cfg(test)]
mod tests;

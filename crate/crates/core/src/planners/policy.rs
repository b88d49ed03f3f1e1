use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{Failure, PlanResult};
use crate::domain::{CompiledGoal, Domain, GroundAction, PlanState};
use crate::oracle::{
    object_label, query_action, relation_sentence, ActionQuery, Oracle, OracleError, DEFAULT_RETRIES,
};
use crate::world::{GoalSpec, StateGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub max_len: usize,
    pub retries: u32,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self { max_len: 100, retries: DEFAULT_RETRIES }
    }
}

/// Object lines ("fridge (3): closed") and relation sentences for a state.
pub fn render_state(g: &StateGraph) -> (Vec<String>, Vec<String>) {
    let objects = g
        .objects()
        .map(|o| {
            let label = object_label(g, o.id);
            let attrs: Vec<&str> = o
                .attributes
                .iter()
                .filter_map(|(flag, v)| match (flag.name(), v) {
                    ("open", true) => Some("open"),
                    ("open", false) => Some("closed"),
                    ("on", true) => Some("switched on"),
                    ("on", false) => Some("switched off"),
                    ("held", true) => Some("held"),
                    ("clean", true) => Some("clean"),
                    ("clean", false) => Some("dirty"),
                    _ => None,
                })
                .collect();
            if attrs.is_empty() {
                label
            } else {
                format!("{label}: {}", attrs.join(", "))
            }
        })
        .collect();
    let relations = g.edges().map(|e| relation_sentence(g, e)).collect();
    (objects, relations)
}

fn describe_action(g: &StateGraph, a: &GroundAction) -> String {
    let args: Vec<String> = a.args.iter().map(|id| object_label(g, *id)).collect();
    format!("{}({})", a.action, args.join(", "))
}

/// Asks the oracle for one action per step, choosing only among the
/// currently applicable ones. Transport errors abort; unusable replies end
/// the episode with a format failure.
pub fn policy_plan(
    s0: &StateGraph,
    goal: &GoalSpec,
    domain: &Domain,
    oracle: &dyn Oracle,
    cfg: &PolicyConfig,
) -> Result<PlanResult, OracleError> {
    let start = Instant::now();
    let mut state = match PlanState::from_graph(s0) {
        Ok(s) => s,
        Err(v) => {
            return Ok(PlanResult::failed(Failure::InvalidInput, 0, Some(format!("invalid world: {v:?}"))))
        }
    };
    let compiled = CompiledGoal::new(goal, &state);
    let goal_text = goal.describe(Some(s0));
    let mut plan = Vec::new();
    let mut calls = 0u64;
    let finish = |mut r: PlanResult| {
        r.wall_ms = start.elapsed().as_millis() as u64;
        Ok(r)
    };

    while !compiled.satisfied(&state) {
        if plan.len() >= cfg.max_len {
            let mut r = PlanResult::failed(Failure::LengthExceeded, calls, None);
            r.raw_steps = plan.len();
            return finish(r);
        }
        let options = domain.applicable(&state);
        let graph = state.to_graph();
        let (object_lines, relation_lines) = render_state(&graph);
        let grounded: Vec<GroundAction> =
            options.iter().map(|(k, args)| domain.ground(&state, *k, args)).collect();
        let query = ActionQuery {
            goal_text: goal_text.clone(),
            object_lines,
            relation_lines,
            actions: grounded.iter().map(|a| describe_action(&graph, a)).collect(),
        };
        calls += 1;
        let pick = match query_action(oracle, &query, cfg.retries) {
            Ok((i, _)) => i,
            Err(OracleError::Format(rec)) => {
                let mut r = PlanResult::failed(
                    Failure::FormatError,
                    calls,
                    Some(format!("no usable action index after {} request(s)", rec.responses.len())),
                );
                r.raw_steps = plan.len();
                return finish(r);
            }
            Err(e) => return Err(e),
        };
        let (k, args) = &options[pick];
        state = domain.apply_unchecked(&state, *k, args);
        plan.push(grounded[pick].clone());
    }
    finish(PlanResult {
        success: true,
        steps: plan.len(),
        raw_steps: plan.len(),
        plan,
        iterations_used: calls,
        wall_ms: 0,
        failure: None,
        message: None,
    })
}

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{trim, Bound, Failure, PlanResult};
use crate::domain::{CompiledGoal, Domain, PlanState};
use crate::world::{GoalSpec, StateGraph};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MctsConfig {
    pub budget: u64,
    pub max_depth: usize,
    pub exploration: f64,
    pub discount: f64,
    pub seed: u64,
}

impl Default for MctsConfig {
    fn default() -> Self {
        Self { budget: 20_000, max_depth: 60, exploration: 1.41, discount: 1.0, seed: 0 }
    }
}

impl MctsConfig {
    pub fn check(&self) -> Result<(), String> {
        if self.budget == 0 {
            return Err("budget must be positive".into());
        }
        if self.max_depth == 0 {
            return Err("max_depth must be positive".into());
        }
        if self.exploration.is_nan() || self.exploration < 0.0 {
            return Err("exploration constant must be non-negative".into());
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err("discount must be in (0, 1]".into());
        }
        Ok(())
    }
}

struct Node {
    action: Option<Bound>,
    children: Vec<usize>,
    /// Actions not yet expanded; `None` until first visited.
    untried: Option<Vec<Bound>>,
    visits: u32,
    value: f64,
}

impl Node {
    fn new(action: Option<Bound>) -> Self {
        Self { action, children: Vec::new(), untried: None, visits: 0, value: 0.0 }
    }
}

/// Iteration `k` always draws from the same stream, whatever the budget.
fn iteration_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// UCT search returning the raw action sequence of the first simulation that
/// reaches the goal, with the iteration it was found in.
pub fn mcts_search(
    domain: &Domain,
    s0: &PlanState,
    goal: &CompiledGoal,
    cfg: &MctsConfig,
) -> (Option<Vec<Bound>>, u64) {
    if goal.satisfied(s0) {
        return (Some(Vec::new()), 0);
    }
    let mut tree = vec![Node::new(None)];
    for k in 0..cfg.budget {
        let mut rng = iteration_rng(cfg.seed, k);
        let mut state = s0.clone();
        let mut path = vec![0usize];
        let mut actions: Vec<Bound> = Vec::new();

        // selection
        let mut node = 0;
        loop {
            let n = &tree[node];
            let expanded = n.untried.as_ref().is_some_and(|u| u.is_empty());
            if !expanded || n.children.is_empty() {
                break;
            }
            let ln = (n.visits.max(1) as f64).ln();
            let mut best = n.children[0];
            let mut best_score = f64::NEG_INFINITY;
            for &c in &n.children {
                let child = &tree[c];
                let score = if child.visits == 0 {
                    f64::INFINITY
                } else {
                    child.value / child.visits as f64
                        + cfg.exploration * (ln / child.visits as f64).sqrt()
                };
                if score > best_score {
                    best_score = score;
                    best = c;
                }
            }
            let (kk, args) = tree[best].action.clone().expect("non-root node has an action");
            state = domain.apply_unchecked(&state, kk, &args);
            actions.push((kk, args));
            node = best;
            path.push(node);
        }

        // expansion
        if tree[node].untried.is_none() {
            tree[node].untried = Some(domain.applicable(&state));
        }
        let untried = tree[node].untried.as_mut().expect("set above");
        if !untried.is_empty() {
            let pick = rng.gen_range(0..untried.len());
            let (kk, args) = untried.swap_remove(pick);
            state = domain.apply_unchecked(&state, kk, &args);
            actions.push((kk, args.clone()));
            let child = tree.len();
            tree.push(Node::new(Some((kk, args))));
            tree[node].children.push(child);
            path.push(child);
            if goal.satisfied(&state) {
                return (Some(actions), k + 1);
            }
        }

        // rollout
        let mut weight = 1.0;
        for _ in 0..cfg.max_depth {
            let options = domain.applicable(&state);
            if options.is_empty() {
                break;
            }
            let (kk, args) = options[rng.gen_range(0..options.len())].clone();
            state = domain.apply_unchecked(&state, kk, &args);
            actions.push((kk, args));
            weight *= cfg.discount;
            if goal.satisfied(&state) {
                return (Some(actions), k + 1);
            }
        }

        let reward = weight * goal.progress(&state);
        for &n in &path {
            tree[n].visits += 1;
            tree[n].value += reward;
        }
    }
    (None, cfg.budget)
}

/// UCT planning from `s0`. A plan found by simulation is replay-checked and
/// trimmed before it is returned.
pub fn mcts_plan(s0: &StateGraph, goal: &GoalSpec, domain: &Domain, cfg: &MctsConfig) -> PlanResult {
    let start = Instant::now();
    if let Err(e) = cfg.check() {
        return PlanResult::failed(Failure::InvalidInput, 0, Some(e));
    }
    let state = match PlanState::from_graph(s0) {
        Ok(s) => s,
        Err(v) => {
            return PlanResult::failed(Failure::InvalidInput, 0, Some(format!("invalid world: {v:?}")))
        }
    };
    let compiled = CompiledGoal::new(goal, &state);
    let (found, iterations) = mcts_search(domain, &state, &compiled, cfg);
    let mut result = match found {
        Some(raw) => {
            let raw_steps = raw.len();
            let plan = trim(domain, &state, &compiled, raw);
            PlanResult {
                success: true,
                steps: plan.len(),
                plan: plan_actions(domain, &state, &plan),
                iterations_used: iterations,
                wall_ms: 0,
                raw_steps,
                failure: None,
                message: None,
            }
        }
        None => PlanResult::failed(Failure::BudgetExhausted, iterations, None),
    };
    result.wall_ms = start.elapsed().as_millis() as u64;
    result
}

fn plan_actions(domain: &Domain, s0: &PlanState, plan: &[Bound]) -> Vec<crate::domain::GroundAction> {
    plan.iter().map(|(k, args)| domain.ground(s0, *k, args)).collect()
}

use super::*;
use crate::oracle::ScriptedOracle;
use crate::world::fixtures::{edge, kitchen, node};
use crate::world::{Capability as C, Flag, ObjectNode, RelationKind as K};

fn act(name: &str, args: &[u32]) -> GroundAction {
    GroundAction::new(name, args)
}

fn goal(s: &str) -> GoalSpec {
    s.parse().unwrap()
}

fn with_attr(mut n: ObjectNode, flag: Flag, v: bool) -> ObjectNode {
    n.attributes.set(flag, v);
    n
}

/// banana(4) on kitchen_table(5); open fridge(3); open microwave(7) on the
/// table with the agent already near it.
fn table_world(agent_near: bool) -> StateGraph {
    let mut edges = vec![
        edge(1, 2, K::InRoom),
        edge(3, 2, K::InRoom),
        edge(4, 2, K::InRoom),
        edge(5, 2, K::InRoom),
        edge(7, 2, K::InRoom),
        edge(4, 5, K::On),
        edge(7, 5, K::On),
    ];
    if agent_near {
        edges.push(edge(1, 7, K::Near));
        edges.push(edge(1, 5, K::Near));
    }
    StateGraph::new(
        vec![
            node(1, "character", &[C::Agent]),
            node(2, "kitchen", &[C::Room]),
            with_attr(node(3, "fridge", &[C::Openable, C::Container]), Flag::Open, true),
            node(4, "banana", &[C::Grabbable]),
            node(5, "kitchen_table", &[C::Surface]),
            with_attr(node(7, "microwave", &[C::Openable, C::Switchable, C::Container]), Flag::Open, true),
        ],
        edges,
    )
    .unwrap()
}

fn cfg(budget: u64, seed: u64) -> MctsConfig {
    MctsConfig { budget, seed, ..MctsConfig::default() }
}

#[test]
fn one_step_goal() {
    let r = mcts_plan(&table_world(true), &goal("closed(microwave#7)=true"), &Domain::household(), &cfg(1000, 1));
    assert!(r.success);
    assert_eq!(r.plan, vec![act("close", &[7])]);
    assert_eq!(r.steps, 1);
}

#[test]
fn already_satisfied_goal_is_empty_plan() {
    let g = kitchen();
    let r = mcts_plan(&g, &goal("inside(banana#4,fridge#3)=true"), &Domain::household(), &cfg(10, 1));
    assert!(r.success);
    assert!(r.plan.is_empty());
    assert_eq!(r.iterations_used, 0);
    assert!(replay(&g, &[], &goal("inside(banana#4,fridge#3)=true")));
}

#[test]
fn unreachable_goal_exhausts_budget() {
    let r = mcts_plan(&table_world(false), &goal("on(apple,kitchen_table)=true"), &Domain::household(), &cfg(300, 1));
    assert!(!r.success);
    assert_eq!(r.failure, Some(Failure::BudgetExhausted));
    assert_eq!(r.iterations_used, 300);
}

#[test]
fn fridge_to_table_is_sound_and_minimal() {
    let g = kitchen();
    let gl = goal("on(banana#4,kitchen_table#5)=true");
    let r = mcts_plan(&g, &gl, &Domain::household(), &cfg(20_000, 7));
    assert!(r.success, "{r:?}");
    assert!(replay(&g, &r.plan, &gl));
    assert!(r.raw_steps >= r.steps);
    assert_eq!(r.steps, 6);
    for i in 0..r.plan.len() {
        let mut cut = r.plan.clone();
        cut.remove(i);
        assert!(!replay(&g, &cut, &gl), "dropping step {i} still works");
    }
}

#[test]
fn deterministic_for_seed() {
    let g = kitchen();
    let gl = goal("on(banana#4,kitchen_table#5)=true");
    let d = Domain::household();
    let strip = |mut r: PlanResult| {
        r.wall_ms = 0;
        r
    };
    assert_eq!(strip(mcts_plan(&g, &gl, &d, &cfg(5000, 3))), strip(mcts_plan(&g, &gl, &d, &cfg(5000, 3))));
}

#[test]
fn budget_is_monotone() {
    let g = kitchen();
    let gl = goal("on(banana#4,kitchen_table#5)=true");
    let d = Domain::household();
    for seed in 0..5 {
        let r = mcts_plan(&g, &gl, &d, &cfg(20_000, seed));
        assert!(r.success);
        let k = r.iterations_used;
        assert!(mcts_plan(&g, &gl, &d, &cfg(k, seed)).success);
        assert!(mcts_plan(&g, &gl, &d, &cfg(k + 100, seed)).success);
        if k > 1 {
            assert!(!mcts_plan(&g, &gl, &d, &cfg(k - 1, seed)).success);
        }
    }
}

#[test]
fn invalid_config_rejected() {
    let r = mcts_plan(&kitchen(), &goal("open(fridge)=true"), &Domain::household(), &cfg(0, 1));
    assert_eq!(r.failure, Some(Failure::InvalidInput));
}

#[test]
fn trimming_removes_detours() {
    let g = kitchen();
    let gl = goal("open(fridge#3)=true");
    let d = Domain::household();
    let s0 = PlanState::from_graph(&g).unwrap();
    let compiled = CompiledGoal::new(&gl, &s0);
    let raw = [
        act("go_near", &[5]),
        act("go_near", &[3]),
        act("open", &[3]),
        act("close", &[3]),
        act("go_near", &[5]),
        act("go_near", &[3]),
        act("open", &[3]),
    ];
    let mut s = s0.clone();
    let mut bound = Vec::new();
    for a in &raw {
        let b = d.bind(&s, a).unwrap();
        s = d.apply_indexed(&s, b.0, &b.1).unwrap();
        bound.push(b);
    }
    let trimmed = trim(&d, &s0, &compiled, bound);
    let plan: Vec<_> = trimmed.iter().map(|(k, a)| d.ground(&s0, *k, a)).collect();
    assert_eq!(plan, vec![act("go_near", &[3]), act("open", &[3])]);
}

#[test]
fn replay_rejects_broken_plans() {
    let g = kitchen();
    let gl = goal("open(fridge#3)=true");
    assert!(replay(&g, &[act("go_near", &[3]), act("open", &[3])], &gl));
    assert!(!replay(&g, &[act("open", &[3])], &gl));
    assert!(!replay(&g, &[act("go_near", &[3])], &gl));
    let rep = replay_report(&Domain::household(), &g, &[act("go_near", &[3]), act("grab", &[4])], &gl);
    assert_eq!(rep.failed_step, Some(1));
}

/// Index of `a` among the afforded actions of `g`, as the policy prompt
/// enumerates them.
fn index_of(g: &StateGraph, a: &GroundAction) -> usize {
    Domain::household().affordance(g).unwrap().iter().position(|x| x == a).unwrap()
}

#[test]
fn scripted_policy_pick_and_place() {
    let g = table_world(false);
    let d = Domain::household();
    let plan = [
        act("go_near", &[5]),
        act("go_near", &[4]),
        act("grab", &[4]),
        act("go_near", &[3]),
        act("put_inside", &[4, 3]),
    ];
    let mut replies = Vec::new();
    let mut s = g.clone();
    for a in &plan {
        replies.push(format!("[{}]", index_of(&s, a)));
        s = d.apply(&s, a).unwrap();
    }
    let oracle = ScriptedOracle::new(replies);
    let gl = goal("inside(banana#4,fridge#3)=true");
    let r = policy_plan(&g, &gl, &d, &oracle, &PolicyConfig::default()).unwrap();
    assert!(r.success);
    assert_eq!(r.steps, 5);
    assert_eq!(r.plan, plan);
    assert!(replay(&g, &r.plan, &gl));
}

#[test]
fn degenerate_policy_runs_out_of_length() {
    let oracle = ScriptedOracle::new(["[0]"]);
    let cfg = PolicyConfig { max_len: 30, ..PolicyConfig::default() };
    let r = policy_plan(&table_world(false), &goal("inside(banana#4,fridge#3)=true"), &Domain::household(), &oracle, &cfg)
        .unwrap();
    assert_eq!(r.failure, Some(Failure::LengthExceeded));
}

#[test]
fn out_of_range_policy_is_format_error() {
    let oracle = ScriptedOracle::new(["[999]"]);
    let r = policy_plan(&table_world(false), &goal("inside(banana#4,fridge#3)=true"), &Domain::household(), &oracle, &PolicyConfig::default())
        .unwrap();
    assert_eq!(r.failure, Some(Failure::FormatError));
    assert_eq!(oracle.requests(), 4);
}

#[test]
fn state_rendering() {
    let (objects, relations) = render_state(&kitchen());
    assert!(objects.contains(&"fridge (3): closed".to_string()));
    assert!(relations.contains(&"banana (4) is inside the fridge (3)".to_string()));
    assert!(relations.contains(&"character (1) is in the kitchen (2)".to_string()));
}

#[test]
fn plan_json_shape() {
    let r = mcts_plan(&table_world(true), &goal("closed(microwave#7)=true"), &Domain::household(), &cfg(100, 1));
    let v: serde_json::Value = serde_json::from_slice(&r.to_json()).unwrap();
    for key in ["success", "steps", "plan", "iterations_used", "wall_ms"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["plan"][0]["action"], "close");
}

mod props {
    use super::*;
    use crate::benchgen::{compose_task, generate_world, WorldSpec};
    use crate::world::ObjectId;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn mcts_plans_are_sound_deterministic_and_budget_monotone(seed in 0u64..300, task in 0u64..100) {
            let g = generate_world(&WorldSpec::new(seed, 12)).unwrap();
            let Ok((_, gl)) = compose_task(&g, task, 1) else { return Ok(()) };
            let d = Domain::household();
            let cfg = MctsConfig { budget: 3000, seed: task, ..MctsConfig::default() };
            let a = mcts_plan(&g, &gl, &d, &cfg);
            let mut b = mcts_plan(&g, &gl, &d, &cfg);
            b.wall_ms = a.wall_ms;
            prop_assert_eq!(&a, &b);
            if a.success {
                prop_assert!(replay(&g, &a.plan, &gl));
                let more = mcts_plan(&g, &gl, &d, &MctsConfig { budget: 6000, ..cfg });
                prop_assert!(more.success);
            }
        }

        #[test]
        fn policy_only_applies_afforded_actions(seed in 0u64..300, replies in proptest::collection::vec(0u32..40, 1..60)) {
            let g = generate_world(&WorldSpec::new(seed, 10)).unwrap();
            let Ok((_, gl)) = compose_task(&g, seed, 1) else { return Ok(()) };
            let script: Vec<String> = replies.iter().map(|i| format!("[{i}]")).collect();
            let d = Domain::household();
            let cfg = PolicyConfig { max_len: 60, retries: 0 };
            let r = policy_plan(&g, &gl, &d, &ScriptedOracle::new(script), &cfg).unwrap();
            if r.success {
                prop_assert!(replay(&g, &r.plan, &gl));
            }
            prop_assert!(r.success || r.failure.is_some());
            let objects: BTreeSet<ObjectId> = g.ids();
            prop_assert!(r.plan.iter().all(|a| a.args.iter().all(|x| objects.contains(x))));
        }
    }
}

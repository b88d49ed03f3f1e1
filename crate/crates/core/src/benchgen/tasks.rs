use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::registry::{class_def, Role};
use super::BenchError;
use crate::domain::{CompiledGoal, Domain, PlanState};
use crate::world::{
    Capability, Flag, GoalCondition, GoalSpec, ObjectId, ObjectNode, ObjectRef, RelationKind, StateGraph,
};

pub const MAX_SUBTASKS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "template", rename_all = "snake_case")]
pub enum Subtask {
    PutOn { object: ObjectId, target: ObjectId },
    PutInside { object: ObjectId, target: ObjectId },
    Open { object: ObjectId },
    Close { object: ObjectId },
    SwitchOn { object: ObjectId },
    SwitchOff { object: ObjectId },
}

impl Subtask {
    pub fn objects(&self) -> Vec<ObjectId> {
        match *self {
            Subtask::PutOn { object, target } | Subtask::PutInside { object, target } => vec![object, target],
            Subtask::Open { object }
            | Subtask::Close { object }
            | Subtask::SwitchOn { object }
            | Subtask::SwitchOff { object } => vec![object],
        }
    }

    pub fn condition(&self, world: &StateGraph) -> GoalCondition {
        let r = |id: ObjectId| match world.object(id) {
            Some(o) => ObjectRef::labelled(id, o.class.clone()),
            None => ObjectRef::id(id),
        };
        match *self {
            Subtask::PutOn { object, target } => GoalCondition::relation(r(object), r(target), RelationKind::On, true),
            Subtask::PutInside { object, target } => {
                GoalCondition::relation(r(object), r(target), RelationKind::Inside, true)
            }
            Subtask::Open { object } => GoalCondition::attribute(r(object), Flag::Open, true),
            Subtask::Close { object } => GoalCondition::attribute(r(object), Flag::Open, false),
            Subtask::SwitchOn { object } => GoalCondition::attribute(r(object), Flag::On, true),
            Subtask::SwitchOff { object } => GoalCondition::attribute(r(object), Flag::On, false),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub seed: u64,
    pub n: usize,
    pub subtasks: Vec<Subtask>,
}

impl TaskSpec {
    pub fn goal(&self, world: &StateGraph) -> GoalSpec {
        GoalSpec::new(self.subtasks.iter().map(|t| t.condition(world)).collect())
            .expect("subtasks are non-empty and disjoint")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub necessary: BTreeSet<ObjectId>,
}

fn role(o: &ObjectNode) -> Option<Role> {
    class_def(o.class.as_str()).map(|d| d.role)
}

fn task_eligible(o: &ObjectNode) -> bool {
    matches!(role(o), Some(Role::Furniture | Role::Device | Role::Item))
}

fn is_destination(o: &ObjectNode) -> bool {
    matches!(role(o), Some(Role::Furniture | Role::Device))
}

/// Template draw weights: put on, put inside, open, close, switch on, switch off.
const WEIGHTS: [u32; 6] = [3, 3, 1, 1, 1, 1];
/// Templates that move an object; every task leads with one.
const REARRANGE: usize = 2;
const ATTEMPTS: usize = 400;

fn sample(world: &StateGraph, rng: &mut ChaCha8Rng, used: &BTreeSet<ObjectId>, first: bool) -> Option<Subtask> {
    let free = |o: &&ObjectNode| task_eligible(o) && !used.contains(&o.id);
    let weights = if first { &WEIGHTS[..REARRANGE] } else { &WEIGHTS[..] };
    let total: u32 = weights.iter().sum();
    let mut draw = rng.gen_range(0..total);
    let template = weights.iter().position(|w| {
        if draw < *w {
            return true;
        }
        draw -= w;
        false
    })?;
    let pick = |rng: &mut ChaCha8Rng, f: &dyn Fn(&ObjectNode) -> bool| -> Option<ObjectId> {
        let c: Vec<ObjectId> = world.objects().filter(free).filter(|o| f(o)).map(|o| o.id).collect();
        c.choose(rng).copied()
    };
    // open/close/switch targets things standing on or in furniture
    let attr = |o: &ObjectNode, flag| {
        world.placement_parent(o.id)?;
        Some(o.attributes.value(flag))
    };
    Some(match template {
        0 | 1 => {
            let (need, kind) =
                if template == 0 { (Capability::Surface, RelationKind::On) } else { (Capability::Container, RelationKind::Inside) };
            let object = pick(rng, &|o| o.capabilities.has(Capability::Grabbable) && role(o) == Some(Role::Item))?;
            let target = pick(rng, &|o| {
                is_destination(o) && o.capabilities.has(need) && !world.has_edge(object, o.id, kind)
            })?;
            if template == 0 {
                Subtask::PutOn { object, target }
            } else {
                Subtask::PutInside { object, target }
            }
        }
        2 => Subtask::Open { object: pick(rng, &|o| o.capabilities.has(Capability::Openable) && attr(o, Flag::Open) == Some(false))? },
        3 => Subtask::Close { object: pick(rng, &|o| o.capabilities.has(Capability::Openable) && attr(o, Flag::Open) == Some(true))? },
        4 => Subtask::SwitchOn { object: pick(rng, &|o| o.capabilities.has(Capability::Switchable) && attr(o, Flag::On) == Some(false))? },
        _ => Subtask::SwitchOff { object: pick(rng, &|o| o.capabilities.has(Capability::Switchable) && attr(o, Flag::On) == Some(true))? },
    })
}

/// Draws `n` subtasks over disjoint objects, each false in the initial state.
/// The first always moves an object somewhere; the rest may also open, close
/// or switch things.
pub fn compose_task(world: &StateGraph, seed: u64, n: usize) -> Result<(TaskSpec, GoalSpec), BenchError> {
    if !(1..=MAX_SUBTASKS).contains(&n) {
        return Err(BenchError::InvalidSpec(format!("subtask count must be in 1..={MAX_SUBTASKS}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = BTreeSet::new();
    let mut subtasks = Vec::new();
    let mut attempts = 0;
    while subtasks.len() < n {
        attempts += 1;
        if attempts > ATTEMPTS {
            return Err(BenchError::Infeasible { n, found: subtasks.len() });
        }
        let Some(t) = sample(world, &mut rng, &used, subtasks.is_empty()) else { continue };
        let holds = t.condition(world).holds(world).unwrap_or(true);
        if holds || t.objects().iter().any(|id| used.contains(id)) {
            continue;
        }
        used.extend(t.objects());
        subtasks.push(t);
    }
    let task = TaskSpec { seed, n, subtasks };
    let goal = task.goal(world);
    Ok((task, goal))
}

/// Goal objects plus every object they sit on or in, transitively.
pub fn ground_truth_necessary(world: &StateGraph, goal: &GoalSpec) -> GroundTruth {
    let mut necessary = BTreeSet::new();
    for id in goal.referenced_ids() {
        if world.contains(id) {
            necessary.insert(id);
            necessary.extend(world.placement_chain(id));
        }
    }
    GroundTruth { necessary }
}

/// Largest world the exhaustive search accepts.
pub const BRUTE_FORCE_MAX_OBJECTS: usize = 12;
const BRUTE_FORCE_MAX_STATES: usize = 2_000_000;

/// Arguments of a shortest plan found by breadth-first search, without the
/// agent and rooms.
pub fn brute_force_necessary(world: &StateGraph, goal: &GoalSpec) -> Result<BTreeSet<ObjectId>, BenchError> {
    if world.len() > BRUTE_FORCE_MAX_OBJECTS {
        return Err(BenchError::TooLarge(world.len()));
    }
    let domain = Domain::household();
    let s0 = PlanState::from_graph(world).map_err(|v| BenchError::InvalidWorld(format!("{v:?}")))?;
    let compiled = CompiledGoal::new(goal, &s0);
    let mut parent: HashMap<PlanState, Option<(PlanState, usize, Vec<u32>)>> = HashMap::new();
    parent.insert(s0.clone(), None);
    let mut queue = VecDeque::from([s0.clone()]);
    let mut found = None;
    while let Some(s) = queue.pop_front() {
        if compiled.satisfied(&s) {
            found = Some(s);
            break;
        }
        for (k, args) in domain.applicable(&s) {
            let next = domain.apply_unchecked(&s, k, &args);
            if !parent.contains_key(&next) {
                parent.insert(next.clone(), Some((s.clone(), k, args)));
                queue.push_back(next);
            }
        }
        if parent.len() > BRUTE_FORCE_MAX_STATES {
            return Err(BenchError::Unsolvable);
        }
    }
    let mut cur = found.ok_or(BenchError::Unsolvable)?;
    let mut ids = BTreeSet::new();
    while let Some(Some((prev, _, args))) = parent.get(&cur) {
        for i in args {
            ids.insert(s0.id(*i));
        }
        cur = prev.clone();
    }
    ids.retain(|id| world.object(*id).is_some_and(|o| !o.is_room() && !o.is_agent()));
    Ok(ids)
}

//! Household action schemas, the affordance function and the transition
//! function. Schemas are plain data (parameter slots, preconditions, effects)
//! evaluated by a small interpreter over [`PlanState`].

mod state;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use state::{CompiledGoal, PlanState};

use crate::world::{Capabilities, Capability, Flag, ObjectId, RelationKind, StateGraph, Violation};

/// Either the agent or a schema parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Term {
    Agent,
    Param(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precondition {
    AttrIs { param: usize, flag: Flag, value: bool },
    EdgeExists { src: Term, dst: Term, kind: RelationKind, value: bool },
    /// The parameter shares the agent's room.
    InAgentRoom(usize),
    /// The parameter (a room) is not the agent's room.
    NotAgentRoom(usize),
    HandEmpty,
    /// The parameter has no placement parent, or the agent is near that parent.
    Reachable(usize),
    /// If the parameter sits inside an openable container, it is open.
    ParentOpen(usize),
    /// If the parameter is openable, its `open` flag equals `open`.
    IfOpenable { param: usize, open: bool },
    Distinct(usize, usize),
    /// `inner` is neither `outer` nor anywhere on or inside it.
    NotWithin { inner: usize, outer: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Effect {
    SetAttr { param: usize, flag: Flag, value: bool },
    AddEdge { src: Term, dst: Term, kind: RelationKind },
    DelEdge { src: Term, dst: Term, kind: RelationKind },
    /// Removes the parameter's `ON` and `INSIDE` edges.
    Detach(usize),
    /// Removes every `NEAR` edge of the agent.
    ClearNear,
    /// Adds `NEAR` to the parameter and to its immediate placement parent.
    ApproachWithParent(usize),
    /// Moves the agent, what it holds and everything on or inside that, into
    /// the parameter room.
    MoveAgentTo(usize),
}

/// Where candidate bindings for the first parameter come from. Purely an
/// enumeration shortcut; preconditions still decide applicability.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Anchor {
    Rooms,
    AgentRoom,
    Near,
    /// First parameter from the held objects, second from the near list.
    HeldThenNear,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slot {
    pub name: &'static str,
    pub requires: Capabilities,
    pub forbids: Capabilities,
}

impl Slot {
    fn object(name: &'static str, requires: &[Capability]) -> Self {
        Slot {
            name,
            requires: Capabilities::of(requires),
            forbids: Capabilities::of(&[Capability::Room, Capability::Agent]),
        }
    }

    fn room(name: &'static str) -> Self {
        Slot { name, requires: Capabilities::of(&[Capability::Room]), forbids: Capabilities::default() }
    }

    fn admits(&self, caps: Capabilities) -> bool {
        caps.contains_all(self.requires) && !caps.intersects(self.forbids)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: &'static str,
    pub params: Vec<Slot>,
    pub anchor: Anchor,
    pub preconditions: Vec<Precondition>,
    pub effects: Vec<Effect>,
}

/// A schema bound to concrete objects. Serializes as
/// `{"action": name, "args": [ids]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundAction {
    pub action: String,
    pub args: Vec<ObjectId>,
}

impl GroundAction {
    pub fn new(action: impl Into<String>, args: &[u32]) -> Self {
        Self { action: action.into(), args: args.iter().map(|i| ObjectId(*i)).collect() }
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(|a| a.to_string()).collect();
        write!(f, "{}({})", self.action, args.join(", "))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DomainError {
    #[error("unknown action {0:?}")]
    UnknownAction(String),
    #[error("{action} expects {expected} argument(s)")]
    Arity { action: String, expected: usize },
    #[error("{0} is not in the state")]
    UnknownObject(ObjectId),
    #[error("{0} is not applicable in this state")]
    NotApplicable(GroundAction),
    #[error("state is not valid: {0:?}")]
    InvalidState(Vec<Violation>),
}

use Precondition as P;
use Term::{Agent, Param};

fn near(p: usize) -> Precondition {
    P::EdgeExists { src: Agent, dst: Param(p), kind: RelationKind::Near, value: true }
}

fn flip(name: &'static str, cap: Capability, flag: Flag, to: bool, extra: &[Precondition]) -> ActionSchema {
    let mut preconditions = vec![near(0), P::AttrIs { param: 0, flag, value: !to }];
    preconditions.extend_from_slice(extra);
    ActionSchema {
        name,
        params: vec![Slot::object("obj", &[cap])],
        anchor: Anchor::Near,
        preconditions,
        effects: vec![Effect::SetAttr { param: 0, flag, value: to }],
    }
}

fn put(name: &'static str, cap: Capability, kind: RelationKind) -> ActionSchema {
    let mut preconditions = vec![
        P::EdgeExists { src: Param(0), dst: Agent, kind: RelationKind::HeldBy, value: true },
        near(1),
        P::Distinct(0, 1),
        P::NotWithin { inner: 1, outer: 0 },
    ];
    if kind == RelationKind::Inside {
        preconditions.push(P::IfOpenable { param: 1, open: true });
    }
    ActionSchema {
        name,
        params: vec![Slot::object("obj", &[Capability::Grabbable]), Slot::object("target", &[cap])],
        anchor: Anchor::HeldThenNear,
        preconditions,
        effects: vec![
            Effect::DelEdge { src: Param(0), dst: Agent, kind: RelationKind::HeldBy },
            Effect::SetAttr { param: 0, flag: Flag::Held, value: false },
            Effect::AddEdge { src: Param(0), dst: Param(1), kind },
        ],
    }
}

/// The nine household schemas.
pub fn household_domain() -> Vec<ActionSchema> {
    let held_false = P::AttrIs { param: 0, flag: Flag::Held, value: false };
    let mut schemas = vec![
        ActionSchema {
            name: "walk_to",
            params: vec![Slot::room("room")],
            anchor: Anchor::Rooms,
            preconditions: vec![P::NotAgentRoom(0)],
            effects: vec![Effect::MoveAgentTo(0), Effect::ClearNear],
        },
        ActionSchema {
            name: "go_near",
            params: vec![Slot::object("obj", &[])],
            anchor: Anchor::AgentRoom,
            preconditions: vec![
                P::InAgentRoom(0),
                P::EdgeExists { src: Agent, dst: Param(0), kind: RelationKind::Near, value: false },
                held_false,
                P::Reachable(0),
            ],
            effects: vec![Effect::ClearNear, Effect::ApproachWithParent(0)],
        },
        flip("open", Capability::Openable, Flag::Open, true, &[held_false]),
        flip("close", Capability::Openable, Flag::Open, false, &[]),
        flip("switch_on", Capability::Switchable, Flag::On, true, &[P::IfOpenable { param: 0, open: false }]),
        flip("switch_off", Capability::Switchable, Flag::On, false, &[]),
        ActionSchema {
            name: "grab",
            params: vec![Slot::object("obj", &[Capability::Grabbable])],
            anchor: Anchor::Near,
            preconditions: vec![near(0), P::HandEmpty, P::ParentOpen(0)],
            effects: vec![
                Effect::Detach(0),
                Effect::AddEdge { src: Param(0), dst: Agent, kind: RelationKind::HeldBy },
                Effect::SetAttr { param: 0, flag: Flag::Held, value: true },
            ],
        },
        put("put_on", Capability::Surface, RelationKind::On),
        put("put_inside", Capability::Container, RelationKind::Inside),
    ];
    schemas.sort_by_key(|s| s.name);
    schemas
}

/// A set of schemas plus the interpreter over them.
#[derive(Clone, Debug)]
pub struct Domain {
    schemas: Vec<ActionSchema>,
}

impl Default for Domain {
    fn default() -> Self {
        Self::household()
    }
}

fn term(s: &PlanState, args: &[u32], t: Term) -> u32 {
    match t {
        Term::Agent => s.agent(),
        Term::Param(p) => args[p],
    }
}

fn holds(s: &PlanState, args: &[u32], pre: &Precondition) -> bool {
    match *pre {
        P::AttrIs { param, flag, value } => s.attr(args[param], flag) == value,
        P::EdgeExists { src, dst, kind, value } => {
            s.has_edge(term(s, args, src), term(s, args, dst), kind) == value
        }
        P::InAgentRoom(p) => s.room[args[p] as usize] == s.agent_room(),
        P::NotAgentRoom(p) => args[p] != s.agent_room(),
        P::HandEmpty => s.holding.is_empty(),
        P::Reachable(p) => match s.parent(args[p]) {
            None => true,
            Some((parent, _)) => s.has_edge(s.agent(), parent, RelationKind::Near),
        },
        P::ParentOpen(p) => {
            let c = s.inside[args[p] as usize];
            c == state::NONE || !s.caps(c).has(Capability::Openable) || s.attr(c, Flag::Open)
        }
        P::IfOpenable { param, open } => {
            !s.caps(args[param]).has(Capability::Openable) || s.attr(args[param], Flag::Open) == open
        }
        P::Distinct(a, b) => args[a] != args[b],
        P::NotWithin { inner, outer } => !s.within(args[inner], args[outer]),
    }
}

fn insert_sorted(v: &mut Vec<u32>, x: u32) {
    if let Err(pos) = v.binary_search(&x) {
        v.insert(pos, x);
    }
}

fn remove_sorted(v: &mut Vec<u32>, x: u32) {
    if let Ok(pos) = v.binary_search(&x) {
        v.remove(pos);
    }
}

fn set_edge(s: &mut PlanState, src: u32, dst: u32, kind: RelationKind, present: bool) {
    let slot = |field: &mut Vec<u32>| {
        let cur = &mut field[src as usize];
        if present {
            *cur = dst;
        } else if *cur == dst {
            *cur = state::NONE;
        }
    };
    match kind {
        RelationKind::On => slot(&mut s.on),
        RelationKind::Inside => slot(&mut s.inside),
        RelationKind::InRoom => slot(&mut s.room),
        RelationKind::Near if present => insert_sorted(&mut s.near, dst),
        RelationKind::Near => remove_sorted(&mut s.near, dst),
        RelationKind::HeldBy if present => insert_sorted(&mut s.holding, src),
        RelationKind::HeldBy => remove_sorted(&mut s.holding, src),
    }
}

fn run_effect(s: &mut PlanState, args: &[u32], eff: &Effect) {
    match *eff {
        Effect::SetAttr { param, flag, value } => s.attrs[args[param] as usize].set(flag, value),
        Effect::AddEdge { src, dst, kind } => {
            let (a, b) = (term(s, args, src), term(s, args, dst));
            set_edge(s, a, b, kind, true)
        }
        Effect::DelEdge { src, dst, kind } => {
            let (a, b) = (term(s, args, src), term(s, args, dst));
            set_edge(s, a, b, kind, false)
        }
        Effect::Detach(p) => {
            s.on[args[p] as usize] = state::NONE;
            s.inside[args[p] as usize] = state::NONE;
        }
        Effect::ClearNear => s.near.clear(),
        Effect::ApproachWithParent(p) => {
            let o = args[p];
            insert_sorted(&mut s.near, o);
            if let Some((parent, _)) = s.parent(o) {
                insert_sorted(&mut s.near, parent);
            }
        }
        Effect::MoveAgentTo(p) => {
            let room = args[p];
            let agent = s.agent();
            s.room[agent as usize] = room;
            let carried = s.holding.clone();
            for i in 0..s.len() as u32 {
                if i != agent && !s.is_room(i) && carried.iter().any(|h| s.within(i, *h)) {
                    s.room[i as usize] = room;
                }
            }
        }
    }
}

impl Domain {
    pub fn household() -> Self {
        Self { schemas: household_domain() }
    }

    pub fn schemas(&self) -> &[ActionSchema] {
        &self.schemas
    }

    fn schema(&self, name: &str) -> Option<(usize, &ActionSchema)> {
        self.schemas.iter().enumerate().find(|(_, s)| s.name == name)
    }

    fn admissible(&self, schema: &ActionSchema, s: &PlanState, args: &[u32]) -> bool {
        schema.params.iter().zip(args).all(|(slot, a)| slot.admits(s.caps(*a)))
            && schema.preconditions.iter().all(|p| holds(s, args, p))
    }

    /// Applicable actions as (schema index, argument indices), ordered by
    /// schema name then argument ids.
    pub fn applicable(&self, s: &PlanState) -> Vec<(usize, Vec<u32>)> {
        let mut out = Vec::new();
        let agent_room = s.agent_room();
        for (k, schema) in self.schemas.iter().enumerate() {
            let mut found: Vec<Vec<u32>> = Vec::new();
            let mut try_args = |args: Vec<u32>| {
                if self.admissible(schema, s, &args) {
                    found.push(args);
                }
            };
            match schema.anchor {
                Anchor::Rooms => s.rooms().iter().for_each(|r| try_args(vec![*r])),
                Anchor::AgentRoom => (0..s.len() as u32)
                    .filter(|i| s.room[*i as usize] == agent_room)
                    .for_each(|i| try_args(vec![i])),
                Anchor::Near => s.near.iter().for_each(|i| try_args(vec![*i])),
                Anchor::HeldThenNear => {
                    for h in &s.holding {
                        for n in &s.near {
                            try_args(vec![*h, *n]);
                        }
                    }
                }
            }
            found.sort_by_key(|args| args.iter().map(|a| s.id(*a)).collect::<Vec<_>>());
            out.extend(found.into_iter().map(|a| (k, a)));
        }
        out
    }

    pub fn ground(&self, s: &PlanState, schema: usize, args: &[u32]) -> GroundAction {
        GroundAction {
            action: self.schemas[schema].name.to_string(),
            args: args.iter().map(|a| s.id(*a)).collect(),
        }
    }

    /// Resolves a ground action to schema and argument indices.
    pub fn bind(&self, s: &PlanState, a: &GroundAction) -> Result<(usize, Vec<u32>), DomainError> {
        let (k, schema) =
            self.schema(&a.action).ok_or_else(|| DomainError::UnknownAction(a.action.clone()))?;
        if a.args.len() != schema.params.len() {
            return Err(DomainError::Arity { action: a.action.clone(), expected: schema.params.len() });
        }
        let args = a
            .args
            .iter()
            .map(|id| s.index_of(*id).ok_or(DomainError::UnknownObject(*id)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((k, args))
    }

    pub fn is_applicable(&self, s: &PlanState, schema: usize, args: &[u32]) -> bool {
        self.admissible(&self.schemas[schema], s, args)
    }

    /// Effects in order, without checking preconditions.
    pub fn apply_unchecked(&self, s: &PlanState, schema: usize, args: &[u32]) -> PlanState {
        let mut next = s.clone();
        for eff in &self.schemas[schema].effects {
            run_effect(&mut next, args, eff);
        }
        next
    }

    pub fn apply_indexed(&self, s: &PlanState, schema: usize, args: &[u32]) -> Option<PlanState> {
        self.is_applicable(s, schema, args).then(|| self.apply_unchecked(s, schema, args))
    }

    pub fn affordances(&self, s: &PlanState) -> Vec<GroundAction> {
        self.applicable(s).into_iter().map(|(k, a)| self.ground(s, k, &a)).collect()
    }

    pub fn step(&self, s: &PlanState, a: &GroundAction) -> Result<PlanState, DomainError> {
        let (k, args) = self.bind(s, a)?;
        self.apply_indexed(s, k, &args).ok_or_else(|| DomainError::NotApplicable(a.clone()))
    }

    /// Applicable actions of a graph state.
    pub fn affordance(&self, g: &StateGraph) -> Result<Vec<GroundAction>, DomainError> {
        let s = PlanState::from_graph(g).map_err(DomainError::InvalidState)?;
        Ok(self.affordances(&s))
    }

    /// `f(S, a)`: a new graph with the action's effects applied.
    pub fn apply(&self, g: &StateGraph, a: &GroundAction) -> Result<StateGraph, DomainError> {
        let s = PlanState::from_graph(g).map_err(DomainError::InvalidState)?;
        Ok(self.step(&s, a)?.to_graph())
    }
}

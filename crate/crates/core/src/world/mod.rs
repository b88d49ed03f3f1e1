//! Graph-based world state: objects with a class and attribute flags, joined by
//! typed relation edges.

mod goal;
mod io;
mod validate;

pub use goal::{satisfies, GoalCondition, GoalError, GoalSpec, ObjectRef, Predicate};
pub(crate) use goal::kind_phrase;
pub use io::{load_world, save_world, WorldFileError};
pub use validate::Violation;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Lowercase snake_case class token such as `banana` or `kitchen_table`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectClass(String);

impl ObjectClass {
    pub fn new(name: impl Into<String>) -> Result<Self, WorldError> {
        let name = name.into();
        if is_token(&name) {
            Ok(Self(name))
        } else {
            Err(WorldError::BadClassName(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_token(s: &str) -> bool {
    !s.is_empty()
        && s.starts_with(|c: char| c.is_ascii_lowercase())
        && s.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    Openable,
    Switchable,
    Grabbable,
    Surface,
    Container,
    Room,
    Agent,
}

impl Capability {
    pub const ALL: [Capability; 7] = [
        Capability::Openable,
        Capability::Switchable,
        Capability::Grabbable,
        Capability::Surface,
        Capability::Container,
        Capability::Room,
        Capability::Agent,
    ];

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// Small bitset of [`Capability`] values; serialized as a sorted list of names.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<Capability>", into = "Vec<Capability>")]
pub struct Capabilities(u8);

impl Capabilities {
    pub const NONE: Capabilities = Capabilities(0);

    pub fn of(caps: &[Capability]) -> Self {
        caps.iter().copied().collect()
    }

    pub fn has(self, cap: Capability) -> bool {
        self.0 & cap.bit() != 0
    }

    pub fn contains_all(self, other: Capabilities) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn intersects(self, other: Capabilities) -> bool {
        self.0 & other.0 != 0
    }

    pub fn with(self, cap: Capability) -> Self {
        Self(self.0 | cap.bit())
    }

    pub fn iter(self) -> impl Iterator<Item = Capability> {
        Capability::ALL.into_iter().filter(move |c| self.has(*c))
    }
}

impl FromIterator<Capability> for Capabilities {
    fn from_iter<I: IntoIterator<Item = Capability>>(iter: I) -> Self {
        iter.into_iter().fold(Self::NONE, Capabilities::with)
    }
}

impl From<Vec<Capability>> for Capabilities {
    fn from(v: Vec<Capability>) -> Self {
        v.into_iter().collect()
    }
}

impl From<Capabilities> for Vec<Capability> {
    fn from(c: Capabilities) -> Self {
        c.iter().collect()
    }
}

/// Boolean attribute flags. `Open` doubles as the closed state (`open=false`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    Open,
    On,
    Held,
    Clean,
}

impl Flag {
    pub const ALL: [Flag; 4] = [Flag::Open, Flag::On, Flag::Held, Flag::Clean];

    pub fn name(self) -> &'static str {
        match self {
            Flag::Open => "open",
            Flag::On => "on",
            Flag::Held => "held",
            Flag::Clean => "clean",
        }
    }

    /// Whether an object with `caps` may carry this flag.
    pub fn permitted_by(self, caps: Capabilities) -> bool {
        if caps.has(Capability::Room) || caps.has(Capability::Agent) {
            return false;
        }
        match self {
            Flag::Open => caps.has(Capability::Openable),
            Flag::On => caps.has(Capability::Switchable),
            Flag::Held => caps.has(Capability::Grabbable),
            Flag::Clean => true,
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// Present-flag mask plus value mask. Absent flags read as `false`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct AttributeSet {
    present: u8,
    values: u8,
}

impl AttributeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, flag: Flag) -> Option<bool> {
        (self.present & flag.bit() != 0).then_some(self.values & flag.bit() != 0)
    }

    pub fn value(&self, flag: Flag) -> bool {
        self.get(flag).unwrap_or(false)
    }

    pub fn set(&mut self, flag: Flag, value: bool) {
        self.present |= flag.bit();
        if value {
            self.values |= flag.bit();
        } else {
            self.values &= !flag.bit();
        }
    }

    pub fn with(mut self, flag: Flag, value: bool) -> Self {
        self.set(flag, value);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.present == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (Flag, bool)> + '_ {
        Flag::ALL.into_iter().filter_map(|f| self.get(f).map(|v| (f, v)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectNode {
    pub id: ObjectId,
    pub class: ObjectClass,
    pub capabilities: Capabilities,
    pub attributes: AttributeSet,
}

impl ObjectNode {
    pub fn is_room(&self) -> bool {
        self.capabilities.has(Capability::Room)
    }

    pub fn is_agent(&self) -> bool {
        self.capabilities.has(Capability::Agent)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RelationKind {
    Inside,
    On,
    Near,
    HeldBy,
    InRoom,
}

impl RelationKind {
    pub const ALL: [RelationKind; 5] = [
        RelationKind::Inside,
        RelationKind::On,
        RelationKind::Near,
        RelationKind::HeldBy,
        RelationKind::InRoom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::Inside => "INSIDE",
            RelationKind::On => "ON",
            RelationKind::Near => "NEAR",
            RelationKind::HeldBy => "HELD_BY",
            RelationKind::InRoom => "IN_ROOM",
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RelationEdge {
    pub src: ObjectId,
    pub dst: ObjectId,
    pub kind: RelationKind,
}

impl RelationEdge {
    pub fn new(src: ObjectId, dst: ObjectId, kind: RelationKind) -> Self {
        Self { src, dst, kind }
    }

    pub fn touches(&self, id: ObjectId) -> bool {
        self.src == id || self.dst == id
    }
}

impl fmt::Display for RelationEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -{}-> {}", self.src, self.kind, self.dst)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WorldError {
    #[error("invalid class name {0:?}: expected a lowercase snake_case token")]
    BadClassName(String),
    #[error("unknown object id {0}")]
    UnknownId(ObjectId),
    #[error("duplicate object id {0}")]
    DuplicateId(ObjectId),
}

/// The world snapshot `(objects, edges)`. Immutable once built; "mutation"
/// produces a new graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StateGraph {
    objects: BTreeMap<ObjectId, ObjectNode>,
    edges: BTreeSet<RelationEdge>,
}

impl StateGraph {
    /// Assembles a graph without checking invariants; see [`StateGraph::validate`].
    pub fn new(
        objects: impl IntoIterator<Item = ObjectNode>,
        edges: impl IntoIterator<Item = RelationEdge>,
    ) -> Result<Self, WorldError> {
        let mut map = BTreeMap::new();
        for node in objects {
            let id = node.id;
            if map.insert(id, node).is_some() {
                return Err(WorldError::DuplicateId(id));
            }
        }
        Ok(Self {
            objects: map,
            edges: edges.into_iter().collect(),
        })
    }

    pub fn objects(&self) -> impl ExactSizeIterator<Item = &ObjectNode> + '_ {
        self.objects.values()
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &RelationEdge> + '_ {
        self.edges.iter()
    }

    pub fn object(&self, id: ObjectId) -> Option<&ObjectNode> {
        self.objects.get(&id)
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.objects.contains_key(&id)
    }

    pub fn has_edge(&self, src: ObjectId, dst: ObjectId, kind: RelationKind) -> bool {
        self.edges.contains(&RelationEdge { src, dst, kind })
    }

    pub fn ids(&self) -> BTreeSet<ObjectId> {
        self.objects.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn agent(&self) -> Option<ObjectId> {
        self.objects.values().find(|o| o.is_agent()).map(|o| o.id)
    }

    pub fn rooms(&self) -> impl Iterator<Item = &ObjectNode> + '_ {
        self.objects.values().filter(|o| o.is_room())
    }

    /// Room an object sits in, via its `IN_ROOM` edge.
    pub fn room_of(&self, id: ObjectId) -> Option<ObjectId> {
        self.edges_from(id)
            .find(|e| e.kind == RelationKind::InRoom)
            .map(|e| e.dst)
    }

    /// Immediate `ON` or `INSIDE` parent (containers win if both exist).
    pub fn placement_parent(&self, id: ObjectId) -> Option<(ObjectId, RelationKind)> {
        let mut on = None;
        for e in self.edges_from(id) {
            match e.kind {
                RelationKind::Inside => return Some((e.dst, e.kind)),
                RelationKind::On => on = Some((e.dst, e.kind)),
                _ => {}
            }
        }
        on
    }

    /// Transitive `ON`/`INSIDE` ancestors, nearest first. Stops on cycles.
    pub fn placement_chain(&self, id: ObjectId) -> Vec<ObjectId> {
        let mut chain = Vec::new();
        let mut cur = id;
        while let Some((parent, _)) = self.placement_parent(cur) {
            if parent == id || chain.contains(&parent) {
                break;
            }
            chain.push(parent);
            cur = parent;
        }
        chain
    }

    pub fn edges_from(&self, id: ObjectId) -> impl Iterator<Item = &RelationEdge> + '_ {
        let lo = RelationEdge::new(id, ObjectId(0), RelationKind::Inside);
        let hi = RelationEdge::new(id, ObjectId(u32::MAX), RelationKind::InRoom);
        self.edges.range(lo..=hi)
    }

    pub fn instances_of<'a>(&'a self, class: &'a str) -> impl Iterator<Item = ObjectId> + 'a {
        self.objects
            .values()
            .filter(move |o| o.class.as_str() == class)
            .map(|o| o.id)
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.objects.values().any(|o| o.class.as_str() == class)
    }

    /// Distinct classes present in the world.
    pub fn class_registry(&self) -> BTreeSet<ObjectClass> {
        self.objects.values().map(|o| o.class.clone()).collect()
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate::validate(self)
    }

    /// Exactly the kept objects plus every edge whose endpoints are both kept.
    pub fn induced_subgraph(&self, keep: &BTreeSet<ObjectId>) -> Result<StateGraph, WorldError> {
        if let Some(missing) = keep.iter().find(|id| !self.contains(**id)) {
            return Err(WorldError::UnknownId(*missing));
        }
        Ok(StateGraph {
            objects: keep.iter().map(|id| (*id, self.objects[id].clone())).collect(),
            edges: self
                .edges
                .iter()
                .filter(|e| keep.contains(&e.src) && keep.contains(&e.dst))
                .copied()
                .collect(),
        })
    }

    pub fn max_id(&self) -> Option<ObjectId> {
        self.objects.keys().next_back().copied()
    }
}

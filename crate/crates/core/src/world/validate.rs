use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{Capability, Flag, ObjectId, RelationEdge, RelationKind, StateGraph};

/// One broken `StateGraph` invariant, naming the offending object or edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    DanglingEdge { missing: ObjectId, edge: RelationEdge },
    SelfLoop { edge: RelationEdge },
    /// Only reachable from serialized input; the in-memory edge set is a set.
    DuplicateEdge { edge: RelationEdge },
    BadEndpoint { edge: RelationEdge, reason: &'static str },
    /// More than one `INSIDE` parent, or an `INSIDE` cycle.
    ContainmentNotForest { id: ObjectId },
    MultipleOnParents { id: ObjectId },
    /// Cycle through mixed `ON`/`INSIDE` edges.
    PlacementCycle { id: ObjectId },
    MissingRoom { id: ObjectId },
    MultipleRooms { id: ObjectId },
    AgentCount { found: usize },
    RoomHasAttributes { id: ObjectId },
    AttributeNotPermitted { id: ObjectId, flag: Flag },
    HeldMismatch { id: ObjectId },
}

impl Violation {
    /// Constructor matching the common "dangling id" shape used in tests.
    pub fn dangling(missing: u32, edge: RelationEdge) -> Self {
        Violation::DanglingEdge { missing: ObjectId(missing), edge }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingEdge { missing, edge } => {
                write!(f, "edge {edge} references missing object {missing}")
            }
            Violation::SelfLoop { edge } => write!(f, "self-loop {edge}"),
            Violation::DuplicateEdge { edge } => write!(f, "duplicate edge {edge}"),
            Violation::BadEndpoint { edge, reason } => write!(f, "edge {edge}: {reason}"),
            Violation::ContainmentNotForest { id } => {
                write!(f, "object {id} breaks the containment forest")
            }
            Violation::MultipleOnParents { id } => write!(f, "object {id} is ON several parents"),
            Violation::PlacementCycle { id } => write!(f, "object {id} sits on a placement cycle"),
            Violation::MissingRoom { id } => write!(f, "object {id} has no IN_ROOM edge"),
            Violation::MultipleRooms { id } => write!(f, "object {id} has several IN_ROOM edges"),
            Violation::AgentCount { found } => write!(f, "expected one agent, found {found}"),
            Violation::RoomHasAttributes { id } => write!(f, "room {id} carries attributes"),
            Violation::AttributeNotPermitted { id, flag } => {
                write!(f, "object {id} may not carry flag {}", flag.name())
            }
            Violation::HeldMismatch { id } => {
                write!(f, "object {id}: held flag disagrees with HELD_BY edges")
            }
        }
    }
}

pub(super) fn validate(g: &StateGraph) -> Vec<Violation> {
    let mut out = Vec::new();

    let agents: Vec<_> = g.objects().filter(|o| o.is_agent()).map(|o| o.id).collect();
    if agents.len() != 1 {
        out.push(Violation::AgentCount { found: agents.len() });
    }
    let is_agent = |id: ObjectId| agents.contains(&id);

    for o in g.objects() {
        if o.is_room() && !o.attributes.is_empty() {
            out.push(Violation::RoomHasAttributes { id: o.id });
            continue;
        }
        for (flag, _) in o.attributes.iter() {
            if !flag.permitted_by(o.capabilities) {
                out.push(Violation::AttributeNotPermitted { id: o.id, flag });
            }
        }
    }

    let mut inside: BTreeMap<ObjectId, Vec<ObjectId>> = BTreeMap::new();
    let mut on: BTreeMap<ObjectId, Vec<ObjectId>> = BTreeMap::new();
    let mut rooms: BTreeMap<ObjectId, usize> = BTreeMap::new();
    let mut held_by: BTreeMap<ObjectId, usize> = BTreeMap::new();

    for e in g.edges() {
        let (src, dst) = match (g.object(e.src), g.object(e.dst)) {
            (Some(s), Some(d)) => (s, d),
            (None, _) => {
                out.push(Violation::DanglingEdge { missing: e.src, edge: *e });
                continue;
            }
            (_, None) => {
                out.push(Violation::DanglingEdge { missing: e.dst, edge: *e });
                continue;
            }
        };
        if e.src == e.dst {
            out.push(Violation::SelfLoop { edge: *e });
            continue;
        }
        let bad = |reason| Violation::BadEndpoint { edge: *e, reason };
        match e.kind {
            RelationKind::Inside | RelationKind::On => {
                if src.is_room() || src.is_agent() || dst.is_room() || dst.is_agent() {
                    out.push(bad("placement edges join ordinary objects only"));
                    continue;
                }
                let (needed, map) = if e.kind == RelationKind::Inside {
                    (Capability::Container, &mut inside)
                } else {
                    (Capability::Surface, &mut on)
                };
                if !dst.capabilities.has(needed) {
                    out.push(bad("parent lacks the container/surface capability"));
                }
                map.entry(e.src).or_default().push(e.dst);
            }
            RelationKind::Near => {
                if !src.is_agent() || dst.is_room() {
                    out.push(bad("NEAR runs from the agent to a non-room object"));
                }
            }
            RelationKind::HeldBy => {
                if !dst.is_agent() || !src.capabilities.has(Capability::Grabbable) {
                    out.push(bad("HELD_BY runs from a grabbable object to the agent"));
                }
                *held_by.entry(e.src).or_default() += 1;
            }
            RelationKind::InRoom => {
                if src.is_room() || !dst.is_room() {
                    out.push(bad("IN_ROOM runs from a non-room object to a room"));
                }
                *rooms.entry(e.src).or_default() += 1;
            }
        }
    }

    for (id, parents) in &inside {
        if parents.len() > 1 {
            out.push(Violation::ContainmentNotForest { id: *id });
        }
    }
    for (id, parents) in &on {
        if parents.len() > 1 {
            out.push(Violation::MultipleOnParents { id: *id });
        }
    }
    cycle_check(&inside, &mut out, |id| Violation::ContainmentNotForest { id });
    if out.iter().all(|v| !matches!(v, Violation::ContainmentNotForest { .. })) {
        let mut placement = inside.clone();
        for (id, parents) in &on {
            placement.entry(*id).or_default().extend(parents);
        }
        cycle_check(&placement, &mut out, |id| Violation::PlacementCycle { id });
    }

    for o in g.objects() {
        if o.is_room() {
            continue;
        }
        match rooms.get(&o.id).copied().unwrap_or(0) {
            0 => out.push(Violation::MissingRoom { id: o.id }),
            1 => {}
            _ => out.push(Violation::MultipleRooms { id: o.id }),
        }
        let held_edges = held_by.get(&o.id).copied().unwrap_or(0);
        let held_to_agent = g.edges_from(o.id).any(|e| e.kind == RelationKind::HeldBy && is_agent(e.dst));
        let flagged = o.attributes.value(Flag::Held);
        if (flagged && !(held_edges == 1 && held_to_agent)) || (!flagged && held_edges > 0) {
            out.push(Violation::HeldMismatch { id: o.id });
        }
    }

    out
}

/// Reports each object lying on a cycle of the parent map once.
fn cycle_check(
    parents: &BTreeMap<ObjectId, Vec<ObjectId>>,
    out: &mut Vec<Violation>,
    make: impl Fn(ObjectId) -> Violation,
) {
    fn visit(
        node: ObjectId,
        parents: &BTreeMap<ObjectId, Vec<ObjectId>>,
        path: &mut Vec<ObjectId>,
        done: &mut BTreeSet<ObjectId>,
        on_cycle: &mut BTreeSet<ObjectId>,
    ) {
        if done.contains(&node) {
            return;
        }
        if let Some(pos) = path.iter().position(|p| *p == node) {
            on_cycle.extend(path[pos..].iter().copied());
            return;
        }
        path.push(node);
        for p in parents.get(&node).into_iter().flatten() {
            visit(*p, parents, path, done, on_cycle);
        }
        path.pop();
        done.insert(node);
    }

    let mut done = BTreeSet::new();
    let mut on_cycle = BTreeSet::new();
    for start in parents.keys() {
        visit(*start, parents, &mut Vec::new(), &mut done, &mut on_cycle);
    }
    out.extend(on_cycle.into_iter().map(make));
}

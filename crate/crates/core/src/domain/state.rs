use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::world::{
    AttributeSet, Capabilities, Capability, Flag, GoalCondition, GoalSpec, ObjectClass, ObjectId,
    ObjectNode, ObjectRef, RelationEdge, RelationKind, StateGraph, Violation,
};

pub(crate) const NONE: u32 = u32::MAX;

#[derive(Debug)]
pub(crate) struct Statics {
    pub ids: Vec<ObjectId>,
    pub index: BTreeMap<ObjectId, u32>,
    pub classes: Vec<ObjectClass>,
    pub caps: Vec<Capabilities>,
    pub agent: u32,
    pub rooms: Vec<u32>,
}

/// Dense, search-friendly form of a valid [`StateGraph`]. Objects are
/// addressed by index; the only edges are one placement parent of each kind
/// per object, one room per object, and the agent's `NEAR` and holding lists.
#[derive(Clone, Debug)]
pub struct PlanState {
    pub(crate) statics: Arc<Statics>,
    pub(crate) attrs: Vec<AttributeSet>,
    pub(crate) on: Vec<u32>,
    pub(crate) inside: Vec<u32>,
    pub(crate) room: Vec<u32>,
    /// Sorted.
    pub(crate) near: Vec<u32>,
    /// Sorted.
    pub(crate) holding: Vec<u32>,
}

impl PartialEq for PlanState {
    fn eq(&self, other: &Self) -> bool {
        self.attrs == other.attrs
            && self.on == other.on
            && self.inside == other.inside
            && self.room == other.room
            && self.near == other.near
            && self.holding == other.holding
    }
}

impl Eq for PlanState {}

impl Hash for PlanState {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.attrs.hash(h);
        self.on.hash(h);
        self.inside.hash(h);
        self.room.hash(h);
        self.near.hash(h);
        self.holding.hash(h);
    }
}

impl PlanState {
    pub fn from_graph(g: &StateGraph) -> Result<Self, Vec<Violation>> {
        let violations = g.validate();
        if !violations.is_empty() {
            return Err(violations);
        }
        let ids: Vec<ObjectId> = g.objects().map(|o| o.id).collect();
        let index: BTreeMap<ObjectId, u32> =
            ids.iter().enumerate().map(|(i, id)| (*id, i as u32)).collect();
        let n = ids.len();
        let mut s = PlanState {
            statics: Arc::new(Statics {
                classes: g.objects().map(|o| o.class.clone()).collect(),
                caps: g.objects().map(|o| o.capabilities).collect(),
                agent: index[&g.agent().expect("valid graph has an agent")],
                rooms: g.objects().filter(|o| o.is_room()).map(|o| index[&o.id]).collect(),
                ids,
                index,
            }),
            attrs: g.objects().map(|o| o.attributes).collect(),
            on: vec![NONE; n],
            inside: vec![NONE; n],
            room: vec![NONE; n],
            near: Vec::new(),
            holding: Vec::new(),
        };
        let ix = |id: ObjectId| s.statics.index[&id];
        for e in g.edges() {
            let (a, b) = (ix(e.src), ix(e.dst));
            match e.kind {
                RelationKind::On => s.on[a as usize] = b,
                RelationKind::Inside => s.inside[a as usize] = b,
                RelationKind::InRoom => s.room[a as usize] = b,
                RelationKind::Near => s.near.push(b),
                RelationKind::HeldBy => s.holding.push(a),
            }
        }
        s.near.sort_unstable();
        s.holding.sort_unstable();
        Ok(s)
    }

    pub fn to_graph(&self) -> StateGraph {
        let st = &self.statics;
        let objects: Vec<ObjectNode> = (0..self.len())
            .map(|i| ObjectNode {
                id: st.ids[i],
                class: st.classes[i].clone(),
                capabilities: st.caps[i],
                attributes: self.attrs[i],
            })
            .collect();
        let id = |i: u32| st.ids[i as usize];
        let mut edges = Vec::new();
        for i in 0..self.len() as u32 {
            for (parent, kind) in [
                (self.on[i as usize], RelationKind::On),
                (self.inside[i as usize], RelationKind::Inside),
                (self.room[i as usize], RelationKind::InRoom),
            ] {
                if parent != NONE {
                    edges.push(RelationEdge::new(id(i), id(parent), kind));
                }
            }
        }
        for n in &self.near {
            edges.push(RelationEdge::new(id(st.agent), id(*n), RelationKind::Near));
        }
        for h in &self.holding {
            edges.push(RelationEdge::new(id(*h), id(st.agent), RelationKind::HeldBy));
        }
        StateGraph::new(objects, edges).expect("ids are unique and edges internal")
    }

    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }

    pub fn id(&self, i: u32) -> ObjectId {
        self.statics.ids[i as usize]
    }

    pub fn index_of(&self, id: ObjectId) -> Option<u32> {
        self.statics.index.get(&id).copied()
    }

    pub fn class(&self, i: u32) -> &ObjectClass {
        &self.statics.classes[i as usize]
    }

    pub(crate) fn caps(&self, i: u32) -> Capabilities {
        self.statics.caps[i as usize]
    }

    pub(crate) fn agent(&self) -> u32 {
        self.statics.agent
    }

    pub(crate) fn is_room(&self, i: u32) -> bool {
        self.caps(i).has(Capability::Room)
    }

    pub(crate) fn agent_room(&self) -> u32 {
        self.room[self.agent() as usize]
    }

    pub(crate) fn attr(&self, i: u32, flag: Flag) -> bool {
        self.attrs[i as usize].value(flag)
    }

    /// Immediate placement parent, containers first.
    pub(crate) fn parent(&self, i: u32) -> Option<(u32, RelationKind)> {
        let i = i as usize;
        if self.inside[i] != NONE {
            Some((self.inside[i], RelationKind::Inside))
        } else if self.on[i] != NONE {
            Some((self.on[i], RelationKind::On))
        } else {
            None
        }
    }

    /// Whether `i` is `root` or sits (transitively) on or inside it.
    pub(crate) fn within(&self, i: u32, root: u32) -> bool {
        let mut cur = i;
        for _ in 0..=self.len() {
            if cur == root {
                return true;
            }
            match self.parent(cur) {
                Some((p, _)) => cur = p,
                None => return false,
            }
        }
        false
    }

    pub(crate) fn has_edge(&self, src: u32, dst: u32, kind: RelationKind) -> bool {
        let (s, d) = (src as usize, dst);
        match kind {
            RelationKind::On => self.on[s] == d,
            RelationKind::Inside => self.inside[s] == d,
            RelationKind::InRoom => self.room[s] == d,
            RelationKind::Near => src == self.agent() && self.near.binary_search(&dst).is_ok(),
            RelationKind::HeldBy => dst == self.agent() && self.holding.binary_search(&src).is_ok(),
        }
    }

    pub(crate) fn rooms(&self) -> &[u32] {
        &self.statics.rooms
    }
}

#[derive(Clone, Debug)]
enum Cond {
    Attr { objs: Vec<u32>, flag: Flag, value: bool },
    Rel { srcs: Vec<u32>, dsts: Vec<u32>, kind: RelationKind, value: bool },
}

/// A goal resolved against one state's object indices. References that do
/// not resolve make their condition unsatisfiable.
#[derive(Clone, Debug)]
pub struct CompiledGoal {
    conds: Vec<Cond>,
}

impl CompiledGoal {
    pub fn new(goal: &GoalSpec, s: &PlanState) -> Self {
        let resolve = |r: &ObjectRef| -> Vec<u32> {
            match r {
                ObjectRef::Class(c) => (0..s.len() as u32)
                    .filter(|i| s.class(*i) == c && !s.caps(*i).has(Capability::Room))
                    .collect(),
                ObjectRef::Instance { id, label } => s
                    .index_of(*id)
                    .filter(|i| label.as_ref().is_none_or(|l| s.class(*i) == l))
                    .into_iter()
                    .collect(),
            }
        };
        let conds = goal
            .conditions()
            .iter()
            .map(|c| match c {
                GoalCondition::Attribute { object, flag, value } => Cond::Attr {
                    objs: resolve(object)
                        .into_iter()
                        .filter(|i| flag.permitted_by(s.caps(*i)))
                        .collect(),
                    flag: *flag,
                    value: *value,
                },
                GoalCondition::Relation { src, dst, kind, value } => Cond::Rel {
                    srcs: resolve(src),
                    dsts: resolve(dst),
                    kind: *kind,
                    value: *value,
                },
            })
            .collect();
        Self { conds }
    }

    fn holds(c: &Cond, s: &PlanState) -> bool {
        match c {
            Cond::Attr { objs, flag, value } => objs.iter().any(|i| s.attr(*i, *flag) == *value),
            Cond::Rel { srcs, dsts, kind, value } => srcs
                .iter()
                .any(|a| dsts.iter().any(|b| a != b && s.has_edge(*a, *b, *kind) == *value)),
        }
    }

    pub fn len(&self) -> usize {
        self.conds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conds.is_empty()
    }

    pub fn satisfied_count(&self, s: &PlanState) -> usize {
        self.conds.iter().filter(|c| Self::holds(c, s)).count()
    }

    pub fn satisfied(&self, s: &PlanState) -> bool {
        self.conds.iter().all(|c| Self::holds(c, s))
    }

    /// Fraction of conditions holding in `s`.
    pub fn progress(&self, s: &PlanState) -> f64 {
        if self.conds.is_empty() {
            1.0
        } else {
            self.satisfied_count(s) as f64 / self.conds.len() as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::fixtures::kitchen;
    use crate::world::satisfies;

    #[test]
    fn round_trip() {
        let g = kitchen();
        let s = PlanState::from_graph(&g).unwrap();
        assert_eq!(s.to_graph(), g);
        assert_eq!(s.len(), g.len());
    }

    #[test]
    fn compiled_goal_matches_graph_semantics() {
        let g = kitchen();
        let s = PlanState::from_graph(&g).unwrap();
        for text in [
            "inside(banana,fridge)=true",
            "inside(banana#4,fridge#3)=false",
            "on(banana,kitchen_table)=true",
            "open(fridge)=true",
            "closed(fridge#3)=true",
            "held(banana)=false",
            "on(banana,kitchen_table)=false, closed(fridge)=true",
        ] {
            let goal: GoalSpec = text.parse().unwrap();
            let c = CompiledGoal::new(&goal, &s);
            assert_eq!(c.satisfied(&s), satisfies(&g, &goal).unwrap(), "{text}");
        }
    }

    #[test]
    fn unknown_refs_never_hold() {
        let s = PlanState::from_graph(&kitchen()).unwrap();
        let goal: GoalSpec = "inside(apple,fridge)=false".parse().unwrap();
        assert!(!CompiledGoal::new(&goal, &s).satisfied(&s));
        let goal: GoalSpec = "open(#99)=false".parse().unwrap();
        assert!(!CompiledGoal::new(&goal, &s).satisfied(&s));
    }

    #[test]
    fn invalid_graph_rejected() {
        let g = kitchen();
        let mut edges: Vec<_> = g.edges().copied().collect();
        edges.retain(|e| !(e.src == ObjectId(1) && e.kind == RelationKind::InRoom));
        let bad = StateGraph::new(g.objects().cloned(), edges).unwrap();
        assert!(PlanState::from_graph(&bad).is_err());
    }
}

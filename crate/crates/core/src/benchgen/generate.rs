use std::collections::BTreeMap;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::registry::{class_def, room_template, ClassDef, Role, AGENT_CLASS, CLASSES, ROOMS, STRUCTURE};
use super::BenchError;
use crate::world::{
    AttributeSet, Capabilities, Capability, Flag, ObjectClass, ObjectId, ObjectNode, RelationEdge,
    RelationKind, StateGraph,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldSpec {
    pub seed: u64,
    pub n_rooms: usize,
    pub n_objects: usize,
    /// Longest ON/INSIDE chain below a floor-standing object.
    pub max_depth: usize,
}

impl Default for WorldSpec {
    fn default() -> Self {
        Self { seed: 0, n_rooms: 6, n_objects: 280, max_depth: 3 }
    }
}

impl WorldSpec {
    pub fn new(seed: u64, n_objects: usize) -> Self {
        Self { seed, n_objects, ..Self::default() }
    }

    pub fn check(&self) -> Result<(), BenchError> {
        if self.n_rooms == 0 || self.n_rooms > ROOMS.len() {
            return Err(BenchError::InvalidSpec(format!("n_rooms must be in 1..={}", ROOMS.len())));
        }
        if self.n_objects < 4 {
            return Err(BenchError::InvalidSpec("n_objects must be at least 4".into()));
        }
        if self.max_depth == 0 || self.max_depth > 3 {
            return Err(BenchError::InvalidSpec("max_depth must be in 1..=3".into()));
        }
        Ok(())
    }
}

const P_OPEN: f64 = 0.35;
const P_SWITCHED_ON: f64 = 0.3;
/// Share of floor-standing objects among the non-room budget.
const FLOOR_SHARE: f64 = 0.7;
/// Share of task items among what remains after furniture.
const ITEM_SHARE: f64 = 0.35;
const MAX_ITEMS_PER_CLASS: usize = 2;
const MAX_CLUTTER_PER_CLASS: usize = 14;

/// Host object, relation to it, and the host's room.
type Host = (ObjectId, RelationKind, ObjectId);

struct Builder {
    rng: ChaCha8Rng,
    nodes: Vec<ObjectNode>,
    edges: Vec<RelationEdge>,
    /// class, room, depth (0 = floor) and placement parent per object, by id
    meta: BTreeMap<ObjectId, (&'static ClassDef, ObjectId, usize)>,
    counts: BTreeMap<&'static str, usize>,
    next: u32,
}

impl Builder {
    fn fresh_id(&mut self) -> ObjectId {
        let id = ObjectId(self.next);
        self.next += 1;
        id
    }

    fn add(&mut self, def: &'static ClassDef, room: ObjectId, parent: Option<(ObjectId, RelationKind)>) {
        let id = self.fresh_id();
        let caps = Capabilities::of(def.caps);
        let mut attrs = AttributeSet::new();
        if caps.has(Capability::Openable) {
            attrs.set(Flag::Open, self.rng.gen_bool(P_OPEN));
        }
        if caps.has(Capability::Switchable) {
            let on = self.rng.gen_bool(P_SWITCHED_ON);
            attrs.set(Flag::On, on);
            if on && caps.has(Capability::Openable) {
                attrs.set(Flag::Open, false);
            }
        }
        if caps.has(Capability::Grabbable) {
            attrs.set(Flag::Held, false);
        }
        self.nodes.push(ObjectNode {
            id,
            class: ObjectClass::new(def.name).expect("registry names are valid"),
            capabilities: caps,
            attributes: attrs,
        });
        self.edges.push(RelationEdge::new(id, room, RelationKind::InRoom));
        let depth = match parent {
            Some((p, kind)) => {
                self.edges.push(RelationEdge::new(id, p, kind));
                self.meta[&p].2 + 1
            }
            None => 0,
        };
        self.meta.insert(id, (def, room, depth));
        *self.counts.entry(def.name).or_default() += 1;
    }

    /// Objects that may take `def` as a child, with the relation to use.
    fn hosts_for(&self, def: &ClassDef, max_depth: usize, room: Option<ObjectId>) -> Vec<Host> {
        self.meta
            .iter()
            .filter(|(_, (_, r, d))| *d < max_depth && room.is_none_or(|want| want == *r))
            .filter_map(|(id, (h, r, _))| {
                def.hosts
                    .iter()
                    .find(|(name, _)| *name == h.name && *name != def.name)
                    .map(|(_, kind)| (*id, *kind, *r))
            })
            .collect()
    }
}

/// Seeded household world: an agent, up to six rooms, furniture on the floor
/// and items stacked on or inside it. Identical specs give identical worlds.
pub fn generate_world(spec: &WorldSpec) -> Result<StateGraph, BenchError> {
    spec.check()?;
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        nodes: Vec::new(),
        edges: Vec::new(),
        meta: BTreeMap::new(),
        counts: BTreeMap::new(),
        next: 1,
    };
    let total = spec.n_objects;
    let n_rooms = if total < 10 { 1 } else { (total / 40).clamp(2, spec.n_rooms.max(2)).min(spec.n_rooms) };

    let agent = b.fresh_id();
    let mut room_names: Vec<&str> = if n_rooms == ROOMS.len() {
        ROOMS.to_vec()
    } else {
        let mut picked = ROOMS.iter().copied().choose_multiple(&mut b.rng, n_rooms);
        picked.sort_by_key(|r| ROOMS.iter().position(|x| x == r));
        picked
    };
    room_names.truncate(n_rooms);
    let mut rooms = Vec::new();
    for name in &room_names {
        let id = b.fresh_id();
        b.nodes.push(ObjectNode {
            id,
            class: ObjectClass::new(*name).expect("room names are valid"),
            capabilities: Capabilities::of(&[Capability::Room]),
            attributes: AttributeSet::new(),
        });
        rooms.push(id);
    }
    let agent_room = *rooms.choose(&mut b.rng).expect("at least one room");
    b.nodes.push(ObjectNode {
        id: agent,
        class: ObjectClass::new(AGENT_CLASS).expect("valid"),
        capabilities: Capabilities::of(&[Capability::Agent]),
        attributes: AttributeSet::new(),
    });
    b.edges.push(RelationEdge::new(agent, agent_room, RelationKind::InRoom));

    // floor-standing furniture, fixtures and devices, room by room
    let budget = total.saturating_sub(1 + n_rooms);
    for (i, (&room, name)) in rooms.iter().zip(&room_names).enumerate() {
        let share = budget / n_rooms + usize::from(i < budget % n_rooms);
        let floor = ((share as f64) * FLOOR_SHARE).ceil() as usize;
        let template = room_template(name);
        let mut placed = 0;
        for &(class, lo, hi) in template.iter().chain(STRUCTURE) {
            let def = class_def(class).expect("template classes are registered");
            let want = b.rng.gen_range(lo..=hi);
            for _ in 0..want {
                if placed >= floor {
                    break;
                }
                if def.role == Role::Device {
                    let hosts = b.hosts_for(def, spec.max_depth, Some(room));
                    let Some(&(host, kind, _)) = hosts.choose(&mut b.rng) else { break };
                    b.add(def, room, Some((host, kind)));
                } else {
                    b.add(def, room, None);
                }
                placed += 1;
            }
        }
        // rooms with short templates top up with fixtures
        let fixtures: Vec<&'static ClassDef> = template
            .iter()
            .filter_map(|(c, _, _)| class_def(c))
            .filter(|d| d.role == Role::Fixture)
            .collect();
        while placed < floor && !fixtures.is_empty() {
            let def = fixtures[b.rng.gen_range(0..fixtures.len())];
            b.add(def, room, None);
            placed += 1;
        }
    }

    // items and clutter, anywhere they have a host
    let remaining = total.saturating_sub(b.nodes.len());
    let mut items_left = ((remaining as f64) * ITEM_SHARE).round() as usize;
    let items: Vec<&'static ClassDef> = CLASSES.iter().filter(|c| c.role == Role::Item).collect();
    let clutter: Vec<&'static ClassDef> = CLASSES.iter().filter(|c| c.role == Role::Clutter).collect();
    while b.nodes.len() < total {
        let want_item = items_left > 0 && (b.rng.gen_bool(0.5) || b.nodes.len() + items_left >= total);
        let (pool, cap) = if want_item { (&items, MAX_ITEMS_PER_CLASS) } else { (&clutter, MAX_CLUTTER_PER_CLASS) };
        let open: Vec<(&'static ClassDef, Vec<Host>)> = pool
            .iter()
            .filter(|d| b.counts.get(d.name).copied().unwrap_or(0) < cap)
            .map(|d| (*d, b.hosts_for(d, spec.max_depth, None)))
            .filter(|(_, hosts)| !hosts.is_empty())
            .collect();
        if open.is_empty() {
            if want_item {
                items_left = 0;
                continue;
            }
            // nothing left to stack things on: put an item on the floor
            let def = items.choose(&mut b.rng).expect("registry has items");
            let room = *rooms.choose(&mut b.rng).expect("at least one room");
            b.add(def, room, None);
            continue;
        }
        let (def, hosts) = &open[b.rng.gen_range(0..open.len())];
        let &(host, kind, room) = hosts.choose(&mut b.rng).expect("non-empty");
        b.add(def, room, Some((host, kind)));
        if want_item {
            items_left -= 1;
        }
    }

    Ok(StateGraph::new(b.nodes, b.edges).expect("fresh ids are unique"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::save_world;

    #[test]
    fn default_world_is_valid_and_sized() {
        for seed in 0..6 {
            let g = generate_world(&WorldSpec::new(seed, 280)).unwrap();
            assert_eq!(g.validate(), vec![], "seed {seed}");
            assert!((210..=350).contains(&g.len()), "seed {seed}: {}", g.len());
            assert_eq!(g.rooms().count(), 6);
            let deepest = g.objects().map(|o| g.placement_chain(o.id).len()).max().unwrap();
            assert!(deepest <= 3);
        }
    }

    #[test]
    fn small_worlds() {
        for seed in 0..50 {
            for n in [4, 6, 10, 12] {
                let g = generate_world(&WorldSpec::new(seed, n)).unwrap();
                assert_eq!(g.validate(), vec![], "seed {seed} n {n}");
                assert_eq!(g.len(), n);
            }
        }
    }

    #[test]
    fn deterministic() {
        let spec = WorldSpec::new(1, 280);
        assert_eq!(save_world(&generate_world(&spec).unwrap()), save_world(&generate_world(&spec).unwrap()));
        assert_ne!(generate_world(&spec).unwrap(), generate_world(&WorldSpec::new(2, 280)).unwrap());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate_world(&WorldSpec { n_rooms: 0, ..WorldSpec::default() }).is_err());
        assert!(generate_world(&WorldSpec { max_depth: 4, ..WorldSpec::default() }).is_err());
        assert!(generate_world(&WorldSpec::new(0, 3)).is_err());
    }
}

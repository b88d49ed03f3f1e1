//! Household class registry: capabilities, roles and where things go.

use crate::world::Capability::{self, *};
use crate::world::RelationKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// Stands on the floor; a possible task destination or target.
    Furniture,
    /// Stands on the floor; never part of a task.
    Fixture,
    /// Placed on furniture in a room template; a possible task target.
    Device,
    /// Grabbable and task-eligible.
    Item,
    /// Grabbable, never part of a task; fills rooms up.
    Clutter,
}

#[derive(Clone, Copy, Debug)]
pub struct ClassDef {
    pub name: &'static str,
    pub caps: &'static [Capability],
    pub role: Role,
    /// Parent classes this class may be placed on or in.
    pub hosts: &'static [(&'static str, RelationKind)],
}

const ON: RelationKind = RelationKind::On;
const IN: RelationKind = RelationKind::Inside;

macro_rules! class {
    ($name:literal, [$($cap:ident),*], $role:ident) => {
        ClassDef { name: $name, caps: &[$($cap),*], role: Role::$role, hosts: &[] }
    };
    ($name:literal, [$($cap:ident),*], $role:ident, [$(($host:literal, $rel:ident)),*]) => {
        ClassDef { name: $name, caps: &[$($cap),*], role: Role::$role, hosts: &[$(($host, $rel)),*] }
    };
}

pub const AGENT_CLASS: &str = "character";

pub const ROOMS: [&str; 6] = ["kitchen", "living_room", "bedroom", "bathroom", "dining_room", "office"];

pub static CLASSES: &[ClassDef] = &[
    // furniture
    class!("fridge", [Openable, Container], Furniture),
    class!("stove", [Switchable, Surface], Furniture),
    class!("dishwasher", [Openable, Switchable, Container], Furniture),
    class!("washing_machine", [Openable, Switchable, Container], Furniture),
    class!("kitchen_counter", [Surface], Furniture),
    class!("kitchen_cabinet", [Openable, Container], Furniture),
    class!("kitchen_table", [Surface], Furniture),
    class!("dining_table", [Surface], Furniture),
    class!("coffee_table", [Surface], Furniture),
    class!("desk", [Surface], Furniture),
    class!("nightstand", [Surface], Furniture),
    class!("tv_stand", [Surface], Furniture),
    class!("bathroom_counter", [Surface], Furniture),
    class!("bathroom_cabinet", [Openable, Container], Furniture),
    class!("wardrobe", [Openable, Container], Furniture),
    class!("dresser", [Openable, Container, Surface], Furniture),
    class!("bookshelf", [Surface], Furniture),
    class!("sofa", [Surface], Furniture),
    class!("bed", [Surface], Furniture),
    class!("floor_lamp", [Switchable], Furniture),
    // fixtures
    class!("chair", [Surface], Fixture),
    class!("door", [Openable], Fixture),
    class!("window", [Openable], Fixture),
    class!("curtain", [Openable], Fixture),
    class!("light_switch", [Switchable], Fixture),
    class!("rug", [], Fixture),
    class!("plant", [], Fixture),
    class!("wall_picture", [], Fixture),
    class!("wall", [], Fixture),
    class!("floor", [], Fixture),
    class!("ceiling", [], Fixture),
    class!("ceiling_lamp", [Switchable], Fixture),
    class!("power_socket", [], Fixture),
    // devices
    class!("microwave", [Openable, Switchable, Container], Device, [("kitchen_counter", ON)]),
    class!("toaster", [Switchable], Device, [("kitchen_counter", ON)]),
    class!("coffee_maker", [Switchable], Device, [("kitchen_counter", ON)]),
    class!("tv", [Switchable], Device, [("tv_stand", ON)]),
    class!("computer", [Switchable], Device, [("desk", ON)]),
    class!("table_lamp", [Switchable], Device, [("nightstand", ON), ("desk", ON)]),
    // task items
    class!("apple", [Grabbable], Item,
        [("fridge", IN), ("bowl", IN), ("basket", IN), ("kitchen_table", ON), ("dining_table", ON)]),
    class!("banana", [Grabbable], Item,
        [("fridge", IN), ("bowl", IN), ("plastic_container", IN), ("kitchen_counter", ON)]),
    class!("orange", [Grabbable], Item,
        [("fridge", IN), ("bowl", IN), ("basket", IN), ("dining_table", ON)]),
    class!("peach", [Grabbable], Item, [("fridge", IN), ("plastic_container", IN), ("bowl", IN)]),
    class!("bread", [Grabbable], Item,
        [("kitchen_counter", ON), ("kitchen_cabinet", IN), ("plate", ON)]),
    class!("cheese", [Grabbable], Item, [("fridge", IN), ("plastic_container", IN), ("plate", ON)]),
    class!("chicken", [Grabbable], Item, [("fridge", IN), ("plastic_container", IN)]),
    class!("cupcake", [Grabbable], Item, [("plate", ON), ("fridge", IN), ("kitchen_table", ON)]),
    class!("beer", [Grabbable], Item, [("fridge", IN), ("coffee_table", ON)]),
    class!("juice", [Grabbable], Item, [("fridge", IN), ("kitchen_table", ON)]),
    class!("milk", [Grabbable], Item, [("fridge", IN)]),
    class!("wine", [Grabbable], Item, [("kitchen_cabinet", IN), ("dining_table", ON)]),
    class!("plate", [Grabbable, Surface], Item,
        [("kitchen_cabinet", IN), ("dishwasher", IN), ("dining_table", ON), ("kitchen_table", ON)]),
    class!("bowl", [Grabbable, Container], Item,
        [("kitchen_cabinet", IN), ("kitchen_counter", ON), ("dining_table", ON), ("kitchen_table", ON)]),
    class!("mug", [Grabbable], Item, [("kitchen_cabinet", IN), ("dishwasher", IN), ("desk", ON)]),
    class!("wine_glass", [Grabbable], Item, [("kitchen_cabinet", IN), ("dining_table", ON)]),
    class!("pot", [Grabbable, Container], Item, [("stove", ON), ("kitchen_cabinet", IN)]),
    class!("frying_pan", [Grabbable], Item, [("stove", ON), ("kitchen_cabinet", IN)]),
    class!("fork", [Grabbable], Item, [("kitchen_cabinet", IN), ("dishwasher", IN), ("dining_table", ON)]),
    class!("knife", [Grabbable], Item, [("kitchen_cabinet", IN), ("kitchen_counter", ON)]),
    class!("cell_phone", [Grabbable, Switchable], Item, [("nightstand", ON), ("desk", ON), ("sofa", ON)]),
    class!("laptop", [Grabbable, Switchable], Item, [("desk", ON), ("coffee_table", ON)]),
    class!("radio", [Grabbable, Switchable], Item, [("nightstand", ON), ("bookshelf", ON), ("kitchen_counter", ON)]),
    class!("remote_control", [Grabbable], Item, [("coffee_table", ON), ("sofa", ON), ("tv_stand", ON)]),
    class!("toothbrush", [Grabbable], Item, [("bathroom_counter", ON), ("bathroom_cabinet", IN)]),
    class!("toothpaste", [Grabbable], Item, [("bathroom_counter", ON), ("bathroom_cabinet", IN)]),
    class!("soap", [Grabbable], Item, [("bathroom_counter", ON), ("bathroom_cabinet", IN)]),
    class!("plastic_container", [Grabbable, Openable, Container], Item,
        [("fridge", IN), ("kitchen_cabinet", IN), ("kitchen_counter", ON)]),
    class!("box", [Grabbable, Openable, Container], Item, [("wardrobe", IN), ("bookshelf", ON), ("desk", ON)]),
    class!("basket", [Grabbable, Container], Item, [("kitchen_counter", ON), ("dresser", ON)]),
    // clutter
    class!("book", [Grabbable], Clutter,
        [("bookshelf", ON), ("desk", ON), ("nightstand", ON), ("coffee_table", ON), ("box", IN)]),
    class!("notebook", [Grabbable], Clutter, [("desk", ON), ("bookshelf", ON), ("box", IN)]),
    class!("paper", [Grabbable], Clutter, [("desk", ON), ("bookshelf", ON), ("box", IN)]),
    class!("shirt", [Grabbable], Clutter, [("wardrobe", IN), ("dresser", IN), ("bed", ON)]),
    class!("pants", [Grabbable], Clutter, [("wardrobe", IN), ("dresser", IN), ("bed", ON)]),
    class!("towel", [Grabbable], Clutter,
        [("bathroom_counter", ON), ("bathroom_cabinet", IN), ("washing_machine", IN)]),
    class!("pillow", [Grabbable], Clutter, [("sofa", ON), ("bed", ON)]),
    class!("candle", [Grabbable], Clutter,
        [("dining_table", ON), ("coffee_table", ON), ("nightstand", ON), ("bookshelf", ON)]),
    class!("vase", [Grabbable], Clutter, [("dining_table", ON), ("coffee_table", ON), ("bookshelf", ON)]),
];

/// Shell every room gets on top of its template.
pub const STRUCTURE: &[(&str, usize, usize)] =
    &[("floor", 1, 1), ("ceiling", 1, 1), ("wall", 4, 4), ("ceiling_lamp", 1, 2), ("power_socket", 2, 4)];

/// Floor-standing contents of each room, most essential first:
/// (class, min count, max count).
pub fn room_template(room: &str) -> &'static [(&'static str, usize, usize)] {
    match room {
        "kitchen" => &[
            ("fridge", 1, 1),
            ("kitchen_counter", 2, 2),
            ("kitchen_table", 1, 1),
            ("kitchen_cabinet", 2, 2),
            ("stove", 1, 1),
            ("microwave", 1, 1),
            ("dishwasher", 1, 1),
            ("toaster", 1, 1),
            ("coffee_maker", 1, 1),
            ("chair", 2, 3),
            ("door", 1, 1),
            ("window", 1, 2),
            ("light_switch", 1, 1),
            ("curtain", 1, 2),
            ("rug", 1, 1),
            ("plant", 1, 2),
            ("wall_picture", 1, 2),
        ],
        "living_room" => &[
            ("sofa", 1, 1),
            ("coffee_table", 1, 1),
            ("tv_stand", 1, 1),
            ("tv", 1, 1),
            ("bookshelf", 1, 1),
            ("floor_lamp", 1, 1),
            ("chair", 2, 3),
            ("door", 1, 1),
            ("window", 2, 2),
            ("light_switch", 1, 1),
            ("curtain", 2, 2),
            ("rug", 1, 2),
            ("plant", 1, 3),
            ("wall_picture", 2, 3),
        ],
        "bedroom" => &[
            ("bed", 1, 1),
            ("nightstand", 1, 2),
            ("wardrobe", 1, 1),
            ("dresser", 1, 1),
            ("table_lamp", 1, 1),
            ("chair", 1, 2),
            ("door", 1, 1),
            ("window", 1, 2),
            ("light_switch", 1, 1),
            ("curtain", 1, 2),
            ("rug", 1, 1),
            ("plant", 1, 2),
            ("wall_picture", 1, 3),
        ],
        "bathroom" => &[
            ("bathroom_counter", 1, 1),
            ("bathroom_cabinet", 1, 1),
            ("washing_machine", 1, 1),
            ("door", 1, 1),
            ("window", 1, 1),
            ("light_switch", 1, 1),
            ("rug", 1, 2),
            ("plant", 1, 1),
            ("wall_picture", 1, 2),
        ],
        "dining_room" => &[
            ("dining_table", 1, 1),
            ("chair", 4, 6),
            ("bookshelf", 1, 1),
            ("door", 1, 1),
            ("window", 2, 2),
            ("light_switch", 1, 1),
            ("curtain", 2, 2),
            ("rug", 1, 1),
            ("plant", 1, 2),
            ("wall_picture", 2, 3),
        ],
        "office" => &[
            ("desk", 1, 1),
            ("computer", 1, 1),
            ("bookshelf", 1, 2),
            ("table_lamp", 1, 1),
            ("floor_lamp", 1, 1),
            ("chair", 1, 2),
            ("door", 1, 1),
            ("window", 1, 2),
            ("light_switch", 1, 1),
            ("curtain", 1, 2),
            ("rug", 1, 1),
            ("plant", 1, 2),
            ("wall_picture", 1, 2),
        ],
        _ => &[],
    }
}

pub fn class_def(name: &str) -> Option<&'static ClassDef> {
    CLASSES.iter().find(|c| c.name == name)
}

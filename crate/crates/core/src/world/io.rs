use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    AttributeSet, Capabilities, Flag, ObjectClass, ObjectId, ObjectNode, RelationEdge, StateGraph,
    Violation, WorldError,
};

#[derive(Debug, Error)]
pub enum WorldFileError {
    #[error("world parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("world failed validation: {}", render(.0))]
    Validation(Vec<Violation>),
}

fn render(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldFile {
    objects: Vec<ObjectRecord>,
    edges: Vec<RelationEdge>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectRecord {
    id: ObjectId,
    class: String,
    #[serde(default)]
    capabilities: Capabilities,
    #[serde(default)]
    attributes: BTreeMap<String, bool>,
}

fn parse_error(message: impl Into<String>) -> WorldFileError {
    WorldFileError::Parse { line: 0, column: 0, message: message.into() }
}

fn decode_attributes(id: ObjectId, raw: &BTreeMap<String, bool>) -> Result<AttributeSet, WorldFileError> {
    let mut attrs = AttributeSet::new();
    for (key, value) in raw {
        let (flag, v) = match key.as_str() {
            "open" => (Flag::Open, *value),
            "closed" => (Flag::Open, !*value),
            "on" => (Flag::On, *value),
            "held" => (Flag::Held, *value),
            "clean" => (Flag::Clean, *value),
            other => {
                return Err(parse_error(format!("object {id}: unknown attribute {other:?}")));
            }
        };
        if attrs.get(flag).is_some_and(|prev| prev != v) {
            return Err(parse_error(format!("object {id}: open and closed disagree")));
        }
        attrs.set(flag, v);
    }
    Ok(attrs)
}

/// Parses and validates the JSON world format.
pub fn load_world(bytes: &[u8]) -> Result<StateGraph, WorldFileError> {
    let file: WorldFile = serde_json::from_slice(bytes).map_err(|e| WorldFileError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let mut nodes = Vec::with_capacity(file.objects.len());
    for rec in &file.objects {
        let class = ObjectClass::new(rec.class.clone())
            .map_err(|e| parse_error(format!("object {}: {e}", rec.id)))?;
        nodes.push(ObjectNode {
            id: rec.id,
            class,
            capabilities: rec.capabilities,
            attributes: decode_attributes(rec.id, &rec.attributes)?,
        });
    }

    let mut seen = BTreeSet::new();
    let mut violations: Vec<Violation> = file
        .edges
        .iter()
        .filter(|e| !seen.insert(**e))
        .map(|e| Violation::DuplicateEdge { edge: *e })
        .collect();

    let graph = StateGraph::new(nodes, file.edges).map_err(|e| match e {
        WorldError::DuplicateId(id) => parse_error(format!("duplicate object id {id}")),
        other => parse_error(other.to_string()),
    })?;
    violations.extend(graph.validate());
    if violations.is_empty() {
        Ok(graph)
    } else {
        Err(WorldFileError::Validation(violations))
    }
}

/// Canonical JSON: objects by id, edges sorted, attributes keyed by flag name.
pub fn save_world(graph: &StateGraph) -> Vec<u8> {
    let file = WorldFile {
        objects: graph
            .objects()
            .map(|o| ObjectRecord {
                id: o.id,
                class: o.class.to_string(),
                capabilities: o.capabilities,
                attributes: o.attributes.iter().map(|(f, v)| (f.name().to_string(), v)).collect(),
            })
            .collect(),
        edges: graph.edges().copied().collect(),
    };
    let mut out = serde_json::to_vec_pretty(&file).expect("world serializes");
    out.push(b'\n');
    out
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::kitchen;
    use super::*;

    #[test]
    fn round_trip_fixture() {
        let g = kitchen();
        let bytes = save_world(&g);
        assert_eq!(load_world(&bytes).unwrap(), g);
        assert_eq!(save_world(&load_world(&bytes).unwrap()), bytes);
    }

    #[test]
    fn truncated_json_is_a_parse_error() {
        let bytes = save_world(&kitchen());
        let cut = &bytes[..bytes.len() / 2];
        match load_world(cut) {
            Err(WorldFileError::Parse { line, .. }) => assert!(line > 0),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn dangling_edge_is_a_validation_error() {
        let text = r#"{"objects":[
            {"id":1,"class":"character","capabilities":["agent"]},
            {"id":2,"class":"kitchen","capabilities":["room"]}],
          "edges":[{"src":1,"dst":2,"kind":"IN_ROOM"},{"src":1,"dst":99,"kind":"NEAR"}]}"#;
        match load_world(text.as_bytes()) {
            Err(WorldFileError::Validation(v)) => {
                assert!(matches!(v[0], Violation::DanglingEdge { missing: ObjectId(99), .. }))
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn closed_alias_and_conflicts() {
        let ok = r#"{"objects":[
            {"id":1,"class":"character","capabilities":["agent"]},
            {"id":2,"class":"kitchen","capabilities":["room"]},
            {"id":3,"class":"fridge","capabilities":["openable","container"],"attributes":{"closed":true}}],
          "edges":[{"src":1,"dst":2,"kind":"IN_ROOM"},{"src":3,"dst":2,"kind":"IN_ROOM"}]}"#;
        let g = load_world(ok.as_bytes()).unwrap();
        assert_eq!(g.object(ObjectId(3)).unwrap().attributes.get(Flag::Open), Some(false));
        let bad = ok.replace(r#"{"closed":true}"#, r#"{"closed":true,"open":true}"#);
        assert!(matches!(load_world(bad.as_bytes()), Err(WorldFileError::Parse { .. })));
    }

    #[test]
    fn duplicate_edges_rejected() {
        let text = r#"{"objects":[
            {"id":1,"class":"character","capabilities":["agent"]},
            {"id":2,"class":"kitchen","capabilities":["room"]}],
          "edges":[{"src":1,"dst":2,"kind":"IN_ROOM"},{"src":1,"dst":2,"kind":"IN_ROOM"}]}"#;
        assert!(matches!(load_world(text.as_bytes()), Err(WorldFileError::Validation(_))));
    }

    mod props {
        use super::super::super::fixtures::walked;
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn save_load_round_trips(seed in 0u64..60, n in 4usize..300, steps in 0usize..30) {
                let g = walked(seed, n, steps);
                let bytes = save_world(&g);
                prop_assert_eq!(load_world(&bytes).unwrap(), g);
            }
        }
    }
}

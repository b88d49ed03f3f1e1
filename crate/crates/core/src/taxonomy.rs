//! Category hierarchy over object classes and the level-descent helper.
//!
//! Levels count down from a synthetic root at level 0. Level 1 holds the
//! broadest categories; object classes sit at the deepest level `L`, which is
//! the same for every class (shallow branches are padded with pass-through
//! categories when the tree is built).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::{is_token, ObjectClass, ObjectId, StateGraph};

/// Name of the synthetic level-0 node. Not a valid class token, so it can
/// never collide with a category or class name.
pub const ROOT: &str = "<root>";

/// Nested category tree as written in taxonomy JSON: a category maps either to
/// further categories or to a list of class names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TaxonomySpec {
    Categories(BTreeMap<String, TaxonomySpec>),
    Classes(Vec<String>),
}

impl TaxonomySpec {
    pub fn from_json(bytes: &[u8]) -> Result<Self, TaxonomyError> {
        match serde_json::from_slice(bytes).map_err(|e| TaxonomyError::Parse(e.to_string()))? {
            spec @ TaxonomySpec::Categories(_) => Ok(spec),
            TaxonomySpec::Classes(_) => Err(TaxonomyError::Parse(
                "top level must be an object of categories".into(),
            )),
        }
    }

    /// The taxonomy covering the benchmark generator's class registry.
    pub fn household() -> Self {
        Self::from_json(include_bytes!("../data/taxonomy.json")).expect("bundled taxonomy parses")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaxonomyError {
    #[error("taxonomy parse error: {0}")]
    Parse(String),
    #[error("class {0:?} from the registry is missing from the taxonomy")]
    MissingClass(String),
    #[error("class {0:?} appears more than once in the taxonomy")]
    DuplicateClass(String),
    #[error("category {0:?} appears more than once in the taxonomy")]
    DuplicateCategory(String),
    #[error("category {0:?} is nested inside itself")]
    CycleDetected(String),
    #[error("name {0:?} is used both as a category and as a class")]
    NameCollision(String),
    #[error("category {0:?} is empty")]
    EmptyCategory(String),
    #[error("invalid taxonomy name {0:?}")]
    BadName(String),
    #[error("node {name:?} is not at level {level}")]
    UnknownNode { name: String, level: usize },
    #[error("level {0} is the class level; there is nothing below it")]
    LevelOverflow(usize),
}

#[derive(Clone, Debug)]
struct Node {
    name: String,
    parent: Option<usize>,
    children: Vec<usize>,
    level: usize,
}

/// Category tree with class leaves at a uniform depth.
#[derive(Clone, Debug)]
pub struct TaxonomyGraph {
    nodes: Vec<Node>,
    index: BTreeMap<String, usize>,
    depth: usize,
}

/// One level of descent: what was offered and what was kept.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSelection {
    pub level: usize,
    pub candidates: Vec<String>,
    pub selected: Vec<String>,
}

/// Builds and validates a taxonomy, padding shallow branches so that every
/// class sits at the same depth.
pub fn build_taxonomy(
    spec: &TaxonomySpec,
    registry: &BTreeSet<ObjectClass>,
) -> Result<TaxonomyGraph, TaxonomyError> {
    let TaxonomySpec::Categories(top) = spec else {
        return Err(TaxonomyError::Parse("top level must be an object of categories".into()));
    };

    // First pass: collect names, reject duplicates and cycles, find depth.
    let mut categories = BTreeSet::new();
    let mut classes = BTreeSet::new();
    let mut depth = 0;
    scan(top, &mut Vec::new(), &mut categories, &mut classes, &mut depth)?;
    if let Some(both) = categories.intersection(&classes).next() {
        return Err(TaxonomyError::NameCollision(both.clone()));
    }
    for c in registry {
        if !classes.contains(c.as_str()) {
            return Err(TaxonomyError::MissingClass(c.to_string()));
        }
    }

    let mut g = TaxonomyGraph {
        nodes: vec![Node { name: ROOT.into(), parent: None, children: vec![], level: 0 }],
        index: BTreeMap::from([(ROOT.to_string(), 0)]),
        depth,
    };
    let mut taken: BTreeSet<String> = categories.union(&classes).cloned().collect();
    g.insert_categories(0, top, &mut taken);
    let names: Vec<String> = g.nodes.iter().map(|n| n.name.clone()).collect();
    for node in &mut g.nodes {
        node.children.sort_by(|a, b| names[*a].cmp(&names[*b]));
    }
    Ok(g)
}

fn scan(
    cats: &BTreeMap<String, TaxonomySpec>,
    path: &mut Vec<String>,
    categories: &mut BTreeSet<String>,
    classes: &mut BTreeSet<String>,
    depth: &mut usize,
) -> Result<(), TaxonomyError> {
    for (name, sub) in cats {
        if !is_token(name) {
            return Err(TaxonomyError::BadName(name.clone()));
        }
        if path.contains(name) {
            return Err(TaxonomyError::CycleDetected(name.clone()));
        }
        if !categories.insert(name.clone()) {
            return Err(TaxonomyError::DuplicateCategory(name.clone()));
        }
        path.push(name.clone());
        match sub {
            TaxonomySpec::Categories(inner) if inner.is_empty() => {
                return Err(TaxonomyError::EmptyCategory(name.clone()))
            }
            TaxonomySpec::Classes(list) if list.is_empty() => {
                return Err(TaxonomyError::EmptyCategory(name.clone()))
            }
            TaxonomySpec::Categories(inner) => scan(inner, path, categories, classes, depth)?,
            TaxonomySpec::Classes(list) => {
                for class in list {
                    if !is_token(class) {
                        return Err(TaxonomyError::BadName(class.clone()));
                    }
                    if path.contains(class) {
                        return Err(TaxonomyError::CycleDetected(class.clone()));
                    }
                    if !classes.insert(class.clone()) {
                        return Err(TaxonomyError::DuplicateClass(class.clone()));
                    }
                }
                *depth = (*depth).max(path.len() + 1);
            }
        }
        path.pop();
    }
    Ok(())
}

impl TaxonomyGraph {
    fn add(&mut self, name: String, parent: usize) -> usize {
        let id = self.nodes.len();
        let level = self.nodes[parent].level + 1;
        self.nodes.push(Node { name: name.clone(), parent: Some(parent), children: vec![], level });
        self.nodes[parent].children.push(id);
        self.index.insert(name, id);
        id
    }

    fn insert_categories(&mut self, parent: usize, cats: &BTreeMap<String, TaxonomySpec>, taken: &mut BTreeSet<String>) {
        for (name, sub) in cats {
            let id = self.add(name.clone(), parent);
            match sub {
                TaxonomySpec::Categories(inner) => self.insert_categories(id, inner, taken),
                TaxonomySpec::Classes(list) => {
                    // pad so classes land exactly at `depth`
                    let mut host = id;
                    while self.nodes[host].level + 1 < self.depth {
                        let pad = pass_through_name(name, self.nodes[host].level + 1, taken);
                        host = self.add(pad, host);
                    }
                    for class in list {
                        self.add(class.clone(), host);
                    }
                }
            }
        }
    }

    /// Depth `L` of the class level.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn level_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).map(|i| self.nodes[*i].level)
    }

    pub fn is_class(&self, name: &str) -> bool {
        self.level_of(name) == Some(self.depth)
    }

    /// All node names at `level`, sorted.
    pub fn nodes_at(&self, level: usize) -> Vec<String> {
        let mut v: Vec<_> = self
            .nodes
            .iter()
            .filter(|n| n.level == level)
            .map(|n| n.name.clone())
            .collect();
        v.sort();
        v
    }

    pub fn classes(&self) -> Vec<String> {
        self.nodes_at(self.depth)
    }

    /// Parent of a node, or `None` for the root / unknown names.
    pub fn parent(&self, name: &str) -> Option<&str> {
        let n = &self.nodes[*self.index.get(name)?];
        n.parent.map(|p| self.nodes[p].name.as_str())
    }

    /// Categories above `name`, nearest first, excluding the root.
    pub fn ancestors(&self, name: &str) -> Vec<&str> {
        let mut out = Vec::new();
        let Some(mut cur) = self.index.get(name).copied() else {
            return out;
        };
        while let Some(p) = self.nodes[cur].parent {
            if p == 0 {
                break;
            }
            out.push(self.nodes[p].name.as_str());
            cur = p;
        }
        out
    }

    /// Children (next level down) of the selected level-`level` nodes, sorted
    /// and deduplicated.
    pub fn psi<S: AsRef<str>>(&self, level: usize, selected: &[S]) -> Result<Vec<String>, TaxonomyError> {
        if level >= self.depth {
            return Err(TaxonomyError::LevelOverflow(level));
        }
        let mut out = BTreeSet::new();
        for name in selected {
            let name = name.as_ref();
            let node = self
                .index
                .get(name)
                .map(|i| &self.nodes[*i])
                .filter(|n| n.level == level)
                .ok_or_else(|| TaxonomyError::UnknownNode { name: name.to_string(), level })?;
            out.extend(node.children.iter().map(|c| self.nodes[*c].name.clone()));
        }
        Ok(out.into_iter().collect())
    }
}

fn pass_through_name(category: &str, level: usize, taken: &mut BTreeSet<String>) -> String {
    let base = format!("{category}_l{level}");
    let mut name = base.clone();
    let mut k = 2;
    while taken.contains(&name) {
        name = format!("{base}_{k}");
        k += 1;
    }
    taken.insert(name.clone());
    name
}

/// Every object whose class is in `classes`. Names that are not object classes
/// of the world (rooms, agents, typos) contribute nothing.
pub fn instances_of_classes<S: AsRef<str>>(world: &StateGraph, classes: &[S]) -> BTreeSet<ObjectId> {
    let wanted: BTreeSet<&str> = classes.iter().map(|c| c.as_ref()).collect();
    let mut out = BTreeSet::new();
    let mut matched = BTreeSet::new();
    for o in world.objects() {
        if wanted.contains(o.class.as_str()) {
            if o.is_room() || o.is_agent() {
                continue;
            }
            matched.insert(o.class.as_str());
            out.insert(o.id);
        }
    }
    for c in wanted.difference(&matched) {
        log::debug!("class {c:?} has no selectable instances in this world");
    }
    out
}

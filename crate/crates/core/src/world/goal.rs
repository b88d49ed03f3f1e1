use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{is_token, Flag, ObjectClass, ObjectId, RelationKind, StateGraph};

/// Reference to goal participants: any instance of a class, or one object.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectRef {
    Class(ObjectClass),
    /// A specific object. `label` is the optional `class#id` prefix, checked
    /// against the world when evaluating.
    Instance { id: ObjectId, label: Option<ObjectClass> },
}

impl ObjectRef {
    pub fn id(id: ObjectId) -> Self {
        ObjectRef::Instance { id, label: None }
    }

    pub fn labelled(id: ObjectId, class: ObjectClass) -> Self {
        ObjectRef::Instance { id, label: Some(class) }
    }

    pub fn class(name: &str) -> Result<Self, GoalError> {
        ObjectClass::new(name)
            .map(ObjectRef::Class)
            .map_err(|_| GoalError::Syntax(format!("bad class name {name:?}")))
    }

    fn key(&self) -> RefKey<'_> {
        match self {
            ObjectRef::Class(c) => RefKey::Class(c.as_str()),
            ObjectRef::Instance { id, .. } => RefKey::Id(*id),
        }
    }

    /// Ids this reference resolves to in `g`.
    pub fn resolve(&self, g: &StateGraph) -> Result<Vec<ObjectId>, GoalError> {
        match self {
            ObjectRef::Class(c) => {
                let ids: Vec<_> = g.instances_of(c.as_str()).collect();
                if ids.is_empty() {
                    Err(GoalError::UnknownClass(c.to_string()))
                } else {
                    Ok(ids)
                }
            }
            ObjectRef::Instance { id, label } => {
                let node = g.object(*id).ok_or(GoalError::UnknownId(*id))?;
                if let Some(label) = label {
                    if &node.class != label {
                        return Err(GoalError::LabelMismatch {
                            id: *id,
                            label: label.to_string(),
                            actual: node.class.to_string(),
                        });
                    }
                }
                Ok(vec![*id])
            }
        }
    }
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
enum RefKey<'a> {
    Class(&'a str),
    Id(ObjectId),
}

impl fmt::Display for ObjectRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectRef::Class(c) => write!(f, "{c}"),
            ObjectRef::Instance { id, label: Some(c) } => write!(f, "{c}#{id}"),
            ObjectRef::Instance { id, label: None } => write!(f, "#{id}"),
        }
    }
}

impl FromStr for ObjectRef {
    type Err = GoalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s.split_once('#') {
            Some((label, id)) => {
                let id: u32 = id
                    .parse()
                    .map_err(|_| GoalError::Syntax(format!("bad object id in {s:?}")))?;
                if label.is_empty() {
                    Ok(ObjectRef::id(ObjectId(id)))
                } else {
                    let class = ObjectClass::new(label)
                        .map_err(|_| GoalError::Syntax(format!("bad class label in {s:?}")))?;
                    Ok(ObjectRef::labelled(ObjectId(id), class))
                }
            }
            None if is_token(s) => ObjectRef::class(s),
            None => Err(GoalError::Syntax(format!("bad object reference {s:?}"))),
        }
    }
}

/// Surface predicates of the goal DSL.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predicate {
    On,
    Inside,
    Open,
    Closed,
    SwitchedOn,
    Held,
    Clean,
}

impl Predicate {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "on" => Predicate::On,
            "inside" => Predicate::Inside,
            "open" => Predicate::Open,
            "closed" => Predicate::Closed,
            "switched_on" => Predicate::SwitchedOn,
            "held" => Predicate::Held,
            "clean" => Predicate::Clean,
            _ => return None,
        })
    }
}

/// One boolean test. A class-level reference holds if any instance passes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "snake_case")]
pub enum GoalCondition {
    Attribute { object: ObjectRef, flag: Flag, value: bool },
    Relation { src: ObjectRef, dst: ObjectRef, kind: RelationKind, value: bool },
}

impl GoalCondition {
    pub fn attribute(object: ObjectRef, flag: Flag, value: bool) -> Self {
        GoalCondition::Attribute { object, flag, value }
    }

    pub fn relation(src: ObjectRef, dst: ObjectRef, kind: RelationKind, value: bool) -> Self {
        GoalCondition::Relation { src, dst, kind, value }
    }

    pub fn refs(&self) -> Vec<&ObjectRef> {
        match self {
            GoalCondition::Attribute { object, .. } => vec![object],
            GoalCondition::Relation { src, dst, .. } => vec![src, dst],
        }
    }

    fn value(&self) -> bool {
        match self {
            GoalCondition::Attribute { value, .. } | GoalCondition::Relation { value, .. } => *value,
        }
    }

    fn test_key(&self) -> (u8, u8, RefKey<'_>, Option<RefKey<'_>>) {
        match self {
            GoalCondition::Attribute { object, flag, .. } => (0, *flag as u8, object.key(), None),
            GoalCondition::Relation { src, dst, kind, .. } => {
                (1, *kind as u8, src.key(), Some(dst.key()))
            }
        }
    }

    pub fn holds(&self, g: &StateGraph) -> Result<bool, GoalError> {
        match self {
            GoalCondition::Attribute { object, flag, value } => {
                let ids = object.resolve(g)?;
                Ok(ids.iter().any(|id| {
                    let o = g.object(*id).expect("resolved");
                    flag.permitted_by(o.capabilities) && o.attributes.value(*flag) == *value
                }))
            }
            GoalCondition::Relation { src, dst, kind, value } => {
                let srcs = src.resolve(g)?;
                let dsts = dst.resolve(g)?;
                Ok(srcs.iter().any(|s| {
                    dsts.iter().any(|d| s != d && g.has_edge(*s, *d, *kind) == *value)
                }))
            }
        }
    }

    /// Natural-language rendering used in oracle prompts.
    pub fn describe(&self, g: Option<&StateGraph>) -> String {
        let name = |r: &ObjectRef| describe_ref(r, g);
        match self {
            GoalCondition::Attribute { object, flag, value } => {
                let state = match (flag, value) {
                    (Flag::Open, true) => "open",
                    (Flag::Open, false) => "closed",
                    (Flag::On, true) => "switched on",
                    (Flag::On, false) => "switched off",
                    (Flag::Held, true) => "held by the agent",
                    (Flag::Held, false) => "not held",
                    (Flag::Clean, true) => "clean",
                    (Flag::Clean, false) => "dirty",
                };
                format!("{} is {state}", name(object))
            }
            GoalCondition::Relation { src, dst, kind, value } => {
                let neg = if *value { "" } else { "not " };
                format!("{} is {neg}{} the {}", name(src), kind_phrase(*kind), name(dst))
            }
        }
    }
}

pub(crate) fn kind_phrase(kind: RelationKind) -> &'static str {
    match kind {
        RelationKind::Inside => "inside",
        RelationKind::On => "on",
        RelationKind::HeldBy => "held by",
        RelationKind::Near => "near",
        RelationKind::InRoom => "in",
    }
}

fn describe_ref(r: &ObjectRef, g: Option<&StateGraph>) -> String {
    match r {
        ObjectRef::Class(c) => format!("any {c}"),
        ObjectRef::Instance { id, label } => {
            let class = label
                .as_ref()
                .map(|c| c.to_string())
                .or_else(|| g.and_then(|g| g.object(*id)).map(|o| o.class.to_string()))
                .unwrap_or_else(|| "object".to_string());
            format!("{class} ({id})")
        }
    }
}

impl fmt::Display for GoalCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GoalCondition::Attribute { object, flag, value } => {
                let (pred, v) = match flag {
                    Flag::Open if *value => ("open", true),
                    Flag::Open => ("closed", true),
                    Flag::On => ("switched_on", *value),
                    Flag::Held => ("held", *value),
                    Flag::Clean => ("clean", *value),
                };
                write!(f, "{pred}({object})={v}")
            }
            GoalCondition::Relation { src, dst, kind, value } => {
                let pred = match kind {
                    RelationKind::On => "on",
                    RelationKind::Inside => "inside",
                    // Not expressible in the DSL; still printable for logs.
                    other => return write!(f, "{}({src},{dst})={value}", other.name().to_lowercase()),
                };
                write!(f, "{pred}({src},{dst})={value}")
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GoalError {
    #[error("goal syntax error: {0}")]
    Syntax(String),
    #[error("goal has no conditions")]
    Empty,
    #[error("contradictory goal conditions: {0} vs {1}")]
    Contradiction(String, String),
    #[error("goal references class {0:?} absent from the world")]
    UnknownClass(String),
    #[error("goal references missing object {0}")]
    UnknownId(ObjectId),
    #[error("object {id} is a {actual}, goal labels it {label}")]
    LabelMismatch { id: ObjectId, label: String, actual: String },
}

/// Conjunction of [`GoalCondition`]s; the goal set is every state passing all.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<GoalCondition>", into = "Vec<GoalCondition>")]
pub struct GoalSpec {
    conditions: Vec<GoalCondition>,
}

impl GoalSpec {
    pub fn new(conditions: Vec<GoalCondition>) -> Result<Self, GoalError> {
        if conditions.is_empty() {
            return Err(GoalError::Empty);
        }
        let mut seen: BTreeMap<_, &GoalCondition> = BTreeMap::new();
        for c in &conditions {
            if let Some(prev) = seen.insert(c.test_key(), c) {
                if prev.value() != c.value() {
                    return Err(GoalError::Contradiction(prev.to_string(), c.to_string()));
                }
            }
        }
        Ok(Self { conditions })
    }

    pub fn conditions(&self) -> &[GoalCondition] {
        &self.conditions
    }

    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    /// Every object id named directly by the goal.
    pub fn referenced_ids(&self) -> Vec<ObjectId> {
        let mut ids: Vec<_> = self
            .conditions
            .iter()
            .flat_map(|c| c.refs())
            .filter_map(|r| match r {
                ObjectRef::Instance { id, .. } => Some(*id),
                ObjectRef::Class(_) => None,
            })
            .collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn referenced_classes(&self) -> Vec<&ObjectClass> {
        let mut cs: Vec<_> = self
            .conditions
            .iter()
            .flat_map(|c| c.refs())
            .filter_map(|r| match r {
                ObjectRef::Class(c) => Some(c),
                ObjectRef::Instance { .. } => None,
            })
            .collect();
        cs.sort();
        cs.dedup();
        cs
    }

    /// Checks that every reference resolves in `g`.
    pub fn check_against(&self, g: &StateGraph) -> Result<(), GoalError> {
        for c in &self.conditions {
            for r in c.refs() {
                r.resolve(g)?;
            }
        }
        Ok(())
    }

    /// Prompt text: one sentence per condition, joined with "and".
    pub fn describe(&self, g: Option<&StateGraph>) -> String {
        self.conditions
            .iter()
            .map(|c| c.describe(g))
            .collect::<Vec<_>>()
            .join(" and ")
    }
}

impl TryFrom<Vec<GoalCondition>> for GoalSpec {
    type Error = GoalError;
    fn try_from(v: Vec<GoalCondition>) -> Result<Self, Self::Error> {
        GoalSpec::new(v)
    }
}

impl From<GoalSpec> for Vec<GoalCondition> {
    fn from(g: GoalSpec) -> Self {
        g.conditions
    }
}

impl fmt::Display for GoalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.conditions.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for GoalSpec {
    type Err = GoalError;

    /// Parses `pred(arg[,arg])=true|false` terms separated by commas.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut conditions = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let open = rest
                .find('(')
                .ok_or_else(|| GoalError::Syntax(format!("expected '(' in {rest:?}")))?;
            let close = rest[open..]
                .find(')')
                .map(|i| i + open)
                .ok_or_else(|| GoalError::Syntax(format!("unclosed '(' in {rest:?}")))?;
            let pred_name = rest[..open].trim();
            let pred = Predicate::parse(pred_name)
                .ok_or_else(|| GoalError::Syntax(format!("unknown predicate {pred_name:?}")))?;
            let args: Vec<ObjectRef> = rest[open + 1..close]
                .split(',')
                .map(str::parse)
                .collect::<Result<_, _>>()?;
            let after = rest[close + 1..].trim_start();
            let after = after
                .strip_prefix('=')
                .ok_or_else(|| GoalError::Syntax(format!("expected '=' after {pred_name}(...)")))?
                .trim_start();
            let (value, tail) = if let Some(t) = after.strip_prefix("true") {
                (true, t)
            } else if let Some(t) = after.strip_prefix("false") {
                (false, t)
            } else {
                return Err(GoalError::Syntax(format!("expected true|false in {after:?}")));
            };
            conditions.push(make_condition(pred, args, value)?);
            rest = tail.trim_start();
            if let Some(t) = rest.strip_prefix(',') {
                rest = t.trim_start();
                if rest.is_empty() {
                    return Err(GoalError::Syntax("trailing comma".into()));
                }
            } else if !rest.is_empty() {
                return Err(GoalError::Syntax(format!("unexpected {rest:?}")));
            }
        }
        GoalSpec::new(conditions)
    }
}

fn make_condition(pred: Predicate, mut args: Vec<ObjectRef>, value: bool) -> Result<GoalCondition, GoalError> {
    let arity = match pred {
        Predicate::On | Predicate::Inside => 2,
        _ => 1,
    };
    if args.len() != arity {
        return Err(GoalError::Syntax(format!(
            "{pred:?} takes {arity} argument(s), got {}",
            args.len()
        )));
    }
    Ok(match pred {
        Predicate::On | Predicate::Inside => {
            let dst = args.pop().expect("arity");
            let src = args.pop().expect("arity");
            let kind = if pred == Predicate::On { RelationKind::On } else { RelationKind::Inside };
            GoalCondition::relation(src, dst, kind, value)
        }
        Predicate::Open => GoalCondition::attribute(args.remove(0), Flag::Open, value),
        Predicate::Closed => GoalCondition::attribute(args.remove(0), Flag::Open, !value),
        Predicate::SwitchedOn => GoalCondition::attribute(args.remove(0), Flag::On, value),
        Predicate::Held => GoalCondition::attribute(args.remove(0), Flag::Held, value),
        Predicate::Clean => GoalCondition::attribute(args.remove(0), Flag::Clean, value),
    })
}

/// True iff every condition holds in `g`.
pub fn satisfies(g: &StateGraph, goal: &GoalSpec) -> Result<bool, GoalError> {
    goal.check_against(g)?;
    for c in goal.conditions() {
        if !c.holds(g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

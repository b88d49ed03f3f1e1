use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::world::{ObjectId, RelationEdge, StateGraph};

const PREAMBLE: &str = "You are helping a household robot decide which parts of its environment \
matter for a task.";

/// One level of taxonomy descent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyQuery {
    pub level: usize,
    /// True when the candidates are object classes rather than categories.
    pub class_level: bool,
    pub candidates: Vec<String>,
    pub goal_text: String,
}

/// One frontier-expansion step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationalQuery {
    pub selected_summary: Vec<String>,
    pub frontier_lines: Vec<String>,
    /// Frontier ids in ascending order; the legal answers.
    pub frontier: Vec<ObjectId>,
    pub goal_text: String,
}

/// Per-step action choice for the policy planner.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionQuery {
    pub goal_text: String,
    pub object_lines: Vec<String>,
    pub relation_lines: Vec<String>,
    pub actions: Vec<String>,
}

#[derive(Clone, Copy, Debug)]
pub enum Request<'a> {
    Taxonomy(&'a TaxonomyQuery),
    Relational(&'a RelationalQuery),
    Action(&'a ActionQuery),
}

impl Request<'_> {
    pub fn kind(&self) -> QueryKind {
        match self {
            Request::Taxonomy(_) => QueryKind::Taxonomy,
            Request::Relational(_) => QueryKind::Relational,
            Request::Action(_) => QueryKind::Action,
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            Request::Taxonomy(_) => Mode::Names,
            Request::Relational(_) | Request::Action(_) => Mode::Ids,
        }
    }

    pub fn prompt(&self) -> String {
        match self {
            Request::Taxonomy(q) => render_taxonomy_prompt(q),
            Request::Relational(q) => render_relational_prompt(q),
            Request::Action(q) => render_action_prompt(q),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    Taxonomy,
    Relational,
    Action,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Names,
    Ids,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Selection {
    Names(Vec<String>),
    Ids(Vec<u32>),
}

impl Selection {
    pub fn len(&self) -> usize {
        match self {
            Selection::Names(v) => v.len(),
            Selection::Ids(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The JSON array a well-behaved oracle would reply with.
    pub fn render(&self) -> String {
        match self {
            Selection::Names(v) => serde_json::to_string(v),
            Selection::Ids(v) => serde_json::to_string(v),
        }
        .expect("selection serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionResponse {
    pub raw: String,
    pub parsed: Option<Selection>,
}

impl SelectionResponse {
    pub fn parse_ok(&self) -> bool {
        self.parsed.is_some()
    }
}

pub fn render_taxonomy_prompt(q: &TaxonomyQuery) -> String {
    let (label, noun) = if q.class_level {
        ("Objects", "object type")
    } else {
        ("Categories", "category")
    };
    format!(
        "{PREAMBLE}\n\
         Goal: {goal}.\n\n\
         {label}: {list}\n\n\
         Select every {noun} from the list that could be needed to achieve the goal, \
         including things that hold, contain or support what is needed.\n\
         Reply with a JSON array of names taken from the list, for example [\"{example}\"]. \
         Do not add any other text.\n",
        goal = q.goal_text,
        list = q.candidates.join(", "),
        example = q.candidates.first().map(String::as_str).unwrap_or("name"),
    )
}

pub fn render_relational_prompt(q: &RelationalQuery) -> String {
    let mut lines = String::new();
    for l in &q.frontier_lines {
        lines.push_str(l);
        lines.push('\n');
    }
    format!(
        "{PREAMBLE}\n\
         Goal: {goal}.\n\n\
         Already selected: {selected}\n\n\
         Relationships between objects:\n{lines}\n\
         Select the ids of the objects that are not yet selected and are needed to achieve \
         the goal, for example because they contain or support a selected object.\n\
         Reply with a JSON array of integer ids, for example [{example}], or [] if none are \
         needed. Do not add any other text.\n",
        goal = q.goal_text,
        selected = q.selected_summary.join(", "),
        example = q.frontier.first().map(|i| i.0).unwrap_or(0),
    )
}

pub fn render_action_prompt(q: &ActionQuery) -> String {
    let mut out = format!(
        "You are controlling a household robot with a single hand.\nGoal: {}.\n\nObjects:\n",
        q.goal_text
    );
    for l in &q.object_lines {
        out.push_str(l);
        out.push('\n');
    }
    out.push_str("\nRelationships between objects:\n");
    for l in &q.relation_lines {
        out.push_str(l);
        out.push('\n');
    }
    out.push_str("\nAvailable actions:\n");
    for (i, a) in q.actions.iter().enumerate() {
        out.push_str(&format!("{i}: {a}\n"));
    }
    out.push_str(
        "\nChoose the next action. Reply with a JSON array holding the index of exactly one \
         action, for example [0]. Do not add any other text.\n",
    );
    out
}

/// "class (id)" as used throughout prompts.
pub fn object_label(world: &StateGraph, id: ObjectId) -> String {
    match world.object(id) {
        Some(o) => format!("{} ({})", o.class, id),
        None => format!("object ({id})"),
    }
}

/// "banana (34) is inside the fridge (70)".
pub fn relation_sentence(world: &StateGraph, e: &RelationEdge) -> String {
    format!(
        "{} is {} the {}",
        object_label(world, e.src),
        crate::world::kind_phrase(e.kind),
        object_label(world, e.dst)
    )
}

fn fenced_body(raw: &str) -> Option<&str> {
    let start = raw.find("```")?;
    let rest = &raw[start + 3..];
    // skip an info string such as `json`
    let body_start = rest.find('\n').map(|i| i + 1).unwrap_or(0);
    let rest = &rest[body_start..];
    let end = rest.find("```")?;
    Some(&rest[..end])
}

/// Parses an oracle reply: a bare JSON array, optionally inside a fenced code
/// block. Names are trimmed and lowercased; ids must be non-negative integers.
pub fn parse_selection(raw: &str, mode: Mode) -> SelectionResponse {
    let body = fenced_body(raw).unwrap_or(raw).trim();
    let parsed = serde_json::from_str::<Vec<Value>>(body).ok().and_then(|items| match mode {
        Mode::Names => items
            .iter()
            .map(|v| v.as_str().map(|s| s.trim().to_lowercase()))
            .collect::<Option<Vec<_>>>()
            .map(Selection::Names),
        Mode::Ids => items
            .iter()
            .map(|v| v.as_u64().and_then(|n| u32::try_from(n).ok()))
            .collect::<Option<Vec<_>>>()
            .map(Selection::Ids),
    });
    SelectionResponse { raw: raw.to_string(), parsed }
}

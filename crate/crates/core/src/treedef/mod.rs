//! Declarative tree documents (`.bt3.json`).
//!
//! A document names a root node and lists every node by id; composites
//! reference their children with `children`, decorators with `child`. Leaf
//! kinds that are not built in are declared under `custom_nodes` together
//! with their category:
//!
//! ```json
//! {
//!   "title": "minimal",
//!   "root": "act",
//!   "custom_nodes": [{ "kind": "Wave", "category": "action" }],
//!   "nodes": {
//!     "act": { "id": "act", "kind": "Wave" }
//!   }
//! }
//! ```
//!
//! [`parse_tree_document`] enforces the tree invariants, [`serialize_tree`]
//! writes the canonical form and [`Registry::build_tree`] turns a document
//! into a runnable [`crate::bt::BehaviorTree`].

mod build;
mod parse;

pub use build::{BuildContext, Registry};
pub use parse::parse_tree_document;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use crate::bt::NodeCategory;

/// Built-in kinds and their categories.
pub const BUILTIN_KINDS: [(&str, NodeCategory); 9] = [
    ("Sequence", NodeCategory::Composite),
    ("Priority", NodeCategory::Composite),
    ("MemSequence", NodeCategory::Composite),
    ("MemPriority", NodeCategory::Composite),
    ("Parallel", NodeCategory::Composite),
    ("LearningComposite", NodeCategory::Composite),
    ("Inverter", NodeCategory::Decorator),
    ("Repeater", NodeCategory::Decorator),
    ("LearningAction", NodeCategory::Action),
];

pub fn builtin_category(kind: &str) -> Option<NodeCategory> {
    BUILTIN_KINDS
        .iter()
        .find(|(k, _)| *k == kind)
        .map(|(_, c)| *c)
}

/// Scalar property value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl Scalar {
    pub fn type_name(&self) -> &'static str {
        match self {
            Scalar::Bool(_) => "boolean",
            Scalar::Int(_) => "integer",
            Scalar::Float(_) => "number",
            Scalar::Str(_) => "string",
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Scalar::Int(i) => Some(*i as f64),
            Scalar::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Scalar::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Scalar::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Int(i) => write!(f, "{i}"),
            Scalar::Float(x) => write!(f, "{x}"),
            Scalar::Str(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomKind {
    pub kind: String,
    pub category: NodeCategory,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub children: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub child: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, Scalar>,
}

impl NodeSpec {
    /// Child ids in tick order, whichever field holds them.
    pub fn child_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.children.iter().flatten().map(String::as_str).collect();
        ids.extend(self.child.as_deref());
        ids
    }

    pub fn display_name(&self) -> &str {
        self.title.as_deref().unwrap_or(&self.id)
    }
}

/// A validated tree document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDocument {
    pub title: String,
    #[serde(rename = "root")]
    pub root_id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub custom_nodes: Vec<CustomKind>,
    pub nodes: BTreeMap<String, NodeSpec>,
}

impl TreeDocument {
    /// Category of `kind`, built-in or declared in `custom_nodes`.
    pub fn category_of(&self, kind: &str) -> Option<NodeCategory> {
        builtin_category(kind).or_else(|| {
            self.custom_nodes
                .iter()
                .find(|c| c.kind == kind)
                .map(|c| c.category)
        })
    }

    pub fn root(&self) -> &NodeSpec {
        &self.nodes[&self.root_id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Canonical text: two-space indented JSON, nodes sorted by id, custom kinds
/// sorted by name, empty optional fields omitted, trailing newline.
pub fn serialize_tree(doc: &TreeDocument) -> String {
    let mut canonical = doc.clone();
    canonical.custom_nodes.sort_by(|a, b| a.kind.cmp(&b.kind));
    let mut text = serde_json::to_string_pretty(&canonical).expect("documents always serialize");
    text.push('\n');
    text
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TreeDefError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("node key '{key}' does not match its id '{id}'")]
    IdMismatch { key: String, id: String },
    #[error("root '{0}' is not a node of the document")]
    RootMissing(String),
    #[error("node '{node}' has unknown kind '{kind}'")]
    UnknownKind { node: String, kind: String },
    #[error("node '{parent}' references missing child '{child}'")]
    DanglingChild { parent: String, child: String },
    #[error("node '{node}' has more than one parent: {parents:?}")]
    MultiParent { node: String, parents: Vec<String> },
    #[error("cycle through node '{node}'")]
    Cycle { node: String },
    #[error("node '{node}' is not reachable from the root")]
    Unreachable { node: String },
    #[error("node '{node}' ({category}) has invalid children: {detail}")]
    Arity {
        node: String,
        category: NodeCategory,
        detail: String,
    },
    #[error("kind '{kind}' is not registered")]
    UnregisteredKind { kind: String },
    #[error("kind '{kind}' is declared as {declared} but registered as {registered}")]
    CategoryMismatch {
        kind: String,
        declared: NodeCategory,
        registered: NodeCategory,
    },
    #[error("node '{node}' is missing required property '{key}'")]
    MissingProperty { node: String, key: String },
    #[error("node '{node}': property '{key}' must be {expected}, found {found}")]
    PropertyType {
        node: String,
        key: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("node '{node}': property '{key}' is invalid: {message}")]
    InvalidProperty {
        node: String,
        key: String,
        message: String,
    },
    #[error("node '{node}': no {what} registered under '{name}'")]
    UnknownBinding {
        node: String,
        what: &'static str,
        name: String,
    },
    #[error("tree assembly failed: {0}")]
    Tree(#[from] crate::bt::TreeError),
}

impl TreeDefError {
    /// Stable machine-readable code, one per error class.
    pub fn code(&self) -> &'static str {
        match self {
            TreeDefError::Syntax { .. } => "E_SYNTAX",
            TreeDefError::Schema(_) => "E_SCHEMA",
            TreeDefError::IdMismatch { .. } => "E_ID_MISMATCH",
            TreeDefError::RootMissing(_) => "E_ROOT_MISSING",
            TreeDefError::UnknownKind { .. } => "E_UNKNOWN_KIND",
            TreeDefError::DanglingChild { .. } => "E_DANGLING_CHILD",
            TreeDefError::MultiParent { .. } => "E_MULTI_PARENT",
            TreeDefError::Cycle { .. } => "E_CYCLE",
            TreeDefError::Unreachable { .. } => "E_UNREACHABLE",
            TreeDefError::Arity { .. } => "E_ARITY",
            TreeDefError::UnregisteredKind { .. } => "E_UNREGISTERED_KIND",
            TreeDefError::CategoryMismatch { .. } => "E_CATEGORY_MISMATCH",
            TreeDefError::MissingProperty { .. } => "E_MISSING_PROPERTY",
            TreeDefError::PropertyType { .. } => "E_PROPERTY_TYPE",
            TreeDefError::InvalidProperty { .. } => "E_INVALID_PROPERTY",
            TreeDefError::UnknownBinding { .. } => "E_UNKNOWN_BINDING",
            TreeDefError::Tree(_) => "E_TREE",
        }
    }
}

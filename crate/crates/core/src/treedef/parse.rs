use std::collections::{BTreeMap, BTreeSet};

use super::{builtin_category, TreeDefError, TreeDocument};
use crate::bt::NodeCategory;

/// Parses and validates a document. Checks run in a fixed order so each
/// malformed document reports one well-defined error: syntax, schema, ids,
/// kinds, arity, root, dangling references, shared children, cycles,
/// reachability.
pub fn parse_tree_document(text: &str) -> Result<TreeDocument, TreeDefError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| TreeDefError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    let doc: TreeDocument =
        serde_json::from_value(value).map_err(|e| TreeDefError::Schema(e.to_string()))?;
    validate(&doc)?;
    Ok(doc)
}

pub(super) fn validate(doc: &TreeDocument) -> Result<(), TreeDefError> {
    let mut declared = BTreeSet::new();
    for custom in &doc.custom_nodes {
        if builtin_category(&custom.kind).is_some() || !declared.insert(custom.kind.as_str()) {
            return Err(TreeDefError::Schema(format!(
                "custom kind '{}' is declared twice or shadows a built-in kind",
                custom.kind
            )));
        }
    }

    for (key, node) in &doc.nodes {
        if *key != node.id {
            return Err(TreeDefError::IdMismatch {
                key: key.clone(),
                id: node.id.clone(),
            });
        }
    }

    for node in doc.nodes.values() {
        let category = doc
            .category_of(&node.kind)
            .ok_or_else(|| TreeDefError::UnknownKind {
                node: node.id.clone(),
                kind: node.kind.clone(),
            })?;
        check_arity(node, category)?;
    }

    if !doc.nodes.contains_key(&doc.root_id) {
        return Err(TreeDefError::RootMissing(doc.root_id.clone()));
    }

    let mut parents: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for node in doc.nodes.values() {
        for child in node.child_ids() {
            if !doc.nodes.contains_key(child) {
                return Err(TreeDefError::DanglingChild {
                    parent: node.id.clone(),
                    child: child.to_string(),
                });
            }
            parents.entry(child).or_default().push(&node.id);
        }
    }
    if let Some((node, ps)) = parents.iter().find(|(_, ps)| ps.len() > 1) {
        return Err(TreeDefError::MultiParent {
            node: node.to_string(),
            parents: ps.iter().map(|p| p.to_string()).collect(),
        });
    }

    // every node now has at most one parent, so following parent links from
    // any node either ends at a parentless node or loops
    let parent_of: BTreeMap<&str, &str> = parents.iter().map(|(c, ps)| (*c, ps[0])).collect();
    for start in doc.nodes.keys() {
        let mut seen = BTreeSet::new();
        let mut cur = start.as_str();
        while let Some(p) = parent_of.get(cur) {
            if !seen.insert(cur) {
                return Err(TreeDefError::Cycle {
                    node: cur.to_string(),
                });
            }
            cur = p;
        }
    }

    let mut reachable = BTreeSet::new();
    let mut stack = vec![doc.root_id.as_str()];
    while let Some(id) = stack.pop() {
        if reachable.insert(id) {
            stack.extend(doc.nodes[id].child_ids());
        }
    }
    if let Some(orphan) = doc.nodes.keys().find(|k| !reachable.contains(k.as_str())) {
        return Err(TreeDefError::Unreachable {
            node: orphan.clone(),
        });
    }
    Ok(())
}

fn check_arity(node: &super::NodeSpec, category: NodeCategory) -> Result<(), TreeDefError> {
    let detail = match category {
        NodeCategory::Composite => match (&node.children, &node.child) {
            (_, Some(_)) => Some("composites list children under 'children'".to_string()),
            (None, None) => Some("composites need at least one child".to_string()),
            (Some(c), None) if c.is_empty() => {
                Some("composites need at least one child".to_string())
            }
            _ => None,
        },
        NodeCategory::Decorator => match (&node.children, &node.child) {
            (Some(_), _) => Some("decorators take a single 'child'".to_string()),
            (None, None) => Some("decorators need exactly one child".to_string()),
            _ => None,
        },
        NodeCategory::Action | NodeCategory::Condition => {
            let n = node.child_ids().len();
            (node.children.is_some() || node.child.is_some())
                .then(|| format!("leaves take no children, found {n}"))
        }
    };
    match detail {
        Some(detail) => Err(TreeDefError::Arity {
            node: node.id.clone(),
            category,
            detail,
        }),
        None => Ok(()),
    }
}

use std::any::Any;
use std::collections::HashMap;

use super::NodeId;

/// Per-node scratch storage shared by one tree instance.
///
/// Entries are keyed by the owning node, so a node can never observe another
/// node's state through the blackboard.
#[derive(Default)]
pub struct Blackboard {
    entries: HashMap<(NodeId, &'static str), Box<dyn Any + Send>>,
}

impl Blackboard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get<T: Any>(&self, node: NodeId, key: &'static str) -> Option<&T> {
        self.entries.get(&(node, key))?.downcast_ref()
    }

    pub fn get_mut<T: Any>(&mut self, node: NodeId, key: &'static str) -> Option<&mut T> {
        self.entries.get_mut(&(node, key))?.downcast_mut()
    }

    pub fn set<T: Any + Send>(&mut self, node: NodeId, key: &'static str, value: T) {
        self.entries.insert((node, key), Box::new(value));
    }

    /// Removes and returns an entry. A stored value of a different type is
    /// left in place and `None` is returned.
    pub fn take<T: Any>(&mut self, node: NodeId, key: &'static str) -> Option<T> {
        if !self.get::<T>(node, key).is_some() {
            return None;
        }
        let boxed = self.entries.remove(&(node, key))?;
        boxed.downcast().ok().map(|b| *b)
    }

    pub fn remove(&mut self, node: NodeId, key: &'static str) -> bool {
        self.entries.remove(&(node, key)).is_some()
    }

    pub fn contains(&self, node: NodeId, key: &'static str) -> bool {
        self.entries.contains_key(&(node, key))
    }

    /// Drops every entry owned by `node`.
    pub fn clear_node(&mut self, node: NodeId) {
        self.entries.retain(|(owner, _), _| *owner != node);
    }

    pub fn entries_for(&self, node: NodeId) -> usize {
        self.entries
            .keys()
            .filter(|(owner, _)| *owner == node)
            .count()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl std::fmt::Debug for Blackboard {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut keys: Vec<_> = self.entries.keys().collect();
        keys.sort();
        f.debug_struct("Blackboard").field("keys", &keys).finish()
    }
}

//! Behavior-tree structure and tick propagation.
//!
//! A [`BehaviorTree`] owns a single top-level [`TreeNode`]; every node carries a
//! boxed [`Behavior`] that decides how the tick travels through its children.
//! The world the leaves act on lives in the [`TickContext`] together with the
//! per-node [`Blackboard`].

mod blackboard;
mod composite;
mod decorator;
mod leaf;
mod status;

pub use blackboard::Blackboard;
pub use composite::{Parallel, Sequential, SequentialMode};
pub use decorator::{Inverter, Repeater};
pub use leaf::{Action, Condition};
pub use status::NodeStatus;

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::learning::LearningEvent;
use crate::rl::QLearner;

/// Identifier of a node inside one tree; assigned in pre-order when the tree
/// is assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    const UNASSIGNED: NodeId = NodeId(u32::MAX);
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeCategory {
    Composite,
    Decorator,
    Action,
    Condition,
}

impl NodeCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeCategory::Composite => "composite",
            NodeCategory::Decorator => "decorator",
            NodeCategory::Action => "action",
            NodeCategory::Condition => "condition",
        }
    }

    /// Whether `n` children is a legal arity for this category.
    pub fn accepts_children(self, n: usize) -> bool {
        match self {
            NodeCategory::Composite => n >= 1,
            NodeCategory::Decorator => n == 1,
            NodeCategory::Action | NodeCategory::Condition => n == 0,
        }
    }
}

impl fmt::Display for NodeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The tick algorithm of one node.
///
/// Composites and decorators tick their children through
/// [`TreeNode::tick`]; leaves ignore `children`.
pub trait Behavior<W>: Send {
    fn tick(
        &mut self,
        id: NodeId,
        children: &mut [TreeNode<W>],
        ctx: &mut TickContext<W>,
    ) -> NodeStatus;

    /// Called when an ancestor abandons this subtree while it may still be
    /// running. The default drops this node's blackboard entries and forwards
    /// the interruption to every child.
    fn interrupt(&mut self, id: NodeId, children: &mut [TreeNode<W>], ctx: &mut TickContext<W>) {
        ctx.blackboard.clear_node(id);
        for child in children {
            child.interrupt(ctx);
        }
    }

    /// Checks kind-specific parameters against the child count.
    fn validate(&self, _label: &str, _children: usize) -> Result<(), TreeError> {
        Ok(())
    }

    /// The Q-learner owned by this node, if it is a learning node.
    fn learner(&self) -> Option<&QLearner> {
        None
    }
}

/// One `(node, status)` pair, recorded when a node finishes its tick.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub tick: u64,
    pub node: NodeId,
    pub status: NodeStatus,
}

/// Everything a tick can touch: the world, the blackboard and bookkeeping.
pub struct TickContext<W> {
    pub world: W,
    pub blackboard: Blackboard,
    pub tick_counter: u64,
    /// Plain Sequence/Priority nodes interrupt a child that was RUNNING on the
    /// previous tick and is skipped on this one.
    pub notify_abandoned: bool,
    pub learning_log: Vec<LearningEvent>,
    trace: Option<Vec<TraceEntry>>,
}

impl<W> TickContext<W> {
    pub fn new(world: W) -> Self {
        Self {
            world,
            blackboard: Blackboard::new(),
            tick_counter: 0,
            notify_abandoned: true,
            learning_log: Vec::new(),
            trace: None,
        }
    }

    /// Starts recording a [`TraceEntry`] for every node tick.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn trace(&self) -> &[TraceEntry] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn take_trace(&mut self) -> Vec<TraceEntry> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Number of times `node` was ticked since tracing started.
    pub fn tick_count(&self, node: NodeId) -> usize {
        self.trace().iter().filter(|e| e.node == node).count()
    }

    fn record(&mut self, node: NodeId, status: NodeStatus) {
        let tick = self.tick_counter;
        if let Some(trace) = self.trace.as_mut() {
            trace.push(TraceEntry { tick, node, status });
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("node '{label}' ({category}) cannot have {found} children")]
    Arity {
        label: String,
        category: NodeCategory,
        found: usize,
    },
    #[error("parallel node '{label}' needs 1 <= S, F <= {children}, got S={success}, F={failure}")]
    ParallelThreshold {
        label: String,
        success: usize,
        failure: usize,
        children: usize,
    },
    #[error("repeater node '{label}' needs count >= 1")]
    RepeatCount { label: String },
}

pub struct TreeNode<W> {
    id: NodeId,
    label: String,
    category: NodeCategory,
    kind: String,
    children: Vec<TreeNode<W>>,
    behavior: Box<dyn Behavior<W>>,
}

impl<W: 'static> TreeNode<W> {
    pub fn new(
        category: NodeCategory,
        kind: impl Into<String>,
        behavior: impl Behavior<W> + 'static,
        children: Vec<TreeNode<W>>,
    ) -> Self {
        Self::from_boxed(category, kind, Box::new(behavior), children)
    }

    pub fn from_boxed(
        category: NodeCategory,
        kind: impl Into<String>,
        behavior: Box<dyn Behavior<W>>,
        children: Vec<TreeNode<W>>,
    ) -> Self {
        let kind = kind.into();
        Self {
            id: NodeId::UNASSIGNED,
            label: kind.clone(),
            category,
            kind,
            children,
            behavior,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn sequence(children: Vec<TreeNode<W>>) -> Self {
        Self::new(
            NodeCategory::Composite,
            "Sequence",
            Sequential::sequence(),
            children,
        )
    }

    pub fn priority(children: Vec<TreeNode<W>>) -> Self {
        Self::new(
            NodeCategory::Composite,
            "Priority",
            Sequential::priority(),
            children,
        )
    }

    pub fn mem_sequence(children: Vec<TreeNode<W>>) -> Self {
        Self::new(
            NodeCategory::Composite,
            "MemSequence",
            Sequential::mem_sequence(),
            children,
        )
    }

    pub fn mem_priority(children: Vec<TreeNode<W>>) -> Self {
        Self::new(
            NodeCategory::Composite,
            "MemPriority",
            Sequential::mem_priority(),
            children,
        )
    }

    pub fn parallel(success: usize, failure: usize, children: Vec<TreeNode<W>>) -> Self {
        Self::new(
            NodeCategory::Composite,
            "Parallel",
            Parallel::new(success, failure),
            children,
        )
    }

    pub fn inverter(child: TreeNode<W>) -> Self {
        Self::new(NodeCategory::Decorator, "Inverter", Inverter, vec![child])
    }

    pub fn repeater(count: u32, child: TreeNode<W>) -> Self {
        Self::new(
            NodeCategory::Decorator,
            "Repeater",
            Repeater::new(count),
            vec![child],
        )
    }

    pub fn action(
        kind: impl Into<String>,
        f: impl FnMut(&mut W) -> NodeStatus + Send + 'static,
    ) -> Self {
        Self::new(NodeCategory::Action, kind, Action::new(f), Vec::new())
    }

    pub fn condition(kind: impl Into<String>, f: impl Fn(&W) -> bool + Send + 'static) -> Self {
        Self::new(NodeCategory::Condition, kind, Condition::new(f), Vec::new())
    }
}

impl<W> TreeNode<W> {
    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn category(&self) -> NodeCategory {
        self.category
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn children(&self) -> &[TreeNode<W>] {
        &self.children
    }

    pub fn learner(&self) -> Option<&QLearner> {
        self.behavior.learner()
    }

    pub fn tick(&mut self, ctx: &mut TickContext<W>) -> NodeStatus {
        let mut status = self.behavior.tick(self.id, &mut self.children, ctx);
        if self.category == NodeCategory::Condition && status == NodeStatus::Running {
            // conditions are instantaneous; a RUNNING condition is a fault
            status = NodeStatus::Error;
        }
        ctx.record(self.id, status);
        status
    }

    pub fn interrupt(&mut self, ctx: &mut TickContext<W>) {
        self.behavior.interrupt(self.id, &mut self.children, ctx);
    }

    fn assign_ids(&mut self, next: &mut u32) {
        self.id = NodeId(*next);
        *next += 1;
        for child in &mut self.children {
            child.assign_ids(next);
        }
    }

    fn validate(&self) -> Result<(), TreeError> {
        if !self.category.accepts_children(self.children.len()) {
            return Err(TreeError::Arity {
                label: self.label.clone(),
                category: self.category,
                found: self.children.len(),
            });
        }
        self.behavior.validate(&self.label, self.children.len())?;
        self.children.iter().try_for_each(TreeNode::validate)
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a TreeNode<W>>) {
        out.push(self);
        for child in &self.children {
            child.collect(out);
        }
    }
}

impl<W> fmt::Debug for TreeNode<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TreeNode")
            .field("id", &self.id)
            .field("label", &self.label)
            .field("kind", &self.kind)
            .field("children", &self.children)
            .finish()
    }
}

/// A directed rooted tree. The implicit root has exactly one child, which is
/// the node ticked on every call to [`BehaviorTree::tick`].
pub struct BehaviorTree<W> {
    title: String,
    root_child: TreeNode<W>,
    size: usize,
}

impl<W> BehaviorTree<W> {
    /// Assigns node ids in pre-order and checks every arity constraint.
    /// Ownership of children makes cycles and shared parents impossible.
    pub fn new(mut root_child: TreeNode<W>) -> Result<Self, TreeError> {
        root_child.validate()?;
        let mut next = 0;
        root_child.assign_ids(&mut next);
        Ok(Self {
            title: String::new(),
            root_child,
            size: next as usize,
        })
    }

    pub fn with_title(mut self, title: impl Into<String>) -> Self {
        self.title = title.into();
        self
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn tick(&mut self, ctx: &mut TickContext<W>) -> NodeStatus {
        let status = self.root_child.tick(ctx);
        ctx.tick_counter += 1;
        status
    }

    /// Interrupts the whole tree, closing any open learning episodes.
    pub fn interrupt(&mut self, ctx: &mut TickContext<W>) {
        self.root_child.interrupt(ctx);
    }

    pub fn root_child(&self) -> &TreeNode<W> {
        &self.root_child
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// All nodes in pre-order; position `i` holds `NodeId(i)`.
    pub fn nodes(&self) -> Vec<&TreeNode<W>> {
        let mut out = Vec::with_capacity(self.size);
        self.root_child.collect(&mut out);
        out
    }

    pub fn node(&self, id: NodeId) -> Option<&TreeNode<W>> {
        self.nodes().into_iter().find(|n| n.id == id)
    }

    pub fn find_by_label(&self, label: &str) -> Option<&TreeNode<W>> {
        self.nodes().into_iter().find(|n| n.label == label)
    }
}

impl<W> fmt::Debug for BehaviorTree<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BehaviorTree")
            .field("title", &self.title)
            .field("root_child", &self.root_child)
            .finish()
    }
}

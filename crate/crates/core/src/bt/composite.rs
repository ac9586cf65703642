use super::{Behavior, NodeId, NodeStatus, TickContext, TreeError, TreeNode};

const RUNNING_CHILD: &str = "running_child";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SequentialMode {
    /// Stops at the first child that does not succeed.
    Sequence,
    /// Stops at the first child that does not fail.
    Priority,
}

/// Sequence, Priority and their memory variants.
///
/// Children are ticked left to right. The index of a child that returned
/// RUNNING is kept on the blackboard: memory variants resume from it on the
/// next tick, plain variants use it to interrupt a child they skipped.
#[derive(Clone, Copy, Debug)]
pub struct Sequential {
    mode: SequentialMode,
    memory: bool,
}

impl Sequential {
    pub fn new(mode: SequentialMode, memory: bool) -> Self {
        Self { mode, memory }
    }

    pub fn sequence() -> Self {
        Self::new(SequentialMode::Sequence, false)
    }

    pub fn priority() -> Self {
        Self::new(SequentialMode::Priority, false)
    }

    pub fn mem_sequence() -> Self {
        Self::new(SequentialMode::Sequence, true)
    }

    pub fn mem_priority() -> Self {
        Self::new(SequentialMode::Priority, true)
    }

    fn stops_on(&self, status: NodeStatus) -> bool {
        match status {
            NodeStatus::Running | NodeStatus::Error => true,
            NodeStatus::Failure => self.mode == SequentialMode::Sequence,
            NodeStatus::Success => self.mode == SequentialMode::Priority,
        }
    }

    fn exhausted_status(&self) -> NodeStatus {
        match self.mode {
            SequentialMode::Sequence => NodeStatus::Success,
            SequentialMode::Priority => NodeStatus::Failure,
        }
    }
}

impl<W> Behavior<W> for Sequential {
    fn tick(
        &mut self,
        id: NodeId,
        children: &mut [TreeNode<W>],
        ctx: &mut TickContext<W>,
    ) -> NodeStatus {
        let remembered = ctx.blackboard.take::<usize>(id, RUNNING_CHILD);
        let start = if self.memory {
            remembered.unwrap_or(0).min(children.len())
        } else {
            0
        };

        let mut result = self.exhausted_status();
        let mut decided_at = children.len();
        for (i, child) in children.iter_mut().enumerate().skip(start) {
            let status = child.tick(ctx);
            if self.stops_on(status) {
                result = status;
                decided_at = i;
                break;
            }
        }

        if result == NodeStatus::Running {
            ctx.blackboard.set(id, RUNNING_CHILD, decided_at);
        }
        if !self.memory && ctx.notify_abandoned {
            if let Some(previous) = remembered {
                // a child left behind to the right of this tick's stopping point
                if previous > decided_at && previous < children.len() {
                    children[previous].interrupt(ctx);
                }
            }
        }
        result
    }

    fn interrupt(&mut self, id: NodeId, children: &mut [TreeNode<W>], ctx: &mut TickContext<W>) {
        ctx.blackboard.clear_node(id);
        for child in children {
            child.interrupt(ctx);
        }
    }
}

/// Ticks every child each tick and resolves by thresholds: SUCCESS once at
/// least `success` children succeed, otherwise FAILURE once at least
/// `failure` fail, otherwise RUNNING. Holds no state between ticks.
#[derive(Clone, Copy, Debug)]
pub struct Parallel {
    success: usize,
    failure: usize,
}

impl Parallel {
    pub fn new(success: usize, failure: usize) -> Self {
        Self { success, failure }
    }

    pub fn success_threshold(&self) -> usize {
        self.success
    }

    pub fn failure_threshold(&self) -> usize {
        self.failure
    }
}

impl<W> Behavior<W> for Parallel {
    fn tick(
        &mut self,
        _id: NodeId,
        children: &mut [TreeNode<W>],
        ctx: &mut TickContext<W>,
    ) -> NodeStatus {
        let mut successes = 0;
        let mut failures = 0;
        for child in children.iter_mut() {
            match child.tick(ctx) {
                NodeStatus::Success => successes += 1,
                NodeStatus::Failure => failures += 1,
                NodeStatus::Running => {}
                NodeStatus::Error => return NodeStatus::Error,
            }
        }
        // success is checked first when both thresholds are reached
        if successes >= self.success {
            NodeStatus::Success
        } else if failures >= self.failure {
            NodeStatus::Failure
        } else {
            NodeStatus::Running
        }
    }

    fn validate(&self, label: &str, children: usize) -> Result<(), TreeError> {
        let in_range = |t: usize| (1..=children).contains(&t);
        if in_range(self.success) && in_range(self.failure) {
            Ok(())
        } else {
            Err(TreeError::ParallelThreshold {
                label: label.to_string(),
                success: self.success,
                failure: self.failure,
                children,
            })
        }
    }
}

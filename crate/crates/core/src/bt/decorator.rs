use super::{Behavior, NodeId, NodeStatus, TickContext, TreeError, TreeNode};

/// Swaps SUCCESS and FAILURE; RUNNING and ERROR pass through.
#[derive(Clone, Copy, Debug, Default)]
pub struct Inverter;

impl<W> Behavior<W> for Inverter {
    fn tick(
        &mut self,
        _id: NodeId,
        children: &mut [TreeNode<W>],
        ctx: &mut TickContext<W>,
    ) -> NodeStatus {
        match children[0].tick(ctx) {
            NodeStatus::Success => NodeStatus::Failure,
            NodeStatus::Failure => NodeStatus::Success,
            other => other,
        }
    }
}

const COMPLETED: &str = "completed";

/// Runs its child until it has terminated `count` times, reporting RUNNING in
/// between and the last terminal status at the end.
#[derive(Clone, Copy, Debug)]
pub struct Repeater {
    count: u32,
}

impl Repeater {
    pub fn new(count: u32) -> Self {
        Self { count }
    }

    pub fn count(&self) -> u32 {
        self.count
    }
}

impl<W> Behavior<W> for Repeater {
    fn tick(
        &mut self,
        id: NodeId,
        children: &mut [TreeNode<W>],
        ctx: &mut TickContext<W>,
    ) -> NodeStatus {
        let status = children[0].tick(ctx);
        match status {
            NodeStatus::Running => NodeStatus::Running,
            NodeStatus::Error => {
                ctx.blackboard.remove(id, COMPLETED);
                NodeStatus::Error
            }
            terminal => {
                let done = ctx.blackboard.take::<u32>(id, COMPLETED).unwrap_or(0) + 1;
                if done >= self.count {
                    terminal
                } else {
                    ctx.blackboard.set(id, COMPLETED, done);
                    NodeStatus::Running
                }
            }
        }
    }

    fn validate(&self, label: &str, _children: usize) -> Result<(), TreeError> {
        if self.count >= 1 {
            Ok(())
        } else {
            Err(TreeError::RepeatCount {
                label: label.to_string(),
            })
        }
    }
}

use super::{Behavior, NodeId, NodeStatus, TickContext, TreeNode};

type ActionFn<W> = Box<dyn FnMut(&mut W) -> NodeStatus + Send>;
type ConditionFn<W> = Box<dyn Fn(&W) -> bool + Send>;

/// Leaf that acts on the world.
pub struct Action<W> {
    run: ActionFn<W>,
}

impl<W> Action<W> {
    pub fn new(run: impl FnMut(&mut W) -> NodeStatus + Send + 'static) -> Self {
        Self { run: Box::new(run) }
    }
}

impl<W> Behavior<W> for Action<W> {
    fn tick(
        &mut self,
        _id: NodeId,
        _children: &mut [TreeNode<W>],
        ctx: &mut TickContext<W>,
    ) -> NodeStatus {
        (self.run)(&mut ctx.world)
    }
}

/// Leaf that reads the world and never changes it.
pub struct Condition<W> {
    check: ConditionFn<W>,
}

impl<W> Condition<W> {
    pub fn new(check: impl Fn(&W) -> bool + Send + 'static) -> Self {
        Self {
            check: Box::new(check),
        }
    }
}

impl<W> Behavior<W> for Condition<W> {
    fn tick(
        &mut self,
        _id: NodeId,
        _children: &mut [TreeNode<W>],
        ctx: &mut TickContext<W>,
    ) -> NodeStatus {
        (self.check)(&ctx.world).into()
    }
}

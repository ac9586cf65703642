//! Behavior-tree nodes that learn.
//!
//! A [`LearningCompositeNode`] treats its children as options and learns which
//! one to run in each observed state. A [`LearningActionNode`] is a leaf that
//! learns which primitive action to hand to its executor.
//!
//! Both follow the same episode protocol. The first tick of an episode
//! observes the state and picks a choice; the choice is kept until the child
//! or executor returns SUCCESS or FAILURE. Every active tick adds its reward,
//! discounted by `gamma^(tau-1)`, to an [`EpisodeAccumulator`] held on the
//! blackboard, and termination applies a single `gamma^tau` backup.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::bt::{Behavior, NodeId, NodeStatus, TickContext, TreeError, TreeNode};
use crate::rl::{ActionIndex, DiscreteState, QLearner};

const EPISODE: &str = "episode";

pub type StateExtractor<W> = Arc<dyn Fn(&W) -> DiscreteState + Send + Sync>;
pub type RewardHook<W> = Arc<dyn Fn(&W, &RewardInput) -> f64 + Send + Sync>;
pub type Executor<W> = Arc<dyn Fn(&mut W, ActionIndex) -> NodeStatus + Send + Sync>;

/// What a reward hook sees besides the world.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardInput {
    pub chosen: ActionIndex,
    pub status: NodeStatus,
    /// Ticks into the episode, counting the current one.
    pub tau: u32,
}

/// `+positive` on SUCCESS, `-negative` on FAILURE, 0 while RUNNING.
pub fn status_reward<W>(positive: f64, negative: f64) -> RewardHook<W> {
    Arc::new(move |_, input| match input.status {
        NodeStatus::Success => positive,
        NodeStatus::Failure => -negative,
        _ => 0.0,
    })
}

/// Bookkeeping of one open option.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeAccumulator {
    pub initiation_state: DiscreteState,
    pub chosen: ActionIndex,
    pub tau: u32,
    pub r_accum: f64,
    discount: f64,
}

impl EpisodeAccumulator {
    pub fn start(initiation_state: DiscreteState, chosen: ActionIndex) -> Self {
        Self {
            initiation_state,
            chosen,
            tau: 0,
            r_accum: 0.0,
            discount: 1.0,
        }
    }

    /// Adds one tick's reward as `gamma^(tau-1) * reward`.
    pub fn accumulate(&mut self, reward: f64, gamma: f64) {
        self.tau += 1;
        self.r_accum += self.discount * reward;
        self.discount *= gamma;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeEnd {
    Success,
    Failure,
    Interrupted,
}

/// Records pushed to [`TickContext::learning_log`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LearningEvent {
    /// A node opened an episode.
    Decision {
        node: NodeId,
        tick: u64,
        state: DiscreteState,
        action: ActionIndex,
    },
    /// A node closed an episode with one backup (or discarded it).
    Episode {
        node: NodeId,
        tick: u64,
        state: DiscreteState,
        action: ActionIndex,
        tau: u32,
        r_accum: f64,
        end: EpisodeEnd,
        updated: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterruptPolicy {
    /// Back up the partial episode using the state seen at interruption.
    #[default]
    Update,
    /// Drop the partial episode.
    Discard,
}

/// Learner plus the hooks shared by both node kinds.
pub struct LearningCore<W> {
    learner: QLearner,
    extractor: StateExtractor<W>,
    reward: RewardHook<W>,
    interrupt_policy: InterruptPolicy,
}

impl<W> LearningCore<W> {
    pub fn new(learner: QLearner, extractor: StateExtractor<W>, reward: RewardHook<W>) -> Self {
        Self {
            learner,
            extractor,
            reward,
            interrupt_policy: InterruptPolicy::Update,
        }
    }

    pub fn with_interrupt_policy(mut self, policy: InterruptPolicy) -> Self {
        self.interrupt_policy = policy;
        self
    }

    pub fn learner(&self) -> &QLearner {
        &self.learner
    }

    fn tick_episode(
        &mut self,
        id: NodeId,
        ctx: &mut TickContext<W>,
        step: impl FnOnce(ActionIndex, &mut TickContext<W>) -> NodeStatus,
    ) -> NodeStatus {
        let mut episode = match ctx.blackboard.take::<EpisodeAccumulator>(id, EPISODE) {
            Some(open) => open,
            None => {
                let state = (self.extractor)(&ctx.world);
                let action = self.learner.select(&state);
                ctx.learning_log.push(LearningEvent::Decision {
                    node: id,
                    tick: ctx.tick_counter,
                    state: state.clone(),
                    action,
                });
                EpisodeAccumulator::start(state, action)
            }
        };

        let status = step(episode.chosen, ctx);
        if status == NodeStatus::Error {
            // a fault is not a learnable outcome
            return NodeStatus::Error;
        }

        let reward = (self.reward)(
            &ctx.world,
            &RewardInput {
                chosen: episode.chosen,
                status,
                tau: episode.tau + 1,
            },
        );
        if !reward.is_finite() {
            return NodeStatus::Error;
        }
        episode.accumulate(reward, self.learner.params().gamma);

        let end = match status {
            NodeStatus::Success => EpisodeEnd::Success,
            NodeStatus::Failure => EpisodeEnd::Failure,
            _ => {
                ctx.blackboard.set(id, EPISODE, episode);
                return status;
            }
        };
        match self.close(id, ctx, episode, end, true) {
            Ok(()) => status,
            Err(_) => NodeStatus::Error,
        }
    }

    fn close(
        &mut self,
        id: NodeId,
        ctx: &mut TickContext<W>,
        episode: EpisodeAccumulator,
        end: EpisodeEnd,
        update: bool,
    ) -> Result<(), crate::rl::RlError> {
        if update {
            let next_state = (self.extractor)(&ctx.world);
            self.learner.update(
                &episode.initiation_state,
                episode.chosen,
                episode.r_accum,
                episode.tau,
                &next_state,
            )?;
        }
        self.learner.decay_exploration();
        ctx.learning_log.push(LearningEvent::Episode {
            node: id,
            tick: ctx.tick_counter,
            state: episode.initiation_state,
            action: episode.chosen,
            tau: episode.tau,
            r_accum: episode.r_accum,
            end,
            updated: update,
        });
        Ok(())
    }

    /// Closes an open episode early. No-op when none is open.
    fn interrupt(&mut self, id: NodeId, ctx: &mut TickContext<W>) {
        if let Some(episode) = ctx.blackboard.take::<EpisodeAccumulator>(id, EPISODE) {
            let update = self.interrupt_policy == InterruptPolicy::Update && episode.tau >= 1;
            // a failed backup only loses this partial episode
            let _ = self.close(id, ctx, episode, EpisodeEnd::Interrupted, update);
        }
        ctx.blackboard.clear_node(id);
    }
}

/// Whether `node` currently has an open episode.
pub fn episode_of<W>(ctx: &TickContext<W>, node: NodeId) -> Option<&EpisodeAccumulator> {
    ctx.blackboard.get(node, EPISODE)
}

/// Composite whose children form the action set of a learned policy.
/// Never refuses to start; its option ends when the chosen child returns
/// SUCCESS or FAILURE.
pub struct LearningCompositeNode<W> {
    core: LearningCore<W>,
}

impl<W> LearningCompositeNode<W> {
    pub fn new(core: LearningCore<W>) -> Self {
        Self { core }
    }
}

impl<W: 'static> LearningCompositeNode<W> {
    /// Wraps the node and its children into a [`TreeNode`].
    pub fn into_node(self, children: Vec<TreeNode<W>>) -> TreeNode<W> {
        TreeNode::new(
            crate::bt::NodeCategory::Composite,
            "LearningComposite",
            self,
            children,
        )
    }
}

impl<W> Behavior<W> for LearningCompositeNode<W> {
    fn tick(
        &mut self,
        id: NodeId,
        children: &mut [TreeNode<W>],
        ctx: &mut TickContext<W>,
    ) -> NodeStatus {
        self.core
            .tick_episode(id, ctx, |chosen, ctx| children[chosen.0].tick(ctx))
    }

    fn interrupt(&mut self, id: NodeId, children: &mut [TreeNode<W>], ctx: &mut TickContext<W>) {
        for child in children.iter_mut() {
            child.interrupt(ctx);
        }
        self.core.interrupt(id, ctx);
    }

    fn validate(&self, label: &str, children: usize) -> Result<(), TreeError> {
        if children == self.core.learner.n_actions() {
            Ok(())
        } else {
            Err(TreeError::Arity {
                label: label.to_string(),
                category: crate::bt::NodeCategory::Composite,
                found: children,
            })
        }
    }

    fn learner(&self) -> Option<&QLearner> {
        Some(&self.core.learner)
    }
}

/// Leaf that learns which primitive action to execute.
pub struct LearningActionNode<W> {
    core: LearningCore<W>,
    executor: Executor<W>,
    action_labels: Vec<String>,
}

impl<W> LearningActionNode<W> {
    pub fn new(core: LearningCore<W>, executor: Executor<W>, action_labels: Vec<String>) -> Self {
        Self {
            core,
            executor,
            action_labels,
        }
    }

    pub fn action_labels(&self) -> &[String] {
        &self.action_labels
    }
}

impl<W: 'static> LearningActionNode<W> {
    pub fn into_node(self) -> TreeNode<W> {
        TreeNode::new(
            crate::bt::NodeCategory::Action,
            "LearningAction",
            self,
            Vec::new(),
        )
    }
}

impl<W> Behavior<W> for LearningActionNode<W> {
    fn tick(
        &mut self,
        id: NodeId,
        _children: &mut [TreeNode<W>],
        ctx: &mut TickContext<W>,
    ) -> NodeStatus {
        let executor = Arc::clone(&self.executor);
        self.core
            .tick_episode(id, ctx, |chosen, ctx| executor(&mut ctx.world, chosen))
    }

    fn interrupt(&mut self, id: NodeId, _children: &mut [TreeNode<W>], ctx: &mut TickContext<W>) {
        self.core.interrupt(id, ctx);
    }

    fn learner(&self) -> Option<&QLearner> {
        Some(&self.core.learner)
    }
}

#[cfg(test)]
mod tests;

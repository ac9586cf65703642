//! Behavior trees whose nodes can learn.
//!
//! * [`bt`]: node statuses, composites, decorators, leaves and tick propagation.
//! * [`rl`]: tabular Q-learning with the option-level (SMDP) backup and a
//!   value-iteration reference.
//! * [`learning`]: the learning composite and learning action nodes.
//! * [`treedef`]: declarative tree documents, validation and the node registry.
//! * [`firesim`]: the fire-control world used by the experiments.
//! * [`harness`]: seeded trials, accuracy metrics and output files.
//!
//! ```
//! use learnbt::bt::{BehaviorTree, NodeStatus, TickContext, TreeNode};
//!
//! let mut tree = BehaviorTree::new(TreeNode::sequence(vec![
//!     TreeNode::condition("IsPositive", |x: &i32| *x > 0),
//!     TreeNode::action("Decrement", |x: &mut i32| {
//!         *x -= 1;
//!         NodeStatus::Success
//!     }),
//! ]))
//! .unwrap();
//! let mut ctx = TickContext::new(2);
//! assert_eq!(tree.tick(&mut ctx), NodeStatus::Success);
//! assert_eq!(tree.tick(&mut ctx), NodeStatus::Success);
//! assert_eq!(tree.tick(&mut ctx), NodeStatus::Failure);
//! assert_eq!(ctx.world, 0);
//! ```

pub mod bt;
pub mod firesim;
pub mod harness;
pub mod learning;
pub mod rl;
pub mod seed;
pub mod treedef;

pub use bt::{BehaviorTree, NodeStatus, TickContext, TreeNode};
pub use harness::{run_experiment, ExperimentConfig, ExperimentResult};
pub use rl::{LearnerParams, QLearner, QTable};

#![allow(dead_code)]

use learnbt::bt::{NodeId, TickContext};
use learnbt::{BehaviorTree, NodeStatus, TreeNode};

pub use NodeStatus::{Error as E, Failure as F, Running as R, Success as S};

/// Leaf that always returns `status`.
pub fn fixed<W: 'static>(status: NodeStatus) -> TreeNode<W> {
    TreeNode::action("Fixed", move |_| status)
}

/// Leaf that plays `script` in order, then repeats its last entry.
pub fn scripted<W: 'static>(script: Vec<NodeStatus>) -> TreeNode<W> {
    let mut i = 0;
    TreeNode::action("Scripted", move |_| {
        let s = script[i.min(script.len() - 1)];
        i += 1;
        s
    })
}

pub fn traced<W>(world: W) -> TickContext<W> {
    TickContext::new(world).with_trace()
}

/// Ticks a one-off tree built from `root` once; returns the root status and
/// the tick counts of nodes `1..len`.
pub fn tick_once(root: TreeNode<()>) -> (NodeStatus, Vec<usize>) {
    let mut tree = BehaviorTree::new(root).expect("valid tree");
    let mut ctx = traced(());
    let status = tree.tick(&mut ctx);
    let counts = (1..tree.len() as u32)
        .map(|i| ctx.tick_count(NodeId(i)))
        .collect();
    (status, counts)
}

/// Every vector over the four statuses of length `n`.
pub fn all_vectors(n: usize) -> Vec<Vec<NodeStatus>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                NodeStatus::ALL.iter().map(move |s| {
                    let mut w = v.clone();
                    w.push(*s);
                    w
                })
            })
            .collect();
    }
    out
}

pub fn terminal_vectors(n: usize) -> Vec<Vec<NodeStatus>> {
    all_vectors(n)
        .into_iter()
        .filter(|v| v.iter().all(|s| s.is_terminal()))
        .collect()
}

/// Reference Sequence: first status that is not SUCCESS, and how many
/// children were ticked.
pub fn oracle_sequence(v: &[NodeStatus]) -> (NodeStatus, usize) {
    for (i, s) in v.iter().enumerate() {
        if *s != S {
            return (*s, i + 1);
        }
    }
    (S, v.len())
}

/// Reference Priority: first status that is not FAILURE.
pub fn oracle_priority(v: &[NodeStatus]) -> (NodeStatus, usize) {
    for (i, s) in v.iter().enumerate() {
        if *s != F {
            return (*s, i + 1);
        }
    }
    (F, v.len())
}

pub fn oracle_parallel(v: &[NodeStatus], success: usize, failure: usize) -> NodeStatus {
    if v.contains(&E) {
        return E;
    }
    let s = v.iter().filter(|x| **x == S).count();
    let f = v.iter().filter(|x| **x == F).count();
    if s >= success {
        S
    } else if f >= failure {
        F
    } else {
        R
    }
}

pub fn leaves(v: &[NodeStatus]) -> Vec<TreeNode<()>> {
    v.iter().map(|s| fixed(*s)).collect()
}

pub fn invert(s: NodeStatus) -> NodeStatus {
    match s {
        S => F,
        F => S,
        other => other,
    }
}

pub mod scripted_world {
    use std::sync::Arc;

    use learnbt::bt::{NodeId, TickContext, TraceEntry};
    use learnbt::learning::{Executor, LearningActionNode, LearningCore};
    use learnbt::rl::{DiscreteState, LearnerParams, QLearner};
    use learnbt::{BehaviorTree, NodeStatus, TreeNode};

    use super::{F, R, S};

    /// Environment driven entirely by the tick number.
    #[derive(Clone, Debug, Default, PartialEq)]
    pub struct Stage {
        pub tick: usize,
        pub calls: usize,
        pub log: Vec<String>,
    }

    const GATE_A: [bool; 7] = [true, true, false, true, false, false, true];
    const GATE_B: [bool; 5] = [false, true, true, false, true];
    const WORK: [NodeStatus; 6] = [R, S, R, R, F, S];

    fn work(w: &mut Stage) -> NodeStatus {
        let s = WORK[w.calls % WORK.len()];
        w.calls += 1;
        w.log.push(format!("work {s}"));
        s
    }

    /// `Sequence[Priority[MemSequence[gate_a, <slot>], Sequence[gate_b, side]], tail]`;
    /// the slot is node 4.
    pub fn tree(slot: TreeNode<Stage>) -> BehaviorTree<Stage> {
        let gate_a = TreeNode::condition("GateA", |w: &Stage| GATE_A[w.tick % GATE_A.len()]);
        let gate_b = TreeNode::condition("GateB", |w: &Stage| GATE_B[w.tick % GATE_B.len()]);
        let side = TreeNode::action("Side", |w: &mut Stage| {
            w.log.push("side".into());
            S
        });
        let tail = TreeNode::action("Tail", |w: &mut Stage| {
            w.log.push("tail".into());
            if w.tick.is_multiple_of(3) {
                F
            } else {
                S
            }
        });
        BehaviorTree::new(TreeNode::sequence(vec![
            TreeNode::priority(vec![
                TreeNode::mem_sequence(vec![gate_a, slot]),
                TreeNode::sequence(vec![gate_b, side]),
            ]),
            tail,
        ]))
        .unwrap()
    }

    pub const SLOT: NodeId = NodeId(4);

    pub fn learning_slot(seed: u64) -> TreeNode<Stage> {
        let params = LearnerParams {
            epsilon_start: 0.5,
            epsilon_floor: 0.5,
            epsilon_decay: 1.0,
            rng_seed: seed,
            ..LearnerParams::default()
        };
        let learner = QLearner::new(3, params).unwrap();
        let core = LearningCore::new(
            learner,
            Arc::new(|w: &Stage| DiscreteState::new(vec![(w.tick % 4) as i32])),
            Arc::new(|w: &Stage, _: &learnbt::learning::RewardInput| (w.calls % 5) as f64 - 2.0),
        );
        let exec: Executor<Stage> = Arc::new(|w: &mut Stage, _| work(w));
        LearningActionNode::new(core, exec, vec!["x".into(), "y".into(), "z".into()]).into_node()
    }

    pub fn fixed_slot() -> TreeNode<Stage> {
        TreeNode::action("FixedPolicy", work)
    }

    /// Runs `ticks` root ticks; returns the trace without the slot's own
    /// entries and the final world.
    pub fn run(mut tree: BehaviorTree<Stage>, ticks: usize) -> (Vec<TraceEntry>, Stage) {
        let mut ctx = TickContext::new(Stage::default()).with_trace();
        for t in 0..ticks {
            ctx.world.tick = t;
            tree.tick(&mut ctx);
        }
        let trace = ctx
            .take_trace()
            .into_iter()
            .filter(|e| e.node != SLOT)
            .collect();
        (trace, ctx.world)
    }

    /// Byte-level comparison of the two traces.
    pub fn traces_identical(ticks: usize, seed: u64) -> bool {
        let (learned, w1) = run(tree(learning_slot(seed)), ticks);
        let (fixed, w2) = run(tree(fixed_slot()), ticks);
        let a = serde_json::to_vec(&learned).unwrap();
        let b = serde_json::to_vec(&fixed).unwrap();
        !learned.is_empty() && a == b && w1 == w2
    }
}

use super::*;

use crate::bt::BehaviorTree;
use crate::rl::LearnerParams;

/// World for the protocol tests: the executor replays `script`, the reward
/// hook replays `rewards`.
#[derive(Default)]
struct Scripted {
    script: Vec<NodeStatus>,
    rewards: Vec<f64>,
    step: usize,
    state: i32,
}

fn greedy_learner(n: usize) -> QLearner {
    let params = LearnerParams {
        alpha: 1.0,
        gamma: 0.9,
        epsilon_start: 0.0,
        epsilon_floor: 0.0,
        ..LearnerParams::default()
    };
    QLearner::new(n, params).unwrap()
}

fn core(learner: QLearner) -> LearningCore<Scripted> {
    LearningCore::new(
        learner,
        Arc::new(|w: &Scripted| DiscreteState::new(vec![w.state])),
        Arc::new(|w: &Scripted, _: &RewardInput| w.rewards[w.step - 1]),
    )
}

fn scripted_leaf(learner: QLearner) -> BehaviorTree<Scripted> {
    let exec: Executor<Scripted> = Arc::new(|w: &mut Scripted, _| {
        w.step += 1;
        w.script[w.step - 1]
    });
    BehaviorTree::new(LearningActionNode::new(core(learner), exec, vec!["a".into()]).into_node())
        .unwrap()
}

fn episodes(ctx: &TickContext<Scripted>) -> Vec<&LearningEvent> {
    ctx.learning_log
        .iter()
        .filter(|e| matches!(e, LearningEvent::Episode { .. }))
        .collect()
}

#[test]
fn accumulator_discounts_by_position() {
    let mut acc = EpisodeAccumulator::start(DiscreteState::new(vec![0]), ActionIndex(0));
    for r in [-1.0, -1.0, 10.0] {
        acc.accumulate(r, 0.9);
    }
    assert_eq!(acc.tau, 3);
    assert!((acc.r_accum - 6.2).abs() < 1e-12);
}

#[test]
fn one_update_per_episode() {
    use NodeStatus::*;
    let mut tree = scripted_leaf(greedy_learner(1));
    let mut ctx = TickContext::new(Scripted {
        script: vec![Running, Running, Success],
        rewards: vec![-1.0, -1.0, 10.0],
        ..Default::default()
    });
    assert_eq!(tree.tick(&mut ctx), Running);
    assert_eq!(tree.tick(&mut ctx), Running);
    assert!(episode_of(&ctx, NodeId(0)).is_some());
    let learner = tree.root_child().learner().unwrap();
    assert_eq!(learner.updates(), 0);

    ctx.world.state = 1;
    assert_eq!(tree.tick(&mut ctx), Success);
    let learner = tree.root_child().learner().unwrap();
    assert_eq!(learner.updates(), 1);
    // alpha 1 and an unseen next state: Q = r_accum
    let q = learner
        .table()
        .get(&DiscreteState::new(vec![0]), ActionIndex(0));
    assert!((q - 6.2).abs() < 1e-12);
    assert!(episode_of(&ctx, NodeId(0)).is_none());

    let ev = episodes(&ctx);
    assert_eq!(ev.len(), 1);
    assert!(matches!(
        ev[0],
        LearningEvent::Episode {
            tau: 3,
            end: EpisodeEnd::Success,
            updated: true,
            ..
        }
    ));
    assert_eq!(ctx.learning_log.len(), 2);
}

#[test]
fn error_discards_the_episode() {
    use NodeStatus::*;
    let mut tree = scripted_leaf(greedy_learner(1));
    let mut ctx = TickContext::new(Scripted {
        script: vec![Running, Error, Success],
        rewards: vec![1.0, 1.0, 1.0],
        ..Default::default()
    });
    assert_eq!(tree.tick(&mut ctx), Running);
    assert_eq!(tree.tick(&mut ctx), Error);
    assert!(episode_of(&ctx, NodeId(0)).is_none());
    assert_eq!(tree.root_child().learner().unwrap().updates(), 0);
    // next tick opens a fresh episode
    assert_eq!(tree.tick(&mut ctx), Success);
    let decisions = ctx
        .learning_log
        .iter()
        .filter(|e| matches!(e, LearningEvent::Decision { .. }))
        .count();
    assert_eq!(decisions, 2);
    assert_eq!(tree.root_child().learner().unwrap().updates(), 1);
}

#[test]
fn non_finite_reward_is_an_error() {
    let mut tree = scripted_leaf(greedy_learner(1));
    let mut ctx = TickContext::new(Scripted {
        script: vec![NodeStatus::Success],
        rewards: vec![f64::INFINITY],
        ..Default::default()
    });
    assert_eq!(tree.tick(&mut ctx), NodeStatus::Error);
    assert_eq!(tree.root_child().learner().unwrap().updates(), 0);
}

fn interrupted(policy: InterruptPolicy) -> (BehaviorTree<Scripted>, TickContext<Scripted>) {
    let exec: Executor<Scripted> = Arc::new(|w: &mut Scripted, _| {
        w.step += 1;
        NodeStatus::Running
    });
    let node = LearningActionNode::new(
        core(greedy_learner(1)).with_interrupt_policy(policy),
        exec,
        vec!["a".into()],
    );
    let mut tree = BehaviorTree::new(node.into_node()).unwrap();
    let mut ctx = TickContext::new(Scripted {
        rewards: vec![2.0, 2.0],
        ..Default::default()
    });
    tree.tick(&mut ctx);
    tree.tick(&mut ctx);
    tree.interrupt(&mut ctx);
    (tree, ctx)
}

#[test]
fn interrupt_updates_partial_episode() {
    let (tree, ctx) = interrupted(InterruptPolicy::Update);
    let learner = tree.root_child().learner().unwrap();
    assert_eq!(learner.updates(), 1);
    let q = learner
        .table()
        .get(&DiscreteState::new(vec![0]), ActionIndex(0));
    assert!((q - 3.8).abs() < 1e-12);
    assert!(matches!(
        episodes(&ctx)[0],
        LearningEvent::Episode {
            end: EpisodeEnd::Interrupted,
            updated: true,
            tau: 2,
            ..
        }
    ));
    assert!(ctx.blackboard.is_empty());
}

#[test]
fn interrupt_can_discard() {
    let (tree, ctx) = interrupted(InterruptPolicy::Discard);
    assert_eq!(tree.root_child().learner().unwrap().updates(), 0);
    assert!(matches!(
        episodes(&ctx)[0],
        LearningEvent::Episode { updated: false, .. }
    ));
}

#[test]
fn composite_passes_through_the_chosen_child() {
    let learner = greedy_learner(2)
        .with_table({
            let mut t = crate::rl::QTable::new(2).unwrap();
            t.set(&DiscreteState::new(vec![0]), ActionIndex(1), 1.0)
                .unwrap();
            t
        })
        .unwrap();
    let children = vec![
        TreeNode::action("Left", |_: &mut Scripted| NodeStatus::Failure),
        TreeNode::action("Right", |w: &mut Scripted| {
            w.step += 1;
            NodeStatus::Success
        }),
    ];
    let mut tree =
        BehaviorTree::new(LearningCompositeNode::new(core(learner)).into_node(children)).unwrap();
    let mut ctx = TickContext::new(Scripted {
        rewards: vec![5.0],
        ..Default::default()
    })
    .with_trace();
    assert_eq!(tree.tick(&mut ctx), NodeStatus::Success);
    assert_eq!(ctx.tick_count(NodeId(1)), 0);
    assert_eq!(ctx.tick_count(NodeId(2)), 1);
}

#[test]
fn composite_needs_one_child_per_action() {
    let children = vec![TreeNode::action("Only", |_: &mut Scripted| {
        NodeStatus::Success
    })];
    let node = LearningCompositeNode::new(core(greedy_learner(2))).into_node(children);
    assert!(BehaviorTree::new(node).is_err());
}

#[test]
fn status_reward_signs() {
    let hook = status_reward::<()>(10.0, 5.0);
    let input = |status| RewardInput {
        chosen: ActionIndex(0),
        status,
        tau: 1,
    };
    assert_eq!(hook(&(), &input(NodeStatus::Success)), 10.0);
    assert_eq!(hook(&(), &input(NodeStatus::Failure)), -5.0);
    assert_eq!(hook(&(), &input(NodeStatus::Running)), 0.0);
}

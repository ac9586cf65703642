use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::{
    compute_behavior_accuracy, fire_registry, BehaviorAccuracy, ExperimentConfig, HarnessError,
};
use super::{FIRE_TYPE_STATE, VICTIM_FIRE_STATE};
use crate::bt::{BehaviorTree, NodeId, NodeStatus, TickContext};
use crate::firesim::{BehaviorKind, Extinguisher, FireType, Room, SimAction, SimState};
use crate::learning::{EpisodeEnd, LearningEvent};
use crate::rl::QTable;
use crate::seed::named_seed;
use crate::treedef::{Scalar, TreeDocument};

/// How decisions of a learning node are judged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scoring {
    /// State is the fire type; correct when the chosen extinguisher matches
    /// the hidden map. Decisions without a fire or in a lost room are not
    /// scored.
    Extinguisher,
    /// State is (has victim, has fire); children are in [`BehaviorKind`]
    /// order and the choice must match the expected behavior.
    Behavior,
    Unscored,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackedNode {
    pub id: NodeId,
    pub label: String,
    pub scoring: Scoring,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub node: String,
    pub state: Vec<i32>,
    pub action: usize,
    pub correct: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub node: String,
    pub tau: u32,
    pub r_accum: f64,
    pub end: EpisodeEnd,
    pub updated: bool,
}

/// One root tick.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u32,
    /// Room as it was before the tick.
    pub room: Room,
    pub expected: BehaviorKind,
    /// Behaviors whose primitive action ran during the tick, in order.
    pub activated: Vec<BehaviorKind>,
    pub actions: Vec<SimAction>,
    pub status: NodeStatus,
    /// Sum of the action-level reward signals of the tick.
    pub reward: f64,
    pub decisions: Vec<DecisionRecord>,
    pub episodes: Vec<EpisodeRecord>,
}

impl IterationRecord {
    pub fn behavior_correct(&self) -> bool {
        self.activated.contains(&self.expected)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub index: u32,
    pub seed: u64,
    pub tracked: Vec<TrackedNode>,
    pub records: Vec<IterationRecord>,
    pub accuracy: BehaviorAccuracy,
    /// Final Q-table of every learning node, by label.
    pub q_tables: BTreeMap<String, QTable>,
}

/// Steps one trial tick by tick.
pub struct TrialRunner {
    tree: BehaviorTree<SimState>,
    ctx: TickContext<SimState>,
    tracked: Vec<TrackedNode>,
    records: Vec<IterationRecord>,
    index: u32,
    seed: u64,
}

impl TrialRunner {
    pub fn new(
        config: &ExperimentConfig,
        doc: &TreeDocument,
        index: u32,
        baseline: bool,
    ) -> Result<Self, HarnessError> {
        let seed = config.trial_seed(index);
        let mut registry = fire_registry();
        let adjust = |p: crate::rl::LearnerParams| if baseline { p.random_baseline() } else { p };
        registry
            .set_seed(named_seed(seed, "agent"))
            .set_learner_defaults(adjust(config.learner));
        for (node, params) in &config.node_learners {
            registry.set_learner_params(node, adjust(*params));
        }
        let tree = registry.build_tree(doc)?;
        let world = SimState::new(config.sim_config(), named_seed(seed, "world"))?;

        let tracked = tree
            .nodes()
            .into_iter()
            .filter(|n| n.learner().is_some())
            .map(|n| {
                let state = doc
                    .nodes
                    .get(n.label())
                    .and_then(|spec| spec.properties.get("state"))
                    .and_then(Scalar::as_str);
                let scoring = match state {
                    Some(FIRE_TYPE_STATE) => Scoring::Extinguisher,
                    Some(VICTIM_FIRE_STATE) => Scoring::Behavior,
                    _ => Scoring::Unscored,
                };
                TrackedNode {
                    id: n.id(),
                    label: n.label().to_string(),
                    scoring,
                }
            })
            .collect();

        Ok(Self {
            tree,
            ctx: TickContext::new(world),
            tracked,
            records: Vec::with_capacity(config.iterations as usize),
            index,
            seed,
        })
    }

    pub fn world(&self) -> &SimState {
        &self.ctx.world
    }

    pub fn tree(&self) -> &BehaviorTree<SimState> {
        &self.tree
    }

    pub fn tracked(&self) -> &[TrackedNode] {
        &self.tracked
    }

    pub fn records(&self) -> &[IterationRecord] {
        &self.records
    }

    /// Ticks the root once and returns the new record.
    pub fn step(&mut self) -> Result<&IterationRecord, HarnessError> {
        let iteration = self.records.len() as u32;
        self.ctx.world.begin_tick();
        let room = *self.ctx.world.room();
        let expected = room.expected_behavior();
        let map = *self.ctx.world.extinguisher_map();

        let status = self.tree.tick(&mut self.ctx);
        if status == NodeStatus::Error {
            return Err(HarnessError::TickError { iteration });
        }

        let mut activated = Vec::new();
        let mut actions = Vec::new();
        let mut reward = 0.0;
        for (action, outcome) in self.ctx.world.tick_actions() {
            let b = action.behavior();
            if !activated.contains(&b) {
                activated.push(b);
            }
            actions.push(*action);
            reward += outcome.reward_signal;
        }

        let mut decisions = Vec::new();
        let mut episodes = Vec::new();
        for event in self.ctx.learning_log.drain(..) {
            match event {
                LearningEvent::Decision {
                    node,
                    state,
                    action,
                    ..
                } => {
                    let Some(tracked) = self.tracked.iter().find(|t| t.id == node) else {
                        continue;
                    };
                    let correct = match tracked.scoring {
                        Scoring::Extinguisher => {
                            let fire = state.0.first().and_then(|&t| {
                                FireType::ALL.get(usize::try_from(t - 1).ok()?).copied()
                            });
                            match fire {
                                Some(fire) if !room.lost => Some(
                                    Extinguisher::from_index(action.0)
                                        == Some(map.extinguisher_for(fire)),
                                ),
                                _ => None,
                            }
                        }
                        Scoring::Behavior => Some(action.0 == expected.index()),
                        Scoring::Unscored => None,
                    };
                    decisions.push(DecisionRecord {
                        node: tracked.label.clone(),
                        state: state.0,
                        action: action.0,
                        correct,
                    });
                }
                LearningEvent::Episode {
                    node,
                    tau,
                    r_accum,
                    end,
                    updated,
                    ..
                } => {
                    let label = self
                        .tracked
                        .iter()
                        .find(|t| t.id == node)
                        .map_or_else(|| node.to_string(), |t| t.label.clone());
                    episodes.push(EpisodeRecord {
                        node: label,
                        tau,
                        r_accum,
                        end,
                        updated,
                    });
                }
            }
        }

        self.records.push(IterationRecord {
            iteration,
            room,
            expected,
            activated,
            actions,
            status,
            reward,
            decisions,
            episodes,
        });
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn finish(self) -> TrialResult {
        let q_tables = self
            .tree
            .nodes()
            .into_iter()
            .filter_map(|n| {
                n.learner()
                    .map(|l| (n.label().to_string(), l.table().clone()))
            })
            .collect();
        TrialResult {
            index: self.index,
            seed: self.seed,
            tracked: self.tracked,
            accuracy: compute_behavior_accuracy(&self.records),
            records: self.records,
            q_tables,
        }
    }
}

/// One trial with the tree from `config`.
pub fn run_trial(config: &ExperimentConfig, index: u32) -> Result<TrialResult, HarnessError> {
    config.validate()?;
    let doc = config.load_tree()?;
    run_trial_with(config, &doc, index, false)
}

pub(super) fn run_trial_with(
    config: &ExperimentConfig,
    doc: &TreeDocument,
    index: u32,
    baseline: bool,
) -> Result<TrialResult, HarnessError> {
    let wrap = |e: HarnessError| HarnessError::Trial {
        index,
        seed: config.trial_seed(index),
        source: Box::new(e),
    };
    let mut runner = TrialRunner::new(config, doc, index, baseline).map_err(wrap)?;
    for _ in 0..config.iterations {
        runner.step().map_err(wrap)?;
    }
    Ok(runner.finish())
}

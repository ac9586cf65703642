//! Trial runner for the fire-control experiments.
//!
//! An experiment runs `trials` independent trials of `iterations` root ticks
//! each. Every trial starts from a fresh world, fresh Q-tables and a freshly
//! built tree; its seeds are derived from the master seed with
//! [`crate::seed::trial_seed`]. The optional baseline repeats every trial
//! with the same seeds and uniform random choices at every learning node.

mod metrics;
mod output;
mod scenario;
mod trial;

pub use metrics::{compute_behavior_accuracy, AccuracySeries, BehaviorAccuracy};
pub use output::{emit_outputs, OutputFiles};
pub use scenario::{
    default_tree, default_tree_text, fire_registry, register_fire_kinds, FIRE_TYPE_STATE,
    SCENARIO1_TREE, SCENARIO2_TREE, VICTIM_FIRE_STATE,
};
pub use trial::{
    run_trial, DecisionRecord, EpisodeRecord, IterationRecord, Scoring, TrackedNode, TrialResult,
    TrialRunner,
};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::firesim::{BehaviorKind, Scenario, SimConfig, SimError};
use crate::rl::LearnerParams;
use crate::seed::trial_seed;
use crate::treedef::{parse_tree_document, TreeDefError, TreeDocument};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("tree definition: {0}")]
    Tree(#[from] TreeDefError),
    #[error("simulation: {0}")]
    Sim(#[from] SimError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("root returned ERROR at iteration {iteration}")]
    TickError { iteration: u32 },
    #[error("trial {index} (seed {seed:#018x}) failed: {source}")]
    Trial {
        index: u32,
        seed: u64,
        source: Box<HarnessError>,
    },
}

impl HarnessError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Everything that determines an experiment. Loadable from TOML; missing
/// keys take their defaults.
///
/// ```toml
/// scenario = 2
/// trials = 30
/// iterations = 400
/// seed = 7
/// baseline = true
///
/// [learner]
/// alpha = 0.5
///
/// [node_learners.use_extinguisher]
/// epsilon_start = 0.2
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub trials: u32,
    pub iterations: u32,
    pub seed: u64,
    /// Defaults for every learning node.
    pub learner: LearnerParams,
    /// Replacements for individual nodes, keyed by document id.
    pub node_learners: BTreeMap<String, LearnerParams>,
    pub baseline: bool,
    /// Sliding window for the node-accuracy curves.
    pub window: usize,
    /// Tree document to use instead of the built-in one.
    pub tree: Option<PathBuf>,
    pub victim_probability: f64,
    pub fire_probability: f64,
    pub out_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::One,
            trials: 30,
            iterations: 400,
            seed: 0,
            learner: LearnerParams::default(),
            node_learners: BTreeMap::new(),
            baseline: false,
            window: 20,
            tree: None,
            victim_probability: 0.5,
            fire_probability: 0.5,
            out_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn scenario(scenario: Scenario) -> Self {
        Self {
            scenario,
            ..Self::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 || self.iterations == 0 {
            return Err(HarnessError::Config(
                "trials and iterations must be >= 1".into(),
            ));
        }
        if self.window == 0 {
            return Err(HarnessError::Config("window must be >= 1".into()));
        }
        for p in std::iter::once(&self.learner).chain(self.node_learners.values()) {
            p.validate()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        for p in [self.victim_probability, self.fire_probability] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::Probability(p).into());
            }
        }
        Ok(())
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            scenario: self.scenario,
            victim_probability: self.victim_probability,
            fire_probability: self.fire_probability,
        }
    }

    /// The configured tree file, or the scenario's built-in tree.
    pub fn load_tree(&self) -> Result<TreeDocument, HarnessError> {
        match &self.tree {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
                Ok(parse_tree_document(&text)?)
            }
            None => Ok(default_tree(self.scenario)?),
        }
    }

    pub fn trial_seed(&self, index: u32) -> u64 {
        trial_seed(self.seed, u64::from(index))
    }
}

/// Aggregated results of one experiment.
#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialResult>,
    pub baseline: Option<Vec<TrialResult>>,
}

impl ExperimentResult {
    /// Labels of the learning nodes whose decisions are scored.
    pub fn tracked_nodes(&self) -> Vec<String> {
        self.trials
            .first()
            .map(|t| {
                t.tracked
                    .iter()
                    .filter(|n| n.scoring != Scoring::Unscored)
                    .map(|n| n.label.clone())
                    .collect()
            })
            .unwrap_or_default()
    }

    /// Per-behavior accuracy averaged over trials.
    pub fn behavior_accuracy(&self) -> [f64; 3] {
        mean_behavior_accuracy(&self.trials)
    }

    pub fn baseline_behavior_accuracy(&self) -> Option<[f64; 3]> {
        self.baseline.as_deref().map(mean_behavior_accuracy)
    }

    pub fn node_series(&self, label: &str) -> AccuracySeries {
        AccuracySeries::from_trials(&self.trials, label, self.config.iterations)
    }

    pub fn baseline_series(&self, label: &str) -> Option<AccuracySeries> {
        self.baseline
            .as_deref()
            .map(|b| AccuracySeries::from_trials(b, label, self.config.iterations))
    }

    pub fn accuracy_of(&self, behavior: BehaviorKind) -> f64 {
        self.behavior_accuracy()[behavior.index()]
    }
}

fn mean_behavior_accuracy(trials: &[TrialResult]) -> [f64; 3] {
    let mut sum = [0.0; 3];
    for t in trials {
        for (s, a) in sum.iter_mut().zip(t.accuracy.accuracy) {
            *s += a;
        }
    }
    sum.map(|s| s / trials.len().max(1) as f64)
}

/// Runs every trial, then the baseline when enabled. Trials run on scoped
/// threads where available; results come back in trial order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    config.validate()?;
    let doc = config.load_tree()?;
    let trials = run_all(config, &doc, false)?;
    let baseline = if config.baseline {
        Some(run_all(config, &doc, true)?)
    } else {
        None
    };
    Ok(ExperimentResult {
        config: config.clone(),
        trials,
        baseline,
    })
}

fn run_all(
    config: &ExperimentConfig,
    doc: &TreeDocument,
    baseline: bool,
) -> Result<Vec<TrialResult>, HarnessError> {
    let threads = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(config.trials as usize);
    if threads <= 1 {
        return (0..config.trials)
            .map(|i| trial::run_trial_with(config, doc, i, baseline))
            .collect();
    }
    let indices: Vec<u32> = (0..config.trials).collect();
    let chunk = indices.len().div_ceil(threads);
    let results: Vec<Result<TrialResult, HarnessError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = indices
            .chunks(chunk)
            .map(|ids| {
                scope.spawn(move || {
                    ids.iter()
                        .map(|&i| trial::run_trial_with(config, doc, i, baseline))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("trial thread panicked"))
            .collect()
    });
    results.into_iter().collect()
}

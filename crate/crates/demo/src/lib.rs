//! Browser bindings for `learnbt`.
//!
//! Three operations, each with a plain Rust form (returning JSON text) and a
//! `wasm_bindgen` wrapper:
//!
//! * [`experiment_summary`] runs an experiment and returns curves and accuracies.
//! * [`Session`] steps one trial a root tick at a time.
//! * [`check_tree_report`] parses a tree document and returns its canonical form.

use std::collections::BTreeMap;

use learnbt::firesim::{BehaviorKind, Extinguisher, FireType, Room, Scenario};
use learnbt::harness::{default_tree, IterationRecord, TrialRunner};
use learnbt::rl::export_snapshot;
use learnbt::treedef::{parse_tree_document, serialize_tree, TreeDocument};
use learnbt::{run_experiment, ExperimentConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct NodeCurve {
    pub label: String,
    /// Trailing-window accuracy per iteration, `null` before any decision.
    pub curve: Vec<Option<f64>>,
    pub baseline: Option<Vec<Option<f64>>>,
    pub first100: Option<f64>,
    pub last100: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ExperimentSummary {
    pub behaviors: [BehaviorKind; 3],
    pub accuracy: [f64; 3],
    pub baseline_accuracy: Option<[f64; 3]>,
    pub window: usize,
    pub nodes: Vec<NodeCurve>,
}

/// Runs the experiment described by `config_json` (an `ExperimentConfig`
/// object; omitted fields take their defaults).
pub fn experiment_summary(config_json: &str) -> Result<String, String> {
    let config: ExperimentConfig =
        serde_json::from_str(config_json).map_err(|e| format!("config: {e}"))?;
    if config.tree.is_some() || config.out_dir.is_some() {
        return Err("config: `tree` and `out_dir` need a file system".into());
    }
    let result = run_experiment(&config).map_err(|e| e.to_string())?;
    let nodes = result
        .tracked_nodes()
        .into_iter()
        .map(|label| {
            let series = result.node_series(&label);
            NodeCurve {
                curve: series.trailing(config.window),
                baseline: result
                    .baseline_series(&label)
                    .map(|b| b.trailing(config.window)),
                first100: series.head(100),
                last100: series.tail(100),
                label,
            }
        })
        .collect();
    let summary = ExperimentSummary {
        behaviors: BehaviorKind::ALL,
        accuracy: result.behavior_accuracy(),
        baseline_accuracy: result.baseline_behavior_accuracy(),
        window: config.window,
        nodes,
    };
    Ok(serde_json::to_string(&summary).expect("summary serializes"))
}

#[derive(Debug, Serialize)]
pub struct TreeReport {
    pub ok: bool,
    pub code: Option<&'static str>,
    pub message: Option<String>,
    pub canonical: Option<String>,
    pub nodes: usize,
}

/// Parses `text` as a tree document. Never fails; errors are reported in the JSON.
pub fn check_tree_report(text: &str) -> String {
    let report = match parse_tree_document(text) {
        Ok(doc) => TreeReport {
            ok: true,
            code: None,
            message: None,
            canonical: Some(serialize_tree(&doc)),
            nodes: doc.len(),
        },
        Err(e) => TreeReport {
            ok: false,
            code: Some(e.code()),
            message: Some(e.to_string()),
            canonical: None,
            nodes: 0,
        },
    };
    serde_json::to_string(&report).expect("report serializes")
}

#[derive(Debug, Serialize)]
struct WorldView {
    scenario: Scenario,
    room: Room,
    expected: BehaviorKind,
    rooms_visited: u64,
    /// Fire type put out by extinguishers A, B and C.
    map: [FireType; 3],
}

/// One trial, stepped from the outside.
pub struct Session {
    runner: TrialRunner,
}

impl Session {
    /// A session on the built-in tree of `scenario` (1 or 2), or on `tree_text` when given.
    pub fn create(scenario: u8, seed: u64, tree_text: Option<&str>) -> Result<Self, String> {
        let scenario = Scenario::try_from(scenario)?;
        let doc: TreeDocument = match tree_text {
            Some(text) => parse_tree_document(text).map_err(|e| format!("{}: {e}", e.code()))?,
            None => default_tree(scenario).map_err(|e| e.to_string())?,
        };
        let config = ExperimentConfig {
            seed,
            trials: 1,
            ..ExperimentConfig::scenario(scenario)
        };
        let runner = TrialRunner::new(&config, &doc, 0, false).map_err(|e| e.to_string())?;
        Ok(Self { runner })
    }

    /// Ticks the root once and returns the iteration record as JSON.
    pub fn step_json(&mut self) -> Result<String, String> {
        let record: &IterationRecord = self.runner.step().map_err(|e| e.to_string())?;
        Ok(serde_json::to_string(record).expect("record serializes"))
    }

    pub fn iterations(&self) -> usize {
        self.runner.records().len()
    }

    /// The room the next tick will see, plus the hidden extinguisher map.
    pub fn world_json(&self) -> String {
        let world = self.runner.world();
        let map = world.extinguisher_map();
        let view = WorldView {
            scenario: world.scenario(),
            room: *world.room(),
            expected: world.room().expected_behavior(),
            rooms_visited: world.rooms_visited(),
            map: Extinguisher::ALL.map(|e| map.fire_for(e)),
        };
        serde_json::to_string(&view).expect("world serializes")
    }

    /// Q-table snapshots keyed by node label.
    pub fn q_tables_json(&self) -> String {
        let tables: BTreeMap<&str, String> = self
            .runner
            .tree()
            .nodes()
            .into_iter()
            .filter_map(|n| n.learner().map(|l| (n.label(), export_snapshot(l.table()))))
            .collect();
        serde_json::to_string(&tables).expect("tables serialize")
    }
}

#[wasm_bindgen(js_name = runExperiment)]
pub fn run_experiment_js(config_json: &str) -> Result<String, JsValue> {
    experiment_summary(config_json).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = checkTree)]
pub fn check_tree_js(text: &str) -> String {
    check_tree_report(text)
}

#[wasm_bindgen(js_name = TrialSession)]
pub struct TrialSession(Session);

#[wasm_bindgen(js_class = TrialSession)]
impl TrialSession {
    /// Empty `tree_text` selects the built-in tree.
    #[wasm_bindgen(constructor)]
    pub fn new(scenario: u8, seed: u32, tree_text: &str) -> Result<TrialSession, JsValue> {
        let tree = Some(tree_text).filter(|t| !t.trim().is_empty());
        Session::create(scenario, u64::from(seed), tree)
            .map(TrialSession)
            .map_err(|e| JsValue::from_str(&e))
    }

    pub fn step(&mut self) -> Result<String, JsValue> {
        self.0.step_json().map_err(|e| JsValue::from_str(&e))
    }

    pub fn iterations(&self) -> usize {
        self.0.iterations()
    }

    pub fn world(&self) -> String {
        self.0.world_json()
    }

    #[wasm_bindgen(js_name = qTables)]
    pub fn q_tables(&self) -> String {
        self.0.q_tables_json()
    }
}

use serde::Serialize;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{ExperimentResult, HarnessError, IterationRecord};
use crate::firesim::BehaviorKind;

/// Paths written by [`emit_outputs`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputFiles {
    pub accuracy: PathBuf,
    pub behaviors: PathBuf,
    pub trace: PathBuf,
    pub plot: PathBuf,
}

impl OutputFiles {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            accuracy: dir.join("accuracy.csv"),
            behaviors: dir.join("behaviors.csv"),
            trace: dir.join("trace.jsonl"),
            plot: dir.join("plot.gp"),
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn csv_err(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::io(path, std::io::Error::other(e))
}

/// Writes `accuracy.csv`, `behaviors.csv`, `trace.jsonl` and `plot.gp` into
/// `dir`, creating it if needed.
pub fn emit_outputs(result: &ExperimentResult, dir: &Path) -> Result<OutputFiles, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let files = OutputFiles::in_dir(dir);
    write_accuracy(result, &files.accuracy)?;
    write_behaviors(result, &files.behaviors)?;
    write_trace(result, &files.trace)?;
    fs::write(&files.plot, plot_script(result)).map_err(|e| HarnessError::io(&files.plot, e))?;
    Ok(files)
}

fn write_accuracy(result: &ExperimentResult, path: &Path) -> Result<(), HarnessError> {
    let nodes = result.tracked_nodes();
    let w = result.config.window;
    let mut columns = Vec::new();
    for node in &nodes {
        columns.push(result.node_series(node).trailing(w));
        columns.push(
            result
                .baseline_series(node)
                .map(|s| s.trailing(w))
                .unwrap_or_else(|| vec![None; result.config.iterations as usize]),
        );
    }

    let mut out = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut header = vec!["iteration".to_string()];
    for node in &nodes {
        header.push(node.clone());
        header.push(format!("{node}_baseline"));
    }
    out.write_record(&header).map_err(|e| csv_err(path, e))?;
    for i in 0..result.config.iterations as usize {
        let mut row = vec![i.to_string()];
        row.extend(columns.iter().map(|c| fmt_opt(c[i])));
        out.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    out.flush().map_err(|e| HarnessError::io(path, e))
}

fn write_behaviors(result: &ExperimentResult, path: &Path) -> Result<(), HarnessError> {
    let acc = result.behavior_accuracy();
    let base = result.baseline_behavior_accuracy();
    let mut out = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    out.write_record(["behavior", "accuracy", "baseline"])
        .map_err(|e| csv_err(path, e))?;
    for b in BehaviorKind::ALL {
        out.write_record([
            b.as_str().to_string(),
            format!("{:.6}", acc[b.index()]),
            fmt_opt(base.map(|a| a[b.index()])),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    out.flush().map_err(|e| HarnessError::io(path, e))
}

#[derive(Serialize)]
struct TraceLine<'a> {
    agent: &'static str,
    trial: u32,
    seed: u64,
    #[serde(flatten)]
    record: &'a IterationRecord,
}

fn write_trace(result: &ExperimentResult, path: &Path) -> Result<(), HarnessError> {
    let file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut out = BufWriter::new(file);
    let runs = std::iter::once(("learned", &result.trials))
        .chain(result.baseline.as_ref().map(|b| ("baseline", b)));
    for (agent, trials) in runs {
        for trial in trials {
            for record in &trial.records {
                let line = TraceLine {
                    agent,
                    trial: trial.index,
                    seed: trial.seed,
                    record,
                };
                serde_json::to_writer(&mut out, &line)
                    .map_err(|e| HarnessError::io(path, e.into()))?;
                out.write_all(b"\n")
                    .map_err(|e| HarnessError::io(path, e))?;
            }
        }
    }
    out.flush().map_err(|e| HarnessError::io(path, e))
}

/// A gnuplot script drawing every column of `accuracy.csv`.
pub fn plot_script(result: &ExperimentResult) -> String {
    let nodes = result.tracked_nodes();
    let mut s = String::new();
    s.push_str("# gnuplot plot.gp  (writes accuracy.png)\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead bottom right\n");
    s.push_str(&format!(
        "set title 'Scenario {}: node accuracy ({} trials, window {})'\n",
        result.config.scenario, result.config.trials, result.config.window
    ));
    s.push_str("set xlabel 'iteration'\nset ylabel 'accuracy'\nset yrange [0:1.05]\n");
    s.push_str("set terminal pngcairo size 900,500\nset output 'accuracy.png'\n");
    let plots: Vec<String> = (0..nodes.len() * 2)
        .map(|i| {
            let style = if i % 2 == 0 {
                "lines lw 2"
            } else {
                "lines dt 2"
            };
            format!("'accuracy.csv' using 1:{} with {style}", i + 2)
        })
        .collect();
    if plots.is_empty() {
        s.push_str("# no scored learning nodes\n");
    } else {
        s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    }
    s
}

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use learnbt::firesim::{BehaviorKind, Scenario};
use learnbt::harness::{emit_outputs, run_experiment, ExperimentConfig, HarnessError};
use learnbt::treedef::{parse_tree_document, serialize_tree};

#[derive(Parser)]
#[command(
    name = "learnbt",
    version,
    about = "Learning behavior trees: fire-control experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write accuracy.csv, behaviors.csv, trace.jsonl and plot.gp.
    Run(RunArgs),
    /// Validate a tree document and print its canonical form.
    CheckTree { path: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// Base configuration file (TOML); flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    scenario: Option<u8>,
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long)]
    iterations: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also run the random-choice baseline.
    #[arg(long)]
    baseline: bool,
    /// Tree document replacing the scenario's built-in tree.
    #[arg(long)]
    tree: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Initial exploration rate.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
}

impl RunArgs {
    fn into_config(self) -> Result<ExperimentConfig, HarnessError> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.scenario {
            config.scenario = Scenario::try_from(s).map_err(HarnessError::Config)?;
        }
        if let Some(n) = self.trials {
            config.trials = n;
        }
        if let Some(n) = self.iterations {
            config.iterations = n;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(out) = self.out {
            config.out_dir = Some(out);
        }
        config.baseline |= self.baseline;
        if let Some(tree) = self.tree {
            config.tree = Some(tree);
        }
        if let Some(w) = self.window {
            config.window = w;
        }
        let overrides = |p: &mut learnbt::LearnerParams| {
            if let Some(a) = self.alpha {
                p.alpha = a;
            }
            if let Some(g) = self.gamma {
                p.gamma = g;
            }
            if let Some(e) = self.epsilon {
                p.epsilon_start = e;
                p.epsilon_floor = p.epsilon_floor.min(e);
            }
        };
        overrides(&mut config.learner);
        config.node_learners.values_mut().for_each(overrides);
        Ok(config)
    }
}

fn run(args: RunArgs) -> Result<(), HarnessError> {
    let config = args.into_config()?;
    let out = config
        .out_dir
        .clone()
        .ok_or_else(|| HarnessError::Config("no output directory (use --out)".into()))?;
    let result = run_experiment(&config)?;
    let files = emit_outputs(&result, &out)?;

    println!(
        "scenario {}: {} trials x {} iterations, seed {}",
        config.scenario, config.trials, config.iterations, config.seed
    );
    let acc = result.behavior_accuracy();
    for b in BehaviorKind::ALL {
        println!("  {:<17} {:.4}", b.as_str(), acc[b.index()]);
    }
    for node in result.tracked_nodes() {
        let series = result.node_series(&node);
        let fmt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.4}"));
        print!(
            "  node {node}: first 100 {}, last 100 {}",
            fmt(series.head(100)),
            fmt(series.tail(100))
        );
        if let Some(base) = result.baseline_series(&node) {
            print!(", baseline {}", fmt(base.mean_over(0..base.len())));
        }
        println!();
    }
    println!(
        "wrote {}",
        files.accuracy.parent().unwrap_or(&out).display()
    );
    Ok(())
}

fn check_tree(path: PathBuf) -> Result<(), String> {
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let doc = parse_tree_document(&text).map_err(|e| format!("{}: {e}", e.code()))?;
    print!("{}", serialize_tree(&doc));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args).map_err(|e| e.to_string()),
        Command::CheckTree { path } => check_tree(path),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

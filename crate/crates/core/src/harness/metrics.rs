use serde::{Deserialize, Serialize};
use std::ops::Range;

use super::{IterationRecord, TrialResult};
use crate::firesim::BehaviorKind;

/// Per-behavior accuracy of one trial: correct activations over iterations in
/// which the behavior was expected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BehaviorAccuracy {
    pub accuracy: [f64; 3],
    pub expected: [u32; 3],
    pub correct: [u32; 3],
}

impl BehaviorAccuracy {
    pub fn get(&self, behavior: BehaviorKind) -> f64 {
        self.accuracy[behavior.index()]
    }

    /// True when `behavior` was never expected, so its accuracy is 1.0 by
    /// definition.
    pub fn vacuous(&self, behavior: BehaviorKind) -> bool {
        self.expected[behavior.index()] == 0
    }
}

pub fn compute_behavior_accuracy(records: &[IterationRecord]) -> BehaviorAccuracy {
    let mut expected = [0u32; 3];
    let mut correct = [0u32; 3];
    for r in records {
        let i = r.expected.index();
        expected[i] += 1;
        if r.behavior_correct() {
            correct[i] += 1;
        }
    }
    let mut accuracy = [1.0; 3];
    for i in 0..3 {
        if expected[i] > 0 {
            accuracy[i] = f64::from(correct[i]) / f64::from(expected[i]);
        }
    }
    BehaviorAccuracy {
        accuracy,
        expected,
        correct,
    }
}

/// Scored decisions of one node, pooled across trials per iteration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccuracySeries {
    pub correct: Vec<u64>,
    pub total: Vec<u64>,
}

impl AccuracySeries {
    pub fn from_trials(trials: &[TrialResult], node: &str, iterations: u32) -> Self {
        let n = iterations as usize;
        let mut series = Self {
            correct: vec![0; n],
            total: vec![0; n],
        };
        for trial in trials {
            for record in &trial.records {
                let i = record.iteration as usize;
                for d in record.decisions.iter().filter(|d| d.node == node) {
                    if let Some(ok) = d.correct {
                        series.total[i] += 1;
                        series.correct[i] += u64::from(ok);
                    }
                }
            }
        }
        series
    }

    pub fn len(&self) -> usize {
        self.total.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total.is_empty()
    }

    /// Pooled accuracy over `range`; `None` without scored decisions.
    pub fn mean_over(&self, range: Range<usize>) -> Option<f64> {
        let range = range.start.min(self.len())..range.end.min(self.len());
        let total: u64 = self.total[range.clone()].iter().sum();
        let correct: u64 = self.correct[range].iter().sum();
        (total > 0).then(|| correct as f64 / total as f64)
    }

    pub fn pointwise(&self) -> Vec<Option<f64>> {
        (0..self.len()).map(|i| self.mean_over(i..i + 1)).collect()
    }

    /// Full windows only: entry `i` pools iterations `i..i + w`, so the
    /// result has `len - w + 1` entries.
    pub fn windowed(&self, w: usize) -> Vec<Option<f64>> {
        if w == 0 || w > self.len() {
            return Vec::new();
        }
        (0..=self.len() - w)
            .map(|i| self.mean_over(i..i + w))
            .collect()
    }

    /// One entry per iteration pooling the last `w` iterations up to it.
    pub fn trailing(&self, w: usize) -> Vec<Option<f64>> {
        (0..self.len())
            .map(|i| self.mean_over((i + 1).saturating_sub(w.max(1))..i + 1))
            .collect()
    }

    /// Pooled accuracy over the first `n` iterations.
    pub fn head(&self, n: usize) -> Option<f64> {
        self.mean_over(0..n)
    }

    /// Pooled accuracy over the last `n` iterations.
    pub fn tail(&self, n: usize) -> Option<f64> {
        self.mean_over(self.len().saturating_sub(n)..self.len())
    }
}

//! Tabular Q-learning.
//!
//! [`q_update`] is the one-step MDP backup and [`q_update_smdp`] the
//! option-level backup that discounts the bootstrap by `gamma^tau`. Both
//! write exactly one table entry.

mod learner;
mod oracle;
mod snapshot;

pub use learner::{AlphaSchedule, LearnerParams, QLearner};
pub use oracle::{greedy_values, q_values_from, value_iteration, FiniteMdp};
pub use snapshot::{export_snapshot, import_snapshot};

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RlError {
    #[error("reward must be finite, got {0}")]
    NonFiniteReward(f64),
    #[error("option duration tau must be >= 1, got {0}")]
    InvalidTau(u32),
    #[error("action set is empty")]
    EmptyActionSet,
    #[error("action {action} out of range for {n_actions} actions")]
    ActionOutOfRange { action: usize, n_actions: usize },
    #[error("epsilon must lie in [0, 1], got {0}")]
    InvalidEpsilon(f64),
    #[error("invalid learner parameters: {0}")]
    InvalidParams(String),
    #[error("transition row for state {state}, action {action} sums to {sum}, not 1")]
    NonStochasticRow {
        state: usize,
        action: usize,
        sum: f64,
    },
    #[error("malformed model: {0}")]
    MalformedModel(String),
    #[error("value iteration did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("snapshot line {line}: {message}")]
    Snapshot { line: usize, message: String },
}

/// A discrete observation: a fixed-arity tuple of small integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DiscreteState(pub Vec<i32>);

impl DiscreteState {
    pub fn new(features: impl Into<Vec<i32>>) -> Self {
        Self(features.into())
    }

    pub fn features(&self) -> &[i32] {
        &self.0
    }
}

impl fmt::Display for DiscreteState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(">")
    }
}

impl<const N: usize> From<[i32; N]> for DiscreteState {
    fn from(v: [i32; N]) -> Self {
        Self(v.to_vec())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionIndex(pub usize);

impl fmt::Display for ActionIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// State-action values over a fixed action set. Unwritten entries read as 0.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    n_actions: usize,
    rows: BTreeMap<DiscreteState, Vec<f64>>,
}

impl QTable {
    pub fn new(n_actions: usize) -> Result<Self, RlError> {
        if n_actions == 0 {
            return Err(RlError::EmptyActionSet);
        }
        Ok(Self {
            n_actions,
            rows: BTreeMap::new(),
        })
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn get(&self, s: &DiscreteState, a: ActionIndex) -> f64 {
        self.rows
            .get(s)
            .and_then(|r| r.get(a.0))
            .copied()
            .unwrap_or(0.0)
    }

    /// Values of every action in `s`.
    pub fn row(&self, s: &DiscreteState) -> Vec<f64> {
        self.rows
            .get(s)
            .cloned()
            .unwrap_or_else(|| vec![0.0; self.n_actions])
    }

    pub fn max_value(&self, s: &DiscreteState) -> f64 {
        match self.rows.get(s) {
            Some(row) => row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            None => 0.0,
        }
    }

    pub fn set(&mut self, s: &DiscreteState, a: ActionIndex, value: f64) -> Result<(), RlError> {
        self.check_action(a)?;
        if !value.is_finite() {
            return Err(RlError::NonFiniteReward(value));
        }
        let n = self.n_actions;
        self.rows.entry(s.clone()).or_insert_with(|| vec![0.0; n])[a.0] = value;
        Ok(())
    }

    /// Visited states in sorted order with their action values.
    pub fn iter(&self) -> impl Iterator<Item = (&DiscreteState, &[f64])> {
        self.rows.iter().map(|(s, r)| (s, r.as_slice()))
    }

    /// Number of states with a stored row.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn check_action(&self, a: ActionIndex) -> Result<(), RlError> {
        if a.0 < self.n_actions {
            Ok(())
        } else {
            Err(RlError::ActionOutOfRange {
                action: a.0,
                n_actions: self.n_actions,
            })
        }
    }
}

/// One-step Q-learning backup:
/// `Q(s,a) <- (1 - alpha) Q(s,a) + alpha (r + gamma max_a' Q(s',a'))`.
pub fn q_update(
    table: &mut QTable,
    s: &DiscreteState,
    a: ActionIndex,
    r: f64,
    s_next: &DiscreteState,
    alpha: f64,
    gamma: f64,
) -> Result<f64, RlError> {
    table.check_action(a)?;
    if !r.is_finite() {
        return Err(RlError::NonFiniteReward(r));
    }
    let target = r + gamma * table.max_value(s_next);
    let value = (1.0 - alpha) * table.get(s, a) + alpha * target;
    table.set(s, a, value)?;
    Ok(value)
}

/// Option-level backup: the bootstrap is discounted by `gamma^tau`, where
/// `r_accum` already holds the discounted reward collected over the option's
/// `tau` ticks. With `tau = 1` this is bit-for-bit [`q_update`].
#[allow(clippy::too_many_arguments)]
pub fn q_update_smdp(
    table: &mut QTable,
    s: &DiscreteState,
    o: ActionIndex,
    r_accum: f64,
    tau: u32,
    s_next: &DiscreteState,
    alpha: f64,
    gamma: f64,
) -> Result<f64, RlError> {
    if tau < 1 {
        return Err(RlError::InvalidTau(tau));
    }
    table.check_action(o)?;
    if !r_accum.is_finite() {
        return Err(RlError::NonFiniteReward(r_accum));
    }
    let discount = discount_pow(gamma, tau);
    let target = r_accum + discount * table.max_value(s_next);
    let value = (1.0 - alpha) * table.get(s, o) + alpha * target;
    table.set(s, o, value)?;
    Ok(value)
}

/// `gamma^tau` by repeated multiplication, so `tau = 1` returns `gamma` exactly.
pub fn discount_pow(gamma: f64, tau: u32) -> f64 {
    let mut d = gamma;
    for _ in 1..tau {
        d *= gamma;
    }
    d
}

/// All actions sharing the maximal value in `s`, in index order.
pub fn argmax_set(table: &QTable, s: &DiscreteState) -> Vec<ActionIndex> {
    let row = table.row(s);
    let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    row.iter()
        .enumerate()
        .filter(|(_, v)| **v == best)
        .map(|(i, _)| ActionIndex(i))
        .collect()
}

/// Epsilon-greedy choice: uniform with probability `epsilon`, otherwise a
/// uniform pick among the maximising actions.
pub fn select_action<R: Rng + ?Sized>(
    table: &QTable,
    s: &DiscreteState,
    epsilon: f64,
    rng: &mut R,
) -> Result<ActionIndex, RlError> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(RlError::InvalidEpsilon(epsilon));
    }
    let explore = rng.gen::<f64>() < epsilon;
    if explore {
        return Ok(ActionIndex(rng.gen_range(0..table.n_actions())));
    }
    let best = argmax_set(table, s);
    if best.len() == 1 {
        Ok(best[0])
    } else {
        Ok(best[rng.gen_range(0..best.len())])
    }
}

/// Deterministic greedy action, lowest index on ties. For reporting only.
pub fn greedy_action(table: &QTable, s: &DiscreteState) -> ActionIndex {
    argmax_set(table, s)[0]
}

use super::RlError;

const MAX_SWEEPS: usize = 1_000_000;

/// Explicit finite MDP: `rewards[s][a]` and `transitions[s][a][s']`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMdp {
    rewards: Vec<Vec<f64>>,
    transitions: Vec<Vec<Vec<f64>>>,
}

impl FiniteMdp {
    pub fn new(rewards: Vec<Vec<f64>>, transitions: Vec<Vec<Vec<f64>>>) -> Result<Self, RlError> {
        let n = rewards.len();
        if n == 0 || transitions.len() != n {
            return Err(RlError::MalformedModel(
                "rewards and transitions must cover the same non-empty state set".into(),
            ));
        }
        for (s, (r_row, t_rows)) in rewards.iter().zip(&transitions).enumerate() {
            if r_row.is_empty() || r_row.len() != t_rows.len() {
                return Err(RlError::MalformedModel(format!(
                    "state {s}: reward and transition action counts differ"
                )));
            }
            for (a, row) in t_rows.iter().enumerate() {
                if row.len() != n {
                    return Err(RlError::MalformedModel(format!(
                        "state {s}, action {a}: expected {n} successor probabilities"
                    )));
                }
                let sum: f64 = row.iter().sum();
                if row.iter().any(|p| *p < 0.0 || !p.is_finite()) || (sum - 1.0).abs() > 1e-9 {
                    return Err(RlError::NonStochasticRow {
                        state: s,
                        action: a,
                        sum,
                    });
                }
            }
        }
        Ok(Self {
            rewards,
            transitions,
        })
    }

    /// Deterministic model from `next[s][a]` successor indices.
    pub fn deterministic(rewards: Vec<Vec<f64>>, next: Vec<Vec<usize>>) -> Result<Self, RlError> {
        let n = rewards.len();
        let transitions = next
            .iter()
            .map(|acts| {
                acts.iter()
                    .map(|&sp| {
                        let mut row = vec![0.0; n];
                        if sp < n {
                            row[sp] = 1.0;
                        }
                        row
                    })
                    .collect()
            })
            .collect();
        Self::new(rewards, transitions)
    }

    pub fn n_states(&self) -> usize {
        self.rewards.len()
    }

    pub fn n_actions(&self, s: usize) -> usize {
        self.rewards[s].len()
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[s][a]
    }

    pub fn transition(&self, s: usize, a: usize) -> &[f64] {
        &self.transitions[s][a]
    }

    fn backup(&self, s: usize, a: usize, gamma: f64, v: &[f64]) -> f64 {
        let expected: f64 = self.transitions[s][a]
            .iter()
            .zip(v)
            .map(|(p, x)| p * x)
            .sum();
        self.rewards[s][a] + gamma * expected
    }
}

/// Bellman optimality iteration until the largest change drops below `tol`.
pub fn value_iteration(mdp: &FiniteMdp, gamma: f64, tol: f64) -> Result<Vec<f64>, RlError> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(RlError::InvalidParams("gamma must lie in [0, 1]".into()));
    }
    let n = mdp.n_states();
    let mut v = vec![0.0; n];
    for _ in 0..MAX_SWEEPS {
        let next: Vec<f64> = (0..n)
            .map(|s| {
                (0..mdp.n_actions(s))
                    .map(|a| mdp.backup(s, a, gamma, &v))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let delta = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if delta < tol {
            return Ok(v);
        }
    }
    Err(RlError::NoConvergence(MAX_SWEEPS))
}

/// `Q(s,a) = R(s,a) + gamma sum_s' P(s'|s,a) V(s')`.
pub fn q_values_from(mdp: &FiniteMdp, gamma: f64, v: &[f64]) -> Vec<Vec<f64>> {
    (0..mdp.n_states())
        .map(|s| {
            (0..mdp.n_actions(s))
                .map(|a| mdp.backup(s, a, gamma, v))
                .collect()
        })
        .collect()
}

/// `max_a Q(s,a)` per state.
pub fn greedy_values(q: &[Vec<f64>]) -> Vec<f64> {
    q.iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

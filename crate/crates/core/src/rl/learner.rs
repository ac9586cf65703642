use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use super::{
    greedy_action, q_update_smdp, select_action, ActionIndex, DiscreteState, QTable, RlError,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSchedule {
    /// `alpha` on every update.
    #[default]
    Constant,
    /// `1 / k` on the k-th update of a state-action pair.
    InverseVisits,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerParams {
    pub alpha: f64,
    pub alpha_schedule: AlphaSchedule,
    pub gamma: f64,
    pub epsilon_start: f64,
    /// Multiplier applied to epsilon after every completed episode.
    pub epsilon_decay: f64,
    pub epsilon_floor: f64,
    pub rng_seed: u64,
}

impl Default for LearnerParams {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            alpha_schedule: AlphaSchedule::Constant,
            gamma: 0.5,
            epsilon_start: 0.1,
            epsilon_decay: 0.98,
            epsilon_floor: 0.0,
            rng_seed: 0,
        }
    }
}

impl LearnerParams {
    /// Uniform random choice at every decision; the reference baseline.
    pub fn random_baseline(self) -> Self {
        Self {
            epsilon_start: 1.0,
            epsilon_decay: 1.0,
            epsilon_floor: 1.0,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), RlError> {
        let fail = |m: &str| Err(RlError::InvalidParams(m.to_string()));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return fail("alpha must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return fail("gamma must lie in [0, 1]");
        }
        if !(0.0 <= self.epsilon_floor
            && self.epsilon_floor <= self.epsilon_start
            && self.epsilon_start <= 1.0)
        {
            return fail("need 0 <= epsilon_floor <= epsilon_start <= 1");
        }
        if !(self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0) {
            return fail("epsilon_decay must lie in (0, 1]");
        }
        Ok(())
    }
}

/// A Q-table with its exploration schedule and a private seeded stream.
#[derive(Clone, Debug)]
pub struct QLearner {
    table: QTable,
    params: LearnerParams,
    epsilon: f64,
    rng: ChaCha8Rng,
    visits: HashMap<(DiscreteState, usize), u64>,
    updates: u64,
}

impl QLearner {
    pub fn new(n_actions: usize, params: LearnerParams) -> Result<Self, RlError> {
        params.validate()?;
        Ok(Self {
            table: QTable::new(n_actions)?,
            params,
            epsilon: params.epsilon_start,
            rng: ChaCha8Rng::seed_from_u64(params.rng_seed),
            visits: HashMap::new(),
            updates: 0,
        })
    }

    pub fn with_table(mut self, table: QTable) -> Result<Self, RlError> {
        if table.n_actions() != self.table.n_actions() {
            return Err(RlError::InvalidParams(format!(
                "table has {} actions, learner expects {}",
                table.n_actions(),
                self.table.n_actions()
            )));
        }
        self.table = table;
        Ok(self)
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn params(&self) -> &LearnerParams {
        &self.params
    }

    pub fn n_actions(&self) -> usize {
        self.table.n_actions()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Number of backups applied so far.
    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn select(&mut self, s: &DiscreteState) -> ActionIndex {
        select_action(&self.table, s, self.epsilon, &mut self.rng)
            .expect("epsilon kept within [0, 1] by the schedule")
    }

    pub fn greedy(&self, s: &DiscreteState) -> ActionIndex {
        greedy_action(&self.table, s)
    }

    /// Option-level backup with the learning rate given by the schedule.
    pub fn update(
        &mut self,
        s: &DiscreteState,
        a: ActionIndex,
        r_accum: f64,
        tau: u32,
        s_next: &DiscreteState,
    ) -> Result<f64, RlError> {
        let alpha = match self.params.alpha_schedule {
            AlphaSchedule::Constant => self.params.alpha,
            AlphaSchedule::InverseVisits => {
                let k = self.visits.entry((s.clone(), a.0)).or_insert(0);
                *k += 1;
                1.0 / *k as f64
            }
        };
        let value = q_update_smdp(
            &mut self.table,
            s,
            a,
            r_accum,
            tau,
            s_next,
            alpha,
            self.params.gamma,
        )?;
        self.updates += 1;
        Ok(value)
    }

    /// Advances the exploration schedule by one episode.
    pub fn decay_exploration(&mut self) {
        self.epsilon = (self.epsilon * self.params.epsilon_decay).max(self.params.epsilon_floor);
    }
}

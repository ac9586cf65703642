//! Fire-control world: an endless series of rooms, each possibly holding a
//! victim and a fire of one of three types, plus a hidden one-to-one map from
//! extinguishers to fire types drawn once per trial.
//!
//! Scenario 1 resolves every action instantly. In scenario 2 fires carry an
//! intensity in `1..=3`; saving a victim takes that many ticks and the right
//! extinguisher lowers the intensity by one per tick.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::bt::NodeStatus;
use crate::rl::DiscreteState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Scenario {
    /// Instant actions, one learning action node.
    One,
    /// Timed actions, nested learning nodes.
    Two,
}

impl TryFrom<u8> for Scenario {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            1 => Ok(Scenario::One),
            2 => Ok(Scenario::Two),
            other => Err(format!("scenario must be 1 or 2, got {other}")),
        }
    }
}

impl From<Scenario> for u8 {
    fn from(s: Scenario) -> u8 {
        match s {
            Scenario::One => 1,
            Scenario::Two => 2,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FireType {
    T1,
    T2,
    T3,
}

impl FireType {
    pub const ALL: [FireType; 3] = [FireType::T1, FireType::T2, FireType::T3];

    /// 1, 2 or 3.
    pub fn number(self) -> i32 {
        self as i32 + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Extinguisher {
    A,
    B,
    C,
}

impl Extinguisher {
    pub const ALL: [Extinguisher; 3] = [Extinguisher::A, Extinguisher::B, Extinguisher::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            Extinguisher::A => "A",
            Extinguisher::B => "B",
            Extinguisher::C => "C",
        }
    }
}

/// The three top-level behaviors the agent can be in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviorKind {
    SaveVictim,
    UseExtinguisher,
    ChangeRoom,
}

impl BehaviorKind {
    pub const ALL: [BehaviorKind; 3] = [
        BehaviorKind::SaveVictim,
        BehaviorKind::UseExtinguisher,
        BehaviorKind::ChangeRoom,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BehaviorKind::SaveVictim => "save_victim",
            BehaviorKind::UseExtinguisher => "use_extinguisher",
            BehaviorKind::ChangeRoom => "change_room",
        }
    }
}

impl fmt::Display for BehaviorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Room {
    pub has_victim: bool,
    pub fire: Option<FireType>,
    /// 0 when there is no fire, and always 0 in scenario 1.
    pub fire_intensity: u8,
    /// Set by a wrong extinguisher; never cleared within the room.
    pub lost: bool,
    /// Ticks already spent saving the victim.
    pub save_progress: u8,
}

impl Room {
    pub fn has_fire(&self) -> bool {
        self.fire.is_some()
    }

    /// The unique correct behavior: leave a lost room, otherwise save the
    /// victim first, then put out the fire, then move on.
    pub fn expected_behavior(&self) -> BehaviorKind {
        if self.lost {
            BehaviorKind::ChangeRoom
        } else if self.has_victim {
            BehaviorKind::SaveVictim
        } else if self.has_fire() {
            BehaviorKind::UseExtinguisher
        } else {
            BehaviorKind::ChangeRoom
        }
    }

    /// Leaving is right when nothing is left to do or the room is lost.
    pub fn is_right_moment_to_leave(&self) -> bool {
        self.lost || (!self.has_victim && !self.has_fire())
    }
}

/// Hidden bijection from extinguishers to the fire type each one puts out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtinguisherMap([FireType; 3]);

impl ExtinguisherMap {
    pub fn new(targets: [FireType; 3]) -> Option<Self> {
        let mut seen = [false; 3];
        for t in targets {
            if std::mem::replace(&mut seen[t as usize], true) {
                return None;
            }
        }
        Some(Self(targets))
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut targets = FireType::ALL;
        targets.shuffle(rng);
        Self(targets)
    }

    pub fn fire_for(&self, ext: Extinguisher) -> FireType {
        self.0[ext.index()]
    }

    pub fn extinguisher_for(&self, fire: FireType) -> Extinguisher {
        Extinguisher::ALL
            .into_iter()
            .find(|e| self.fire_for(*e) == fire)
            .expect("map is a bijection")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SimEvent {
    SavedVictim,
    SaveInProgress,
    Extinguished,
    WrongExtinguisher,
    IntensityReduced { from: u8 },
    ChangedRoom { right_moment: bool },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", content = "extinguisher", rename_all = "snake_case")]
pub enum SimAction {
    SaveVictim,
    UseExtinguisher(Extinguisher),
    ChangeRoom,
}

impl SimAction {
    pub fn behavior(self) -> BehaviorKind {
        match self {
            SimAction::SaveVictim => BehaviorKind::SaveVictim,
            SimAction::UseExtinguisher(_) => BehaviorKind::UseExtinguisher,
            SimAction::ChangeRoom => BehaviorKind::ChangeRoom,
        }
    }
}

/// Result of one primitive action.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionOutcome {
    pub status: NodeStatus,
    /// Action-level reward of the running scenario (extinguisher actions only).
    pub reward_signal: f64,
    pub events: Vec<SimEvent>,
}

impl ActionOutcome {
    fn new(status: NodeStatus, events: Vec<SimEvent>) -> Self {
        Self {
            status,
            reward_signal: 0.0,
            events,
        }
    }

    /// A failure that never reached the world, e.g. a guard condition failed.
    pub fn blocked() -> Self {
        Self::new(NodeStatus::Failure, Vec::new())
    }

    pub fn has(&self, event: SimEvent) -> bool {
        self.events.contains(&event)
    }

    pub fn right_moment(&self) -> Option<bool> {
        self.events.iter().find_map(|e| match e {
            SimEvent::ChangedRoom { right_moment } => Some(*right_moment),
            _ => None,
        })
    }

    pub fn intensity_reduced_from(&self) -> Option<u8> {
        self.events.iter().find_map(|e| match e {
            SimEvent::IntensityReduced { from } => Some(*from),
            _ => None,
        })
    }
}

/// What the agent may see. The extinguisher map is never part of it.
///
/// A lost room's fire can no longer be fought, so it is reported as no fire:
/// `has_fire` is false and `fire_type` is 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    /// 0 when there is no fire to fight, otherwise 1..=3.
    pub fire_type: i32,
    pub has_victim: bool,
    pub has_fire: bool,
    pub room_lost: bool,
}

impl Observation {
    pub fn fire_state(&self) -> DiscreteState {
        DiscreteState(vec![self.fire_type])
    }

    pub fn victim_fire_state(&self) -> DiscreteState {
        DiscreteState(vec![self.has_victim as i32, self.has_fire as i32])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub victim_probability: f64,
    pub fire_probability: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::One,
            victim_probability: 0.5,
            fire_probability: 0.5,
        }
    }
}

impl SimConfig {
    pub fn scenario(scenario: Scenario) -> Self {
        Self {
            scenario,
            ..Self::default()
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SimError {
    #[error("a correct extinguisher tick cannot happen at fire intensity 0")]
    ZeroIntensity,
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
}

#[derive(Clone, Debug)]
pub struct SimState {
    config: SimConfig,
    room: Room,
    map: ExtinguisherMap,
    rng: ChaCha8Rng,
    rooms_visited: u64,
    actions_taken: u64,
    tick_actions: Vec<(SimAction, ActionOutcome)>,
}

impl SimState {
    /// Draws the extinguisher map, then the first room.
    pub fn new(config: SimConfig, seed: u64) -> Result<Self, SimError> {
        for p in [config.victim_probability, config.fire_probability] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::Probability(p));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = ExtinguisherMap::random(&mut rng);
        let mut state = Self {
            config,
            room: Room::default(),
            map,
            rng,
            rooms_visited: 0,
            actions_taken: 0,
            tick_actions: Vec::new(),
        };
        state.room = state.generate_room();
        state.rooms_visited = 1;
        Ok(state)
    }

    /// Same as [`SimState::new`] with a fixed map and room; for tests.
    pub fn with_room(config: SimConfig, seed: u64, map: ExtinguisherMap, room: Room) -> Self {
        Self {
            config,
            room,
            map,
            rng: ChaCha8Rng::seed_from_u64(seed),
            rooms_visited: 1,
            actions_taken: 0,
            tick_actions: Vec::new(),
        }
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn scenario(&self) -> Scenario {
        self.config.scenario
    }

    pub fn room(&self) -> &Room {
        &self.room
    }

    /// The hidden map. Agents must not read this; the harness uses it for
    /// ground truth.
    pub fn extinguisher_map(&self) -> &ExtinguisherMap {
        &self.map
    }

    pub fn rooms_visited(&self) -> u64 {
        self.rooms_visited
    }

    pub fn actions_taken(&self) -> u64 {
        self.actions_taken
    }

    /// Forgets the actions of the previous tick.
    pub fn begin_tick(&mut self) {
        self.tick_actions.clear();
    }

    /// Actions performed since [`SimState::begin_tick`], with their outcomes.
    pub fn tick_actions(&self) -> &[(SimAction, ActionOutcome)] {
        &self.tick_actions
    }

    pub fn last_outcome(&self) -> Option<&ActionOutcome> {
        self.tick_actions.last().map(|(_, o)| o)
    }

    /// A fresh room: victim and fire are independent draws; the fire type is
    /// uniform, and in scenario 2 so is the intensity in `1..=3`.
    pub fn generate_room(&mut self) -> Room {
        let has_victim = self.rng.gen_bool(self.config.victim_probability);
        let fire = if self.rng.gen_bool(self.config.fire_probability) {
            Some(FireType::ALL[self.rng.gen_range(0..3)])
        } else {
            None
        };
        let fire_intensity = match (self.config.scenario, fire) {
            (Scenario::Two, Some(_)) => self.rng.gen_range(1..=3),
            _ => 0,
        };
        Room {
            has_victim,
            fire,
            fire_intensity,
            lost: false,
            save_progress: 0,
        }
    }

    pub fn observe(&self) -> Observation {
        Observation {
            fire_type: match self.room.fire {
                Some(fire) if !self.room.lost => fire.number(),
                _ => 0,
            },
            has_victim: self.room.has_victim,
            has_fire: self.room.has_fire() && !self.room.lost,
            room_lost: self.room.lost,
        }
    }

    pub fn apply(&mut self, action: SimAction) -> ActionOutcome {
        match action {
            SimAction::SaveVictim => self.apply_save_victim(),
            SimAction::UseExtinguisher(e) => self.apply_extinguisher(e),
            SimAction::ChangeRoom => self.apply_change_room(),
        }
    }

    pub fn apply_save_victim(&mut self) -> ActionOutcome {
        let room = &mut self.room;
        let outcome = if !room.has_victim || room.lost {
            ActionOutcome::new(NodeStatus::Failure, Vec::new())
        } else {
            let needed = match self.config.scenario {
                Scenario::One => 1,
                Scenario::Two => room.fire_intensity.max(1),
            };
            room.save_progress += 1;
            if room.save_progress >= needed {
                room.has_victim = false;
                room.save_progress = 0;
                ActionOutcome::new(NodeStatus::Success, vec![SimEvent::SavedVictim])
            } else {
                ActionOutcome::new(NodeStatus::Running, vec![SimEvent::SaveInProgress])
            }
        };
        self.log(SimAction::SaveVictim, outcome)
    }

    pub fn apply_extinguisher(&mut self, ext: Extinguisher) -> ActionOutcome {
        let scenario = self.config.scenario;
        let target = self.map.fire_for(ext);
        let room = &mut self.room;
        let mut outcome = match room.fire {
            _ if room.lost => ActionOutcome::new(NodeStatus::Failure, Vec::new()),
            None => ActionOutcome::new(NodeStatus::Failure, Vec::new()),
            Some(fire) if fire != target => {
                room.lost = true;
                ActionOutcome::new(NodeStatus::Failure, vec![SimEvent::WrongExtinguisher])
            }
            Some(_) => match scenario {
                Scenario::One => {
                    room.fire = None;
                    ActionOutcome::new(NodeStatus::Success, vec![SimEvent::Extinguished])
                }
                Scenario::Two => {
                    let from = room.fire_intensity;
                    room.fire_intensity = from.saturating_sub(1);
                    let mut events = vec![SimEvent::IntensityReduced { from }];
                    if room.fire_intensity == 0 {
                        room.fire = None;
                        events.push(SimEvent::Extinguished);
                        ActionOutcome::new(NodeStatus::Success, events)
                    } else {
                        ActionOutcome::new(NodeStatus::Running, events)
                    }
                }
            },
        };
        outcome.reward_signal = match scenario {
            Scenario::One => reward_scenario1(&outcome).unwrap_or(0.0),
            Scenario::Two => match outcome.intensity_reduced_from() {
                Some(from) => reward_scenario2_action(&outcome, from).unwrap_or(0.0),
                None => reward_scenario2_action(&outcome, 0).unwrap_or(0.0),
            },
        };
        self.log(SimAction::UseExtinguisher(ext), outcome)
    }

    pub fn apply_change_room(&mut self) -> ActionOutcome {
        let right_moment = self.room.is_right_moment_to_leave();
        self.room = self.generate_room();
        self.rooms_visited += 1;
        let outcome = ActionOutcome::new(
            NodeStatus::Success,
            vec![SimEvent::ChangedRoom { right_moment }],
        );
        self.log(SimAction::ChangeRoom, outcome)
    }

    fn log(&mut self, action: SimAction, outcome: ActionOutcome) -> ActionOutcome {
        self.actions_taken += 1;
        self.tick_actions.push((action, outcome.clone()));
        outcome
    }
}

/// Scenario 1 extinguisher reward: +10 when the fire went out, -10 for the
/// wrong extinguisher, nothing for any other outcome.
pub fn reward_scenario1(outcome: &ActionOutcome) -> Option<f64> {
    if outcome.has(SimEvent::Extinguished) {
        Some(10.0)
    } else if outcome.has(SimEvent::WrongExtinguisher) {
        Some(-10.0)
    } else {
        None
    }
}

/// Scenario 2 extinguisher reward: `10 / intensity` per correct tick, with the
/// intensity read before that tick's decrement, and -10 for the wrong
/// extinguisher. Other outcomes earn 0.
pub fn reward_scenario2_action(
    outcome: &ActionOutcome,
    intensity_at_tick: u8,
) -> Result<f64, SimError> {
    if outcome.has(SimEvent::WrongExtinguisher) {
        return Ok(-10.0);
    }
    if outcome.intensity_reduced_from().is_some() {
        if intensity_at_tick == 0 {
            return Err(SimError::ZeroIntensity);
        }
        return Ok(10.0 / f64::from(intensity_at_tick));
    }
    Ok(0.0)
}

/// Scenario 2 reward for the behavior-selecting node, per tick of the chosen
/// behavior. Saving and extinguishing pay -1 while in progress, +10 on
/// completion and -10 when there was nothing to save or extinguish; a wrong
/// extinguisher costs -1 like any other extinguishing tick. Changing room pays
/// +10 at the right moment and -10 otherwise.
pub fn reward_scenario2_composite(behavior: BehaviorKind, outcome: &ActionOutcome) -> f64 {
    match behavior {
        BehaviorKind::SaveVictim | BehaviorKind::UseExtinguisher => match outcome.status {
            NodeStatus::Running => -1.0,
            NodeStatus::Success => 10.0,
            _ if outcome.has(SimEvent::WrongExtinguisher) => -1.0,
            _ => -10.0,
        },
        BehaviorKind::ChangeRoom => match outcome.right_moment() {
            Some(true) => 10.0,
            _ => -10.0,
        },
    }
}

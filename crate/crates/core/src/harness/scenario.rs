//! Bindings between tree documents and the fire-control world.

use crate::bt::NodeStatus;
use crate::firesim::{
    reward_scenario1, reward_scenario2_action, reward_scenario2_composite, ActionOutcome,
    BehaviorKind, Extinguisher, Scenario, SimState,
};
use crate::treedef::{parse_tree_document, Registry, TreeDefError, TreeDocument};

pub const SCENARIO1_TREE: &str = include_str!("../../fixtures/scenario1.bt3.json");
pub const SCENARIO2_TREE: &str = include_str!("../../fixtures/scenario2.bt3.json");

/// Extractor names whose decisions the harness can score.
pub const FIRE_TYPE_STATE: &str = "fire_type";
pub const VICTIM_FIRE_STATE: &str = "victim_fire";

pub fn default_tree_text(scenario: Scenario) -> &'static str {
    match scenario {
        Scenario::One => SCENARIO1_TREE,
        Scenario::Two => SCENARIO2_TREE,
    }
}

pub fn default_tree(scenario: Scenario) -> Result<TreeDocument, TreeDefError> {
    parse_tree_document(default_tree_text(scenario))
}

/// Registers the fire-control leaves, extractors, executors and rewards:
///
/// | name | binds |
/// |---|---|
/// | `HasVictim`, `HasFire` | condition kinds |
/// | `SaveVictim`, `ChangeRoom` | action kinds |
/// | `fire_type`, `victim_fire` | state extractors |
/// | `use_extinguisher` | executor over actions A, B, C |
/// | `scenario1_extinguisher`, `scenario2_extinguisher`, `scenario2_behavior` | rewards |
pub fn register_fire_kinds(registry: &mut Registry<SimState>) {
    registry
        .register_condition("HasVictim", |w| w.observe().has_victim)
        .register_condition("HasFire", |w| w.observe().has_fire)
        .register_action("SaveVictim", |w| w.apply_save_victim().status)
        .register_action("ChangeRoom", |w| w.apply_change_room().status)
        .register_extractor(FIRE_TYPE_STATE, |w| w.observe().fire_state())
        .register_extractor(VICTIM_FIRE_STATE, |w| w.observe().victim_fire_state())
        .register_executor("use_extinguisher", |w, a| {
            match Extinguisher::from_index(a.0) {
                Some(ext) => w.apply_extinguisher(ext).status,
                None => NodeStatus::Error,
            }
        })
        .register_reward("scenario1_extinguisher", |w, _| {
            w.last_outcome().and_then(reward_scenario1).unwrap_or(0.0)
        })
        .register_reward("scenario2_extinguisher", |w, _| match w.last_outcome() {
            Some(outcome) => {
                let intensity = outcome.intensity_reduced_from().unwrap_or(0);
                reward_scenario2_action(outcome, intensity).unwrap_or(f64::NAN)
            }
            None => 0.0,
        })
        .register_reward("scenario2_behavior", |w, input| {
            let Some(behavior) = BehaviorKind::from_index(input.chosen.0) else {
                return f64::NAN;
            };
            // a guard condition may have failed before the world was touched
            let mut outcome = w
                .last_outcome()
                .cloned()
                .unwrap_or_else(ActionOutcome::blocked);
            outcome.status = input.status;
            reward_scenario2_composite(behavior, &outcome)
        });
}

/// A registry with the built-in kinds and the fire-control bindings.
pub fn fire_registry() -> Registry<SimState> {
    let mut registry = Registry::new();
    register_fire_kinds(&mut registry);
    registry
}

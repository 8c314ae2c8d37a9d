//! Interventions, reward and the UCT planner that chooses among them.

mod episode;
mod uct;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{emit, EventKind, HealthCompartment, SimState, StepEvent};
use crate::scenario::PlannerSettings;

pub use episode::{
    run_episode, run_round, CensusRow, DecisionRecord, EpisodeResult, Policy, Trajectory,
};
pub use uct::{plan, plan_with_report, state_key, ActionStats, PlanReport, SearchNode};

/// One intervention per timestep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Noop,
    MandateMasks,
    Vaccinate(usize),
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Noop => f.write_str("noop"),
            Action::MandateMasks => f.write_str("mask"),
            Action::Vaccinate(id) => write!(f, "vaccinate({id})"),
        }
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "noop" => Ok(Action::Noop),
            "mask" => Ok(Action::MandateMasks),
            _ => s
                .strip_prefix("vaccinate(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|id| id.parse().ok())
                .map(Action::Vaccinate)
                .ok_or_else(|| format!("unknown action {s:?}")),
        }
    }
}

impl Serialize for Action {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("mask mandate unavailable: masks are not offered in this scenario")]
    MasksUnavailable,
    #[error("mask mandate already active")]
    MandateActive,
    #[error("vaccination unavailable: vaccines are not offered in this scenario")]
    VaccinesUnavailable,
    #[error("cannot vaccinate person {0}: no such person")]
    UnknownPerson(usize),
    #[error("cannot vaccinate person {id}: compartment {compartment} is not S or R")]
    NotEligible {
        id: usize,
        compartment: HealthCompartment,
    },
    #[error("cannot vaccinate person {0}: already vaccinated")]
    AlreadyVaccinated(usize),
}

fn vaccine_eligible(p: &crate::dynamics::PersonState) -> bool {
    matches!(p.compartment, HealthCompartment::S | HealthCompartment::R) && !p.vaccinated
}

/// Legal actions in fixed order: noop, mask mandate, then vaccinations by
/// ascending person id.
pub fn available_actions(state: &SimState, settings: &PlannerSettings) -> Vec<Action> {
    let mut out = vec![Action::Noop];
    if settings.masks_available && !state.mask_mandate_active {
        out.push(Action::MandateMasks);
    }
    if settings.vaccines_available {
        out.extend(
            state
                .persons
                .iter()
                .filter(|p| vaccine_eligible(p))
                .map(|p| Action::Vaccinate(p.id)),
        );
    }
    out
}

pub(crate) fn action_count(state: &SimState, settings: &PlannerSettings) -> usize {
    let mut n = 1;
    if settings.masks_available && !state.mask_mandate_active {
        n += 1;
    }
    if settings.vaccines_available {
        n += state.persons.iter().filter(|p| vaccine_eligible(p)).count();
    }
    n
}

/// The `index`-th entry of [`available_actions`] without allocating.
pub(crate) fn nth_action(state: &SimState, settings: &PlannerSettings, mut index: usize) -> Action {
    if index == 0 {
        return Action::Noop;
    }
    index -= 1;
    if settings.masks_available && !state.mask_mandate_active {
        if index == 0 {
            return Action::MandateMasks;
        }
        index -= 1;
    }
    let person = state
        .persons
        .iter()
        .filter(|p| vaccine_eligible(p))
        .nth(index)
        .expect("index within action_count");
    Action::Vaccinate(person.id)
}

pub fn check_action(
    state: &SimState,
    action: &Action,
    settings: &PlannerSettings,
) -> Result<(), ActionError> {
    match *action {
        Action::Noop => Ok(()),
        Action::MandateMasks if !settings.masks_available => Err(ActionError::MasksUnavailable),
        Action::MandateMasks if state.mask_mandate_active => Err(ActionError::MandateActive),
        Action::MandateMasks => Ok(()),
        Action::Vaccinate(_) if !settings.vaccines_available => {
            Err(ActionError::VaccinesUnavailable)
        }
        Action::Vaccinate(id) => {
            let p = state
                .persons
                .get(id)
                .ok_or(ActionError::UnknownPerson(id))?;
            if p.vaccinated {
                Err(ActionError::AlreadyVaccinated(id))
            } else if !vaccine_eligible(p) {
                Err(ActionError::NotEligible {
                    id,
                    compartment: p.compartment,
                })
            } else {
                Ok(())
            }
        }
    }
}

/// Applies an intervention and returns its cost. Compliance was drawn at
/// initialisation: refusers simply ignore the mandate or the dose.
pub fn apply_action(
    state: &mut SimState,
    action: &Action,
    settings: &PlannerSettings,
    mut events: Option<&mut Vec<StepEvent>>,
) -> Result<f64, ActionError> {
    check_action(state, action, settings)?;
    let step = state.step + 1;
    match *action {
        Action::Noop => Ok(0.0),
        Action::MandateMasks => {
            state.mask_mandate_active = true;
            for p in state.persons.iter_mut().filter(|p| p.is_alive()) {
                if p.mask_refuser {
                    emit(
                        &mut events,
                        step,
                        EventKind::ComplianceRefusal,
                        p.id,
                        || "mask".into(),
                    );
                } else {
                    p.masked = true;
                    emit(&mut events, step, EventKind::Masked, p.id, String::new);
                }
            }
            Ok(settings.cost_mask_action)
        }
        Action::Vaccinate(id) => {
            let p = &mut state.persons[id];
            if p.vax_refuser {
                emit(&mut events, step, EventKind::ComplianceRefusal, id, || {
                    "vaccine".into()
                });
            } else {
                p.vaccinated = true;
                emit(&mut events, step, EventKind::Vaccinated, id, String::new);
            }
            Ok(settings.cost_vax_action)
        }
    }
}

/// Reward of one transition: penalties for infections and deaths that
/// happened during it, plus the cost of the action taken.
pub fn step_reward(
    before: &SimState,
    after: &SimState,
    action_cost: f64,
    settings: &PlannerSettings,
) -> f64 {
    let infections = (after.cumulative_infections - before.cumulative_infections) as f64;
    let deaths = (after.cumulative_deaths - before.cumulative_deaths) as f64;
    settings.pen_i * infections + settings.pen_d * deaths + action_cost
}

/// Running reward total with the counts needed to recompute it in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardLedger {
    pub accumulated: f64,
    pub pen_i: f64,
    pub pen_d: f64,
    pub action_costs: f64,
    pub infections: usize,
    pub deaths: usize,
}

impl RewardLedger {
    pub fn new(settings: &PlannerSettings) -> Self {
        Self {
            accumulated: 0.0,
            pen_i: settings.pen_i,
            pen_d: settings.pen_d,
            action_costs: 0.0,
            infections: 0,
            deaths: 0,
        }
    }

    pub fn record(&mut self, before: &SimState, after: &SimState, action_cost: f64) -> f64 {
        let r = self.pen_i * (after.cumulative_infections - before.cumulative_infections) as f64
            + self.pen_d * (after.cumulative_deaths - before.cumulative_deaths) as f64
            + action_cost;
        self.accumulated += r;
        self.action_costs += action_cost;
        self.infections += after.cumulative_infections - before.cumulative_infections;
        self.deaths += after.cumulative_deaths - before.cumulative_deaths;
        r
    }

    /// `pen_i * I_f + pen_d * D_f + costs`.
    pub fn closed_form(&self) -> f64 {
        self.pen_i * self.infections as f64 + self.pen_d * self.deaths as f64 + self.action_costs
    }
}

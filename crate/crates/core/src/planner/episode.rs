use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::uct::{plan_with_report, ActionStats};
use super::{action_count, nth_action, Action, RewardLedger};
use crate::dynamics::{advance, census, init_state, SimState, StepEvent};
use crate::rng::{stream_rng, Stream};
use crate::scenario::{Issue, PlannerSettings, ValidatedScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Planner,
    Noop,
    Random,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Planner => "planner",
            Policy::Noop => "noop",
            Policy::Random => "random",
        })
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "planner" => Ok(Policy::Planner),
            "noop" => Ok(Policy::Noop),
            "random" => Ok(Policy::Random),
            _ => Err(format!(
                "unknown policy {s:?} (expected planner, noop or random)"
            )),
        }
    }
}

/// One trajectory row: the census after `step` transitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusRow {
    pub step: usize,
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "E")]
    pub e: usize,
    #[serde(rename = "I")]
    pub i: usize,
    #[serde(rename = "R")]
    pub r: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub cum_infections: usize,
    pub cum_deaths: usize,
}

impl CensusRow {
    pub fn of(state: &SimState) -> Self {
        let c = census(state);
        Self {
            step: state.step,
            s: c.s,
            e: c.e,
            i: c.i,
            r: c.r,
            d: c.d,
            cum_infections: state.cumulative_infections,
            cum_deaths: state.cumulative_deaths,
        }
    }
}

/// Census rows from t=0 through the last step, so `rows.len() == steps + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub rows: Vec<CensusRow>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn last(&self) -> &CensusRow {
        self.rows.last().expect("trajectory holds the initial row")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub step: usize,
    pub chosen_action: Action,
    pub root_visits: u64,
    pub per_action: Vec<ActionStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub round: usize,
    pub seed: u64,
    pub trajectory: Trajectory,
    pub ledger: RewardLedger,
    /// Per-step rewards, in order.
    pub rewards: Vec<f64>,
    pub actions: Vec<Action>,
    pub final_state: SimState,
    /// Filled only when recording was requested.
    pub events: Vec<StepEvent>,
    pub decisions: Vec<DecisionRecord>,
}

/// Plays one episode of `validated.planner().horizon` steps from a fresh
/// initial state.
pub fn run_round(
    validated: &ValidatedScenario,
    policy: Policy,
    round: usize,
    seed: u64,
    record: bool,
) -> EpisodeResult {
    let settings = validated.planner();
    let mut state = init_state(validated, seed);
    let mut env = stream_rng(seed, Stream::Environment);
    let mut planning = stream_rng(seed, Stream::Planner);
    let mut ledger = RewardLedger::new(settings);
    let mut trajectory = Trajectory {
        rows: vec![CensusRow::of(&state)],
    };
    let mut rewards = Vec::with_capacity(settings.horizon);
    let mut actions = Vec::with_capacity(settings.horizon);
    let mut events = Vec::new();
    let mut decisions = Vec::new();

    while state.step < settings.horizon {
        let action = match policy {
            Policy::Noop => Action::Noop,
            Policy::Random => {
                let n = action_count(&state, settings);
                nth_action(&state, settings, planning.random_range(0..n))
            }
            Policy::Planner => {
                let report = plan_with_report(&state, validated, settings, &mut planning);
                if record {
                    decisions.push(DecisionRecord {
                        step: state.step,
                        chosen_action: report.chosen,
                        root_visits: report.root_visits,
                        per_action: report.per_action,
                    });
                }
                report.chosen
            }
        };
        let before = state.clone();
        let cost = advance(
            &mut state,
            &action,
            validated,
            &mut env,
            record.then_some(&mut events),
        )
        .expect("policies only choose available actions");
        rewards.push(ledger.record(&before, &state, cost));
        actions.push(action);
        trajectory.rows.push(CensusRow::of(&state));
    }

    EpisodeResult {
        round,
        seed,
        trajectory,
        ledger,
        rewards,
        actions,
        final_state: state,
        events,
        decisions,
    }
}

/// Runs `settings.rounds` independent episodes; round `r` uses seed
/// `seed + r`.
pub fn run_episode(
    validated: &ValidatedScenario,
    settings: &PlannerSettings,
    policy: Policy,
    seed: u64,
) -> Result<Vec<EpisodeResult>, Vec<Issue>> {
    let validated = validated.with_planner(settings.clone())?;
    Ok((0..settings.rounds)
        .map(|round| {
            run_round(
                &validated,
                policy,
                round,
                seed.wrapping_add(round as u64),
                false,
            )
        })
        .collect())
}

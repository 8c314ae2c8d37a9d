use serde::{Deserialize, Serialize};

use super::{HarnessError, Variation};
use crate::planner::{run_round, Trajectory};
use crate::scenario::{density, validate, ScenarioConfig};

/// One room configuration played under several intervention variations.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub scenario: ScenarioConfig,
    pub variations: Vec<Variation>,
    /// Independent repetitions, each of `rounds` episodes.
    pub runs: usize,
    pub seed: u64,
    /// Overrides the scenario's planner horizon; zero plays no steps.
    pub horizon: Option<usize>,
    pub rounds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub run: usize,
    pub round: usize,
    pub seed: u64,
    pub cum_infections: usize,
    pub deaths: usize,
    pub trajectory: Trajectory,
}

/// Aggregates of one variation, one table row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub simulation: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub masks: bool,
    pub vaccines: bool,
    pub walkable: usize,
    pub total_tiles: usize,
    pub density: f64,
    /// Mean over episodes of 100 * ever-infected / N at the end.
    pub pred_pos_pct: f64,
    /// Mean deceased count at the end.
    pub d_avg: f64,
    pub episodes: Vec<EpisodeSummary>,
}

impl RunMetrics {
    fn from_episodes(
        simulation: String,
        variation: &Variation,
        n: usize,
        walkable: usize,
        total_tiles: usize,
        density: f64,
        episodes: Vec<EpisodeSummary>,
    ) -> Self {
        let count = episodes.len().max(1) as f64;
        let pos = if n == 0 {
            0.0
        } else {
            episodes
                .iter()
                .map(|e| 100.0 * e.cum_infections as f64 / n as f64)
                .sum::<f64>()
                / count
        };
        let d_avg = episodes.iter().map(|e| e.deaths as f64).sum::<f64>() / count;
        Self {
            simulation,
            n,
            masks: variation.masks,
            vaccines: variation.vaccines,
            walkable,
            total_tiles,
            density,
            pred_pos_pct: pos,
            d_avg,
            episodes,
        }
    }
}

/// Plays every variation for `runs` x `rounds` episodes.
///
/// Run `r` round `j` uses seed `seed + r * rounds + j` in every variation,
/// so variations are compared on common random numbers.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunMetrics>, HarnessError> {
    let invalid = |issues| HarnessError::Invalid {
        context: spec.name.clone(),
        issues,
    };
    let base = validate(spec.scenario.clone()).map_err(invalid)?;
    let grid = base.grid();
    let mut out = Vec::with_capacity(spec.variations.len());
    for variation in &spec.variations {
        let mut settings = base.planner().clone();
        settings.masks_available = variation.masks;
        settings.vaccines_available = variation.vaccines;
        if let Some(h) = spec.horizon {
            settings.horizon = h;
        }
        if let Some(r) = spec.rounds {
            settings.rounds = r;
        }
        let rounds = settings.rounds;
        let validated = base.with_planner(settings).map_err(invalid)?;
        let policy = variation.policy();
        let mut episodes = Vec::with_capacity(spec.runs * rounds);
        for run in 0..spec.runs {
            let run_seed = spec.seed.wrapping_add((run * rounds) as u64);
            for round in 0..rounds {
                let seed = run_seed.wrapping_add(round as u64);
                let ep = run_round(&validated, policy, round, seed, false);
                episodes.push(EpisodeSummary {
                    run,
                    round,
                    seed,
                    cum_infections: ep.final_state.cumulative_infections,
                    deaths: ep.final_state.cumulative_deaths,
                    trajectory: ep.trajectory,
                });
            }
        }
        out.push(RunMetrics::from_episodes(
            variation.label.clone(),
            variation,
            base.population(),
            base.walkable(),
            grid.total_tiles(),
            density(&base),
            episodes,
        ));
    }
    Ok(out)
}

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{HarnessError, Variation};
use crate::dynamics::HealthCompartment;
use crate::planner::run_round;
use crate::rng::{stream_rng, Stream};
use crate::scenario::{validate, EpiParams, GridMap, Placement, PlannerSettings, ScenarioConfig};

/// A school modelled as repeated classroom simulations.
#[derive(Debug, Clone, PartialEq)]
pub struct SchoolBenchmarkSpec {
    pub name: String,
    /// Enrollment N_e.
    pub enrollment: usize,
    /// Students per classroom m_p.
    pub per_room: usize,
    pub grid_x: usize,
    pub grid_y: usize,
    /// Reported positivity, in percent.
    pub true_pos_pct: f64,
    pub variations: Vec<Variation>,
    pub params: EpiParams,
    pub planner: PlannerSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomSummary {
    pub room: usize,
    pub seed: u64,
    pub cum_infections: usize,
    pub deaths: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchoolMetrics {
    pub model: String,
    pub simulations: usize,
    pub masks: bool,
    pub vaccines: bool,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N_est")]
    pub n_est: usize,
    pub pred_pos_pct: f64,
    pub true_pos_pct: f64,
    pub abs_error: f64,
    pub rooms: Vec<RoomSummary>,
}

/// Nearest integer to `enrollment / per_room`, ties to even.
pub fn rooms_for(enrollment: usize, per_room: usize) -> usize {
    let q = enrollment / per_room;
    let r = enrollment % per_room;
    match (2 * r).cmp(&per_room) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => q + (q % 2),
    }
}

/// Students represented by the simulated classrooms, N_est.
pub fn estimated_students(enrollment: usize, per_room: usize) -> usize {
    per_room * rooms_for(enrollment, per_room)
}

/// Open `grid_x` x `grid_y` classroom with `per_room` students on distinct
/// random tiles, one of them infected. Drawn from the seed's layout stream.
pub fn classroom_scenario(
    spec: &SchoolBenchmarkSpec,
    seed: u64,
) -> Result<ScenarioConfig, HarnessError> {
    let bad = |message: String| HarnessError::Spec {
        path: spec.name.clone(),
        message,
    };
    let grid = GridMap::open(spec.grid_x, spec.grid_y).map_err(|e| bad(e.to_string()))?;
    if spec.per_room == 0 || spec.per_room > grid.total_tiles() {
        return Err(bad(format!(
            "{} students do not fit a {}x{} room",
            spec.per_room, spec.grid_x, spec.grid_y
        )));
    }
    let mut rng = stream_rng(seed, Stream::Layout);
    let mut tiles = sample(&mut rng, grid.total_tiles(), spec.per_room).into_vec();
    tiles.sort_unstable();
    let infected = rng.random_range(0..spec.per_room);
    let placements = tiles
        .into_iter()
        .enumerate()
        .map(|(id, tile)| Placement {
            person_id: id,
            position: grid.pos_of(tile),
            initial_compartment: if id == infected {
                HealthCompartment::I
            } else {
                HealthCompartment::S
            },
            pre_vaccinated: false,
        })
        .collect();
    Ok(ScenarioConfig {
        name: format!("{} classroom", spec.name),
        grid,
        placements,
        params: spec.params.clone(),
        planner: spec.planner.clone(),
    })
}

/// Simulates every variation over `rooms_for(N_e, m_p)` classrooms of one
/// episode each. Room `r` uses seed `seed + r` for layout and dynamics in
/// every variation.
pub fn simulate_school(
    spec: &SchoolBenchmarkSpec,
    seed: u64,
) -> Result<Vec<SchoolMetrics>, HarnessError> {
    if spec.enrollment == 0 {
        return Err(HarnessError::Spec {
            path: spec.name.clone(),
            message: "enrollment must be positive".into(),
        });
    }
    let rooms = rooms_for(spec.enrollment, spec.per_room.max(1));
    let n_est = spec.per_room * rooms;
    let layouts = (0..rooms)
        .map(|r| {
            let room_seed = seed.wrapping_add(r as u64);
            let config = classroom_scenario(spec, room_seed)?;
            let validated = validate(config).map_err(|issues| HarnessError::Invalid {
                context: spec.name.clone(),
                issues,
            })?;
            Ok((room_seed, validated))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let mut out = Vec::with_capacity(spec.variations.len());
    for variation in &spec.variations {
        let policy = variation.policy();
        let mut summaries = Vec::with_capacity(rooms);
        for (room, (room_seed, base)) in layouts.iter().enumerate() {
            let settings = PlannerSettings {
                masks_available: variation.masks,
                vaccines_available: variation.vaccines,
                ..base.planner().clone()
            };
            let validated =
                base.with_planner(settings)
                    .map_err(|issues| HarnessError::Invalid {
                        context: spec.name.clone(),
                        issues,
                    })?;
            let ep = run_round(&validated, policy, 0, *room_seed, false);
            summaries.push(RoomSummary {
                room,
                seed: *room_seed,
                cum_infections: ep.final_state.cumulative_infections,
                deaths: ep.final_state.cumulative_deaths,
            });
        }
        let infected: usize = summaries.iter().map(|s| s.cum_infections).sum();
        let pred = 100.0 * infected as f64 / n_est as f64;
        out.push(SchoolMetrics {
            model: variation.label.clone(),
            simulations: rooms,
            masks: variation.masks,
            vaccines: variation.vaccines,
            n: spec.enrollment,
            n_est,
            pred_pos_pct: pred,
            true_pos_pct: spec.true_pos_pct,
            abs_error: (pred - spec.true_pos_pct).abs(),
            rooms: summaries,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(per_room: usize, true_pos_pct: f64) -> SchoolBenchmarkSpec {
        SchoolBenchmarkSpec {
            name: "test".into(),
            enrollment: 20,
            per_room,
            grid_x: 3,
            grid_y: 3,
            true_pos_pct,
            variations: vec![Variation {
                label: "none".into(),
                masks: false,
                vaccines: false,
            }],
            params: EpiParams::default(),
            planner: PlannerSettings {
                horizon: 5,
                ..PlannerSettings::default()
            },
        }
    }

    #[test]
    fn room_counts() {
        assert_eq!(rooms_for(105, 8), 13);
        assert_eq!(estimated_students(105, 8), 104);
        assert_eq!(rooms_for(350, 17), 21);
        assert_eq!(estimated_students(350, 17), 357);
        // ties go to even
        assert_eq!(rooms_for(10, 4), 2);
        assert_eq!(rooms_for(14, 4), 4);
        assert_eq!(rooms_for(3, 4), 1);
        assert_eq!(rooms_for(1, 4), 0);
    }

    #[test]
    fn classroom_layout() {
        let s = spec(5, 0.0);
        let a = classroom_scenario(&s, 3).unwrap();
        assert_eq!(a, classroom_scenario(&s, 3).unwrap());
        let v = validate(a).unwrap();
        assert_eq!(v.population(), 5);
        let infected = v
            .config()
            .placements
            .iter()
            .filter(|p| p.initial_compartment == HealthCompartment::I)
            .count();
        assert_eq!(infected, 1);
        assert!(classroom_scenario(&spec(10, 0.0), 0).is_err());
    }

    #[test]
    fn abs_error_zero_when_matching() {
        let s = spec(4, 0.0);
        let m = simulate_school(&s, 1).unwrap();
        let exact = SchoolBenchmarkSpec {
            true_pos_pct: m[0].pred_pos_pct,
            ..s
        };
        let m2 = simulate_school(&exact, 1).unwrap();
        assert_eq!(m2[0].abs_error, 0.0);
        assert_eq!(m2[0].simulations, 5);
        assert_eq!(m2[0].n_est, 20);
    }
}

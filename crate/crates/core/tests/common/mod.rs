#![allow(dead_code)]

use std::path::PathBuf;

use epigrid::dynamics::HealthCompartment;
use epigrid::scenario::{
    parse_scenario, validate, EpiParams, GridMap, Placement, PlannerSettings, Pos, ScenarioConfig,
    Tile, ValidatedScenario,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn asset(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("assets")
        .join(rel)
}

pub fn load(rel: &str) -> ValidatedScenario {
    let text = std::fs::read_to_string(asset(rel)).unwrap();
    validate(parse_scenario(&text).unwrap()).unwrap()
}

/// A valid scenario of up to 6x6 tiles drawn from `seed`: random walls,
/// random population, at least one infected person.
pub fn random_scenario(seed: u64) -> ScenarioConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = rng.random_range(1..=6);
    let height = rng.random_range(1..=6);
    let mut tiles: Vec<Tile> = (0..width * height)
        .map(|_| {
            if rng.random_bool(0.25) {
                Tile::Wall
            } else {
                Tile::Walkable
            }
        })
        .collect();
    if tiles.iter().all(|t| *t == Tile::Wall) {
        tiles[0] = Tile::Walkable;
    }
    let grid = GridMap::new(width, height, tiles).unwrap();
    let mut open: Vec<Pos> = grid.walkable_positions().collect();
    open.shuffle(&mut rng);
    let n = rng.random_range(1..=open.len());
    let mut positions: Vec<Pos> = open[..n].to_vec();
    positions.sort_by_key(|p| (p.y, p.x));
    let placements = positions
        .into_iter()
        .enumerate()
        .map(|(id, position)| {
            let initial_compartment = if id == 0 {
                HealthCompartment::I
            } else {
                [
                    HealthCompartment::S,
                    HealthCompartment::S,
                    HealthCompartment::S,
                    HealthCompartment::E,
                    HealthCompartment::I,
                    HealthCompartment::R,
                ][rng.random_range(0..6)]
            };
            let pre_vaccinated =
                initial_compartment == HealthCompartment::S && rng.random_bool(0.2);
            Placement {
                person_id: id,
                position,
                initial_compartment,
                pre_vaccinated,
            }
        })
        .collect();
    let params = EpiParams {
        p_mv: rng.random_range(0.0..=1.0),
        exposure_radius: rng.random_range(1..=3),
        ..EpiParams::default()
    };
    let planner = PlannerSettings {
        masks_available: rng.random_bool(0.5),
        vaccines_available: rng.random_bool(0.5),
        uct_iterations: 20,
        ..PlannerSettings::default()
    };
    ScenarioConfig {
        name: format!("random {seed}"),
        grid,
        placements,
        params,
        planner,
    }
}

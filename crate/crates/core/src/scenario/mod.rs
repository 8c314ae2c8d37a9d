//! Scenario description: the tile map, who stands where at t=0, the
//! epidemiological parameters and the planner budget.
//!
//! A [`ScenarioConfig`] is plain data as read from a file. [`validate`]
//! checks every invariant and produces a [`ValidatedScenario`], which is what
//! the simulator and planner consume.

mod format;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::HealthCompartment;

pub use format::{parse_scenario, serialize_scenario, ParseError};
pub(crate) use format::{set_param, set_planner};

/// Tile coordinate. `x` is the column, `y` the row (row 0 is the first map line).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub x: usize,
    pub y: usize,
}

impl Pos {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    pub fn manhattan(self, other: Pos) -> usize {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tile {
    Wall,
    Walkable,
}

/// Rectangular tile map, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridMap {
    width: usize,
    height: usize,
    tiles: Vec<Tile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("grid dimensions must be positive (got {width}x{height})")]
    EmptyDimensions { width: usize, height: usize },
    #[error("grid of {width}x{height} needs {expected} tiles, got {found}")]
    TileCount {
        width: usize,
        height: usize,
        expected: usize,
        found: usize,
    },
    #[error("position {pos} is outside the {width}x{height} grid")]
    OutOfBounds {
        pos: Pos,
        width: usize,
        height: usize,
    },
}

impl GridMap {
    pub fn new(width: usize, height: usize, tiles: Vec<Tile>) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::EmptyDimensions { width, height });
        }
        if tiles.len() != width * height {
            return Err(GridError::TileCount {
                width,
                height,
                expected: width * height,
                found: tiles.len(),
            });
        }
        Ok(Self {
            width,
            height,
            tiles,
        })
    }

    /// An all-walkable room.
    pub fn open(width: usize, height: usize) -> Result<Self, GridError> {
        Self::new(width, height, vec![Tile::Walkable; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn total_tiles(&self) -> usize {
        self.tiles.len()
    }

    pub fn in_bounds(&self, pos: Pos) -> bool {
        pos.x < self.width && pos.y < self.height
    }

    pub fn index(&self, pos: Pos) -> usize {
        pos.y * self.width + pos.x
    }

    pub fn pos_of(&self, index: usize) -> Pos {
        Pos::new(index % self.width, index / self.width)
    }

    pub fn tile(&self, pos: Pos) -> Option<Tile> {
        self.in_bounds(pos).then(|| self.tiles[self.index(pos)])
    }

    pub fn is_walkable(&self, pos: Pos) -> bool {
        self.tile(pos) == Some(Tile::Walkable)
    }

    /// Number of walkable tiles, W_G.
    pub fn walkable_count(&self) -> usize {
        self.tiles.iter().filter(|&&t| t == Tile::Walkable).count()
    }

    pub fn walkable_positions(&self) -> impl Iterator<Item = Pos> + '_ {
        self.tiles
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == Tile::Walkable)
            .map(|(i, _)| self.pos_of(i))
    }
}

/// Walkable 4-connected neighbours of `pos`, in row-major order
/// (up, left, right, down).
pub fn neighbors(grid: &GridMap, pos: Pos) -> Result<Vec<Pos>, GridError> {
    if !grid.in_bounds(pos) {
        return Err(GridError::OutOfBounds {
            pos,
            width: grid.width,
            height: grid.height,
        });
    }
    let mut out = Vec::with_capacity(4);
    if pos.y > 0 {
        out.push(Pos::new(pos.x, pos.y - 1));
    }
    if pos.x > 0 {
        out.push(Pos::new(pos.x - 1, pos.y));
    }
    if pos.x + 1 < grid.width {
        out.push(Pos::new(pos.x + 1, pos.y));
    }
    if pos.y + 1 < grid.height {
        out.push(Pos::new(pos.x, pos.y + 1));
    }
    out.retain(|&p| grid.is_walkable(p));
    Ok(out)
}

/// Initial location and state of one person.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub person_id: usize,
    pub position: Pos,
    pub initial_compartment: HealthCompartment,
    pub pre_vaccinated: bool,
}

/// Epidemiological parameters. Defaults are the reference parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpiParams {
    /// Transmission rate.
    pub beta: f64,
    /// Probability an exposed person becomes infected.
    pub sigma: f64,
    /// Recovery share on leaving I.
    pub gamma: f64,
    /// Mortality share on leaving I.
    pub mu: f64,
    /// Exposure-distance factor, in (0, 1].
    pub k: f64,
    /// Per-step movement probability.
    pub p_mv: f64,
    /// Probability of remaining infected for another step.
    pub infected_persistence: f64,
    pub mask_sus_mult: f64,
    pub mask_inf_mult: f64,
    pub mask_noncompliance: f64,
    pub vax_noncompliance: f64,
    /// Multiplier on infection and death probability once vaccinated.
    pub vax_protection: f64,
    /// Largest Manhattan distance at which an infected person is a source.
    pub exposure_radius: usize,
}

impl Default for EpiParams {
    fn default() -> Self {
        Self {
            beta: 0.78,
            sigma: 0.95,
            gamma: 0.93,
            mu: 0.07,
            k: 1.0,
            p_mv: 0.5,
            infected_persistence: 0.8,
            mask_sus_mult: 0.8,
            mask_inf_mult: 0.6,
            mask_noncompliance: 0.04,
            vax_noncompliance: 0.07,
            vax_protection: 0.13,
            exposure_radius: 1,
        }
    }
}

impl EpiParams {
    pub(crate) fn probabilities(&self) -> [(&'static str, f64); 12] {
        [
            ("beta", self.beta),
            ("sigma", self.sigma),
            ("gamma", self.gamma),
            ("mu", self.mu),
            ("k", self.k),
            ("p_mv", self.p_mv),
            ("infected_persistence", self.infected_persistence),
            ("mask_sus_mult", self.mask_sus_mult),
            ("mask_inf_mult", self.mask_inf_mult),
            ("mask_noncompliance", self.mask_noncompliance),
            ("vax_noncompliance", self.vax_noncompliance),
            ("vax_protection", self.vax_protection),
        ]
    }
}

/// Planner budget, objective and which interventions exist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerSettings {
    pub masks_available: bool,
    pub vaccines_available: bool,
    /// Reward per new infection (negative).
    pub pen_i: f64,
    /// Reward per death (negative, at most `pen_i`).
    pub pen_d: f64,
    pub cost_mask_action: f64,
    pub cost_vax_action: f64,
    /// Timesteps per round. Zero is allowed and plays no steps.
    pub horizon: usize,
    pub rounds: usize,
    pub uct_iterations: usize,
    pub uct_exploration: f64,
}

impl Default for PlannerSettings {
    fn default() -> Self {
        Self {
            masks_available: true,
            vaccines_available: true,
            pen_i: -1.0,
            pen_d: -5.0,
            cost_mask_action: 0.0,
            cost_vax_action: 0.0,
            horizon: 15,
            rounds: 5,
            uct_iterations: 500,
            uct_exploration: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub grid: GridMap,
    pub placements: Vec<Placement>,
    pub params: EpiParams,
    pub planner: PlannerSettings,
}

/// One problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Issue {
    #[error("grid has no walkable tile")]
    NoWalkableTile,
    #[error("person {person_id} placed out of bounds at {pos}")]
    PlacementOutOfBounds { person_id: usize, pos: Pos },
    #[error("person {person_id} placed on a wall at {pos}")]
    PlacementOnWall { person_id: usize, pos: Pos },
    #[error("occupancy conflict at {pos}: persons {first} and {second}")]
    OccupancyConflict {
        pos: Pos,
        first: usize,
        second: usize,
    },
    #[error("person ids must be 0..{n} without gaps; position {index} holds id {found}")]
    PersonIdGap {
        n: usize,
        index: usize,
        found: usize,
    },
    #[error("person {person_id} starts in compartment D")]
    DeceasedPlacement { person_id: usize },
    #[error("person {person_id} is pre-vaccinated but starts in {compartment:?}")]
    VaccinatedNonSusceptible {
        person_id: usize,
        compartment: HealthCompartment,
    },
    #[error("{n} persons do not fit on {walkable} walkable tiles")]
    Overcrowded { n: usize, walkable: usize },
    #[error("parameter `{name}` = {value} out of range: {reason}")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("scenario name {0:?} may not contain '#' or line breaks")]
    BadName(String),
    // Warnings
    #[error("γ+μ ≠ 1 (gamma + mu = {sum})")]
    GammaMuSum { sum: f64 },
    #[error("no initially infected person; nothing will spread")]
    NoInitialInfection,
}

impl Issue {
    pub fn is_warning(&self) -> bool {
        matches!(self, Issue::GammaMuSum { .. } | Issue::NoInitialInfection)
    }
}

/// A scenario that passed [`validate`], with derived data the simulator needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedScenario {
    config: ScenarioConfig,
    walkable: usize,
    /// Walkable neighbours per tile index (empty for walls).
    adjacency: Vec<Vec<usize>>,
    warnings: Vec<Issue>,
}

impl ValidatedScenario {
    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn into_config(self) -> ScenarioConfig {
        self.config
    }

    pub fn grid(&self) -> &GridMap {
        &self.config.grid
    }

    pub fn params(&self) -> &EpiParams {
        &self.config.params
    }

    pub fn planner(&self) -> &PlannerSettings {
        &self.config.planner
    }

    /// Population size N.
    pub fn population(&self) -> usize {
        self.config.placements.len()
    }

    /// Walkable tile count W_G.
    pub fn walkable(&self) -> usize {
        self.walkable
    }

    pub fn adjacency(&self, tile_index: usize) -> &[usize] {
        &self.adjacency[tile_index]
    }

    pub fn warnings(&self) -> &[Issue] {
        &self.warnings
    }

    /// Same scenario with different planner settings.
    pub fn with_planner(&self, planner: PlannerSettings) -> Result<Self, Vec<Issue>> {
        let mut config = self.config.clone();
        config.planner = planner;
        validate(config)
    }
}

/// Room density N / W_G.
pub fn density(validated: &ValidatedScenario) -> f64 {
    validated.population() as f64 / validated.walkable() as f64
}

// Negated comparisons also reject NaN.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn check_params(params: &EpiParams, issues: &mut Vec<Issue>) {
    for (name, value) in params.probabilities() {
        if !(0.0..=1.0).contains(&value) {
            issues.push(Issue::ParamOutOfRange {
                name,
                value,
                reason: "must lie in [0, 1]",
            });
        }
    }
    if !(params.k > 0.0) {
        issues.push(Issue::ParamOutOfRange {
            name: "k",
            value: params.k,
            reason: "must lie in (0, 1]",
        });
    }
    if params.exposure_radius == 0 {
        issues.push(Issue::ParamOutOfRange {
            name: "exposure_radius",
            value: 0.0,
            reason: "must be positive",
        });
    }
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn check_planner(p: &PlannerSettings, issues: &mut Vec<Issue>) {
    let mut bad = |name, value, reason| {
        issues.push(Issue::ParamOutOfRange {
            name,
            value,
            reason,
        });
    };
    if !(p.pen_i < 0.0) {
        bad("pen_i", p.pen_i, "must be negative");
    }
    if !(p.pen_d < 0.0) {
        bad("pen_d", p.pen_d, "must be negative");
    }
    if p.pen_d > p.pen_i {
        bad("pen_d", p.pen_d, "must not exceed pen_i");
    }
    if !(p.cost_mask_action <= 0.0) {
        bad(
            "cost_mask_action",
            p.cost_mask_action,
            "must be non-positive",
        );
    }
    if !(p.cost_vax_action <= 0.0) {
        bad("cost_vax_action", p.cost_vax_action, "must be non-positive");
    }
    if p.rounds == 0 {
        bad("rounds", 0.0, "must be positive");
    }
    if p.uct_iterations == 0 {
        bad("uct_iterations", 0.0, "must be positive");
    }
    if !(p.uct_exploration > 0.0 && p.uct_exploration.is_finite()) {
        bad("uct_exploration", p.uct_exploration, "must be positive");
    }
}

/// Checks every scenario invariant. Errors are reported all at once;
/// warnings travel with the validated scenario.
pub fn validate(config: ScenarioConfig) -> Result<ValidatedScenario, Vec<Issue>> {
    let mut issues = Vec::new();
    let grid = &config.grid;
    let walkable = grid.walkable_count();
    if walkable == 0 {
        issues.push(Issue::NoWalkableTile);
    }
    if config.name.contains(['#', '\n', '\r']) || config.name.trim() != config.name {
        issues.push(Issue::BadName(config.name.clone()));
    }

    let mut occupant: Vec<Option<usize>> = vec![None; grid.total_tiles()];
    for (index, p) in config.placements.iter().enumerate() {
        if p.person_id != index {
            issues.push(Issue::PersonIdGap {
                n: config.placements.len(),
                index,
                found: p.person_id,
            });
        }
        if !grid.in_bounds(p.position) {
            issues.push(Issue::PlacementOutOfBounds {
                person_id: p.person_id,
                pos: p.position,
            });
            continue;
        }
        if !grid.is_walkable(p.position) {
            issues.push(Issue::PlacementOnWall {
                person_id: p.person_id,
                pos: p.position,
            });
        }
        let slot = &mut occupant[grid.index(p.position)];
        match slot {
            Some(first) => issues.push(Issue::OccupancyConflict {
                pos: p.position,
                first: *first,
                second: p.person_id,
            }),
            None => *slot = Some(p.person_id),
        }
        if p.initial_compartment == HealthCompartment::D {
            issues.push(Issue::DeceasedPlacement {
                person_id: p.person_id,
            });
        }
        if p.pre_vaccinated && p.initial_compartment != HealthCompartment::S {
            issues.push(Issue::VaccinatedNonSusceptible {
                person_id: p.person_id,
                compartment: p.initial_compartment,
            });
        }
    }
    if config.placements.len() > walkable {
        issues.push(Issue::Overcrowded {
            n: config.placements.len(),
            walkable,
        });
    }
    check_params(&config.params, &mut issues);
    check_planner(&config.planner, &mut issues);

    let sum = config.params.gamma + config.params.mu;
    if (sum - 1.0).abs() > 1e-9 {
        issues.push(Issue::GammaMuSum { sum });
    }
    if !config
        .placements
        .iter()
        .any(|p| p.initial_compartment == HealthCompartment::I)
    {
        issues.push(Issue::NoInitialInfection);
    }

    let (warnings, errors): (Vec<_>, Vec<_>) = issues.into_iter().partition(Issue::is_warning);
    if !errors.is_empty() {
        return Err(errors);
    }

    let adjacency = (0..grid.total_tiles())
        .map(|i| {
            let pos = grid.pos_of(i);
            if grid.is_walkable(pos) {
                neighbors(grid, pos)
                    .expect("in bounds")
                    .into_iter()
                    .map(|p| grid.index(p))
                    .collect()
            } else {
                Vec::new()
            }
        })
        .collect();

    Ok(ValidatedScenario {
        config,
        walkable,
        adjacency,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_from(rows: &[&str]) -> GridMap {
        let tiles = rows
            .iter()
            .flat_map(|r| r.chars())
            .map(|c| if c == '#' { Tile::Wall } else { Tile::Walkable })
            .collect();
        GridMap::new(rows[0].len(), rows.len(), tiles).unwrap()
    }

    fn person(id: usize, x: usize, y: usize, c: HealthCompartment) -> Placement {
        Placement {
            person_id: id,
            position: Pos::new(x, y),
            initial_compartment: c,
            pre_vaccinated: false,
        }
    }

    fn config(grid: GridMap, placements: Vec<Placement>) -> ScenarioConfig {
        ScenarioConfig {
            name: "t".into(),
            grid,
            placements,
            params: EpiParams::default(),
            planner: PlannerSettings::default(),
        }
    }

    #[test]
    fn neighbors_interior_corner_enclosed() {
        let open = GridMap::open(3, 3).unwrap();
        assert_eq!(neighbors(&open, Pos::new(1, 1)).unwrap().len(), 4);
        assert_eq!(neighbors(&open, Pos::new(0, 0)).unwrap().len(), 2);
        assert_eq!(neighbors(&open, Pos::new(2, 2)).unwrap().len(), 2);

        let cell = grid_from(&["###", "#.#", "###"]);
        assert!(neighbors(&cell, Pos::new(1, 1)).unwrap().is_empty());
    }

    #[test]
    fn neighbors_rejects_out_of_bounds() {
        let open = GridMap::open(2, 2).unwrap();
        assert!(matches!(
            neighbors(&open, Pos::new(2, 0)),
            Err(GridError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn grid_requires_matching_tile_count() {
        assert!(GridMap::new(2, 2, vec![Tile::Walkable; 3]).is_err());
        assert!(GridMap::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn occupancy_conflict_is_reported() {
        let cfg = config(
            GridMap::open(3, 3).unwrap(),
            vec![
                person(0, 1, 1, HealthCompartment::I),
                person(1, 1, 1, HealthCompartment::S),
            ],
        );
        let errors = validate(cfg).unwrap_err();
        assert!(errors
            .iter()
            .any(|e| matches!(e, Issue::OccupancyConflict { .. })));
        assert!(errors[0].to_string().contains("occupancy conflict"));
    }

    #[test]
    fn each_violation_reported_individually() {
        let mut cfg = config(
            grid_from(&["#..", "...", "..."]),
            vec![
                person(0, 0, 0, HealthCompartment::I),
                person(2, 5, 5, HealthCompartment::S),
            ],
        );
        cfg.params.beta = 1.5;
        cfg.planner.pen_i = 1.0;
        let errors = validate(cfg).unwrap_err();
        assert!(errors
            .iter()
            .any(|e| matches!(e, Issue::PlacementOnWall { .. })));
        assert!(errors
            .iter()
            .any(|e| matches!(e, Issue::PersonIdGap { .. })));
        assert!(errors
            .iter()
            .any(|e| matches!(e, Issue::PlacementOutOfBounds { .. })));
        assert!(errors
            .iter()
            .any(|e| matches!(e, Issue::ParamOutOfRange { name: "beta", .. })));
        assert!(errors
            .iter()
            .any(|e| matches!(e, Issue::ParamOutOfRange { name: "pen_i", .. })));
    }

    #[test]
    fn crowded_small_room_density() {
        // 4x4 with two walls: W_G = 14, N = 8.
        let grid = grid_from(&["#...", "....", "....", "...#"]);
        let placements = grid
            .walkable_positions()
            .take(8)
            .enumerate()
            .map(|(i, p)| {
                let c = if i == 0 {
                    HealthCompartment::I
                } else {
                    HealthCompartment::S
                };
                person(i, p.x, p.y, c)
            })
            .collect();
        let v = validate(config(grid, placements)).unwrap();
        assert_eq!(v.walkable(), 14);
        assert!((density(&v) - 8.0 / 14.0).abs() < 1e-12);
        assert_eq!(format!("{:.2}", density(&v)), "0.57");
    }

    #[test]
    fn density_examples() {
        let grid = grid_from(&["#..#", "....", "....", "#..#"]);
        let four: Vec<_> = grid
            .walkable_positions()
            .take(4)
            .enumerate()
            .map(|(i, p)| person(i, p.x, p.y, HealthCompartment::S))
            .collect();
        let v = validate(config(grid.clone(), four)).unwrap();
        assert!((density(&v) - 1.0 / 3.0).abs() < 1e-12);

        let empty = validate(config(grid, vec![])).unwrap();
        assert_eq!(density(&empty), 0.0);
    }

    #[test]
    fn gamma_mu_mismatch_is_a_warning() {
        let mut cfg = config(
            GridMap::open(2, 2).unwrap(),
            vec![person(0, 0, 0, HealthCompartment::I)],
        );
        cfg.params.gamma = 0.9;
        cfg.params.mu = 0.2;
        let v = validate(cfg).unwrap();
        assert_eq!(v.warnings().len(), 1);
        assert!(v.warnings()[0].to_string().starts_with("γ+μ ≠ 1"));
    }

    #[test]
    fn missing_infection_is_a_warning() {
        let cfg = config(
            GridMap::open(2, 2).unwrap(),
            vec![person(0, 0, 0, HealthCompartment::S)],
        );
        let v = validate(cfg).unwrap();
        assert_eq!(v.warnings(), &[Issue::NoInitialInfection]);
    }

    #[test]
    fn overcrowding_rejected() {
        let grid = grid_from(&["#.", ".#"]);
        let cfg = config(
            grid,
            vec![
                person(0, 1, 0, HealthCompartment::I),
                person(1, 0, 1, HealthCompartment::S),
                person(2, 0, 0, HealthCompartment::S),
            ],
        );
        let errors = validate(cfg).unwrap_err();
        assert!(errors
            .iter()
            .any(|e| matches!(e, Issue::Overcrowded { .. })));
    }

    #[test]
    fn adjacency_matches_neighbors() {
        let grid = grid_from(&["#..", "...", ".#."]);
        let v = validate(config(grid.clone(), vec![])).unwrap();
        for i in 0..grid.total_tiles() {
            let pos = grid.pos_of(i);
            if grid.is_walkable(pos) {
                let expected: Vec<usize> = neighbors(&grid, pos)
                    .unwrap()
                    .into_iter()
                    .map(|p| grid.index(p))
                    .collect();
                assert_eq!(v.adjacency(i), expected.as_slice());
            } else {
                assert!(v.adjacency(i).is_empty());
            }
        }
    }
}

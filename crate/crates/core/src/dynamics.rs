//! Stochastic per-step transition model.
//!
//! A step applies the chosen intervention, then moves people, then updates
//! health compartments synchronously from the start-of-phase state. All
//! randomness comes from the caller's environment stream, drawn in ascending
//! person id order.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::planner::{self, Action, ActionError};
use crate::rng::{stream_rng, SimRng, Stream};
use crate::scenario::{EpiParams, Pos, ValidatedScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HealthCompartment {
    S,
    E,
    I,
    R,
    D,
}

impl HealthCompartment {
    pub const ALL: [HealthCompartment; 5] = [Self::S, Self::E, Self::I, Self::R, Self::D];

    /// Whether one step can take a person from `self` to `next`.
    pub fn can_step_to(self, next: HealthCompartment) -> bool {
        use HealthCompartment::*;
        matches!(
            (self, next),
            (S, S) | (S, E) | (E, I) | (E, S) | (I, I) | (I, R) | (I, D) | (R, R) | (D, D)
        )
    }
}

impl fmt::Display for HealthCompartment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PersonState {
    pub id: usize,
    pub compartment: HealthCompartment,
    pub position: Pos,
    pub masked: bool,
    pub vaccinated: bool,
    pub mask_refuser: bool,
    pub vax_refuser: bool,
    pub ever_infected: bool,
}

impl PersonState {
    pub fn is_alive(&self) -> bool {
        self.compartment != HealthCompartment::D
    }
}

/// Full MDP state. Cheap to clone; the planner clones it for every rollout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimState {
    pub step: usize,
    pub persons: Vec<PersonState>,
    occupancy: Vec<Option<usize>>,
    pub mask_mandate_active: bool,
    pub cumulative_infections: usize,
    pub cumulative_deaths: usize,
    /// Word position of the environment stream after the last step.
    pub rng_cursor: u128,
}

impl SimState {
    /// Person standing on tile `index` (deceased persons keep their tile).
    pub fn occupant(&self, tile_index: usize) -> Option<usize> {
        self.occupancy[tile_index]
    }

    /// Checks occupancy, wall and counter invariants. Used by tests and
    /// debug assertions.
    pub fn check_invariants(&self, validated: &ValidatedScenario) -> Result<(), String> {
        let grid = validated.grid();
        let mut seen = vec![None; grid.total_tiles()];
        for p in &self.persons {
            if !grid.is_walkable(p.position) {
                return Err(format!("person {} on non-walkable {}", p.id, p.position));
            }
            let i = grid.index(p.position);
            if let Some(other) = seen[i] {
                return Err(format!("persons {other} and {} share {}", p.id, p.position));
            }
            seen[i] = Some(p.id);
            if p.masked && p.mask_refuser {
                return Err(format!("person {} masked despite refusing", p.id));
            }
            if p.vaccinated && p.vax_refuser {
                return Err(format!("person {} vaccinated despite refusing", p.id));
            }
        }
        if seen != self.occupancy {
            return Err("occupancy map out of sync with positions".into());
        }
        let ever = self.persons.iter().filter(|p| p.ever_infected).count();
        if ever != self.cumulative_infections {
            return Err(format!(
                "cumulative_infections {} but {ever} ever infected",
                self.cumulative_infections
            ));
        }
        let dead = census(self).d;
        if dead != self.cumulative_deaths {
            return Err(format!(
                "cumulative_deaths {} but {dead} deceased",
                self.cumulative_deaths
            ));
        }
        Ok(())
    }
}

/// Compartment counts.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Census {
    pub s: usize,
    pub e: usize,
    pub i: usize,
    pub r: usize,
    pub d: usize,
}

impl Census {
    pub fn total(&self) -> usize {
        self.s + self.e + self.i + self.r + self.d
    }

    pub fn as_tuple(&self) -> (usize, usize, usize, usize, usize) {
        (self.s, self.e, self.i, self.r, self.d)
    }

    fn add(&mut self, c: HealthCompartment) {
        match c {
            HealthCompartment::S => self.s += 1,
            HealthCompartment::E => self.e += 1,
            HealthCompartment::I => self.i += 1,
            HealthCompartment::R => self.r += 1,
            HealthCompartment::D => self.d += 1,
        }
    }

    pub fn of<'a>(compartments: impl IntoIterator<Item = &'a HealthCompartment>) -> Self {
        let mut c = Census::default();
        for &x in compartments {
            c.add(x);
        }
        c
    }
}

impl fmt::Display for Census {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{},{}", self.s, self.e, self.i, self.r, self.d)
    }
}

pub fn census(state: &SimState) -> Census {
    Census::of(state.persons.iter().map(|p| &p.compartment))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Moved,
    Exposed,
    Infected,
    Recovered,
    Died,
    Masked,
    Vaccinated,
    ComplianceRefusal,
}

/// One line of the audit log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEvent {
    pub step: usize,
    pub kind: EventKind,
    pub person_id: usize,
    pub detail: String,
}

pub(crate) fn emit(
    events: &mut Option<&mut Vec<StepEvent>>,
    step: usize,
    kind: EventKind,
    person_id: usize,
    detail: impl FnOnce() -> String,
) {
    if let Some(log) = events.as_deref_mut() {
        log.push(StepEvent {
            step,
            kind,
            person_id,
            detail: detail(),
        });
    }
}

/// Builds the t=0 state. Compliance flags are drawn per person in id order
/// from the seed's init stream: mask refusal first, then vaccine refusal.
pub fn init_state(validated: &ValidatedScenario, seed: u64) -> SimState {
    let params = validated.params();
    let grid = validated.grid();
    let mut rng = stream_rng(seed, Stream::Init);
    let mut occupancy = vec![None; grid.total_tiles()];
    let persons: Vec<PersonState> = validated
        .config()
        .placements
        .iter()
        .map(|p| {
            let mask_refuser = rng.random_bool(params.mask_noncompliance);
            let vax_refuser = rng.random_bool(params.vax_noncompliance) && !p.pre_vaccinated;
            occupancy[grid.index(p.position)] = Some(p.person_id);
            PersonState {
                id: p.person_id,
                compartment: p.initial_compartment,
                position: p.position,
                masked: false,
                vaccinated: p.pre_vaccinated,
                mask_refuser,
                vax_refuser,
                ever_infected: p.initial_compartment == HealthCompartment::I,
            }
        })
        .collect();
    let cumulative_infections = persons.iter().filter(|p| p.ever_infected).count();
    SimState {
        step: 0,
        persons,
        occupancy,
        mask_mandate_active: false,
        cumulative_infections,
        cumulative_deaths: 0,
        rng_cursor: 0,
    }
}

/// Each living person, in id order, attempts a move with probability `p_mv`
/// to a uniformly chosen neighbour that is free at that moment.
pub fn movement_phase(
    state: &mut SimState,
    validated: &ValidatedScenario,
    rng: &mut SimRng,
    mut events: Option<&mut Vec<StepEvent>>,
) {
    let grid = validated.grid();
    let p_mv = validated.params().p_mv;
    let step = state.step + 1;
    let mut free: Vec<usize> = Vec::with_capacity(4);
    for id in 0..state.persons.len() {
        if !state.persons[id].is_alive() || !rng.random_bool(p_mv) {
            continue;
        }
        let from = state.persons[id].position;
        let from_index = grid.index(from);
        free.clear();
        free.extend(
            validated
                .adjacency(from_index)
                .iter()
                .copied()
                .filter(|&t| state.occupancy[t].is_none()),
        );
        if free.is_empty() {
            continue;
        }
        let to_index = free[rng.random_range(0..free.len())];
        let to = grid.pos_of(to_index);
        state.occupancy[from_index] = None;
        state.occupancy[to_index] = Some(id);
        state.persons[id].position = to;
        emit(&mut events, step, EventKind::Moved, id, || {
            format!("{from}->{to}")
        });
    }
}

/// Probability that susceptible `target` is exposed this step.
///
/// Each living infected person at Manhattan distance `d` with
/// `1 <= d <= exposure_radius` contributes `beta * k / d`, scaled by the mask
/// and vaccine multipliers that apply; sources combine independently as
/// `1 - prod(1 - p_j)`.
pub fn exposure_probability(target: &PersonState, state: &SimState, params: &EpiParams) -> f64 {
    if target.compartment != HealthCompartment::S {
        return 0.0;
    }
    let mut target_mult = 1.0;
    if target.masked {
        target_mult *= params.mask_sus_mult;
    }
    if target.vaccinated {
        target_mult *= params.vax_protection;
    }
    let mut escape = 1.0;
    let mut any = false;
    for source in &state.persons {
        if source.compartment != HealthCompartment::I {
            continue;
        }
        let d = source.position.manhattan(target.position);
        if d == 0 || d > params.exposure_radius {
            continue;
        }
        let source_mult = if source.masked {
            params.mask_inf_mult
        } else {
            1.0
        };
        let p = (params.beta * (params.k / d as f64) * source_mult * target_mult).clamp(0.0, 1.0);
        escape *= 1.0 - p;
        any = true;
    }
    if any {
        1.0 - escape
    } else {
        0.0
    }
}

/// Probability of dying when leaving I.
pub fn death_given_exit(person: &PersonState, params: &EpiParams) -> f64 {
    let mult = if person.vaccinated {
        params.vax_protection
    } else {
        1.0
    };
    (params.mu * mult).clamp(0.0, 1.0)
}

/// Next-compartment distribution of one person, at most three outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcomes {
    len: usize,
    items: [(HealthCompartment, f64); 3],
}

impl Outcomes {
    fn new(items: &[(HealthCompartment, f64)]) -> Self {
        let mut arr = [(HealthCompartment::S, 0.0); 3];
        arr[..items.len()].copy_from_slice(items);
        Self {
            len: items.len(),
            items: arr,
        }
    }

    pub fn as_slice(&self) -> &[(HealthCompartment, f64)] {
        &self.items[..self.len]
    }

    pub fn is_certain(&self) -> bool {
        self.len == 1
    }

    /// Inverse-CDF pick for `u` in [0, 1). Zero-probability outcomes are never
    /// returned.
    pub fn pick(&self, u: f64) -> HealthCompartment {
        let mut acc = 0.0;
        let mut last = self.items[0].0;
        for &(c, p) in self.as_slice() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = c;
            if u < acc {
                return c;
            }
        }
        last
    }
}

/// Transition law for person `id` given the start-of-phase state. This is
/// the single source of the health dynamics; the exact enumerator uses it
/// too.
pub fn transition_outcomes(state: &SimState, id: usize, params: &EpiParams) -> Outcomes {
    use HealthCompartment::*;
    let person = &state.persons[id];
    match person.compartment {
        S => {
            let phi = exposure_probability(person, state, params);
            Outcomes::new(&[(E, phi), (S, 1.0 - phi)])
        }
        E => Outcomes::new(&[(I, params.sigma), (S, 1.0 - params.sigma)]),
        I => {
            let stay = params.infected_persistence;
            let exit = 1.0 - stay;
            let die = death_given_exit(person, params);
            Outcomes::new(&[(I, stay), (R, exit * (1.0 - die)), (D, exit * die)])
        }
        R => Outcomes::new(&[(R, 1.0)]),
        D => Outcomes::new(&[(D, 1.0)]),
    }
}

/// Synchronous health update: every law is computed from the state at the
/// start of the phase, then one uniform is drawn per S/E/I person in id order.
pub fn health_transition_phase(
    state: &mut SimState,
    params: &EpiParams,
    rng: &mut SimRng,
    mut events: Option<&mut Vec<StepEvent>>,
) {
    use HealthCompartment::*;
    let step = state.step + 1;
    let laws: Vec<Outcomes> = (0..state.persons.len())
        .map(|id| transition_outcomes(state, id, params))
        .collect();
    for (id, law) in laws.iter().enumerate() {
        let from = state.persons[id].compartment;
        if matches!(from, R | D) {
            continue;
        }
        let to = law.pick(rng.random::<f64>());
        if to == from {
            continue;
        }
        let person = &mut state.persons[id];
        person.compartment = to;
        match (from, to) {
            (S, E) => {
                let phi = law.as_slice()[0].1;
                emit(&mut events, step, EventKind::Exposed, id, || {
                    format!("p={phi}")
                });
            }
            (E, I) => {
                person.ever_infected = true;
                state.cumulative_infections += 1;
                emit(&mut events, step, EventKind::Infected, id, String::new);
            }
            (I, R) => emit(&mut events, step, EventKind::Recovered, id, String::new),
            (I, D) => {
                state.cumulative_deaths += 1;
                emit(&mut events, step, EventKind::Died, id, String::new);
            }
            // Failed exposure reverts silently.
            (E, S) => {}
            _ => unreachable!("illegal transition {from} -> {to}"),
        }
    }
}

/// Applies one full step in place: action, movement, health. Returns the
/// action's cost. On an illegal action the state is left untouched.
pub fn advance(
    state: &mut SimState,
    action: &Action,
    validated: &ValidatedScenario,
    rng: &mut SimRng,
    mut events: Option<&mut Vec<StepEvent>>,
) -> Result<f64, ActionError> {
    let cost = planner::apply_action(state, action, validated.planner(), events.as_deref_mut())?;
    movement_phase(state, validated, rng, events.as_deref_mut());
    health_transition_phase(state, validated.params(), rng, events);
    state.step += 1;
    state.rng_cursor = rng.get_word_pos();
    Ok(cost)
}

/// Value-returning step with its event log.
pub fn step(
    state: &SimState,
    action: &Action,
    validated: &ValidatedScenario,
    rng: &mut SimRng,
) -> Result<(SimState, Vec<StepEvent>), ActionError> {
    let mut next = state.clone();
    let mut events = Vec::new();
    advance(&mut next, action, validated, rng, Some(&mut events))?;
    Ok((next, events))
}

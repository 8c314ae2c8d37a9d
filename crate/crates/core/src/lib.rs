//! Grid-based indoor SEIRD epidemic simulator.
//!
//! People walk a tile map, infected persons expose their neighbours, and a
//! UCT planner may mandate masks or vaccinate individuals to keep infections
//! and deaths down. The [`harness`] reproduces room-density and school
//! benchmark experiments on top of the simulator.

pub mod dynamics;
pub mod harness;
pub mod oracle;
pub mod planner;
pub mod rng;
pub mod scenario;
mod text;

pub use dynamics::{census, init_state, step, Census, HealthCompartment, SimState, StepEvent};
pub use planner::{plan, run_episode, Action, Policy};
pub use scenario::{
    parse_scenario, serialize_scenario, validate, ScenarioConfig, ValidatedScenario,
};

//! Reference computations used to cross-check the stochastic simulator:
//! a forward-Euler SEIRD integrator and an exact Markov-chain enumerator for
//! tiny static scenarios.

mod enumerate;
mod ode;

use thiserror::Error;

pub use enumerate::{
    enumerate_exact, enumerate_joint, OutcomeDistribution, MAX_PERSONS, MAX_WALKABLE,
};
pub use ode::{seird_euler_step, seird_integrate, CompartmentVector, OdeMode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("time step must be positive, got {0}")]
    BadTimeStep(f64),
    #[error("enumeration needs at most {max} persons, scenario has {found}")]
    TooManyPersons { max: usize, found: usize },
    #[error("enumeration needs at most {max} walkable tiles, scenario has {found}")]
    TooManyTiles { max: usize, found: usize },
    #[error("enumeration needs static persons (p_mv = 0), got p_mv = {0}")]
    MovingPersons(f64),
}

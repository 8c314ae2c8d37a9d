use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::OracleError;
use crate::scenario::EpiParams;

/// Aggregate compartment sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompartmentVector {
    pub s: f64,
    pub e: f64,
    pub i: f64,
    pub r: f64,
    pub d: f64,
    pub n: f64,
}

impl CompartmentVector {
    /// Vector with `n` set to the sum of the compartments.
    pub fn new(s: f64, e: f64, i: f64, r: f64, d: f64) -> Self {
        Self {
            s,
            e,
            i,
            r,
            d,
            n: s + e + i + r + d,
        }
    }

    pub fn total(&self) -> f64 {
        self.s + self.e + self.i + self.r + self.d
    }

    fn check_finite(&self) -> Result<(), OracleError> {
        for (name, v) in [
            ("S", self.s),
            ("E", self.e),
            ("I", self.i),
            ("R", self.r),
            ("D", self.d),
            ("N", self.n),
        ] {
            if !v.is_finite() {
                return Err(OracleError::NonFinite(name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OdeMode {
    /// The equations exactly as usually printed: no I factor in the E inflow
    /// and no death outflow from I.
    Literal,
    /// Mass-conserving system: E gains beta*S*I/N, I loses (gamma+mu)*I.
    Conserving,
}

impl FromStr for OdeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(OdeMode::Literal),
            "conserving" => Ok(OdeMode::Conserving),
            _ => Err(format!(
                "unknown ODE mode {s:?} (expected literal or conserving)"
            )),
        }
    }
}

/// One forward-Euler step.
pub fn seird_euler_step(
    v: &CompartmentVector,
    params: &EpiParams,
    dt: f64,
    mode: OdeMode,
) -> Result<CompartmentVector, OracleError> {
    v.check_finite()?;
    for (name, x) in [
        ("beta", params.beta),
        ("sigma", params.sigma),
        ("gamma", params.gamma),
        ("mu", params.mu),
    ] {
        if !x.is_finite() {
            return Err(OracleError::NonFinite(name));
        }
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(OracleError::BadTimeStep(dt));
    }
    let (beta, sigma, gamma, mu) = (params.beta, params.sigma, params.gamma, params.mu);
    let frac = v.s / v.n;
    let (ds, de, di, dr, dd) = match mode {
        OdeMode::Literal => (
            -beta * frac * v.i,
            beta * frac - sigma * v.e,
            sigma * v.e - gamma * v.i,
            gamma * v.i,
            (1.0 - gamma) * v.i,
        ),
        OdeMode::Conserving => {
            let infection = beta * frac * v.i;
            (
                -infection,
                infection - sigma * v.e,
                sigma * v.e - (gamma + mu) * v.i,
                gamma * v.i,
                mu * v.i,
            )
        }
    };
    Ok(CompartmentVector {
        s: v.s + dt * ds,
        e: v.e + dt * de,
        i: v.i + dt * di,
        r: v.r + dt * dr,
        d: v.d + dt * dd,
        n: v.n,
    })
}

/// `steps` Euler steps; the returned sequence starts with `v0`.
pub fn seird_integrate(
    v0: &CompartmentVector,
    params: &EpiParams,
    dt: f64,
    steps: usize,
    mode: OdeMode,
) -> Result<Vec<CompartmentVector>, OracleError> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(*v0);
    let mut v = *v0;
    for _ in 0..steps {
        v = seird_euler_step(&v, params, dt, mode)?;
        out.push(v);
    }
    Ok(out)
}

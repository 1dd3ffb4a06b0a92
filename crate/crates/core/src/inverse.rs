//! Recovery of the order `ρ ∈ (0, 1)` from one observation.
//!
//! With `λ_1 = 0` the observation reduces to `d_0 / φ_1 = g(ρ)` where
//! `g(ρ) = t_0^{ρ-1} / Γ(ρ)`. For `t_0 ≥ 1`, `g` increases strictly from 0 to
//! 1 on `(0, 1)`, so a root exists exactly when `0 < d_0/φ_1 < 1` and is then
//! unique.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forward::{power_over_gamma, Observation};
use crate::special::{digamma, SpecialFunctionError};

/// Ratios this close to 0 or 1 are treated as numerically unsolvable.
pub const RATIO_MARGIN: f64 = 1e-12;
/// Starting bracket `[BRACKET_EDGE, 1 - BRACKET_EDGE]`.
pub const BRACKET_EDGE: f64 = 1e-8;
/// Recovered orders this close to 0 or 1 carry a warning.
pub const ENDPOINT_WARNING: f64 = 1e-6;
/// Smallest accepted residual tolerance.
pub const MIN_TOLERANCE: f64 = 1e-14;
const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InverseError {
    #[error("order rho = {0} must lie in (0, 1)")]
    InvalidOrder(f64),
    #[error("observation time t0 = {0} must be >= 1")]
    InvalidTime(f64),
    #[error("invalid observation: {0}")]
    InvalidObservation(String),
    #[error("tolerance {0:e} must be at least 1e-14")]
    InvalidTolerance(f64),
    #[error("no order reproduces the observation: {reason}")]
    Unsolvable { ratio: f64, reason: String },
    #[error("root search stalled after {iterations} iterations with residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootMethod {
    Bisection,
    NewtonSafeguarded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionResult {
    pub rho_hat: f64,
    /// `g(rho_hat) - ratio`.
    pub residual: f64,
    pub iterations: usize,
    pub method: RootMethod,
    pub solvable: bool,
    pub ratio: f64,
    /// `dρ/dd_0 = 1 / (φ_1 g'(rho_hat))`.
    pub sensitivity: f64,
    /// Bracket after each iteration, starting with the initial bracket.
    pub bracket_history: Vec<[f64; 2]>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solvability {
    pub solvable: bool,
    pub ratio: f64,
    pub diagnostic: String,
}

fn check_domain(rho: f64, t0: f64) -> Result<(), InverseError> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(InverseError::InvalidOrder(rho));
    }
    if !(t0 >= 1.0 && t0.is_finite()) {
        return Err(InverseError::InvalidTime(t0));
    }
    Ok(())
}

/// `g(ρ) = t_0^{ρ-1} / Γ(ρ)`.
pub fn observation_curve(rho: f64, t0: f64) -> Result<f64, InverseError> {
    check_domain(rho, t0)?;
    Ok(power_over_gamma(rho, t0))
}

/// `g'(ρ) = g(ρ) (ln t_0 - Ψ(ρ))`, positive on the whole domain.
pub fn observation_curve_derivative(rho: f64, t0: f64) -> Result<f64, InverseError> {
    check_domain(rho, t0)?;
    Ok(power_over_gamma(rho, t0) * (t0.ln() - digamma(rho)?))
}

/// Whether `0 < d_0/φ_1 < 1`, with the failing side spelled out.
pub fn solvability_check(obs: &Observation) -> Result<Solvability, InverseError> {
    if !(obs.phi1 != 0.0 && obs.phi1.is_finite()) {
        return Err(InverseError::InvalidObservation(format!("phi1 = {} must be finite and non-zero", obs.phi1)));
    }
    if !obs.d0.is_finite() {
        return Err(InverseError::InvalidObservation(format!("d0 = {} is not finite", obs.d0)));
    }
    let ratio = obs.ratio();
    let (solvable, diagnostic) = if ratio <= 0.0 {
        (false, format!("d0/phi1 = {ratio} violates 0 < d0/phi1: the inverse problem has no solution"))
    } else if ratio >= 1.0 {
        (false, format!("d0/phi1 = {ratio} violates d0/phi1 < 1: the inverse problem has no solution"))
    } else {
        (true, format!("0 < d0/phi1 = {ratio} < 1: a unique order exists"))
    };
    Ok(Solvability { solvable, ratio, diagnostic })
}

/// Solves `g(ρ) = d_0/φ_1` to `|residual| ≤ tol`.
pub fn recover_order(obs: &Observation, tol: f64, method: RootMethod) -> Result<InversionResult, InverseError> {
    if !(tol >= MIN_TOLERANCE) {
        return Err(InverseError::InvalidTolerance(tol));
    }
    if !(obs.t0 >= 1.0 && obs.t0.is_finite()) {
        return Err(InverseError::InvalidTime(obs.t0));
    }
    let gate = solvability_check(obs)?;
    let ratio = gate.ratio;
    if !gate.solvable {
        return Err(InverseError::Unsolvable { ratio, reason: gate.diagnostic });
    }
    if ratio < RATIO_MARGIN || ratio > 1.0 - RATIO_MARGIN {
        return Err(InverseError::Unsolvable {
            ratio,
            reason: format!("d0/phi1 = {ratio} lies within {RATIO_MARGIN:e} of the boundary of (0, 1)"),
        });
    }
    let t0 = obs.t0;
    let f = |rho: f64| power_over_gamma(rho, t0) - ratio;

    let mut history = Vec::new();
    let (mut lo, mut hi) = (BRACKET_EDGE, 1.0 - BRACKET_EDGE);
    history.push([lo, hi]);
    while f(lo) >= 0.0 {
        lo *= 1e-3;
        if lo < 1e-300 {
            return Err(InverseError::NoConvergence { iterations: 0, residual: f(lo) });
        }
        history.push([lo, hi]);
    }
    while f(hi) <= 0.0 {
        let gap = (1.0 - hi) * 1e-2;
        if gap < f64::EPSILON {
            return Err(InverseError::NoConvergence { iterations: 0, residual: f(hi) });
        }
        hi = 1.0 - gap;
        history.push([lo, hi]);
    }

    let mut rho = if method == RootMethod::NewtonSafeguarded && lo < 0.5 && 0.5 < hi {
        0.5
    } else {
        0.5 * (lo + hi)
    };
    let mut iterations = 0;
    loop {
        iterations += 1;
        let r = f(rho);
        if r.abs() <= tol {
            break;
        }
        if r < 0.0 {
            lo = rho;
        } else {
            hi = rho;
        }
        history.push([lo, hi]);
        if iterations >= MAX_ITERATIONS || hi - lo <= 2.0 * f64::EPSILON * hi {
            return Err(InverseError::NoConvergence { iterations, residual: r });
        }
        let bisect = 0.5 * (lo + hi);
        rho = match method {
            RootMethod::Bisection => bisect,
            RootMethod::NewtonSafeguarded => {
                let step = rho - r / observation_curve_derivative(rho, t0)?;
                if step.is_finite() && step > lo && step < hi {
                    step
                } else {
                    bisect
                }
            }
        };
    }

    let residual = f(rho);
    let sensitivity = 1.0 / (obs.phi1 * observation_curve_derivative(rho, t0)?);
    let mut warnings = Vec::new();
    if rho < ENDPOINT_WARNING || rho > 1.0 - ENDPOINT_WARNING {
        warnings.push(format!("recovered order {rho} lies within {ENDPOINT_WARNING:e} of the boundary of (0, 1)"));
    }
    Ok(InversionResult {
        rho_hat: rho,
        residual,
        iterations,
        method,
        solvable: true,
        ratio,
        sensitivity,
        bracket_history: history,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub rho_a: f64,
    pub rho_b: f64,
    pub difference: f64,
    pub consistent: bool,
}

/// Inverts two observations and compares the recovered orders.
pub fn consistency_check(a: &Observation, b: &Observation, tol: f64) -> Result<ConsistencyReport, InverseError> {
    let ra = recover_order(a, MIN_TOLERANCE, RootMethod::NewtonSafeguarded)?.rho_hat;
    let rb = recover_order(b, MIN_TOLERANCE, RootMethod::NewtonSafeguarded)?.rho_hat;
    let difference = (ra - rb).abs();
    Ok(ConsistencyReport { rho_a: ra, rho_b: rb, difference, consistent: difference <= tol })
}

//! Special functions: Γ, 1/Γ, Ψ and the two-parameter Mittag-Leffler function.
//!
//! Everything here is a pure function of its arguments.

mod double_double;
mod gamma;
mod mittag_leffler;

pub use gamma::{
    digamma, gamma, ln_gamma, reciprocal_gamma, sin_pi, GAMMA_OVERFLOW_THRESHOLD,
};
pub use mittag_leffler::{mittag_leffler, EvalRegime, EvalReport, MLParams};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialFunctionError {
    #[error("{function}: argument {x} outside the domain")]
    Domain { function: &'static str, x: f64 },
    #[error("{function}: result overflows at argument {x}")]
    Overflow { function: &'static str, x: f64 },
    #[error("invalid Mittag-Leffler parameters (rho = {rho}, mu = {mu})")]
    InvalidParams { rho: f64, mu: f64 },
    #[error(
        "Mittag-Leffler E({rho}, {mu}) at z = {z}: accuracy target missed \
         (value {value}, committed error {est_abs_error}): {reason}"
    )]
    AccuracyFailure {
        rho: f64,
        mu: f64,
        z: f64,
        value: f64,
        est_abs_error: f64,
        reason: &'static str,
    },
}

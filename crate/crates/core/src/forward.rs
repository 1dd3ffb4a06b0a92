//! Series solution of the forward problem.
//!
//! Mode `j` evolves as `T_j(t) = φ_j t^{ρ-1} E_{ρ,ρ}(-λ_j t^ρ)` and the field
//! is `u(x, t) = Σ_j T_j(t) v_j(x)`.
//!
//! Truncation bounds use `0 ≤ E_{ρ,ρ}(-y) ≤ 1 / (Γ(ρ)(1 + y))` for `y ≥ 0`,
//! which the test suite checks against the reference evaluator over
//! `ρ ∈ [0.02, 0.99]`. Coefficients stored beyond the model's last eigenvalue
//! are bounded with that last eigenvalue, which is valid because eigenvalues
//! are non-decreasing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectral::{cosine_mode, InitialData, SpectralError, SpectralModel};
use crate::special::{mittag_leffler, reciprocal_gamma, MLParams, SpecialFunctionError};

/// Slack on the decay constant to cover rounding in its verification.
const DECAY_SLACK: f64 = 1.0 + 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ForwardError {
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("order rho = {0} must lie in (0, 1)")]
    InvalidOrder(f64),
    #[error("time t = {0} must be positive and finite")]
    InvalidTime(f64),
    #[error("eigenvalue {0} must be non-negative and finite")]
    InvalidEigenvalue(f64),
    #[error("{requested} modes requested but only {available} available")]
    TooManyModes { requested: usize, available: usize },
    #[error("target bound {target:e} unreachable: all available modes leave a tail bound of {achievable:e}")]
    Infeasible { target: f64, achievable: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
}

fn check_order(rho: f64) -> Result<(), ForwardError> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(ForwardError::InvalidOrder(rho))
    }
}

fn check_time(t: f64) -> Result<(), ForwardError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(ForwardError::InvalidTime(t))
    }
}

/// `t^{ρ-1} / Γ(ρ)`.
pub(crate) fn power_over_gamma(rho: f64, t: f64) -> f64 {
    t.powf(rho - 1.0) * reciprocal_gamma(rho)
}

/// `T_j(t)` together with the absolute error inherited from the
/// Mittag-Leffler evaluation.
pub fn modal_amplitude_with_error(
    rho: f64,
    lambda: f64,
    phi: f64,
    t: f64,
) -> Result<(f64, f64), ForwardError> {
    check_order(rho)?;
    check_time(t)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(ForwardError::InvalidEigenvalue(lambda));
    }
    if phi == 0.0 {
        return Ok((0.0, 0.0));
    }
    let e = mittag_leffler(MLParams::new(rho, rho)?, -lambda * t.powf(rho))?;
    let scale = phi.abs() * t.powf(rho - 1.0);
    Ok((phi * t.powf(rho - 1.0) * e.value, scale * e.est_abs_error))
}

/// `T_j(t) = φ_j t^{ρ-1} E_{ρ,ρ}(-λ_j t^ρ)`.
pub fn modal_amplitude(rho: f64, lambda: f64, phi: f64, t: f64) -> Result<f64, ForwardError> {
    modal_amplitude_with_error(rho, lambda, phi, t).map(|(v, _)| v)
}

/// `J^{1-ρ} T_j(t) = φ_j E_{ρ,1}(-λ_j t^ρ)`, obtained by integrating the
/// series term by term. Tends to `φ_j` as `t → 0`.
pub fn weighted_integral_amplitude(rho: f64, lambda: f64, phi: f64, t: f64) -> Result<f64, ForwardError> {
    check_order(rho)?;
    check_time(t)?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(ForwardError::InvalidEigenvalue(lambda));
    }
    let e = mittag_leffler(MLParams::new(rho, 1.0)?, -lambda * t.powf(rho))?;
    Ok(phi * e.value)
}

/// Single measurement `d_0 = ∫ u(x, t_0) v_1(x) dx` with the first modal
/// coefficient it is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub t0: f64,
    pub d0: f64,
    pub phi1: f64,
}

impl Observation {
    /// Requires `t0 ≥ 1` and `φ_1 ≠ 0`. A zero `d0` is accepted here so the
    /// solvability check can reject it with a diagnostic.
    pub fn new(t0: f64, d0: f64, phi1: f64) -> Result<Self, ForwardError> {
        if !(t0 >= 1.0 && t0.is_finite()) {
            return Err(ForwardError::Precondition(format!("observation time t0 = {t0} must be >= 1")));
        }
        if !d0.is_finite() {
            return Err(ForwardError::Precondition(format!("measurement d0 = {d0} is not finite")));
        }
        if !(phi1 != 0.0 && phi1.is_finite()) {
            return Err(ForwardError::Precondition(format!("phi1 = {phi1} must be finite and non-zero")));
        }
        Ok(Self { t0, d0, phi1 })
    }

    pub fn ratio(&self) -> f64 {
        self.d0 / self.phi1
    }
}

/// Truncated series solution for fixed order, model and initial data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardSolution {
    rho: f64,
    model: SpectralModel,
    data: InitialData,
    num_modes_used: usize,
}

impl ForwardSolution {
    /// Uses every mode the model provides.
    pub fn new(model: SpectralModel, data: InitialData, rho: f64) -> Result<Self, ForwardError> {
        let n = model.num_modes();
        Self::with_modes(model, data, rho, n)
    }

    pub fn with_modes(
        model: SpectralModel,
        data: InitialData,
        rho: f64,
        num_modes_used: usize,
    ) -> Result<Self, ForwardError> {
        check_order(rho)?;
        if num_modes_used == 0 || num_modes_used > model.num_modes() {
            return Err(ForwardError::TooManyModes {
                requested: num_modes_used,
                available: model.num_modes(),
            });
        }
        Ok(Self { rho, model, data, num_modes_used })
    }

    /// Keeps the fewest modes whose tail bound at time `t` is at most `target`.
    pub fn with_target(
        model: SpectralModel,
        data: InitialData,
        rho: f64,
        t: f64,
        target: f64,
    ) -> Result<Self, ForwardError> {
        let j = choose_truncation(&model, &data, rho, t, target)?;
        Self::with_modes(model, data, rho, j)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn model(&self) -> &SpectralModel {
        &self.model
    }

    pub fn data(&self) -> &InitialData {
        &self.data
    }

    pub fn num_modes_used(&self) -> usize {
        self.num_modes_used
    }

    /// `T_1(t), …, T_J(t)`.
    pub fn modal_amplitudes(&self, t: f64) -> Result<Vec<f64>, ForwardError> {
        (1..=self.num_modes_used)
            .map(|j| modal_amplitude(self.rho, self.model.eigenvalues()[j - 1], self.data.coefficient(j), t))
            .collect()
    }

    /// Bound on the `L2(0, π)` norm of the dropped modes at time `t`.
    pub fn truncation_bound(&self, t: f64) -> Result<f64, ForwardError> {
        check_time(t)?;
        Ok(tail_bounds(&self.model, &self.data, self.rho, t, self.num_modes_used).0)
    }

    /// Bound on `sup_x |Σ_{j>J} T_j(t) v_j(x)|`.
    pub fn pointwise_truncation_bound(&self, t: f64) -> Result<f64, ForwardError> {
        check_time(t)?;
        Ok(tail_bounds(&self.model, &self.data, self.rho, t, self.num_modes_used).1)
    }

    /// Partial sum `Σ_{j≤J} T_j(t) v_j(x)`.
    pub fn evaluate_field(&self, x: f64, t: f64) -> Result<f64, ForwardError> {
        Ok(self.evaluate_field_many(&[x], t)?[0])
    }

    /// Field at several points sharing one time; amplitudes are computed once.
    pub fn evaluate_field_many(&self, xs: &[f64], t: f64) -> Result<Vec<f64>, ForwardError> {
        let amps = self.modal_amplitudes(t)?;
        self.synthesize(&amps, xs)
    }

    /// `t^{1-ρ} u(x, t)`, computed without forming the singular factor so it
    /// stays accurate as `t → 0`.
    pub fn weighted_field(&self, x: f64, t: f64) -> Result<f64, ForwardError> {
        Ok(self.weighted_field_many(&[x], t)?[0])
    }

    pub fn weighted_field_many(&self, xs: &[f64], t: f64) -> Result<Vec<f64>, ForwardError> {
        check_time(t)?;
        let p = MLParams::new(self.rho, self.rho)?;
        let tr = t.powf(self.rho);
        let weights = (1..=self.num_modes_used)
            .map(|j| {
                let phi = self.data.coefficient(j);
                if phi == 0.0 {
                    return Ok(0.0);
                }
                Ok(phi * mittag_leffler(p, -self.model.eigenvalues()[j - 1] * tr)?.value)
            })
            .collect::<Result<Vec<f64>, ForwardError>>()?;
        self.synthesize(&weights, xs)
    }

    fn synthesize(&self, amps: &[f64], xs: &[f64]) -> Result<Vec<f64>, ForwardError> {
        if !self.model.has_spatial_evaluator() {
            return Err(SpectralError::Unsupported("field evaluation").into());
        }
        xs.iter()
            .map(|&x| {
                if !(0.0..=std::f64::consts::PI).contains(&x) {
                    return Err(SpectralError::OutsideDomain { x }.into());
                }
                Ok(amps.iter().enumerate().map(|(i, a)| a * cosine_mode(i + 1, x)).sum())
            })
            .collect()
    }

    /// `∫ u(x, t) v_1(x) dx = T_1(t)` for any first eigenvalue.
    pub fn first_mode_projection(&self, t: f64) -> Result<f64, ForwardError> {
        modal_amplitude(self.rho, self.model.eigenvalues()[0], self.data.coefficient(1), t)
    }

    /// Observation at `t0`, which needs `λ_1 = 0` and `φ_1 ≠ 0`. Then
    /// `d_0 = φ_1 t_0^{ρ-1} / Γ(ρ)`.
    pub fn observe(&self, t0: f64) -> Result<Observation, ForwardError> {
        let lambda1 = self.model.eigenvalues()[0];
        if lambda1 != 0.0 {
            return Err(ForwardError::Precondition(format!(
                "first eigenvalue is {lambda1}, inversion needs 0"
            )));
        }
        let phi1 = self.data.coefficient(1);
        if phi1 == 0.0 {
            return Err(ForwardError::Precondition("first modal coefficient is zero".into()));
        }
        if !(t0 >= 1.0 && t0.is_finite()) {
            return Err(ForwardError::Precondition(format!("observation time t0 = {t0} must be >= 1")));
        }
        Observation::new(t0, phi1 * power_over_gamma(self.rho, t0), phi1)
    }
}

/// `(L2, sup-norm)` bounds on the modes after the first `kept`.
fn tail_bounds(model: &SpectralModel, data: &InitialData, rho: f64, t: f64, kept: usize) -> (f64, f64) {
    let lambdas = model.eigenvalues();
    let last = *lambdas.last().expect("model has at least one mode");
    let tr = t.powf(rho);
    let mut sq = 0.0;
    let mut abs = 0.0;
    for (i, &phi) in data.coefficients().iter().enumerate().skip(kept) {
        let lambda = lambdas.get(i).copied().unwrap_or(last);
        let m = phi.abs() / (1.0 + lambda * tr);
        sq += m * m;
        abs += m;
    }
    let front = power_over_gamma(rho, t) * DECAY_SLACK;
    let sup_v = (2.0 / std::f64::consts::PI).sqrt();
    (front * sq.sqrt(), front * sup_v * abs)
}

/// Smallest `J` whose certified `L2` tail bound at time `t` is at most
/// `target`.
pub fn choose_truncation(
    model: &SpectralModel,
    data: &InitialData,
    rho: f64,
    t: f64,
    target: f64,
) -> Result<usize, ForwardError> {
    check_order(rho)?;
    check_time(t)?;
    if !(target > 0.0) {
        return Err(ForwardError::Precondition(format!("target bound {target} must be positive")));
    }
    for j in 1..=model.num_modes() {
        if tail_bounds(model, data, rho, t, j).0 <= target {
            return Ok(j);
        }
    }
    Err(ForwardError::Infeasible {
        target,
        achievable: tail_bounds(model, data, rho, t, model.num_modes()).0,
    })
}

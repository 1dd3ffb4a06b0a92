//! Riemann-Liouville fractional integral and derivative on uniform grids.
//!
//! `J^α f(t) = 1/Γ(α) ∫_0^t (t-ξ)^{α-1} f(ξ) dξ` is approximated by the
//! product trapezoid rule: `f` is interpolated piecewise linearly and the
//! kernel is integrated exactly against each hat function.
//!
//! Functions that behave like `Σ_k c_k t^{γ+kβ}` near the origin (for
//! example `t^{ρ-1} E_{ρ,ρ}(-λt^ρ)`) defeat piecewise-linear interpolation on
//! the first cells. When such a [`SingularPart`] is declared, starting
//! weights on the first few samples are added so that the powers
//! `t^{γ+kβ}` with exponent below 2 (at most [`MAX_CORRECTED_EXPONENTS`] of
//! them) are integrated exactly. Only the exponents are used, never the
//! coefficients `c_k`. With a negative `γ` the sample at `t = 0` is ignored.
//!
//! More exponents would remove more of the start-up error, but the starting
//! weights solve a generalized Vandermonde system whose conditioning degrades
//! quickly; beyond eight exponents rounding in the samples is amplified above
//! the discretization error.
//!
//! The derivative `∂^ρ f = d/dt J^{1-ρ} f` is formed by central differences
//! of the integral.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forward::{modal_amplitude, weighted_integral_amplitude, ForwardError};
use crate::special::{gamma, SpecialFunctionError};

/// At most this many exponents receive starting weights.
pub const MAX_CORRECTED_EXPONENTS: usize = 8;
/// Exponents at or above this value are left to the plain rule.
const EXPONENT_LIMIT: f64 = 2.0;
/// Relative residual below which a modal ODE check is at rounding level and
/// refinement ratios carry no information.
pub const ROUNDOFF_FLOOR: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FractionalError {
    #[error("grid is not uniform at index {index} (t = {t}, expected {expected})")]
    NonUniformGrid { index: usize, t: f64, expected: f64 },
    #[error("grid must start at t = 0, found {0}")]
    GridStart(f64),
    #[error("grid step {0} must be positive and finite")]
    InvalidStep(f64),
    #[error("grid has {points} points, at least {required} needed")]
    GridTooShort { points: usize, required: usize },
    #[error("{grid} grid points but {values} values")]
    LengthMismatch { grid: usize, values: usize },
    #[error("order {0} must lie in (0, 1)")]
    InvalidOrder(f64),
    #[error("singular exponent gamma = {0} must exceed -1")]
    InvalidExponent(f64),
    #[error("exponent step beta = {0} must be positive")]
    InvalidExponentStep(f64),
    #[error("sample {index} is not finite")]
    NonFiniteSample { index: usize },
    #[error("invalid verification window: {0}")]
    InvalidWindow(String),
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
    #[error(transparent)]
    Forward(#[from] ForwardError),
}

/// Declares that `f(t) = Σ_k c_k t^{gamma + k·beta}` plus a smooth remainder
/// near `t = 0`. Smooth data is `gamma = 0, beta = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularPart {
    pub gamma: f64,
    pub beta: f64,
}

impl SingularPart {
    pub fn new(gamma: f64, beta: f64) -> Result<Self, FractionalError> {
        if !(gamma > -1.0 && gamma.is_finite()) {
            return Err(FractionalError::InvalidExponent(gamma));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(FractionalError::InvalidExponentStep(beta));
        }
        Ok(Self { gamma, beta })
    }

    /// `t^γ s(t)` with `s` smooth.
    pub fn power(gamma: f64) -> Result<Self, FractionalError> {
        Self::new(gamma, 1.0)
    }

    fn corrected_exponents(&self) -> Vec<f64> {
        (0..MAX_CORRECTED_EXPONENTS)
            .map(|k| self.gamma + k as f64 * self.beta)
            .take_while(|&s| s < EXPONENT_LIMIT)
            .collect()
    }
}

/// Samples `f(t_n)` at `t_n = n·h`, `n = 0..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    step: f64,
    values: Vec<f64>,
    singular: Option<SingularPart>,
}

impl SampledFunction {
    /// Checks that `t_grid` starts at 0 and is uniform to `1e-9` of a step.
    pub fn new(t_grid: &[f64], values: Vec<f64>) -> Result<Self, FractionalError> {
        if t_grid.len() != values.len() {
            return Err(FractionalError::LengthMismatch { grid: t_grid.len(), values: values.len() });
        }
        if t_grid.len() < 2 {
            return Err(FractionalError::GridTooShort { points: t_grid.len(), required: 2 });
        }
        if t_grid[0] != 0.0 {
            return Err(FractionalError::GridStart(t_grid[0]));
        }
        let h = t_grid[t_grid.len() - 1] / (t_grid.len() - 1) as f64;
        for (i, &t) in t_grid.iter().enumerate() {
            let expected = i as f64 * h;
            if !((t - expected).abs() <= 1e-9 * h) {
                return Err(FractionalError::NonUniformGrid { index: i, t, expected });
            }
        }
        Self::uniform(h, values)
    }

    pub fn uniform(step: f64, values: Vec<f64>) -> Result<Self, FractionalError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(FractionalError::InvalidStep(step));
        }
        if values.len() < 2 {
            return Err(FractionalError::GridTooShort { points: values.len(), required: 2 });
        }
        if let Some(index) = values.iter().skip(1).position(|v| !v.is_finite()) {
            return Err(FractionalError::NonFiniteSample { index: index + 1 });
        }
        Ok(Self { step, values, singular: None })
    }

    /// Samples `f` on `0, h, …, n·h`. With a negative singular exponent the
    /// value at `t = 0` is never evaluated.
    pub fn from_fn(
        step: f64,
        n: usize,
        singular: Option<SingularPart>,
        mut f: impl FnMut(f64) -> f64,
    ) -> Result<Self, FractionalError> {
        let skip_origin = singular.is_some_and(|s| s.gamma < 0.0);
        let values = (0..=n)
            .map(|i| if i == 0 && skip_origin { f64::NAN } else { f(i as f64 * step) })
            .collect();
        let s = Self::uniform(step, values)?;
        match singular {
            Some(p) => s.with_singular_part(p),
            None => s.checked_origin(),
        }
    }

    pub fn with_singular_part(mut self, singular: SingularPart) -> Result<Self, FractionalError> {
        self.singular = Some(singular);
        self.checked_origin()
    }

    fn checked_origin(self) -> Result<Self, FractionalError> {
        if !self.skips_origin() && !self.values[0].is_finite() {
            return Err(FractionalError::NonFiniteSample { index: 0 });
        }
        Ok(self)
    }

    fn skips_origin(&self) -> bool {
        self.singular.is_some_and(|s| s.gamma < 0.0)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn singular_part(&self) -> Option<SingularPart> {
        self.singular
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.step
    }

    pub fn t_grid(&self) -> Vec<f64> {
        (0..self.len()).map(|n| self.t(n)).collect()
    }
}

/// `(1+x)^p + (1-x)^p - 2` for `0 < x ≤ 1/8`, by its even binomial series.
fn even_binomial_tail(p: f64, x: f64) -> f64 {
    let x2 = x * x;
    let mut c = p * (p - 1.0) / 2.0;
    let mut pow = x2;
    let mut sum = 0.0;
    for k in 1..40 {
        let term = c * pow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        let kk = 2.0 * k as f64;
        c *= (p - kk) * (p - kk - 1.0) / ((kk + 1.0) * (kk + 2.0));
        pow *= x2;
    }
    2.0 * sum
}

/// `(1-x)^p - 1 + p·x` for `0 < x ≤ 1/8`.
fn one_sided_binomial_tail(p: f64, x: f64) -> f64 {
    let mut c = p * (p - 1.0) / 2.0;
    let mut pow = x * x;
    let mut sum = 0.0;
    for k in 2..80 {
        let term = c * pow;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        let kf = k as f64;
        c *= -(p - kf) / (kf + 1.0);
        pow *= x;
    }
    sum
}

/// Weight of interior sample `j` at node `n`, `i = n - j ≥ 1`:
/// `(i+1)^p - 2i^p + (i-1)^p` with `p = α + 1`.
fn interior_weight(p: f64, i: usize) -> f64 {
    let fi = i as f64;
    if i < 8 {
        (fi + 1.0).powf(p) - 2.0 * fi.powf(p) + (fi - 1.0).powf(p)
    } else {
        fi.powf(p) * even_binomial_tail(p, 1.0 / fi)
    }
}

/// Weight of the sample at `t = 0` for node `n ≥ 1`: `(n-1)^p - (n-p)n^{p-1}`.
fn origin_weight(p: f64, n: usize) -> f64 {
    let fn_ = n as f64;
    if n < 8 {
        (fn_ - 1.0).powf(p) - (fn_ - p) * fn_.powf(p - 1.0)
    } else {
        fn_.powf(p) * one_sided_binomial_tail(p, 1.0 / fn_)
    }
}

/// `Σ_{j=1}^{n-1} b_{n-j} y_j + y_n` for `n = 1..=N` (index 0 unused).
fn trapezoid_sums(b: &[f64], y: &[f64]) -> Vec<f64> {
    let n_max = y.len() - 1;
    let mut out = vec![0.0; n_max + 1];
    for n in 1..=n_max {
        let mut s = y[n];
        for j in 1..n {
            s += b[n - j] * y[j];
        }
        out[n] = s;
    }
    out
}

/// `J^α f` on the grid of `f`.
///
/// The value at `t = 0` is 0 when the declared leading exponent satisfies
/// `γ + α > 0`, and NaN otherwise (the limit is not determined by samples).
/// The result carries the singular part `(γ + α, β)`.
pub fn rl_fractional_integral(f: &SampledFunction, alpha: f64) -> Result<SampledFunction, FractionalError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FractionalError::InvalidOrder(alpha));
    }
    let sp = f.singular.unwrap_or(SingularPart { gamma: 0.0, beta: 1.0 });
    let skip_origin = f.skips_origin();
    let mut exponents = sp.corrected_exponents();
    if !skip_origin {
        // The plain rule already integrates 1 and t exactly.
        exponents.retain(|&s| s != 0.0 && s != 1.0);
    }
    let m = exponents.len();
    let n_max = f.len() - 1;
    if n_max < m.max(1) {
        return Err(FractionalError::GridTooShort { points: f.len(), required: m.max(1) + 1 });
    }

    let p = alpha + 1.0;
    let h = f.step;
    let b: Vec<f64> = (0..=n_max).map(|i| if i == 0 { 0.0 } else { interior_weight(p, i) }).collect();
    let base_scale = 1.0 / gamma(alpha + 2.0)?;

    let mut y = f.values.clone();
    if skip_origin {
        y[0] = 0.0;
    }
    let sums = trapezoid_sums(&b, &y);
    let mut out = vec![0.0; n_max + 1];
    for n in 1..=n_max {
        let origin = if skip_origin { 0.0 } else { origin_weight(p, n) * y[0] };
        out[n] = base_scale * (sums[n] + origin);
    }

    if m > 0 {
        // Residuals of the plain rule on t^σ, scaled to h = 1.
        let mut rhs = DMatrix::<f64>::zeros(m, n_max + 1);
        for (k, &s) in exponents.iter().enumerate() {
            let powers: Vec<f64> = (0..=n_max).map(|j| if j == 0 { 0.0 } else { (j as f64).powf(s) }).collect();
            let plain = trapezoid_sums(&b, &powers);
            let exact = gamma(s + 1.0)? / gamma(s + 1.0 + alpha)?;
            for n in 1..=n_max {
                rhs[(k, n)] = exact * (n as f64).powf(s + alpha) - base_scale * plain[n];
            }
        }
        let v = DMatrix::from_fn(m, m, |k, j| ((j + 1) as f64).powf(exponents[k]));
        let weights = v.lu().solve(&rhs).expect("starting-weight matrix is nonsingular for distinct exponents");
        for n in 1..=n_max {
            let corr: f64 = (0..m).map(|j| weights[(j, n)] * y[j + 1]).sum();
            out[n] += corr;
        }
    }

    let ha = h.powf(alpha);
    for v in out.iter_mut().skip(1) {
        *v *= ha;
    }
    out[0] = if sp.gamma + alpha > 0.0 { 0.0 } else { f64::NAN };
    let singular = SingularPart::new(sp.gamma + alpha, sp.beta).ok();
    Ok(SampledFunction { step: h, values: out, singular })
}

/// `∂^ρ f = d/dt J^{1-ρ} f`.
///
/// Central differences on the interior, second-order one-sided formulas at
/// the last node and at `n = 1` when `J^{1-ρ} f(0)` is undefined. The value at
/// `t = 0` is NaN.
pub fn rl_fractional_derivative(f: &SampledFunction, rho: f64) -> Result<SampledFunction, FractionalError> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(FractionalError::InvalidOrder(rho));
    }
    if f.len() < 4 {
        return Err(FractionalError::GridTooShort { points: f.len(), required: 4 });
    }
    let j = rl_fractional_integral(f, 1.0 - rho)?;
    let jv = &j.values;
    let n_max = jv.len() - 1;
    let h2 = 2.0 * f.step;
    let mut d = vec![f64::NAN; n_max + 1];
    for n in 1..n_max {
        d[n] = (jv[n + 1] - jv[n - 1]) / h2;
    }
    if jv[0].is_nan() {
        d[1] = (-3.0 * jv[1] + 4.0 * jv[2] - jv[3]) / h2;
    }
    d[n_max] = (3.0 * jv[n_max] - 4.0 * jv[n_max - 1] + jv[n_max - 2]) / h2;
    Ok(SampledFunction { step: f.step, values: d, singular: None })
}

/// Grid and window for [`verify_modal_ode`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeGrid {
    pub step: f64,
    /// Residuals are taken over `window[0] ≤ t ≤ window[1]`.
    pub window: [f64; 2],
    /// Time at which the initial condition is checked.
    pub t_min: f64,
}

impl Default for OdeGrid {
    fn default() -> Self {
        Self { step: 5e-4, window: [0.1, 2.0], t_min: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalOdeReport {
    pub rho: f64,
    pub lambda: f64,
    pub phi: f64,
    pub step: f64,
    /// `sup |∂^ρ T + λT|` over the window.
    pub residual_sup: f64,
    /// `sup |T|` over the window.
    pub amplitude_sup: f64,
    pub relative_residual: f64,
    pub init_check_t: f64,
    /// `|J^{1-ρ}T(t_min) - φ|`.
    pub init_check_error: f64,
}

/// Differentiates sampled modal amplitudes numerically and reports how well
/// they satisfy `∂^ρ T + λT = 0` and `J^{1-ρ}T → φ`.
pub fn verify_modal_ode(rho: f64, lambda: f64, phi: f64, grid: &OdeGrid) -> Result<ModalOdeReport, FractionalError> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(FractionalError::InvalidOrder(rho));
    }
    if !(grid.step > 0.0 && grid.step.is_finite()) {
        return Err(FractionalError::InvalidStep(grid.step));
    }
    let [a, b] = grid.window;
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(FractionalError::InvalidWindow(format!("[{a}, {b}]")));
    }
    if !(grid.t_min > 0.0) {
        return Err(FractionalError::InvalidWindow(format!("t_min = {}", grid.t_min)));
    }
    let h = grid.step;
    let n_max = (b / h).ceil() as usize + 1;
    let singular = SingularPart::new(rho - 1.0, rho)?;
    let mut failure = None;
    let t_samples = SampledFunction::from_fn(h, n_max, Some(singular), |t| {
        modal_amplitude(rho, lambda, phi, t).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            0.0
        })
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    let d = rl_fractional_derivative(&t_samples, rho)?;

    let tol = 1e-9 * h;
    let mut residual_sup: f64 = 0.0;
    let mut amplitude_sup: f64 = 0.0;
    for n in 1..=n_max {
        let t = n as f64 * h;
        if t < a - tol || t > b + tol {
            continue;
        }
        let tv = t_samples.values[n];
        residual_sup = residual_sup.max((d.values[n] + lambda * tv).abs());
        amplitude_sup = amplitude_sup.max(tv.abs());
    }
    let relative_residual = if amplitude_sup > 0.0 { residual_sup / amplitude_sup } else { residual_sup };
    let init = weighted_integral_amplitude(rho, lambda, phi, grid.t_min)?;
    Ok(ModalOdeReport {
        rho,
        lambda,
        phi,
        step: h,
        residual_sup,
        amplitude_sup,
        relative_residual,
        init_check_t: grid.t_min,
        init_check_error: (init - phi).abs(),
    })
}

/// Residuals at a step and at half that step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub coarse: ModalOdeReport,
    pub fine: ModalOdeReport,
    /// `coarse / fine` relative residual.
    pub ratio: f64,
    /// Both residuals are below [`ROUNDOFF_FLOOR`].
    pub at_roundoff_floor: bool,
}

impl RefinementStudy {
    /// Halving the step shrank the residual by at least `min_ratio`, or the
    /// residual is already at rounding level.
    pub fn converging(&self, min_ratio: f64) -> bool {
        self.at_roundoff_floor || self.ratio >= min_ratio
    }
}

/// Runs [`verify_modal_ode`] on `grid` and on a grid with half the step.
pub fn refinement_study(rho: f64, lambda: f64, phi: f64, grid: &OdeGrid) -> Result<RefinementStudy, FractionalError> {
    let coarse = verify_modal_ode(rho, lambda, phi, grid)?;
    let half = OdeGrid { step: 0.5 * grid.step, ..*grid };
    let fine = verify_modal_ode(rho, lambda, phi, &half)?;
    let ratio = coarse.relative_residual / fine.relative_residual;
    let at_roundoff_floor = coarse.relative_residual <= ROUNDOFF_FLOOR && fine.relative_residual <= ROUNDOFF_FLOOR;
    Ok(RefinementStudy { coarse, fine, ratio, at_roundoff_floor })
}

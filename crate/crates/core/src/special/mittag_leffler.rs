//! Two-parameter Mittag-Leffler function on the real line.
//!
//! `E_{ρ,μ}(z) = Σ_{k≥0} z^k / Γ(ρk + μ)`.
//!
//! Two regimes are combined:
//!
//! * the power series, summed in double-double arithmetic with `1/Γ` also
//!   evaluated in double-double. For negative `z` the terms grow to roughly
//!   `exp(|z|^{1/ρ})` before the series settles, so the extra 53 bits absorb
//!   that cancellation up to `|z|^{1/ρ} ≈ 40`;
//! * for `z < 0` and `0 < ρ < 1` the algebraic asymptotic expansion
//!   `E_{ρ,μ}(z) ≈ -Σ_{k=1}^{K} z^{-k} / Γ(μ - ρk)`, truncated at its
//!   smallest term. Its error behaves like `exp(-|z|^{1/ρ})`.
//!
//! Each regime reports an error estimate and the evaluator keeps the one with
//! the smaller estimate. When both are computed and disagree beyond their
//! combined estimates the evaluation fails loudly instead of guessing.

use serde::{Deserialize, Serialize};

use super::double_double::{DoubleDouble, DD_EPSILON};
use super::gamma::{ln_abs_reciprocal_gamma, reciprocal_gamma, reciprocal_gamma_dd};
use super::SpecialFunctionError;

/// Hard cap on the number of terms in either expansion.
const MAX_TERMS: usize = 10_000;
/// Series stopping threshold relative to the partial sum.
const SERIES_REL_STOP: f64 = 1e-17;
/// Largest `|z|^{1/ρ}` handed to the double-double series.
const TAYLOR_SCALE_MAX: f64 = 40.0;
/// Asymptotic results this accurate (relative) skip the series entirely.
const ASYMPTOTIC_SHORTCUT: f64 = 1e-15;
/// Accuracy every returned value must meet: `max(ABS, REL·|E|)`.
const ACCEPT_ABS: f64 = 1e-11;
const ACCEPT_REL: f64 = 1e-11;

/// Parameters `(ρ, μ)` of `E_{ρ,μ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MLParams {
    rho: f64,
    mu: f64,
}

impl MLParams {
    pub fn new(rho: f64, mu: f64) -> Result<Self, SpecialFunctionError> {
        if !(rho.is_finite() && mu.is_finite() && rho > 0.0 && mu > 0.0) {
            return Err(SpecialFunctionError::InvalidParams { rho, mu });
        }
        Ok(Self { rho, mu })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalRegime {
    TaylorSeries,
    Asymptotic,
    /// `E_{1,1} = exp`.
    ClosedForm,
}

/// A Mittag-Leffler value with the absolute error the evaluator commits to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub value: f64,
    pub est_abs_error: f64,
    pub regime: EvalRegime,
}

/// Evaluates `E_{ρ,μ}(z)` for real `z`.
///
/// Returns an error when no regime reaches `max(1e-11, 1e-11·|E|)`, when the
/// regimes contradict each other, or when `z` is too large and positive.
pub fn mittag_leffler(p: MLParams, z: f64) -> Result<EvalReport, SpecialFunctionError> {
    let MLParams { rho, mu } = p;
    if !z.is_finite() {
        return Err(SpecialFunctionError::Domain { function: "mittag_leffler", x: z });
    }
    if z == 0.0 {
        let value = reciprocal_gamma(mu);
        return Ok(EvalReport {
            value,
            est_abs_error: 2.0 * f64::EPSILON * value.abs(),
            regime: EvalRegime::TaylorSeries,
        });
    }
    if rho == 1.0 && mu == 1.0 {
        if z > 709.0 {
            return Err(SpecialFunctionError::Overflow { function: "mittag_leffler", x: z });
        }
        let value = z.exp();
        return Ok(EvalReport {
            value,
            est_abs_error: f64::EPSILON * value,
            regime: EvalRegime::ClosedForm,
        });
    }

    // Natural scale of the problem: the series terms peak near exp(scale).
    let scale = (z.abs().ln() / rho).exp();

    let asymptotic = if z < 0.0 && rho < 1.0 && scale >= 1.0 {
        Some(asymptotic_expansion(rho, mu, z))
    } else {
        None
    };
    if let Some(a) = asymptotic {
        if a.est_abs_error <= ASYMPTOTIC_SHORTCUT * a.value.abs() {
            return Ok(a);
        }
    }

    let taylor = if scale <= TAYLOR_SCALE_MAX {
        taylor_series(rho, mu, z)
    } else {
        None
    };

    let best = match (taylor, asymptotic) {
        (Some(t), Some(a)) => {
            let agree_tol = 2.0 * (t.est_abs_error + a.est_abs_error);
            let both_tight = t.est_abs_error < accept_bound(t.value)
                && a.est_abs_error < accept_bound(a.value);
            if both_tight && (t.value - a.value).abs() > agree_tol {
                return Err(SpecialFunctionError::AccuracyFailure {
                    rho,
                    mu,
                    z,
                    value: t.value,
                    est_abs_error: (t.value - a.value).abs(),
                    reason: "series and asymptotic regimes disagree",
                });
            }
            if t.est_abs_error <= a.est_abs_error {
                t
            } else {
                a
            }
        }
        (Some(t), None) => t,
        (None, Some(a)) => a,
        (None, None) => {
            if z > 0.0 {
                return Err(SpecialFunctionError::Overflow { function: "mittag_leffler", x: z });
            }
            return Err(SpecialFunctionError::AccuracyFailure {
                rho,
                mu,
                z,
                value: f64::NAN,
                est_abs_error: f64::INFINITY,
                reason: "no evaluation regime covers this argument",
            });
        }
    };

    if !(best.est_abs_error <= accept_bound(best.value)) {
        return Err(SpecialFunctionError::AccuracyFailure {
            rho,
            mu,
            z,
            value: best.value,
            est_abs_error: best.est_abs_error,
            reason: "committed error bound exceeds tolerance",
        });
    }
    Ok(best)
}

fn accept_bound(value: f64) -> f64 {
    ACCEPT_ABS.max(ACCEPT_REL * value.abs())
}

/// Power series in double-double arithmetic. `None` when the term cap is hit.
fn taylor_series(rho: f64, mu: f64, z: f64) -> Option<EvalReport> {
    let mut sum = DoubleDouble::ZERO;
    let mut power = DoubleDouble::ONE;
    let mut abs_sum = 0.0_f64;
    let mut prev_abs = f64::INFINITY;
    let mut past_peak = false;

    for k in 0..MAX_TERMS {
        if k > 0 {
            power = power.mul_f64(z);
        }
        // ρk + μ formed exactly so the Γ argument carries no rounding error.
        let arg = DoubleDouble::from_product(rho, k as f64).add_f64(mu);
        if arg.hi >= 170.0 {
            return None;
        }
        let term = power * reciprocal_gamma_dd(arg);
        sum = sum + term;
        let t_abs = term.hi.abs();
        abs_sum += t_abs;

        if t_abs < prev_abs && k > 0 {
            past_peak = true;
        }
        if past_peak && t_abs <= SERIES_REL_STOP * sum.hi.abs() {
            let ratio = t_abs / prev_abs;
            let tail = if ratio < 1.0 { t_abs * ratio / (1.0 - ratio) } else { t_abs };
            let value = sum.to_f64();
            let rounding = abs_sum * DD_EPSILON * (arg.hi + 40.0 + 2.0 * k as f64);
            return Some(EvalReport {
                value,
                est_abs_error: tail + rounding + ulp(value),
                regime: EvalRegime::TaylorSeries,
            });
        }
        prev_abs = t_abs;
    }
    None
}

/// Algebraic asymptotic expansion for `z < 0`, `0 < ρ < 1`, truncated at the
/// smallest term.
fn asymptotic_expansion(rho: f64, mu: f64, z: f64) -> EvalReport {
    let x = -z;
    let ln_x = x.ln();
    let inv_pi = std::f64::consts::FRAC_1_PI;

    // Magnitude envelope of the k-th term. For a < 1 the sin(πa) factor of
    // the reflection formula is dropped so the envelope has no zeros and is
    // unimodal in k (log-convexity of Γ).
    let envelope = |k: usize, a: f64| -> f64 {
        let kf = k as f64;
        if a >= 1.0 {
            (-super::gamma::ln_gamma_unchecked(a) - kf * ln_x).exp()
        } else {
            (super::gamma::ln_gamma_unchecked(1.0 - a) - kf * ln_x).exp() * inv_pi
        }
    };
    let arg = |k: usize| -> f64 { (-DoubleDouble::from_product(rho, k as f64)).add_f64(mu).to_f64() };

    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut abs_sum = 0.0_f64;
    let mut rounding = 0.0_f64;
    let mut prev_env = f64::INFINITY;
    let mut truncation = f64::INFINITY;

    for k in 1..=MAX_TERMS {
        let a = arg(k);
        let env = envelope(k, a);
        if env >= prev_env {
            // Past the smallest term: optimal truncation point.
            truncation = 4.0 * env.min(prev_env);
            break;
        }
        let term = if a <= 0.0 && a == a.floor() {
            0.0
        } else {
            let (ln_abs, sign) = ln_abs_reciprocal_gamma(a);
            let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
            let exponent = ln_abs - k as f64 * ln_x;
            let term = -parity * sign * exponent.exp();
            // exp amplifies the absolute error of its argument.
            rounding += term.abs() * (exponent.abs() + 2.0 * k as f64 * ln_x.abs() + 32.0);
            term
        };
        // Kahan summation.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        abs_sum += term.abs();
        prev_env = env;
        if sum != 0.0 && env <= SERIES_REL_STOP * sum.abs() {
            truncation = env;
            break;
        }
    }
    EvalReport {
        value: sum,
        est_abs_error: truncation + 2.0 * f64::EPSILON * (rounding + 4.0 * abs_sum) + ulp(sum),
        regime: EvalRegime::Asymptotic,
    }
}

fn ulp(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return f64::MIN_POSITIVE;
    }
    let bits = x.abs().to_bits();
    f64::from_bits(bits + 1) - x.abs()
}

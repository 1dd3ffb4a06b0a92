//! Slow, high-precision evaluators backed by MPFR.
//!
//! These exist to check the fast `f64` code in `fracorder-core`; they share no
//! code with it. Every routine works at a precision chosen from the requested
//! number of decimal digits plus enough guard bits to absorb the cancellation
//! of the alternating power series.

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReferenceError {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("series did not converge within {0} terms")]
    NonConvergence(usize),
}

const MAX_TERMS: usize = 60_000;

fn bits_for_digits(digits: u32) -> u32 {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32 + 16
}

fn check_digits(digits: u32) -> Result<(), ReferenceError> {
    if (30..=200).contains(&digits) {
        Ok(())
    } else {
        Err(ReferenceError::InvalidArgument("digits must lie in [30, 200]"))
    }
}

/// `E_{ρ,μ}(z)` by direct power-series summation in extended precision.
///
/// Requires `|z| <= 100`. The working precision is `digits` decimal digits
/// plus `|z|^{1/ρ} / ln 2` guard bits, which covers the largest term of the
/// series. Fails with [`ReferenceError::NonConvergence`] when the series needs
/// more than the term cap (large `|z|^{1/ρ}` with small `ρ`).
pub fn mittag_leffler_reference(rho: f64, mu: f64, z: f64, digits: u32) -> Result<f64, ReferenceError> {
    mittag_leffler_series_float(rho, mu, z, digits).map(|f| f.to_f64())
}

/// Same as [`mittag_leffler_reference`] but returns the full-precision value.
pub fn mittag_leffler_series_float(rho: f64, mu: f64, z: f64, digits: u32) -> Result<Float, ReferenceError> {
    check_digits(digits)?;
    if !(rho > 0.0 && mu > 0.0 && rho.is_finite() && mu.is_finite()) {
        return Err(ReferenceError::InvalidArgument("rho and mu must be positive"));
    }
    if !(z.abs() <= 100.0) {
        return Err(ReferenceError::InvalidArgument("|z| must not exceed 100"));
    }
    let scale = if z == 0.0 { 0.0 } else { (z.abs().ln() / rho).exp() };
    if scale > 5e3 {
        return Err(ReferenceError::NonConvergence(MAX_TERMS));
    }
    let guard = (scale / std::f64::consts::LN_2).ceil() as u32 + 64;
    let prec = bits_for_digits(digits) + guard;

    let zf = Float::with_val(prec, z);
    let rho_f = Float::with_val(prec, rho);
    let mu_f = Float::with_val(prec, mu);
    let stop = Float::with_val(prec, 10).pow(-(i64::from(digits) + 8));

    let mut sum = Float::with_val(prec, 0);
    let mut power = Float::with_val(prec, 1);
    let mut prev_abs = Float::with_val(prec, f64::INFINITY);
    let mut past_peak = false;
    for k in 0..MAX_TERMS {
        if k > 0 {
            power *= &zf;
        }
        let arg = Float::with_val(prec, &rho_f * k as u64) + &mu_f;
        let term = Float::with_val(prec, &power / arg.gamma());
        sum += &term;
        let t_abs = term.abs();
        if k > 0 && t_abs < prev_abs {
            past_peak = true;
        }
        if past_peak && (t_abs.is_zero() || t_abs < Float::with_val(prec, sum.abs_ref()) * &stop) {
            return Ok(sum);
        }
        prev_abs = t_abs;
    }
    Err(ReferenceError::NonConvergence(MAX_TERMS))
}

/// `E_{ρ,μ}(z)` for `z < 0`, `0 < ρ < 1` and `|z|^{1/ρ} >= 100` from the
/// algebraic asymptotic expansion, summed in extended precision.
///
/// In this range the truncation remainder is below `exp(-100)`, so the result
/// is accurate to well beyond double precision for every value this crate's
/// tests compare against.
pub fn mittag_leffler_asymptotic_reference(rho: f64, mu: f64, z: f64, digits: u32) -> Result<f64, ReferenceError> {
    check_digits(digits)?;
    if !(rho > 0.0 && rho < 1.0 && mu > 0.0) {
        return Err(ReferenceError::InvalidArgument("need 0 < rho < 1 and mu > 0"));
    }
    if !(z < 0.0) || (z.abs().ln() / rho) < 100f64.ln() {
        return Err(ReferenceError::InvalidArgument("need z < 0 with |z|^(1/rho) >= 100"));
    }
    let prec = bits_for_digits(digits) + 64;
    let zf = Float::with_val(prec, z);
    let inv_z = Float::with_val(prec, 1) / &zf;
    let pi = Float::with_val(prec, Constant::Pi);
    let stop = Float::with_val(prec, 10).pow(-(i64::from(digits) + 8));

    let mut sum = Float::with_val(prec, 0);
    let mut power = Float::with_val(prec, 1);
    let mut prev_abs: Option<Float> = None;
    for k in 1..MAX_TERMS {
        power *= &inv_z;
        let a = Float::with_val(prec, mu) - Float::with_val(prec, rho) * k as u64;
        let rg = reciprocal_gamma_float(&a, &pi);
        let term = Float::with_val(prec, &power * &rg);
        sum -= &term;
        // Envelope |z|^{-k} Γ(1 - a)/π to detect the smallest term.
        let one_minus_a = Float::with_val(prec, 1) - &a;
        let env = Float::with_val(prec, power.abs_ref()) * one_minus_a.gamma() / &pi;
        if let Some(prev) = &prev_abs {
            if env > *prev {
                return Ok(sum.to_f64());
            }
        }
        if !sum.is_zero() && env < Float::with_val(prec, sum.abs_ref()) * &stop {
            return Ok(sum.to_f64());
        }
        prev_abs = Some(env);
    }
    Err(ReferenceError::NonConvergence(MAX_TERMS))
}

fn reciprocal_gamma_float(a: &Float, pi: &Float) -> Float {
    let prec = a.prec();
    if a.is_integer() && *a <= 0 {
        return Float::with_val(prec, 0);
    }
    if *a > 0 {
        return Float::with_val(prec, 1) / Float::with_val(prec, a.gamma_ref());
    }
    // 1/Γ(a) = sin(πa) Γ(1 - a) / π
    let s = Float::with_val(prec, a * pi).sin();
    let g = (Float::with_val(prec, 1) - a).gamma();
    s * g / pi
}

/// `Γ(x)` rounded to `f64` from a `digits`-digit evaluation.
pub fn gamma_reference(x: f64, digits: u32) -> f64 {
    Float::with_val(bits_for_digits(digits), x).gamma().to_f64()
}

/// `1/Γ(x)` for any real `x`.
pub fn reciprocal_gamma_reference(x: f64, digits: u32) -> f64 {
    let prec = bits_for_digits(digits);
    let pi = Float::with_val(prec, Constant::Pi);
    reciprocal_gamma_float(&Float::with_val(prec, x), &pi).to_f64()
}

/// `1/Γ(hi + lo)` returned as an unevaluated `(hi, lo)` pair, for checking
/// double-double code.
pub fn reciprocal_gamma_pair_reference(hi: f64, lo: f64, digits: u32) -> (f64, f64) {
    let prec = bits_for_digits(digits) + 64;
    let pi = Float::with_val(prec, Constant::Pi);
    let x = Float::with_val(prec, hi) + lo;
    let r = reciprocal_gamma_float(&x, &pi);
    let r_hi = r.to_f64();
    let r_lo = (r - r_hi).to_f64();
    (r_hi, r_lo)
}

/// `Ψ(x)` rounded to `f64`.
pub fn digamma_reference(x: f64, digits: u32) -> f64 {
    Float::with_val(bits_for_digits(digits), x).digamma().to_f64()
}

/// `erfc(x)` rounded to `f64`.
pub fn erfc_reference(x: f64, digits: u32) -> f64 {
    Float::with_val(bits_for_digits(digits), x).erfc().to_f64()
}

/// `E_{1/2,1/2}(-x) = 1/√π - x e^{x²} erfc(x)`, evaluated in extended
/// precision. An independent closed form for cross-checks.
pub fn ml_half_half_closed_form(x: f64, digits: u32) -> f64 {
    let prec = bits_for_digits(digits) + 64;
    let xf = Float::with_val(prec, x);
    let pi = Float::with_val(prec, Constant::Pi);
    let inv_sqrt_pi = Float::with_val(prec, 1) / pi.sqrt();
    let e = Float::with_val(prec, &xf * &xf).exp();
    let erfc = Float::with_val(prec, xf.erfc_ref());
    (inv_sqrt_pi - xf * e * erfc).to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_handles_severe_cancellation() {
        let v = mittag_leffler_reference(1.0, 1.0, -20.0, 50).unwrap();
        assert!((v - (-20f64).exp()).abs() < 1e-15 * v);
    }

    #[test]
    fn series_second_parameter() {
        let v = mittag_leffler_reference(1.0, 2.0, 1.0, 50).unwrap();
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn digit_settings_agree() {
        let a = mittag_leffler_series_float(0.7, 0.7, -10.0, 50).unwrap();
        let b = mittag_leffler_series_float(0.7, 0.7, -10.0, 90).unwrap();
        let diff = Float::with_val(400, &a - &b).abs().to_f64();
        assert!(diff < 1e-45, "{diff}");
    }

    #[test]
    fn closed_form_matches_series() {
        let a = ml_half_half_closed_form(3.0, 50);
        let b = mittag_leffler_reference(0.5, 0.5, -3.0, 50).unwrap();
        assert!((a - b).abs() < 1e-16);
    }

    #[test]
    fn asymptotic_matches_series_where_both_apply() {
        // |z|^{1/ρ} = 144 for ρ = 0.5, z = -12.
        let a = mittag_leffler_asymptotic_reference(0.5, 0.5, -12.0, 40).unwrap();
        let b = ml_half_half_closed_form(12.0, 50);
        assert!((a - b).abs() < 1e-15 * b.abs());
    }

    #[test]
    fn argument_checks() {
        assert!(mittag_leffler_reference(0.5, 0.5, -200.0, 50).is_err());
        assert!(mittag_leffler_reference(0.5, 0.5, -1.0, 10).is_err());
        assert!(mittag_leffler_asymptotic_reference(0.5, 0.5, -2.0, 40).is_err());
    }
}

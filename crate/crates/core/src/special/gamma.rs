//! Gamma, log-gamma, reciprocal gamma and digamma on the real line.

use std::f64::consts::PI;

use super::double_double::DoubleDouble;
use super::SpecialFunctionError;

/// Largest argument for which `Γ(x)` is finite in `f64`.
pub const GAMMA_OVERFLOW_THRESHOLD: f64 = 171.624_376_956_302_7;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Lanczos sum and shifted base for `Γ(x)`, valid for `x >= 0.5`.
#[inline]
fn lanczos_parts(x: f64) -> (f64, f64) {
    let xm1 = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (xm1 + i as f64);
    }
    (sum, xm1 + LANCZOS_G + 0.5)
}

/// `Γ(x)` for `x >= 0.5` without domain checks.
fn gamma_lanczos(x: f64) -> f64 {
    if x == x.floor() && x <= 23.0 {
        // Exact factorials.
        let mut p = 1.0;
        let mut k = 2.0;
        while k < x {
            p *= k;
            k += 1.0;
        }
        return p;
    }
    let (sum, t) = lanczos_parts(x);
    // t^(x - 1/2) is split so that large arguments do not overflow early.
    let half = 0.5 * (x - 0.5);
    let v = t.powf(half);
    SQRT_2PI * sum * (v * (-t).exp()) * v
}

/// Euler's gamma function for positive arguments.
pub fn gamma(x: f64) -> Result<f64, SpecialFunctionError> {
    if x.is_nan() || x <= 0.0 {
        return Err(SpecialFunctionError::Domain { function: "gamma", x });
    }
    if x > GAMMA_OVERFLOW_THRESHOLD {
        return Err(SpecialFunctionError::Overflow { function: "gamma", x });
    }
    Ok((DoubleDouble::ONE / reciprocal_gamma_dd(DoubleDouble::from_f64(x))).to_f64())
}

/// `ln Γ(x)` for positive arguments.
pub fn ln_gamma(x: f64) -> Result<f64, SpecialFunctionError> {
    if x.is_nan() || x <= 0.0 {
        return Err(SpecialFunctionError::Domain { function: "ln_gamma", x });
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return ln_gamma_unchecked(x + 1.0) - x.ln();
    }
    if x < 100.0 {
        return gamma_lanczos(x).ln();
    }
    let (sum, t) = lanczos_parts(x);
    LN_SQRT_2PI + (x - 0.5) * t.ln() - t + sum.ln()
}

/// `sin(πx)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    // Reduce to r in [-1, 1]; sin(π x) = sin(π r).
    let r = x - 2.0 * (0.5 * x).round();
    let (sign, r) = if r < 0.0 { (-1.0, -r) } else { (1.0, r) };
    let v = if r <= 0.25 {
        (PI * r).sin()
    } else if r <= 0.75 {
        (PI * (r - 0.5)).cos()
    } else {
        (PI * (1.0 - r)).sin()
    };
    sign * v
}

/// `1/Γ(x)` on the whole real line.
///
/// The reciprocal is entire, so there are no error cases: the poles of `Γ`
/// at `0, -1, -2, …` map to exact zeros. Results whose magnitude exceeds the
/// `f64` range are returned as signed infinities.
pub fn reciprocal_gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x > 0.0 {
        if x < 170.0 {
            return reciprocal_gamma_dd(DoubleDouble::from_f64(x)).to_f64();
        }
        return (-ln_gamma_unchecked(x)).exp();
    }
    if x == x.floor() {
        return 0.0;
    }
    // Reflection: 1/Γ(x) = sin(πx) Γ(1 - x) / π.
    let s = sin_pi(x);
    let y = 1.0 - x;
    if y < 170.0 {
        s / (reciprocal_gamma_dd(DoubleDouble::from_f64(y)).to_f64() * PI)
    } else {
        s.signum() * (ln_gamma_unchecked(y) + s.abs().ln() - PI.ln()).exp()
    }
}

/// Natural log of `|1/Γ(x)|` together with its sign, for any real `x` that is
/// not a non-positive integer. Used where `1/Γ` is multiplied by a quantity
/// that would under- or overflow on its own.
pub(crate) fn ln_abs_reciprocal_gamma(x: f64) -> (f64, f64) {
    if x > 0.0 {
        return (-ln_gamma_unchecked(x), 1.0);
    }
    let s = sin_pi(x);
    (ln_gamma_unchecked(1.0 - x) + s.abs().ln() - PI.ln(), s.signum())
}

/// Logarithmic derivative of the gamma function, `Ψ(x) = Γ'(x)/Γ(x)`.
pub fn digamma(x: f64) -> Result<f64, SpecialFunctionError> {
    if x.is_nan() || x <= 0.0 {
        return Err(SpecialFunctionError::Domain { function: "digamma", x });
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli-number asymptotic series B_2k / (2k x^2k), k = 1..7.
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2
                                        * (1.0 / 132.0
                                            - inv2 * (691.0 / 32_760.0 - inv2 / 12.0))))));
    Ok(acc + x.ln() - 0.5 / x - series)
}

// Taylor coefficients of 1/Γ(1.5 + u), as (hi, lo) pairs.
const RGAMMA_TAYLOR_AT_3_2: [(f64, f64); 36] = [
    (1.1283791670955126, 1.533545961316588e-17),
    (-0.0411745264452831, -3.3752130157375745e-18),
    (-0.5266544355255445, -6.112036385608127e-18),
    (0.17510202604393457, -1.0657471268514412e-17),
    (0.050966860247706074, 3.1247224718944427e-18),
    (-0.042155169368535604, 3.0976342103734477e-18),
    (0.006612897826824127, 3.573455638859823e-19),
    (0.002120731442572938, 1.3781297975220145e-19),
    (-0.0011107302545948906, -9.753454144222531e-20),
    (0.00015235762076747688, -1.0906520861329338e-20),
    (2.5355204923814165e-05, 4.893956349690275e-22),
    (-1.3896805717913756e-05, 2.1533543121307036e-22),
    (2.1562032905141724e-06, 8.714226745633228e-23),
    (5.7942640540526726e-08, -7.454341938541845e-25),
    (-8.913551118311116e-08, -3.639776989356635e-24),
    (1.7103469415915374e-08, 1.1274857846497739e-25),
    (-9.313686445241901e-10, -3.474969316158858e-26),
    (-2.6804741033496623e-10, -2.3612584194639298e-26),
    (7.458932233316326e-11, 2.4373478754056218e-27),
    (-8.012807061414718e-12, -7.570390468804759e-28),
    (-8.382343033451855e-14, 3.885823863175652e-30),
    (1.6946340904320522e-13, 2.2653509452158334e-30),
    (-2.7875756707125753e-14, 6.524116911441165e-31),
    (1.8670394695065306e-15, -4.254392590878746e-32),
    (1.3049499008587988e-16, -9.270238560188959e-33),
    (-4.8588741441877864e-17, -1.339620604759889e-33),
    (5.829542692459468e-18, -7.523759917630262e-35),
    (-2.592909417993784e-19, 4.8295929078260184e-36),
    (-3.326754010285789e-20, 1.6251345689863235e-36),
    (7.944961635768106e-21, -3.661196591132274e-37),
    (-7.755543288437357e-22, -3.001439691199397e-38),
    (2.5533736291329696e-23, 1.0788765942473458e-40),
    (4.274520160147173e-24, 2.7654689015952895e-40),
    (-8.263381374668449e-25, -2.4845851081041036e-41),
    (7.108187657253398e-26, 7.154417290279865e-43),
    (-2.0749463887704297e-27, 9.526265424997407e-44),
];

/// `1/Γ(y)` in double-double precision for `0 < y < 171`.
pub(crate) fn reciprocal_gamma_dd(y: DoubleDouble) -> DoubleDouble {
    debug_assert!(y.hi > 0.0);
    if y.hi < 1.0 {
        return y * reciprocal_gamma_dd(y.add_f64(1.0));
    }
    let shift = (y.floor().to_f64() - 1.0).max(0.0);
    let f = y.add_f64(-shift);
    let u = f.add_f64(-1.5);
    let mut acc = DoubleDouble::ZERO;
    for &(hi, lo) in RGAMMA_TAYLOR_AT_3_2.iter().rev() {
        acc = acc * u + DoubleDouble::new(hi, lo);
    }
    if shift == 0.0 {
        return acc;
    }
    // Γ(f + n) = Γ(f) f (f + 1) … (f + n - 1)
    let mut prod = f;
    let mut i = 1.0;
    while i < shift {
        prod = prod * f.add_f64(i);
        i += 1.0;
    }
    acc / prod
}

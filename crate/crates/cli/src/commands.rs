use std::f64::consts::PI;
use std::fs;

use anyhow::{anyhow, Context, Result};
use fracorder_core::forward::{ForwardError, ForwardSolution, Observation};
use fracorder_core::inverse::{consistency_check, recover_order, ConsistencyReport, InverseError, InversionResult};
use fracorder_core::spectral::{BasisKind, SpectralModel};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Failure, RunConfig};
use crate::output::{write_csv, write_json};

/// Recovered orders this close to 0 or 1 get a warning in the round-trip
/// report. The slack keeps `1 - 0.999` on the warned side.
const ENDPOINT_PROXIMITY: f64 = 1e-3 * (1.0 + 1e-9);

pub fn forward_failure(e: ForwardError) -> anyhow::Error {
    let kind = match e {
        ForwardError::Special(_) | ForwardError::Infeasible { .. } => Failure::Numerics,
        _ => Failure::Config,
    };
    anyhow::Error::new(e).context(kind)
}

pub fn inverse_failure(e: InverseError) -> anyhow::Error {
    let kind = match e {
        InverseError::Unsolvable { .. } => Failure::Unsolvable,
        InverseError::NoConvergence { .. } | InverseError::Special(_) => Failure::Numerics,
        _ => Failure::Config,
    };
    anyhow::Error::new(e).context(kind)
}

fn prepare_output(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))
}

fn solution(cfg: &RunConfig) -> Result<ForwardSolution> {
    let (model, data) = cfg.build_problem().context(Failure::Config)?;
    ForwardSolution::new(model, data, cfg.rho.expect("validated")).map_err(forward_failure)
}

#[derive(Serialize)]
struct TimeBounds {
    t: f64,
    truncation_bound: f64,
    pointwise_truncation_bound: f64,
}

#[derive(Serialize)]
struct ForwardReport {
    command: &'static str,
    rho: f64,
    basis: BasisKind,
    num_modes_available: usize,
    num_modes_used: usize,
    truncation_target: f64,
    /// Largest L2 bound over the output times.
    truncation_bound: f64,
    times: Vec<TimeBounds>,
}

pub fn forward(cfg: &RunConfig) -> Result<()> {
    let rho = cfg.rho.expect("validated");
    let (model, data) = cfg.build_problem().context(Failure::Config)?;
    if !model.has_spatial_evaluator() {
        return Err(anyhow!("field output needs the neumann_cosine_1d basis")).context(Failure::Config);
    }
    let times = cfg.output_times();
    // The tail bound decreases in t, so the earliest time decides.
    let t_min = times.iter().copied().fold(f64::INFINITY, f64::min);
    let available = model.num_modes();
    let sol = ForwardSolution::with_target(model, data, rho, t_min, cfg.tolerances.truncation)
        .map_err(forward_failure)?;
    log::info!("forward: rho = {rho}, keeping {} of {available} modes", sol.num_modes_used());

    let n = cfg.grid.x_points;
    let xs: Vec<f64> = (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect();
    let blocks = times
        .par_iter()
        .map(|&t| {
            let u = sol.evaluate_field_many(&xs, t)?;
            let w = sol.weighted_field_many(&xs, t)?;
            Ok(xs.iter().zip(u).zip(w).map(|((&x, u), w)| vec![x, t, u, w]).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>, ForwardError>>()
        .map_err(forward_failure)?;
    let rows: Vec<Vec<f64>> = blocks.into_iter().flatten().collect();

    let bounds = times
        .iter()
        .map(|&t| {
            Ok(TimeBounds {
                t,
                truncation_bound: sol.truncation_bound(t)?,
                pointwise_truncation_bound: sol.pointwise_truncation_bound(t)?,
            })
        })
        .collect::<Result<Vec<_>, ForwardError>>()
        .map_err(forward_failure)?;
    let report = ForwardReport {
        command: "forward",
        rho,
        basis: sol.model().basis(),
        num_modes_available: available,
        num_modes_used: sol.num_modes_used(),
        truncation_target: cfg.tolerances.truncation,
        truncation_bound: bounds.iter().map(|b| b.truncation_bound).fold(0.0, f64::max),
        times: bounds,
    };

    prepare_output(cfg)?;
    write_csv(&cfg.output_dir, "forward.csv", &["x", "t", "u", "t_pow_1_minus_rho_u"], &rows)?;
    write_json(&cfg.output_dir, "report.json", &report)
}

#[derive(Serialize)]
struct FirstMode {
    d0: f64,
    phi1: f64,
}

#[derive(Serialize)]
struct ObservationOut {
    t0: f64,
    d0: f64,
    phi1: f64,
    ratio: f64,
    /// Same data for the unnormalized first eigenfunction `v_1 = 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    unit_first_mode: Option<FirstMode>,
}

impl ObservationOut {
    fn new(obs: &Observation, model: &SpectralModel) -> Self {
        let unit_first_mode = (model.basis() == BasisKind::NeumannCosine1d).then(|| {
            let s = PI.sqrt();
            FirstMode { d0: obs.d0 * s, phi1: obs.phi1 * s }
        });
        Self { t0: obs.t0, d0: obs.d0, phi1: obs.phi1, ratio: obs.ratio(), unit_first_mode }
    }
}

pub fn observe(cfg: &RunConfig) -> Result<()> {
    let sol = solution(cfg)?;
    let obs = sol.observe(cfg.t0).map_err(forward_failure)?;
    log::info!("observe: t0 = {}, d0 = {}, ratio = {}", obs.t0, obs.d0, obs.ratio());
    prepare_output(cfg)?;
    write_json(&cfg.output_dir, "observation.json", &ObservationOut::new(&obs, sol.model()))
}

#[derive(Serialize)]
struct InversionOut<'a> {
    t0: f64,
    d0: f64,
    phi1: f64,
    #[serde(flatten)]
    result: &'a InversionResult,
}

fn invert_observation(cfg: &RunConfig, obs: &Observation) -> Result<InversionResult> {
    let result = recover_order(obs, cfg.tolerances.inversion, cfg.method).map_err(inverse_failure)?;
    for w in &result.warnings {
        log::warn!("{w}");
    }
    log::info!("invert: rho_hat = {} after {} iterations", result.rho_hat, result.iterations);
    Ok(result)
}

fn write_inversion(cfg: &RunConfig, obs: &Observation, result: &InversionResult) -> Result<()> {
    let out = InversionOut { t0: obs.t0, d0: obs.d0, phi1: obs.phi1, result };
    write_json(&cfg.output_dir, "inversion.json", &out)
}

/// Inverts either the given observation file or `d0` with `φ_1` taken from
/// the configured problem.
pub fn invert(cfg: &RunConfig, observation: Option<Observation>) -> Result<()> {
    let obs = match observation {
        Some(o) => o,
        None => {
            let (_, data) = cfg.build_problem().context(Failure::Config)?;
            Observation::new(cfg.t0, cfg.d0.expect("validated"), data.coefficient(1)).map_err(forward_failure)?
        }
    };
    let result = invert_observation(cfg, &obs)?;
    prepare_output(cfg)?;
    write_inversion(cfg, &obs, &result)
}

#[derive(Serialize)]
struct RoundTripReport {
    command: &'static str,
    rho: f64,
    t0: f64,
    rho_hat: f64,
    abs_error: f64,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    t1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    consistency: Option<ConsistencyReport>,
    warnings: Vec<String>,
}

pub fn roundtrip(cfg: &RunConfig) -> Result<()> {
    let rho = cfg.rho.expect("validated");
    let sol = solution(cfg)?;
    let obs = sol.observe(cfg.t0).map_err(forward_failure)?;
    let result = invert_observation(cfg, &obs)?;

    let consistency = match cfg.t1 {
        Some(t1) => {
            let second = sol.observe(t1).map_err(forward_failure)?;
            let c = consistency_check(&obs, &second, cfg.tolerances.consistency).map_err(inverse_failure)?;
            log::info!("consistency: t0 and t1 = {t1} differ by {:e}", c.difference);
            Some(c)
        }
        None => None,
    };

    let mut warnings = result.warnings.clone();
    let edge = result.rho_hat.min(1.0 - result.rho_hat);
    if edge <= ENDPOINT_PROXIMITY {
        let w = format!("recovered order {} is within 1e-3 of the boundary of (0, 1)", result.rho_hat);
        log::warn!("{w}");
        warnings.push(w);
    }
    if let Some(c) = &consistency {
        if !c.consistent {
            warnings.push(format!("recoveries at t0 and t1 differ by {:e}", c.difference));
        }
    }
    let report = RoundTripReport {
        command: "roundtrip",
        rho,
        t0: cfg.t0,
        rho_hat: result.rho_hat,
        abs_error: (result.rho_hat - rho).abs(),
        iterations: result.iterations,
        t1: cfg.t1,
        consistency,
        warnings,
    };

    prepare_output(cfg)?;
    write_json(&cfg.output_dir, "observation.json", &ObservationOut::new(&obs, sol.model()))?;
    write_inversion(cfg, &obs, &result)?;
    write_json(&cfg.output_dir, "report.json", &report)
}

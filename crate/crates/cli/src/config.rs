//! Run configuration: one JSON document plus scalar command-line overrides.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fracorder_core::forward::Observation;
use fracorder_core::inverse::RootMethod;
use fracorder_core::spectral::{project_initial_data, Eigendata, InitialData, SpectralModel};
use serde::Deserialize;

/// Failure classes with stable process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Failure {
    Config,
    Numerics,
    Unsolvable,
    Verification,
}

impl Failure {
    pub fn exit_code(self) -> u8 {
        match self {
            Failure::Config => 2,
            Failure::Numerics => 3,
            Failure::Unsolvable => 4,
            Failure::Verification => 5,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Failure::Config => "invalid configuration",
            Failure::Numerics => "numerical failure",
            Failure::Unsolvable => "unsolvable",
            Failure::Verification => "verification failed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    #[serde(rename = "neumann_cosine_1d")]
    NeumannCosine1d,
    Abstract,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    /// Orthonormal modal coefficients `φ_1, φ_2, …`.
    Coefficients { data: Vec<f64> },
    /// Values of `φ` on a uniform grid over `[0, π]`, endpoints included.
    Samples { data: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub basis: Basis,
    #[serde(default)]
    pub eigendata_path: Option<PathBuf>,
    #[serde(default)]
    pub phi: Option<PhiSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Residual tolerance of the root search.
    pub inversion: f64,
    /// Target for the L2 truncation bound of forward runs.
    pub truncation: f64,
    /// Agreement required between recoveries at two instants.
    pub consistency: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { inversion: 1e-14, truncation: 1e-8, consistency: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldGrid {
    pub x_points: usize,
    /// Output times; empty means `[t0]`.
    pub t: Vec<f64>,
}

impl Default for FieldGrid {
    fn default() -> Self {
        Self { x_points: 201, t: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    #[serde(default)]
    pub rho: Option<f64>,
    pub t0: f64,
    /// Second observation instant for the consistency check.
    #[serde(default)]
    pub t1: Option<f64>,
    #[serde(default)]
    pub d0: Option<f64>,
    pub num_modes: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub grid: FieldGrid,
    #[serde(default = "default_method")]
    pub method: RootMethod,
    /// Reserved; no code path is random.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_method() -> RootMethod {
    RootMethod::NewtonSafeguarded
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub rho: Option<f64>,
    pub d0: Option<f64>,
    pub modes: Option<usize>,
    pub out: Option<PathBuf>,
}

/// What a command needs from `rho` / `d0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    Order,
    Measurement,
    /// Neither is used.
    None,
}

impl RunConfig {
    /// Configuration used by `verify` when no file is given.
    pub fn verify_default() -> Self {
        Self {
            problem: Problem {
                basis: Basis::NeumannCosine1d,
                eigendata_path: None,
                phi: Some(PhiSpec::Coefficients { data: vec![1.0] }),
            },
            rho: None,
            t0: 1.0,
            t1: None,
            d0: None,
            num_modes: 1,
            tolerances: Tolerances::default(),
            output_dir: PathBuf::from("fracorder-out"),
            grid: FieldGrid::default(),
            method: default_method(),
            seed: None,
        }
    }

    /// Reads the file; a relative `eigendata_path` is resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if let Some(p) = cfg.problem.eigendata_path.as_mut() {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.t0 {
            self.t0 = v;
        }
        if let Some(v) = o.t1 {
            self.t1 = Some(v);
        }
        if let Some(v) = o.rho {
            self.rho = Some(v);
        }
        if let Some(v) = o.d0 {
            self.d0 = Some(v);
        }
        if let Some(v) = o.modes {
            self.num_modes = v;
        }
        if let Some(v) = &o.out {
            self.output_dir = v.clone();
        }
    }

    pub fn validate(&self, driver: Driver) -> Result<()> {
        match (driver, self.rho, self.d0) {
            (Driver::Order, Some(_), Some(_)) | (Driver::Measurement, Some(_), Some(_)) => {
                bail!("exactly one of rho and d0 may drive a run, both are set")
            }
            (Driver::Order, None, _) => bail!("this command needs rho"),
            (Driver::Measurement, Some(_), None) => bail!("this command inverts a measurement d0, not a given rho"),
            _ => {}
        }
        if let Some(rho) = self.rho {
            if !(rho > 0.0 && rho < 1.0) {
                bail!("rho = {rho} must lie in (0, 1)");
            }
        }
        if let Some(d0) = self.d0 {
            if !d0.is_finite() {
                bail!("d0 = {d0} must be finite");
            }
        }
        if !(self.t0 >= 1.0 && self.t0.is_finite()) {
            bail!("t0 = {} must be finite and >= 1", self.t0);
        }
        if let Some(t1) = self.t1 {
            if !(t1 >= 1.0 && t1.is_finite()) {
                bail!("t1 = {t1} must be finite and >= 1");
            }
        }
        if self.num_modes == 0 {
            bail!("num_modes must be at least 1");
        }
        let tol = &self.tolerances;
        for (name, v) in [("inversion", tol.inversion), ("truncation", tol.truncation), ("consistency", tol.consistency)] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("tolerances.{name} = {v} must be positive");
            }
        }
        if self.grid.x_points < 2 {
            bail!("grid.x_points must be at least 2");
        }
        if let Some(t) = self.grid.t.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            bail!("output time {t} must be positive and finite");
        }
        match (self.problem.basis, &self.problem.eigendata_path, &self.problem.phi) {
            (Basis::Abstract, None, _) => bail!("the abstract basis needs problem.eigendata_path"),
            (Basis::Abstract, Some(_), Some(_)) => bail!("abstract problems take phi from the eigendata file"),
            (Basis::NeumannCosine1d, Some(_), _) => bail!("eigendata_path is only used with the abstract basis"),
            (Basis::NeumannCosine1d, None, None) => bail!("problem.phi is required for the neumann_cosine_1d basis"),
            _ => {}
        }
        Ok(())
    }

    /// Output times of the forward command.
    pub fn output_times(&self) -> Vec<f64> {
        if self.grid.t.is_empty() {
            vec![self.t0]
        } else {
            self.grid.t.clone()
        }
    }

    /// Spectral model and coefficients described by `problem`, limited to
    /// `num_modes` modes.
    pub fn build_problem(&self) -> Result<(SpectralModel, InitialData)> {
        match self.problem.basis {
            Basis::NeumannCosine1d => {
                let model = SpectralModel::neumann_cosine(self.num_modes)?;
                let data = match self.problem.phi.as_ref().expect("validated") {
                    PhiSpec::Coefficients { data } => InitialData::from_coefficients(data.clone())?,
                    PhiSpec::Samples { data } => project_initial_data(&model, data, self.num_modes)?,
                };
                Ok((model, data))
            }
            Basis::Abstract => {
                let path = self.problem.eigendata_path.as_ref().expect("validated");
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let eig: Eigendata =
                    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
                let (model, data) = eig.into_parts()?;
                if self.num_modes > model.num_modes() {
                    bail!("num_modes = {} exceeds the {} modes in {}", self.num_modes, model.num_modes(), path.display());
                }
                let model = SpectralModel::abstract_modal(model.eigenvalues()[..self.num_modes].to_vec())?;
                Ok((model, data))
            }
        }
    }
}

/// Observation file: `{"t0": …, "d0": …, "phi1": …}`. Other keys are ignored.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct ObservationFile {
    pub t0: f64,
    pub d0: f64,
    pub phi1: f64,
}

impl ObservationFile {
    pub fn load(path: &Path) -> Result<Observation> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let o: ObservationFile =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(Observation::new(o.t0, o.d0, o.phi1)?)
    }
}

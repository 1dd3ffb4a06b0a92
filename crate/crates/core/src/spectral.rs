//! Spectral data of the elliptic operator: eigenvalues, eigenfunctions and the
//! modal coefficients of the initial data.
//!
//! Mode indices are 1-based throughout, so mode `j` has eigenvalue
//! `eigenvalues()[j - 1]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("number of modes must be at least 1")]
    NoModes,
    #[error("invalid eigenvalues: {0}")]
    InvalidEigenvalues(String),
    #[error("mode {j} outside 1..={num_modes}")]
    ModeOutOfRange { j: usize, num_modes: usize },
    #[error("point {x} outside the domain [0, pi]")]
    OutsideDomain { x: f64 },
    #[error("{0} is not available for an abstract modal basis")]
    Unsupported(&'static str),
    #[error("{points} grid points cannot resolve {num_modes} modes (need at least {required})")]
    InsufficientResolution { points: usize, num_modes: usize, required: usize },
    #[error("eigendata arrays differ in length ({eigenvalues} eigenvalues, {phi} coefficients)")]
    LengthMismatch { eigenvalues: usize, phi: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    /// Orthonormal cosines on `[0, π]`, eigenvalues `(j-1)²`.
    #[serde(rename = "neumann_cosine_1d")]
    NeumannCosine1d,
    /// User-supplied eigenvalues without a spatial evaluator.
    AbstractModal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    eigenvalues: Vec<f64>,
    basis: BasisKind,
}

impl SpectralModel {
    /// Neumann Laplacian on `(0, π)` with its first `num_modes` modes.
    pub fn neumann_cosine(num_modes: usize) -> Result<Self, SpectralError> {
        if num_modes == 0 {
            return Err(SpectralError::NoModes);
        }
        let eigenvalues = (0..num_modes).map(|k| (k * k) as f64).collect();
        Ok(Self { eigenvalues, basis: BasisKind::NeumannCosine1d })
    }

    /// Arbitrary non-negative, non-decreasing eigenvalues.
    pub fn abstract_modal(eigenvalues: Vec<f64>) -> Result<Self, SpectralError> {
        if eigenvalues.is_empty() {
            return Err(SpectralError::NoModes);
        }
        if eigenvalues.iter().any(|l| !l.is_finite()) {
            return Err(SpectralError::NonFinite("eigenvalues"));
        }
        if eigenvalues.iter().any(|&l| l < 0.0) {
            return Err(SpectralError::InvalidEigenvalues("negative eigenvalue".into()));
        }
        if let Some(w) = eigenvalues.windows(2).find(|w| w[1] < w[0]) {
            return Err(SpectralError::InvalidEigenvalues(format!(
                "not non-decreasing ({} followed by {})",
                w[0], w[1]
            )));
        }
        Ok(Self { eigenvalues, basis: BasisKind::AbstractModal })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn num_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn basis(&self) -> BasisKind {
        self.basis
    }

    pub fn has_spatial_evaluator(&self) -> bool {
        self.basis == BasisKind::NeumannCosine1d
    }

    /// Orthonormal eigenfunction `v_j(x)`.
    pub fn eigenfunction_value(&self, j: usize, x: f64) -> Result<f64, SpectralError> {
        if self.basis != BasisKind::NeumannCosine1d {
            return Err(SpectralError::Unsupported("eigenfunction evaluation"));
        }
        if j == 0 || j > self.num_modes() {
            return Err(SpectralError::ModeOutOfRange { j, num_modes: self.num_modes() });
        }
        if !(0.0..=PI).contains(&x) {
            return Err(SpectralError::OutsideDomain { x });
        }
        Ok(cosine_mode(j, x))
    }
}

/// `v_1 = 1/√π`, `v_j = √(2/π) cos((j-1)x)`.
pub(crate) fn cosine_mode(j: usize, x: f64) -> f64 {
    if j == 1 {
        1.0 / PI.sqrt()
    } else {
        (2.0 / PI).sqrt() * ((j - 1) as f64 * x).cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDataSource {
    ExplicitCoefficients,
    /// Projected from samples by the composite trapezoid rule, whose error is
    /// `O(h^quadrature_order)` for smooth data.
    SampledFunction { grid_points: usize, spacing: f64, quadrature_order: u32 },
}

/// Modal coefficients `φ_j = (φ, v_j)` of the initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    coefficients: Vec<f64>,
    source: InitialDataSource,
}

impl InitialData {
    pub fn from_coefficients(coefficients: Vec<f64>) -> Result<Self, SpectralError> {
        if coefficients.is_empty() {
            return Err(SpectralError::NoModes);
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(SpectralError::NonFinite("coefficients"));
        }
        Ok(Self { coefficients, source: InitialDataSource::ExplicitCoefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn source(&self) -> &InitialDataSource {
        &self.source
    }

    /// `φ_j`, zero beyond the stored list.
    pub fn coefficient(&self, j: usize) -> f64 {
        j.checked_sub(1).and_then(|i| self.coefficients.get(i)).copied().unwrap_or(0.0)
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            coefficients: self.coefficients.iter().map(|p| p * c).collect(),
            source: self.source.clone(),
        }
    }
}

/// Projects samples of `φ` on a uniform grid over `[0, π]` (endpoints
/// included) onto the first `num_modes` cosine modes.
pub fn project_initial_data(
    model: &SpectralModel,
    samples: &[f64],
    num_modes: usize,
) -> Result<InitialData, SpectralError> {
    if model.basis() != BasisKind::NeumannCosine1d {
        return Err(SpectralError::Unsupported("projection of sampled data"));
    }
    if num_modes == 0 {
        return Err(SpectralError::NoModes);
    }
    if num_modes > model.num_modes() {
        return Err(SpectralError::ModeOutOfRange { j: num_modes, num_modes: model.num_modes() });
    }
    let required = 2 * num_modes + 1;
    if samples.len() < required {
        return Err(SpectralError::InsufficientResolution {
            points: samples.len(),
            num_modes,
            required,
        });
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(SpectralError::NonFinite("samples"));
    }
    let n = samples.len() - 1;
    let h = PI / n as f64;
    let coefficients = (1..=num_modes)
        .map(|j| {
            let inner: f64 = samples
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                    w * s * cosine_mode(j, i as f64 * h)
                })
                .sum();
            inner * h
        })
        .collect();
    Ok(InitialData {
        coefficients,
        source: InitialDataSource::SampledFunction {
            grid_points: samples.len(),
            spacing: h,
            quadrature_order: 2,
        },
    })
}

/// Eigendata file contents: `{"eigenvalues": [...], "phi": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigendata {
    pub eigenvalues: Vec<f64>,
    pub phi: Vec<f64>,
}

impl Eigendata {
    pub fn into_parts(self) -> Result<(SpectralModel, InitialData), SpectralError> {
        if self.eigenvalues.len() != self.phi.len() {
            return Err(SpectralError::LengthMismatch {
                eigenvalues: self.eigenvalues.len(),
                phi: self.phi.len(),
            });
        }
        Ok((SpectralModel::abstract_modal(self.eigenvalues)?, InitialData::from_coefficients(self.phi)?))
    }
}

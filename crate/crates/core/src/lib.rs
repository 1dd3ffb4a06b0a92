//! Forward and inverse problems for time-fractional subdiffusion with an
//! unknown order `ρ ∈ (0, 1)`.
//!
//! The forward problem `∂_t^ρ u = Au` (Riemann-Liouville derivative) with
//! weighted initial data is solved by eigenfunction expansion; the order is
//! recovered from one projection of the solution onto the first eigenfunction.

pub mod forward;
pub mod fractional;
pub mod inverse;
pub mod special;
pub mod spectral;

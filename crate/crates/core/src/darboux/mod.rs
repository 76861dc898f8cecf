//! Darboux displacements: superpotentials, partner potentials and the
//! residual checks for the displacement criterion, the Riccati pair and
//! the intertwining relation.

mod residuals;
mod superpotential;

pub use residuals::{
    displaced_potential, displacement_residual, emit_csv, intertwining_residual, riccati_residual, Direction,
    DisplacementReport, ResidualReport, TestFunction,
};
pub use superpotential::{
    factorization_energy, kappa_for_energy, natural_sign, real_delta_for_energy, AlphaJet, Form, SampledSuperpotential,
    Seed, Superpotential, MOVABLE_GUARD, REALITY_TOL, STENCIL_STEP,
};

use thiserror::Error;

use crate::elliptic::EllipticError;
use crate::potential::SampleError;

#[derive(Debug, Error)]
pub enum DarbouxError {
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("factorization energy has imaginary part {imag:e}")]
    NonRealEnergy { imag: f64 },
    #[error("negative radicand {radicand:e} at x = {x}")]
    Consistency { x: f64, radicand: f64 },
    #[error("superpotential has imaginary part {imag:e} at x = {x}")]
    BranchBookkeeping { x: f64, imag: f64 },
    #[error("movable singularity (1 - α̃ = 0) at x = {x}")]
    MovableSingularity { x: f64 },
    #[error("singular transformation at x = {abscissae:?}")]
    Singular { abscissae: Vec<f64> },
    #[error("every grid point lies in the guard band")]
    DegenerateGrid,
    #[error("grid mismatch: {0}")]
    Shape(String),
    #[error("Riccati residual {residual:e} exceeds {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
    #[error("{0}")]
    Domain(String),
}

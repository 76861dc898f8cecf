//! Elliptic-function kernel: Jacobi and Weierstrass functions for real
//! lattices, plus the identity checkers used to validate them.

mod checks;
pub mod golden;
mod invariants;
mod jacobi;
mod weierstrass;

pub use checks::{addition_residual, lame_identity_residual, weierstrass_ode_residual, Branch};
pub use invariants::{classify_phase_portrait, EllipticInvariants, LameSystem, LatticeKind, PortraitReport};
pub use jacobi::{ellipe, ellipk, jacobi_sn, jacobi_sncndn};
pub use weierstrass::{laurent_coefficients, ReducedPoint, ScaledSigma, Weierstrass, DEFAULT_POLE_RADIUS};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EllipticError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("argument within pole-exclusion radius (distance {distance:e} to lattice)")]
    Pole { distance: f64 },
    #[error("degenerate argument pair: |℘(u) - ℘(v)| = {separation:e}")]
    DegeneratePair { separation: f64 },
    #[error("complex roots (g2³ - 27 g3² = {discriminant:e}) are not supported")]
    ComplexRoots { discriminant: f64 },
}

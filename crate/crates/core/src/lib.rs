//! Darboux displacements for Weierstrass and Lamé potentials.
//!
//! * [`elliptic`]: Weierstrass `℘`, `℘'`, `ζ`, `σ`, Jacobi `sn` and identity checks.
//! * [`darboux`]: superpotentials, partner potentials and residual verifiers.
//! * [`backlund`]: finite-difference Bäcklund chains and the defect constructions.
//! * [`spectral`]: Numerov integration, Hill discriminant, band edges and bound states.

pub mod backlund;
pub mod darboux;
pub mod elliptic;
pub mod potential;
pub mod spectral;

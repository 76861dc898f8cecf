use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EllipticError, LameSystem, Weierstrass};

/// Separation below which `℘(u) ≈ ℘(v)` makes the addition law degenerate.
const PAIR_SEPARATION_TOL: f64 = 1e-10;

/// Branch of the first-order Weierstrass equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Pole-bearing solutions `℘(x)`.
    Singular,
    /// Bounded solutions `℘(x + iτ)`.
    Regular,
}

/// `|(℘')² - (4℘³ - g2 ℘ - g3)|` at `z`.
pub fn weierstrass_ode_residual(w: &Weierstrass, z: Complex64) -> Result<f64, EllipticError> {
    let inv = w.invariants();
    let (p, dp) = w.wp_and_prime(z)?;
    let rhs = p * p * p * 4.0 - p * inv.g2 - inv.g3;
    Ok((dp * dp - rhs).norm())
}

/// Residual of the addition law
/// `ℰ(u+v) + φ(u) + φ(v) = ¼ [(φ'(u) - φ'(v)) / (φ(u) - φ(v))]²`
/// with `ℰ = ℘` and `φ = ℘` (singular) or `φ = ℘(· + iτ)` (regular).
pub fn addition_residual(w: &Weierstrass, u: f64, v: f64, branch: Branch) -> Result<f64, EllipticError> {
    let shift = match branch {
        Branch::Singular => Complex64::new(0.0, 0.0),
        Branch::Regular => w.omega_prime(),
    };
    let (pu, dpu) = w.wp_and_prime(Complex64::new(u, 0.0) + shift)?;
    let (pv, dpv) = w.wp_and_prime(Complex64::new(v, 0.0) + shift)?;
    let sum = w.wp(Complex64::new(u + v, 0.0))?;
    let den = pu - pv;
    if den.norm() < PAIR_SEPARATION_TOL {
        return Err(EllipticError::DegeneratePair { separation: den.norm() });
    }
    let q = (dpu - dpv) / den;
    Ok((sum + pu + pv - q * q * 0.25).norm())
}

/// `|m sn²(x|m) - ℘(x + iτ) - (m+1)/3|`.
pub fn lame_identity_residual(w: &Weierstrass, sys: &LameSystem, x: f64) -> Result<f64, EllipticError> {
    let lhs = sys.potential(x) + (sys.m + 1.0) / 3.0;
    let rhs = w.wp(Complex64::new(x, sys.tau()))? + (sys.m + 1.0) / 3.0;
    Ok((rhs - lhs).norm())
}

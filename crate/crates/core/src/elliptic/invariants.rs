//! Lattice data for the real-rectangular Weierstrass systems and the Lamé family.

use serde::Serialize;

use super::jacobi::{ellipk, jacobi_sncndn};
use super::EllipticError;

/// Relative tolerance used to decide root coincidences.
const ROOT_TIE_TOL: f64 = 1e-12;

/// Which degenerate limit (if any) the root configuration sits in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LatticeKind {
    /// Three distinct real roots, both periods finite.
    Rectangular,
    /// `e1 = e2`: real period infinite (one-soliton well).
    OneSoliton,
    /// `e2 = e3`: imaginary period infinite, the regular branch is constant.
    Trigonometric,
    /// `g2 = g3 = 0`: `℘(z) = 1/z²`.
    Rational,
}

/// Invariants, roots and half-periods of one Weierstrass system.
///
/// The half-periods are `ω` (real) and `ω' = iτ`. Either may be `+inf` in the
/// degenerate cases flagged by [`LatticeKind`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticInvariants {
    pub g2: f64,
    pub g3: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub omega: f64,
    pub tau: f64,
    /// `(e2 - e3) / (e1 - e3)`, the Jacobi parameter of the lattice.
    pub parameter: f64,
    pub kind: LatticeKind,
}

impl EllipticInvariants {
    /// Invariants of the Lamé system `V(x) = m sn²(x|m) - (m+1)/3`.
    pub fn from_modulus(m: f64) -> Result<Self, EllipticError> {
        if !(0.0..=1.0).contains(&m) {
            return Err(EllipticError::Domain(format!(
                "modulus parameter m = {m} outside [0, 1]"
            )));
        }
        let g2 = 4.0 * (m * m - m + 1.0) / 3.0;
        let g3 = 4.0 * (m - 2.0) * (2.0 * m - 1.0) * (m + 1.0) / 27.0;
        let e1 = (2.0 - m) / 3.0;
        let e2 = (2.0 * m - 1.0) / 3.0;
        let e3 = -(m + 1.0) / 3.0;
        let kind = if m == 1.0 {
            LatticeKind::OneSoliton
        } else if m == 0.0 {
            LatticeKind::Trigonometric
        } else {
            LatticeKind::Rectangular
        };
        Ok(Self {
            g2,
            g3,
            e1,
            e2,
            e3,
            omega: ellipk(m),
            tau: ellipk(1.0 - m),
            parameter: m,
            kind,
        })
    }

    /// Invariants from `(g2, g3)`; only the all-real-roots case is supported.
    pub fn from_g2_g3(g2: f64, g3: f64) -> Result<Self, EllipticError> {
        let disc = g2 * g2 * g2 - 27.0 * g3 * g3;
        let scale = (g2 * g2 * g2).abs().max(27.0 * g3 * g3);
        if disc < -1e-14 * scale {
            return Err(EllipticError::ComplexRoots { discriminant: disc });
        }
        if g2 == 0.0 && g3 == 0.0 {
            return Ok(Self {
                g2,
                g3,
                e1: 0.0,
                e2: 0.0,
                e3: 0.0,
                omega: f64::INFINITY,
                tau: f64::INFINITY,
                parameter: f64::NAN,
                kind: LatticeKind::Rational,
            });
        }

        // Trigonometric solution of the depressed cubic t³ - (g2/4) t - g3/4 = 0.
        let r = (g2 / 3.0).sqrt();
        let arg = if r > 0.0 {
            (g3 / (r * r * r)).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        let theta = arg.acos() / 3.0;
        let two_pi_3 = 2.0 * std::f64::consts::PI / 3.0;
        let mut roots = [
            r * theta.cos(),
            r * (theta - two_pi_3).cos(),
            r * (theta + two_pi_3).cos(),
        ];
        for root in roots.iter_mut() {
            *root = polish_root(*root, g2, g3);
        }
        roots.sort_by(|a, b| b.total_cmp(a));
        let [mut e1, _, mut e3] = roots;
        // enforce the zero-sum constraint on the middle root
        let mut e2 = -(e1 + e3);
        let spread = e1 - e3;
        let tie = ROOT_TIE_TOL * spread.abs().max(1.0);
        let kind = if (e1 - e2).abs() <= tie {
            e2 = e1;
            e3 = -2.0 * e1;
            LatticeKind::OneSoliton
        } else if (e2 - e3).abs() <= tie {
            e2 = e3;
            e1 = -2.0 * e3;
            LatticeKind::Trigonometric
        } else {
            LatticeKind::Rectangular
        };
        let d = e1 - e3;
        let parameter = ((e2 - e3) / d).clamp(0.0, 1.0);
        let s = d.sqrt();
        let (omega, tau) = match kind {
            LatticeKind::OneSoliton => (f64::INFINITY, ellipk(0.0) / s),
            LatticeKind::Trigonometric => (ellipk(0.0) / s, f64::INFINITY),
            _ => (ellipk(parameter) / s, ellipk(1.0 - parameter) / s),
        };
        Ok(Self {
            g2,
            g3,
            e1,
            e2,
            e3,
            omega,
            tau,
            parameter,
            kind,
        })
    }

    /// `4t³ - g2 t - g3`.
    pub fn cubic(&self, t: f64) -> f64 {
        4.0 * t * t * t - self.g2 * t - self.g3
    }

    pub fn discriminant(&self) -> f64 {
        self.g2 * self.g2 * self.g2 - 27.0 * self.g3 * self.g3
    }

    /// True when the real period is infinite (one-soliton limit).
    pub fn is_one_soliton(&self) -> bool {
        self.kind == LatticeKind::OneSoliton
    }

    /// Real period `T = 2ω` of the regular branch.
    pub fn real_period(&self) -> f64 {
        2.0 * self.omega
    }

    pub fn phase_portrait(&self) -> PortraitReport {
        PortraitReport {
            regular: (self.e3, self.e2),
            singular_from: self.e1,
            infinite_period: self.kind == LatticeKind::OneSoliton,
            constant_regular: matches!(self.kind, LatticeKind::Trigonometric | LatticeKind::Rational),
        }
    }
}

fn polish_root(mut t: f64, g2: f64, g3: f64) -> f64 {
    for _ in 0..3 {
        let f = 4.0 * t * t * t - g2 * t - g3;
        let df = 12.0 * t * t - g2;
        if df == 0.0 {
            break;
        }
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        t -= step;
    }
    t
}

/// Permitted intervals of the phase portrait `(φ')² = 4φ³ - g2 φ - g3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortraitReport {
    /// Bounded oscillation interval `[e3, e2]`.
    pub regular: (f64, f64),
    /// Lower end of the singular interval `[e1, ∞)`.
    pub singular_from: f64,
    /// `e1 = e2`: the oscillation period in `[R]` diverges.
    pub infinite_period: bool,
    /// `e2 = e3`: the regular family collapses to a constant.
    pub constant_regular: bool,
}

/// Classifies the phase portrait of the first-order Weierstrass equation.
pub fn classify_phase_portrait(g2: f64, g3: f64) -> Result<PortraitReport, EllipticError> {
    Ok(EllipticInvariants::from_g2_g3(g2, g3)?.phase_portrait())
}

/// The `n = 1` Lamé system at parameter `m`, with its band edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LameSystem {
    pub m: f64,
    pub inv: EllipticInvariants,
    /// Bottom of the lowest band, `(m-2)/6`.
    pub e0: f64,
    /// Top of the lowest band, `(1-2m)/6`.
    pub e1: f64,
    /// Bottom of the upper band, `(m+1)/6`.
    pub e1p: f64,
}

impl LameSystem {
    pub fn new(m: f64) -> Result<Self, EllipticError> {
        let inv = EllipticInvariants::from_modulus(m)?;
        Ok(Self {
            m,
            inv,
            e0: (m - 2.0) / 6.0,
            e1: (1.0 - 2.0 * m) / 6.0,
            e1p: (m + 1.0) / 6.0,
        })
    }

    pub fn omega(&self) -> f64 {
        self.inv.omega
    }

    pub fn tau(&self) -> f64 {
        self.inv.tau
    }

    /// Real period `2ω`; infinite for `m = 1`.
    pub fn period(&self) -> f64 {
        self.inv.real_period()
    }

    /// `V(x) = m sn²(x|m) - (m+1)/3`.
    pub fn potential(&self, x: f64) -> f64 {
        let sn = jacobi_sncndn(x, self.m).0;
        self.m * sn * sn - (self.m + 1.0) / 3.0
    }

    /// `V'(x) = 2m sn cn dn`.
    pub fn potential_derivative(&self, x: f64) -> f64 {
        let (sn, cn, dn) = jacobi_sncndn(x, self.m);
        2.0 * self.m * sn * cn * dn
    }

    /// True for energies strictly inside a spectral gap of the periodic operator.
    pub fn in_gap(&self, energy: f64) -> bool {
        energy < self.e0 || (energy > self.e1 && energy < self.e1p)
    }
}

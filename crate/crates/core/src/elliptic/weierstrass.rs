//! Weierstrass `℘`, `℘'`, `ζ` and `σ` for real-rectangular lattices.
//!
//! Arguments are reduced into the centred period cell, where the Laurent
//! expansions about the origin are summed. Points too far out for the series
//! radius are halved and brought back with the duplication formulas. The
//! degenerate lattices (`e1 = e2`, `e2 = e3`, `g2 = g3 = 0`) use their
//! hyperbolic, trigonometric and rational closed forms.

use num_complex::Complex64;

use super::invariants::{EllipticInvariants, LatticeKind};
use super::EllipticError;

/// Default pole-exclusion radius.
pub const DEFAULT_POLE_RADIUS: f64 = 1e-6;

const MAX_TERMS: usize = 64;
/// Series are summed only for `|z| <= SERIES_FRACTION * R`, `R` the radius of
/// convergence (distance to the nearest non-zero lattice point).
const SERIES_FRACTION: f64 = 0.5;

/// `σ(z) = exp(log_scale) * value`, `σ'(z) = exp(log_scale) * derivative`.
///
/// The split keeps the quasi-periodic growth of `σ` out of the mantissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledSigma {
    pub log_scale: Complex64,
    pub value: Complex64,
    pub derivative: Complex64,
}

impl ScaledSigma {
    pub fn sigma(&self) -> Complex64 {
        self.log_scale.exp() * self.value
    }

    pub fn sigma_prime(&self) -> Complex64 {
        self.log_scale.exp() * self.derivative
    }
}

/// An argument split into its representative in the centred period cell
/// and the lattice translation `2 p ω + 2 q ω'` that was removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPoint {
    pub reduced: Complex64,
    pub p: i64,
    pub q: i64,
}

#[derive(Debug, Clone, Copy)]
struct CellValues {
    wp: Complex64,
    wp_prime: Complex64,
    zeta: Complex64,
    /// `log(σ(z) / z)` when evaluated directly, `log σ(z)` after duplication.
    log_sigma: Complex64,
    /// `σ'(z) exp(-log_sigma)`
    sigma_prime_ratio: Complex64,
    /// whether `log_sigma` still excludes the factor `z`
    excludes_z: bool,
}

/// Evaluator for one Weierstrass system.
#[derive(Debug, Clone)]
pub struct Weierstrass {
    inv: EllipticInvariants,
    coeffs: Vec<f64>,
    /// `η = ζ(ω)`
    eta: f64,
    /// `η' = ζ(iτ) = i * eta_prime_im`
    eta_prime_im: f64,
    pole_radius: f64,
    series_radius: f64,
}

impl Weierstrass {
    pub fn new(inv: EllipticInvariants) -> Self {
        let coeffs = laurent_coefficients(inv.g2, inv.g3, MAX_TERMS);
        let series_radius = 2.0 * inv.omega.min(inv.tau);
        let mut w = Self {
            inv,
            coeffs,
            eta: 0.0,
            eta_prime_im: 0.0,
            pole_radius: DEFAULT_POLE_RADIUS,
            series_radius,
        };
        match inv.kind {
            LatticeKind::Rectangular => {
                let at_omega = w.eval_cell(Complex64::new(inv.omega, 0.0));
                w.eta = at_omega.zeta.re;
                // Legendre: η ω' - η' ω = iπ/2
                w.eta_prime_im = (w.eta * inv.tau - std::f64::consts::FRAC_PI_2) / inv.omega;
            }
            LatticeKind::OneSoliton => {
                w.eta = f64::INFINITY;
                // ζ(iτ) with ζ(z) = -e1 z + s coth(s z), s τ = π/2
                w.eta_prime_im = -inv.e1 * inv.tau;
            }
            LatticeKind::Trigonometric => {
                // ζ(ω) with ζ(z) = c z + s cot(s z), s ω = π/2, c = -e3
                w.eta = -inv.e3 * inv.omega;
                w.eta_prime_im = f64::INFINITY;
            }
            LatticeKind::Rational => {
                w.eta = f64::INFINITY;
                w.eta_prime_im = f64::INFINITY;
            }
        }
        w
    }

    pub fn from_modulus(m: f64) -> Result<Self, EllipticError> {
        Ok(Self::new(EllipticInvariants::from_modulus(m)?))
    }

    pub fn with_pole_radius(mut self, radius: f64) -> Self {
        self.pole_radius = radius;
        self
    }

    pub fn invariants(&self) -> &EllipticInvariants {
        &self.inv
    }

    pub fn pole_radius(&self) -> f64 {
        self.pole_radius
    }

    /// `η = ζ(ω)`.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `η' = ζ(iτ)`, purely imaginary.
    pub fn eta_prime(&self) -> Complex64 {
        Complex64::new(0.0, self.eta_prime_im)
    }

    /// Half-period `ω' = iτ`.
    pub fn omega_prime(&self) -> Complex64 {
        Complex64::new(0.0, self.inv.tau)
    }

    /// Splits `z` into its centred-cell representative and lattice shift.
    pub fn reduce(&self, z: Complex64) -> ReducedPoint {
        let p = if self.inv.omega.is_finite() {
            (z.re / (2.0 * self.inv.omega)).round()
        } else {
            0.0
        };
        let q = if self.inv.tau.is_finite() {
            (z.im / (2.0 * self.inv.tau)).round()
        } else {
            0.0
        };
        let reduced = Complex64::new(
            z.re - 2.0 * p * self.inv.omega_or_zero(),
            z.im - 2.0 * q * self.inv.tau_or_zero(),
        );
        ReducedPoint {
            reduced,
            p: p as i64,
            q: q as i64,
        }
    }

    /// Distance from `z` to the nearest lattice point.
    pub fn lattice_distance(&self, z: Complex64) -> f64 {
        match self.inv.kind {
            LatticeKind::Rectangular => self.reduce(z).reduced.norm(),
            LatticeKind::OneSoliton => {
                let period = 2.0 * self.inv.tau;
                let q = (z.im / period).round();
                Complex64::new(z.re, z.im - q * period).norm()
            }
            LatticeKind::Trigonometric => {
                let period = 2.0 * self.inv.omega;
                let p = (z.re / period).round();
                Complex64::new(z.re - p * period, z.im).norm()
            }
            LatticeKind::Rational => z.norm(),
        }
    }

    fn check_pole(&self, z: Complex64) -> Result<(), EllipticError> {
        let distance = self.lattice_distance(z);
        if distance < self.pole_radius {
            Err(EllipticError::Pole { distance })
        } else {
            Ok(())
        }
    }

    /// `℘(z)`.
    pub fn wp(&self, z: Complex64) -> Result<Complex64, EllipticError> {
        Ok(self.wp_and_prime(z)?.0)
    }

    /// `℘'(z)`.
    pub fn wp_prime(&self, z: Complex64) -> Result<Complex64, EllipticError> {
        Ok(self.wp_and_prime(z)?.1)
    }

    /// `(℘(z), ℘'(z))` in one pass.
    pub fn wp_and_prime(&self, z: Complex64) -> Result<(Complex64, Complex64), EllipticError> {
        self.check_pole(z)?;
        match self.inv.kind {
            LatticeKind::Rectangular => {
                let cell = self.eval_cell(self.reduce(z).reduced);
                Ok((cell.wp, cell.wp_prime))
            }
            _ => Ok(self.degenerate_wp(z)),
        }
    }

    /// Weierstrass `ζ(z)`.
    pub fn zeta(&self, z: Complex64) -> Result<Complex64, EllipticError> {
        self.check_pole(z)?;
        match self.inv.kind {
            LatticeKind::Rectangular => {
                let r = self.reduce(z);
                let cell = self.eval_cell(r.reduced);
                Ok(cell.zeta + self.period_shift(r.p, r.q) * 2.0)
            }
            _ => Ok(self.degenerate_zeta(z)),
        }
    }

    /// Weierstrass `σ(z)` (entire, no pole check).
    pub fn sigma(&self, z: Complex64) -> Complex64 {
        self.sigma_scaled(z).sigma()
    }

    /// `σ(z)` and `σ'(z)` with the exponential growth factored out.
    pub fn sigma_scaled(&self, z: Complex64) -> ScaledSigma {
        match self.inv.kind {
            LatticeKind::Rectangular => {
                let r = self.reduce(z);
                let cell = self.eval_cell(r.reduced);
                let (mut value, mut derivative) = if cell.excludes_z {
                    // σ = Z e^S, σ' = e^S (Z ζ)
                    (r.reduced, cell.sigma_prime_ratio)
                } else {
                    (Complex64::new(1.0, 0.0), cell.sigma_prime_ratio)
                };
                let mut log_scale = cell.log_sigma;
                if r.p != 0 || r.q != 0 {
                    // σ(Z + 2pω + 2qω') = (-1)^(p+q+pq) exp[(2pη + 2qη')(Z + pω + qω')] σ(Z)
                    let shift = self.period_shift(r.p, r.q) * 2.0;
                    let half = Complex64::new(r.p as f64 * self.inv.omega, r.q as f64 * self.inv.tau);
                    log_scale += shift * (r.reduced + half);
                    if (r.p + r.q + r.p * r.q).rem_euclid(2) == 1 {
                        value = -value;
                        derivative = -derivative;
                    }
                    derivative += shift * value;
                }
                ScaledSigma {
                    log_scale,
                    value,
                    derivative,
                }
            }
            _ => self.degenerate_sigma(z),
        }
    }

    /// `p η + q η'`
    fn period_shift(&self, p: i64, q: i64) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        if p != 0 {
            s.re += p as f64 * self.eta;
        }
        if q != 0 {
            s.im += q as f64 * self.eta_prime_im;
        }
        s
    }

    fn eval_cell(&self, z: Complex64) -> CellValues {
        let limit = SERIES_FRACTION * self.series_radius;
        let mut halvings = 0;
        let mut w = z;
        while w.norm() > limit && halvings < 60 {
            w *= 0.5;
            halvings += 1;
        }
        let mut v = self.series(w);
        if halvings == 0 {
            return v;
        }
        // log σ(w) including the factor w
        v.log_sigma += w.ln();
        v.sigma_prime_ratio /= w;
        v.excludes_z = false;
        let half_g2 = 0.5 * self.inv.g2;
        for _ in 0..halvings {
            let p = v.wp;
            let dp = v.wp_prime;
            let ddp = p * p * 6.0 - half_g2;
            let r = ddp / dp;
            let wp2 = r * r * 0.25 - p * 2.0;
            let dp2 = -dp + p * r * 3.0 - r * r * r * 0.25;
            let zeta2 = v.zeta * 2.0 + r * 0.5;
            // σ(2w) = -℘'(w) σ(w)^4
            let log_sigma2 = (-dp).ln() + v.log_sigma * 4.0;
            v = CellValues {
                wp: wp2,
                wp_prime: dp2,
                zeta: zeta2,
                log_sigma: log_sigma2,
                sigma_prime_ratio: zeta2,
                excludes_z: false,
            };
        }
        v
    }

    /// Laurent sums about the origin, valid for `|z|` well inside the series radius.
    fn series(&self, z: Complex64) -> CellValues {
        let z2 = z * z;
        let zinv = z.inv();
        let mut wp = zinv * zinv;
        let mut wp_prime = -zinv * zinv * zinv * 2.0;
        let mut zeta = zinv;
        let mut s = Complex64::new(0.0, 0.0);
        let mut zz = Complex64::new(1.0, 0.0);
        // power z^(2k-2), starting at k = 2 with z^2
        let mut pow = z2;
        // g3 = 0 zeroes every other coefficient, so test two successive terms
        let mut prev_small = false;
        for (idx, &c) in self.coeffs.iter().enumerate() {
            let k = (idx + 2) as f64;
            let term = pow * c;
            wp += term;
            wp_prime += term * zinv * (2.0 * k - 2.0);
            let t2 = term * z2;
            zeta -= term * z / (2.0 * k - 1.0);
            s -= t2 / (2.0 * k * (2.0 * k - 1.0));
            zz -= t2 / (2.0 * k - 1.0);
            let small = t2.norm() <= 1e-18;
            if idx > 2 && small && prev_small {
                break;
            }
            prev_small = small;
            pow *= z2;
        }
        CellValues {
            wp,
            wp_prime,
            zeta,
            log_sigma: s,
            sigma_prime_ratio: zz,
            excludes_z: true,
        }
    }

    fn degenerate_wp(&self, z: Complex64) -> (Complex64, Complex64) {
        let inv = &self.inv;
        match inv.kind {
            LatticeKind::OneSoliton => {
                let d = inv.e1 - inv.e3;
                let s = d.sqrt();
                let w = z * s;
                let csch = stable_csch(w);
                let coth = stable_coth(w);
                let wp = csch * csch * d + inv.e1;
                let wpp = -coth * csch * csch * (2.0 * d * s);
                (wp, wpp)
            }
            LatticeKind::Trigonometric => {
                let d = inv.e1 - inv.e3;
                let s = d.sqrt();
                let w = z * s;
                let csc = stable_csc(w);
                let cot = stable_cot(w);
                let wp = csc * csc * d + inv.e3;
                let wpp = -cot * csc * csc * (2.0 * d * s);
                (wp, wpp)
            }
            _ => {
                let zi = z.inv();
                (zi * zi, -zi * zi * zi * 2.0)
            }
        }
    }

    fn degenerate_zeta(&self, z: Complex64) -> Complex64 {
        let inv = &self.inv;
        match inv.kind {
            LatticeKind::OneSoliton => {
                let s = (inv.e1 - inv.e3).sqrt();
                -z * inv.e1 + stable_coth(z * s) * s
            }
            LatticeKind::Trigonometric => {
                let s = (inv.e1 - inv.e3).sqrt();
                -z * inv.e3 + stable_cot(z * s) * s
            }
            _ => z.inv(),
        }
    }

    fn degenerate_sigma(&self, z: Complex64) -> ScaledSigma {
        let inv = &self.inv;
        match inv.kind {
            LatticeKind::OneSoliton | LatticeKind::Trigonometric => {
                let s = (inv.e1 - inv.e3).sqrt();
                let hyperbolic = inv.kind == LatticeKind::OneSoliton;
                // σ = sinh(sz)/s e^{-e1 z²/2}   or   sin(sz)/s e^{-e3 z²/2}
                let quad = if hyperbolic { inv.e1 } else { inv.e3 };
                // rotate the trigonometric case onto the hyperbolic one: sin(w) = -i sinh(iw)
                let w = if hyperbolic { z * s } else { z * s * Complex64::i() };
                let (log_mag, unit_sinh, unit_cosh) = split_sinh(w);
                let mut value = unit_sinh / s;
                let mut deriv = unit_cosh;
                if !hyperbolic {
                    value *= -Complex64::i();
                }
                let log_scale = log_mag - z * z * (0.5 * quad);
                deriv -= value * z * quad;
                ScaledSigma {
                    log_scale,
                    value,
                    derivative: deriv,
                }
            }
            _ => ScaledSigma {
                log_scale: Complex64::new(0.0, 0.0),
                value: z,
                derivative: Complex64::new(1.0, 0.0),
            },
        }
    }
}

trait HalfPeriods {
    fn omega_or_zero(&self) -> f64;
    fn tau_or_zero(&self) -> f64;
}

impl HalfPeriods for EllipticInvariants {
    fn omega_or_zero(&self) -> f64 {
        if self.omega.is_finite() {
            self.omega
        } else {
            0.0
        }
    }
    fn tau_or_zero(&self) -> f64 {
        if self.tau.is_finite() {
            self.tau
        } else {
            0.0
        }
    }
}

/// Laurent coefficients `c_k` (`k = 2, 3, ...`) of `℘(z) = z⁻² + Σ c_k z^(2k-2)`.
pub fn laurent_coefficients(g2: f64, g3: f64, count: usize) -> Vec<f64> {
    let mut c = vec![0.0; count + 2];
    c[2] = g2 / 20.0;
    if count > 1 {
        c[3] = g3 / 28.0;
    }
    for k in 4..count + 2 {
        let s: f64 = (2..=k - 2).map(|j| c[j] * c[k - j]).sum();
        c[k] = 3.0 * s / ((2 * k + 1) as f64 * (k - 3) as f64);
    }
    c.drain(..2);
    c
}

/// `sinh(w) = exp(L) * u_s`, `cosh(w) = exp(L) * u_c`, with `L = |Re w|`-sized.
fn split_sinh(w: Complex64) -> (Complex64, Complex64, Complex64) {
    if w.re.abs() < 20.0 {
        return (Complex64::new(0.0, 0.0), w.sinh(), w.cosh());
    }
    let sign = w.re.signum();
    // sinh w = sign * e^{sign w} (1 - e^{-2 sign w}) / 2
    let aw = w * sign;
    let e = (-aw * 2.0).exp();
    let half = Complex64::new(0.5, 0.0);
    let unit_s = (Complex64::new(1.0, 0.0) - e) * half * sign;
    let unit_c = (Complex64::new(1.0, 0.0) + e) * half;
    (aw, unit_s, unit_c)
}

fn stable_coth(w: Complex64) -> Complex64 {
    if w.re.abs() < 20.0 {
        return w.cosh() / w.sinh();
    }
    let sign = w.re.signum();
    let e = (-w * sign * 2.0).exp();
    (Complex64::new(1.0, 0.0) + e) / (Complex64::new(1.0, 0.0) - e) * sign
}

fn stable_csch(w: Complex64) -> Complex64 {
    if w.re.abs() < 20.0 {
        return w.sinh().inv();
    }
    let sign = w.re.signum();
    let aw = w * sign;
    (-aw).exp() * 2.0 / (Complex64::new(1.0, 0.0) - (-aw * 2.0).exp()) * sign
}

fn stable_cot(w: Complex64) -> Complex64 {
    // cot(w) = i coth(i w)
    stable_coth(w * Complex64::i()) * Complex64::i()
}

fn stable_csc(w: Complex64) -> Complex64 {
    // csc(w) = i csch(i w)
    stable_csch(w * Complex64::i()) * Complex64::i()
}

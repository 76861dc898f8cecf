use num_complex::Complex64;
use serde::Serialize;

use super::DarbouxError;
use crate::elliptic::{LameSystem, Weierstrass};

/// Imaginary parts below this (relative to `max(1, |α|)`) are rounding.
pub const REALITY_TOL: f64 = 1e-8;
/// `|1 - α̃|` below this makes the general solution singular.
pub const MOVABLE_GUARD: f64 = 1e-10;
/// Step of the five-point stencil used when no analytic derivative applies.
pub const STENCIL_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Form {
    Sqrt,
    Zeta,
    General,
}

/// `α`, `α'`, `α''` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaJet {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

/// `ψ` with `α = -ψ'/ψ`, up to a common factor `exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seed {
    pub log_scale: f64,
    pub psi: Complex64,
    pub dpsi: Complex64,
}

impl Seed {
    pub fn alpha(&self) -> Complex64 {
        -self.dpsi / self.psi
    }
}

/// `ε(δ) = -℘(δ)/2` on the singular branch.
pub fn factorization_energy(w: &Weierstrass, delta: Complex64) -> Result<f64, DarbouxError> {
    let e = -0.5 * w.wp(delta)?;
    if e.im.abs() > 1e-10 {
        return Err(DarbouxError::NonRealEnergy { imag: e.im });
    }
    Ok(e.re)
}

/// Sign of `α(x, δ)` away from `δ = ω`: `+1` for `δ mod 2ω` in `(0, ω)`,
/// `-1` in `(ω, 2ω)`. Near `ω` the radicand has zeros and the
/// sign varies with `x`; use [`Superpotential::sqrt_auto`] there.
pub fn natural_sign(sys: &LameSystem, delta: f64) -> f64 {
    let t = sys.period();
    let negative = if t.is_finite() {
        delta.rem_euclid(t) > 0.5 * t
    } else {
        delta < 0.0
    };
    if negative {
        -1.0
    } else {
        1.0
    }
}

/// Real `δ ∈ (0, ω]` with `ε(δ) = eps`, for `eps ≤ E0`.
pub fn real_delta_for_energy(sys: &LameSystem, eps: f64) -> Result<f64, DarbouxError> {
    if eps > sys.e0 + 1e-14 {
        return Err(DarbouxError::Domain(format!(
            "energy {eps} above E0 = {} has no real displacement",
            sys.e0
        )));
    }
    let w = Weierstrass::new(sys.inv);
    let target = -2.0 * eps;
    let wp = |d: f64| w.wp(Complex64::new(d, 0.0)).map(|z| z.re);
    // ℘ decreases from +∞ at 0 to e1 at ω; at m = 1 the half-period is infinite
    let mut hi = if sys.omega().is_finite() {
        sys.omega()
    } else {
        let mut h = 1.0;
        while wp(h)? > target {
            h *= 2.0;
        }
        h
    };
    if wp(hi)? >= target {
        return Ok(hi);
    }
    let mut lo = hi;
    while wp(lo)? < target {
        lo *= 0.5;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if wp(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `κ ∈ (0, ω)` with `ε(iτ + κ) = eps`, for `E1 < eps < E1'`.
pub fn kappa_for_energy(sys: &LameSystem, eps: f64) -> Result<f64, DarbouxError> {
    if !(eps > sys.e1 && eps < sys.e1p) {
        return Err(DarbouxError::Domain(format!(
            "energy {eps} outside the open gap ({}, {})",
            sys.e1, sys.e1p
        )));
    }
    if !sys.omega().is_finite() {
        return Err(DarbouxError::Domain(
            "complex displacements need a finite real period".into(),
        ));
    }
    // ℘(iτ + κ) = V(κ) rises from e3 to e2 on (0, ω)
    let target = -2.0 * eps;
    let (mut lo, mut hi) = (0.0, sys.omega());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sys.potential(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 * sys.omega() {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One solution `α` of `-α' + α² = 2(V - ε)` for a Lamé potential.
#[derive(Debug, Clone)]
pub struct Superpotential {
    pub delta: Complex64,
    pub epsilon: f64,
    pub gamma: Option<Complex64>,
    pub form: Form,
    pub sign: f64,
    pub sys: LameSystem,
    w: Weierstrass,
    /// additive constant fixed at `ω/3` (ζ form)
    constant: Complex64,
    zeta_delta: Complex64,
    /// `log u_{±δ}(0)` (general form)
    norm_plus: Complex64,
    norm_minus: Complex64,
}

impl Superpotential {
    fn base(sys: &LameSystem, delta: Complex64, form: Form) -> Result<Self, DarbouxError> {
        let w = Weierstrass::new(sys.inv);
        let epsilon = factorization_energy(&w, delta)?;
        let zeta_delta = w.zeta(delta)?;
        Ok(Self {
            delta,
            epsilon,
            gamma: None,
            form,
            sign: 1.0,
            sys: *sys,
            w,
            constant: Complex64::new(0.0, 0.0),
            zeta_delta,
            norm_plus: Complex64::new(0.0, 0.0),
            norm_minus: Complex64::new(0.0, 0.0),
        })
    }

    /// `α = sign·√(V(x) + V(x+δ) - 2ε)`, real `δ`.
    pub fn sqrt(sys: &LameSystem, delta: f64, sign: f64) -> Result<Self, DarbouxError> {
        let mut sp = Self::base(sys, Complex64::new(delta, 0.0), Form::Sqrt)?;
        sp.sign = if sign < 0.0 { -1.0 } else { 1.0 };
        Ok(sp)
    }

    /// Square-root form with the sign of `√` taken pointwise from
    /// `α = (V'(x) + V'(x+δ)) / (2 (V(x+δ) - V(x)))`.
    pub fn sqrt_auto(sys: &LameSystem, delta: f64) -> Result<Self, DarbouxError> {
        let mut sp = Self::base(sys, Complex64::new(delta, 0.0), Form::Sqrt)?;
        sp.sign = 0.0;
        Ok(sp)
    }

    fn sign_at(&self, x: f64) -> f64 {
        if self.sign != 0.0 {
            return self.sign;
        }
        let d = self.delta.re;
        let mut t = x;
        for _ in 0..8 {
            let den = self.sys.potential(t + d) - self.sys.potential(t);
            let num = self.sys.potential_derivative(t) + self.sys.potential_derivative(t + d);
            if den.abs() > 1e-8 {
                return if num * den < 0.0 { -1.0 } else { 1.0 };
            }
            t += 1e-3;
        }
        1.0
    }

    /// `α = ζ(x̂) - ζ(x̂+δ) + ζ(δ)` with `x̂ = x + iτ`.
    pub fn zeta(sys: &LameSystem, delta: Complex64) -> Result<Self, DarbouxError> {
        let mut sp = Self::base(sys, delta, Form::Zeta)?;
        let omega = sys.omega();
        let xref = if omega.is_finite() { omega / 3.0 } else { 0.3 };
        let raw = sp.zeta_raw(xref)?;
        let target = sys.potential(xref) + sp.w.wp(sp.hat(xref) + delta)? - 2.0 * sp.epsilon;
        let root = target.sqrt();
        let fixed = if (root - raw).norm() <= (-root - raw).norm() {
            root
        } else {
            -root
        };
        sp.constant = fixed - raw;
        sp.sign = if fixed.re < 0.0 { -1.0 } else { 1.0 };
        Ok(sp)
    }

    /// `α = [α(x,δ) - α(x,-δ) α̃] / (1 - α̃)` with
    /// `α̃ = Γ u_{-δ}/u_δ`, both Bloch factors normalized to 1 at `x = 0`.
    pub fn general(sys: &LameSystem, delta: Complex64, gamma: f64) -> Result<Self, DarbouxError> {
        let mut sp = Self::base(sys, delta, Form::General)?;
        sp.gamma = Some(Complex64::new(gamma, 0.0));
        let (lp, up, _) = sp.log_bloch(0.0, 1.0)?;
        let (lm, um, _) = sp.log_bloch(0.0, -1.0)?;
        sp.norm_plus = lp + up.ln();
        sp.norm_minus = lm + um.ln();
        Ok(sp)
    }

    pub fn weierstrass(&self) -> &Weierstrass {
        &self.w
    }

    /// Constant added to the raw ζ expression.
    pub fn constant_correction(&self) -> Complex64 {
        self.constant
    }

    fn hat(&self, x: f64) -> Complex64 {
        Complex64::new(x, self.sys.tau())
    }

    fn zeta_raw(&self, x: f64) -> Result<Complex64, DarbouxError> {
        let xh = self.hat(x);
        Ok(self.w.zeta(xh)? - self.w.zeta(xh + self.delta)? + self.zeta_delta)
    }

    /// `(log-magnitude part, u, u')` of the unnormalized Bloch factor
    /// `u_{sδ} = σ(x̂+sδ)/σ(x̂) e^{-s ζ(δ) x}`, as `exp(L) (u, u')`.
    fn log_bloch(&self, x: f64, s: f64) -> Result<(Complex64, Complex64, Complex64), DarbouxError> {
        let xh = self.hat(x);
        let top = self.w.sigma_scaled(xh + self.delta * s);
        let bottom = self.w.sigma_scaled(xh);
        let zd = self.zeta_delta * s;
        let u = top.value / bottom.value;
        let du = top.derivative / bottom.value - u * (bottom.derivative / bottom.value) - zd * u;
        Ok((top.log_scale - bottom.log_scale - zd * x, u, du))
    }

    /// Normalized Bloch factors `(u_δ, u_{-δ})` at `x` (general form).
    pub fn bloch_factors(&self, x: f64) -> Result<(Seed, Seed), DarbouxError> {
        if self.form != Form::General {
            return Err(DarbouxError::Domain("Bloch factors need the general form".into()));
        }
        let mut out = [None, None];
        for (slot, (s, norm)) in out.iter_mut().zip([(1.0, self.norm_plus), (-1.0, self.norm_minus)]) {
            let (l, u, du) = self.log_bloch(x, s)?;
            let l = l - norm;
            let phase = Complex64::new(0.0, l.im).exp();
            *slot = Some(Seed {
                log_scale: l.re,
                psi: u * phase,
                dpsi: du * phase,
            });
        }
        Ok((out[0].unwrap(), out[1].unwrap()))
    }

    /// `ψ = u_δ - Γ u_{-δ}` (general) or `ψ = u_δ` (ζ form), rescaled.
    pub fn seed(&self, x: f64) -> Result<Seed, DarbouxError> {
        if self.form == Form::Sqrt {
            return Err(DarbouxError::Domain(
                "the square-root form has no seed representation".into(),
            ));
        }
        let (lp, up, dup) = self.log_bloch(x, 1.0)?;
        let lp = lp - self.norm_plus;
        let gamma = self.gamma.unwrap_or_default();
        if gamma.norm() == 0.0 {
            let phase = Complex64::new(0.0, lp.im).exp();
            return Ok(Seed {
                log_scale: lp.re,
                psi: up * phase,
                dpsi: dup * phase,
            });
        }
        let (lm, um, dum) = self.log_bloch(x, -1.0)?;
        let lm = lm - self.norm_minus;
        let top = lp.re.max(lm.re);
        let fp = (lp - top).exp();
        let fm = (lm - top).exp() * gamma;
        let a = up * fp;
        let b = um * fm;
        let psi = a - b;
        if psi.norm() < MOVABLE_GUARD * (a.norm() + b.norm()) {
            return Err(DarbouxError::MovableSingularity { x });
        }
        Ok(Seed {
            log_scale: top,
            psi,
            dpsi: dup * fp - dum * fm,
        })
    }

    /// `α̃(x) = Γ u_{-δ}/u_δ` (zero outside the general form).
    pub fn tilde_alpha(&self, x: f64) -> Result<Complex64, DarbouxError> {
        let Some(gamma) = self.gamma else {
            return Ok(Complex64::new(0.0, 0.0));
        };
        let (lp, up, _) = self.log_bloch(x, 1.0)?;
        let (lm, um, _) = self.log_bloch(x, -1.0)?;
        Ok(gamma * (lm - self.norm_minus - lp + self.norm_plus).exp() * um / up)
    }

    /// Complex value of `α(x)`.
    pub fn eval_complex(&self, x: f64) -> Result<Complex64, DarbouxError> {
        match self.form {
            Form::Sqrt => {
                let d = self.delta.re;
                let radicand = self.sys.potential(x) + self.sys.potential(x + d) - 2.0 * self.epsilon;
                if radicand < -1e-12 {
                    return Err(DarbouxError::Consistency { x, radicand });
                }
                Ok(Complex64::new(self.sign_at(x) * radicand.max(0.0).sqrt(), 0.0))
            }
            Form::Zeta => Ok(self.zeta_raw(x)? + self.constant),
            Form::General => Ok(self.seed(x)?.alpha()),
        }
    }

    /// Real `α(x)`; a non-negligible imaginary part is a branch error.
    pub fn eval(&self, x: f64) -> Result<f64, DarbouxError> {
        project_real(self.eval_complex(x)?, x)
    }

    /// `α'(x)`: `℘(x̂+δ) - ℘(x̂)` for the ζ form, the chain rule for the
    /// square root, the Bloch-factor expression for the general form, and a
    /// five-point stencil within 1e-4 of the poles of `α(x, ±δ)`.
    pub fn derivative(&self, x: f64) -> Result<f64, DarbouxError> {
        match self.form {
            Form::Sqrt => {
                let alpha = self.eval(x)?;
                if alpha.abs() < 1e-6 {
                    return self.stencil(x, |t| self.eval(t));
                }
                let d = self.delta.re;
                Ok((self.sys.potential_derivative(x) + self.sys.potential_derivative(x + d)) / (2.0 * alpha))
            }
            Form::Zeta => {
                let xh = self.hat(x);
                project_real(self.w.wp(xh + self.delta)? - self.w.wp(xh)?, x)
            }
            Form::General => {
                // α(x, ±δ) have poles for complex δ; only there fall back to the stencil
                let xh = self.hat(x);
                let clear = self.delta.im == 0.0
                    || (self.w.lattice_distance(xh + self.delta) > 1e-4
                        && self.w.lattice_distance(xh - self.delta) > 1e-4);
                if clear {
                    self.general_derivative(x)
                } else {
                    self.stencil(x, |t| self.eval(t))
                }
            }
        }
    }

    /// `α''(x)`: analytic for the ζ form, stencil on `α'` otherwise.
    pub fn second_derivative(&self, x: f64) -> Result<f64, DarbouxError> {
        match self.form {
            Form::Zeta => {
                let xh = self.hat(x);
                project_real(self.w.wp_prime(xh + self.delta)? - self.w.wp_prime(xh)?, x)
            }
            _ => self.stencil(x, |t| self.derivative(t)),
        }
    }

    pub fn jet(&self, x: f64) -> Result<AlphaJet, DarbouxError> {
        Ok(AlphaJet {
            value: self.eval(x)?,
            first: self.derivative(x)?,
            second: self.second_derivative(x)?,
        })
    }

    fn stencil(&self, x: f64, f: impl Fn(f64) -> Result<f64, DarbouxError>) -> Result<f64, DarbouxError> {
        let h = STENCIL_STEP;
        let v = [f(x - 2.0 * h)?, f(x - h)?, f(x + h)?, f(x + 2.0 * h)?];
        Ok((v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h))
    }

    /// `α' = -ψ''/ψ + α²` with `u_{±δ}'' = (a² - a') u_{±δ}` and
    /// `a' = ℘(x̂±δ) - ℘(x̂)` evaluated directly.
    fn general_derivative(&self, x: f64) -> Result<f64, DarbouxError> {
        let seed = self.seed(x)?;
        let gamma = self.gamma.unwrap_or_default();
        let (lp, up, dup) = self.log_bloch(x, 1.0)?;
        let (lm, um, dum) = self.log_bloch(x, -1.0)?;
        let lp = lp - self.norm_plus;
        let lm = lm - self.norm_minus;
        let xh = self.hat(x);
        let wp0 = self.w.wp(xh)?;
        let ap = -dup / up;
        let am = -dum / um;
        let dap = self.w.wp(xh + self.delta)? - wp0;
        let dam = self.w.wp(xh - self.delta)? - wp0;
        let fp = (lp - seed.log_scale).exp();
        let fm = (lm - seed.log_scale).exp() * gamma;
        let ddpsi = up * fp * (ap * ap - dap) - um * fm * (am * am - dam);
        let alpha = seed.alpha();
        project_real(-ddpsi / seed.psi + alpha * alpha, x)
    }

    /// `V(x + δ)` on the regular branch; complex for complex `δ`.
    pub fn shifted_potential(&self, x: f64) -> Result<Complex64, DarbouxError> {
        if self.delta.im == 0.0 {
            return Ok(Complex64::new(self.sys.potential(x + self.delta.re), 0.0));
        }
        Ok(self.w.wp(self.hat(x) + self.delta)?)
    }

    /// Samples `α`, `α'` on a grid; movable singularities and poles are
    /// recorded as guarded points with `NaN` values.
    pub fn sample(&self, x0: f64, dx: f64, n: usize) -> Result<SampledSuperpotential, DarbouxError> {
        let mut alpha = Vec::with_capacity(n);
        let mut alpha_prime = Vec::with_capacity(n);
        let mut guarded = Vec::new();
        for i in 0..n {
            let x = x0 + i as f64 * dx;
            let value = if self.near_movable(x)? {
                Err(DarbouxError::MovableSingularity { x })
            } else {
                self.eval(x).and_then(|a| Ok((a, self.derivative(x)?)))
            };
            match value {
                Ok((a, da)) => {
                    alpha.push(a);
                    alpha_prime.push(da);
                }
                Err(DarbouxError::MovableSingularity { .. })
                | Err(DarbouxError::Elliptic(crate::elliptic::EllipticError::Pole { .. })) => {
                    guarded.push(i);
                    alpha.push(f64::NAN);
                    alpha_prime.push(f64::NAN);
                }
                Err(e) => return Err(e),
            }
        }
        Ok(SampledSuperpotential {
            x0,
            dx,
            alpha,
            alpha_prime,
            guarded,
        })
    }

    /// Within the `1e-6` residual guard band of `1 - α̃ = 0`.
    fn near_movable(&self, x: f64) -> Result<bool, DarbouxError> {
        if self.form != Form::General || self.gamma.unwrap_or_default().norm() == 0.0 {
            return Ok(false);
        }
        let t = self.tilde_alpha(x)?;
        Ok((Complex64::new(1.0, 0.0) - t).norm() < 1e-6 * (1.0 + t.norm()))
    }

    /// Abscissae on the grid between which `1 - α̃` changes sign (real `α̃`).
    pub fn movable_singularities(&self, x0: f64, dx: f64, n: usize) -> Result<Vec<f64>, DarbouxError> {
        let mut out = Vec::new();
        if self.form != Form::General {
            return Ok(out);
        }
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..n {
            let x = x0 + i as f64 * dx;
            let s = match self.seed(x) {
                Ok(seed) => seed.psi.re,
                Err(DarbouxError::MovableSingularity { .. }) => 0.0,
                Err(e) => return Err(e),
            };
            if let Some((xp, sp)) = prev {
                if sp == 0.0 {
                    out.push(xp);
                } else if s != 0.0 && sp.signum() != s.signum() {
                    out.push(0.5 * (xp + x));
                }
            }
            prev = Some((x, s));
        }
        if let Some((x, s)) = prev {
            if s == 0.0 {
                out.push(x);
            }
        }
        Ok(out)
    }
}

/// `α`, `α'` on a uniform grid; guarded indices hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSuperpotential {
    pub x0: f64,
    pub dx: f64,
    pub alpha: Vec<f64>,
    pub alpha_prime: Vec<f64>,
    pub guarded: Vec<usize>,
}

impl SampledSuperpotential {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }
}

pub(crate) fn project_real(z: Complex64, x: f64) -> Result<f64, DarbouxError> {
    if z.im.abs() > REALITY_TOL * z.re.abs().max(1.0) {
        return Err(DarbouxError::BranchBookkeeping { x, imag: z.im });
    }
    Ok(z.re)
}

use std::io::Write;

use serde::Serialize;

use super::{AlphaJet, DarbouxError, SampledSuperpotential, Superpotential};
use crate::potential::{write_columns, Potential, SampledPotential};

/// Guard on `|V(x) - V(x+δ)|` in the functional equation.
pub const DISPLACEMENT_GUARD: f64 = 1e-6;
/// Riccati residual required before a partner potential is built.
pub const PARTNER_RESIDUAL_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisplacementReport {
    /// max - min of the left-hand side of the displacement identity over evaluated points
    pub spread: f64,
    /// half the mean of the left-hand side
    pub epsilon_recovered: f64,
    pub evaluated: usize,
    pub guarded: usize,
}

/// Evaluates `V(x) + V(x+δ) - ¼[(V'(x) + V'(x+δ)) / (V(x) - V(x+δ))]²`
/// on `n` points of `[xmin, xmax]`.
pub fn displacement_residual(
    pot: &(impl Potential + ?Sized),
    delta: f64,
    xmin: f64,
    xmax: f64,
    n: usize,
) -> Result<DisplacementReport, DarbouxError> {
    if n < 2 || !(xmax > xmin) {
        return Err(DarbouxError::Shape(format!("bad grid [{xmin}, {xmax}] x {n}")));
    }
    let dx = (xmax - xmin) / (n - 1) as f64;
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    let mut evaluated = 0;
    for i in 0..n {
        let x = xmin + i as f64 * dx;
        let (v0, v1) = (pot.value(x), pot.value(x + delta));
        let den = v0 - v1;
        if den.abs() < DISPLACEMENT_GUARD {
            continue;
        }
        let q = (pot.derivative(x) + pot.derivative(x + delta)) / den;
        let lhs = v0 + v1 - 0.25 * q * q;
        lo = lo.min(lhs);
        hi = hi.max(lhs);
        sum += lhs;
        evaluated += 1;
    }
    if evaluated == 0 {
        return Err(DarbouxError::DegenerateGrid);
    }
    Ok(DisplacementReport {
        spread: hi - lo,
        epsilon_recovered: 0.5 * sum / evaluated as f64,
        evaluated,
        guarded: n - evaluated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// `-α' + α² = 2(V - ε)`
    Forward,
    /// `α' + α² = 2(Ṽ - ε)`
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max: f64,
    pub at: f64,
    pub evaluated: usize,
    pub guarded: usize,
}

/// `max |∓α' + α² - 2(V - ε)|` over unguarded grid points.
pub fn riccati_residual(
    alpha: &SampledSuperpotential,
    v: &SampledPotential,
    epsilon: f64,
    direction: Direction,
) -> Result<ResidualReport, DarbouxError> {
    if alpha.len() != v.len()
        || alpha.alpha_prime.len() != alpha.len()
        || (alpha.x0 - v.x0).abs() > 1e-12 * v.dx
        || (alpha.dx - v.dx).abs() > 1e-12 * v.dx
    {
        return Err(DarbouxError::Shape(format!(
            "superpotential grid ({}, {}, {}) vs potential grid ({}, {}, {})",
            alpha.x0,
            alpha.dx,
            alpha.len(),
            v.x0,
            v.dx,
            v.len()
        )));
    }
    let s = match direction {
        Direction::Forward => -1.0,
        Direction::Backward => 1.0,
    };
    let mut report = ResidualReport {
        max: 0.0,
        at: f64::NAN,
        evaluated: 0,
        guarded: 0,
    };
    for i in 0..v.len() {
        let (a, da) = (alpha.alpha[i], alpha.alpha_prime[i]);
        if !a.is_finite() || !da.is_finite() {
            report.guarded += 1;
            continue;
        }
        let r = (s * da + a * a - 2.0 * (v.values[i] - epsilon)).abs();
        report.evaluated += 1;
        if r > report.max || report.at.is_nan() {
            report.max = r;
            report.at = v.x(i);
        }
    }
    if report.evaluated == 0 {
        return Err(DarbouxError::DegenerateGrid);
    }
    Ok(report)
}

/// Partner potential `Ṽ = V + α'` sampled on `x0 + i dx`.
pub fn displaced_potential(
    alpha: &Superpotential,
    x0: f64,
    dx: f64,
    n: usize,
) -> Result<SampledPotential, DarbouxError> {
    let sampled = alpha.sample(x0, dx, n)?;
    let mut abscissae: Vec<f64> = sampled.guarded.iter().map(|&i| sampled.x(i)).collect();
    abscissae.extend(alpha.movable_singularities(x0, dx, n)?);
    if !abscissae.is_empty() {
        abscissae.sort_by(f64::total_cmp);
        abscissae.dedup();
        return Err(DarbouxError::Singular { abscissae });
    }
    let base = SampledPotential::from_potential(&alpha.sys, x0, dx, n)?;
    let check = riccati_residual(&sampled, &base, alpha.epsilon, Direction::Forward)?;
    if check.max > PARTNER_RESIDUAL_TOL {
        return Err(DarbouxError::Residual {
            residual: check.max,
            tolerance: PARTNER_RESIDUAL_TOL,
        });
    }
    let values = base
        .values
        .iter()
        .zip(&sampled.alpha_prime)
        .map(|(v, da)| v + da)
        .collect();
    Ok(SampledPotential::new(
        x0,
        dx,
        values,
        base.period,
        format!("partner of {}", base.label),
    )?)
}

/// Smooth test function with analytic derivatives up to third order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TestFunction {
    Gaussian {
        center: f64,
        width: f64,
    },
    /// Gaussian window times `cos(k x)`
    WindowedWave {
        center: f64,
        width: f64,
        k: f64,
    },
}

impl TestFunction {
    /// `[f, f', f'', f''']` at `x`.
    pub fn derivatives(&self, x: f64) -> [f64; 4] {
        let (center, width, k) = match *self {
            Self::Gaussian { center, width } => (center, width, 0.0),
            Self::WindowedWave { center, width, k } => (center, width, k),
        };
        let s = (x - center) / width;
        let g = (-0.5 * s * s).exp();
        let gd = [
            g,
            -s / width * g,
            (s * s - 1.0) / (width * width) * g,
            (3.0 * s - s * s * s) / (width * width * width) * g,
        ];
        let (sn, cs) = (k * x).sin_cos();
        let cd = [cs, -k * sn, -k * k * cs, k * k * k * sn];
        let binom = [
            [1.0, 0.0, 0.0, 0.0],
            [1.0, 1.0, 0.0, 0.0],
            [1.0, 2.0, 1.0, 0.0],
            [1.0, 3.0, 3.0, 1.0],
        ];
        let mut out = [0.0; 4];
        for (n, slot) in out.iter_mut().enumerate() {
            *slot = (0..=n).map(|j| binom[n][j] * gd[j] * cd[n - j]).sum();
        }
        out
    }
}

/// `max |(A H f)(x) - (H̃ A f)(x)|` with `A = (d + α)/√2`,
/// `H = -½d² + V`, `H̃ = -½d² + Ṽ`, over test functions and grid points.
pub fn intertwining_residual<F>(
    alpha: F,
    v: &(impl Potential + ?Sized),
    v_target: &(impl Potential + ?Sized),
    tests: &[TestFunction],
    xs: &[f64],
) -> Result<f64, DarbouxError>
where
    F: Fn(f64) -> Result<AlphaJet, DarbouxError>,
{
    let mut worst: f64 = 0.0;
    for &x in xs {
        let a = alpha(x)?;
        let (v0, dv0, vt) = (v.value(x), v.derivative(x), v_target.value(x));
        for t in tests {
            let [f, f1, f2, f3] = t.derivatives(x);
            // H f and its derivative
            let hf = -0.5 * f2 + v0 * f;
            let dhf = -0.5 * f3 + dv0 * f + v0 * f1;
            let ahf = dhf + a.value * hf;
            // g = A f (without 1/√2) and g''
            let g = f1 + a.value * f;
            let g2 = f3 + a.second * f + 2.0 * a.first * f1 + a.value * f2;
            let hag = -0.5 * g2 + vt * g;
            worst = worst.max((ahf - hag).abs() / std::f64::consts::SQRT_2);
        }
    }
    Ok(worst)
}

/// CSV with columns `x, V, V_shifted, alpha, alpha_prime, V_tilde, residual`.
pub fn emit_csv<W: Write>(alpha: &Superpotential, x0: f64, dx: f64, n: usize, out: W) -> Result<(), DarbouxError> {
    let sampled = alpha.sample(x0, dx, n)?;
    let mut cols: [Vec<f64>; 7] = Default::default();
    for i in 0..n {
        let x = sampled.x(i);
        let v = alpha.sys.potential(x);
        let shifted = alpha
            .shifted_potential(x)
            .ok()
            .filter(|z| z.im.abs() < 1e-8 * z.re.abs().max(1.0))
            .map_or(f64::NAN, |z| z.re);
        let (a, da) = (sampled.alpha[i], sampled.alpha_prime[i]);
        let res = -da + a * a - 2.0 * (v - alpha.epsilon);
        for (c, val) in cols.iter_mut().zip([x, v, shifted, a, da, v + da, res]) {
            c.push(val);
        }
    }
    let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
    write_columns(
        out,
        &["x", "V", "V_shifted", "alpha", "alpha_prime", "V_tilde", "residual"],
        &refs,
    )?;
    Ok(())
}

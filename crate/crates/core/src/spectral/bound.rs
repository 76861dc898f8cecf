use serde::Serialize;

use super::numerov::{coefficients, increments, phi_factor, transfer};
use super::SpectralError;
use crate::potential::SampledPotential;

/// `|φ|` above this rescales the stored sweep.
const RESCALE_AT: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Boundary {
    /// Decaying Floquet solution of the outermost cell at each end. The
    /// cell length defaults to the potential's period, else to one unit.
    Floquet { cell: Option<f64> },
    /// `ψ = 0` at both ends.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundStateOptions {
    pub boundary: Boundary,
    /// energies scanned for sign changes of the matching function
    pub scan: usize,
    /// bisection tolerance in energy
    pub tol: f64,
    /// matching abscissa; the domain midpoint when `None`
    pub match_at: Option<f64>,
    /// largest accepted normalized Casoratian at a root
    pub residual_tol: f64,
}

impl Default for BoundStateOptions {
    fn default() -> Self {
        Self {
            boundary: Boundary::Floquet { cell: None },
            scan: 400,
            tol: 1e-12,
            match_at: None,
            residual_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundState {
    pub energy: f64,
    /// sign changes of the matched solution on the truncated domain
    pub nodes: usize,
    /// normalized Casoratian of the two sweeps at the matching point
    pub residual: f64,
    /// largest `|ψ|` in the outermost cells relative to `max |ψ|`
    pub edge_amplitude: f64,
}

/// `φ_0..=φ_last` from `(φ_0, φ_1)` in the difference form, rescaled on overflow.
fn sweep(g: &[f64], start: (f64, f64), last: usize) -> Vec<f64> {
    let mut phi = Vec::with_capacity(last + 1);
    phi.push(start.0);
    phi.push(start.1);
    let mut d = start.1 - start.0;
    for k in 1..last {
        d += g[k] * phi[k];
        let next = phi[k] + d;
        phi.push(next);
        if next.abs() > RESCALE_AT {
            let s = 1.0 / next.abs();
            phi.iter_mut().for_each(|p| *p *= s);
            d *= s;
        }
    }
    phi
}

/// Growing eigenvector of a cell transfer matrix; `None` inside a band.
fn growing_direction(m: [[f64; 2]; 2]) -> Option<(f64, f64)> {
    let tr = m[0][0] + m[1][1];
    if tr.abs() <= 2.0 {
        return None;
    }
    let lambda = 0.5 * (tr + tr.signum() * (tr * tr - 4.0).sqrt());
    let a = (m[0][1], lambda - m[0][0]);
    let b = (lambda - m[1][1], m[1][0]);
    let v = if a.0.hypot(a.1) >= b.0.hypot(b.1) { a } else { b };
    let norm = v.0.hypot(v.1);
    if !(norm > 0.0) {
        return None;
    }
    let s = if v.0 + v.1 < 0.0 { -1.0 } else { 1.0 };
    Some((s * v.0 / norm, s * v.1 / norm))
}

struct Problem<'a> {
    v: &'a SampledPotential,
    boundary: Boundary,
    cell: usize,
    matching: usize,
}

struct Matched {
    casoratian: f64,
    left: Vec<f64>,
    right_rev: Vec<f64>,
    f: Vec<f64>,
}

impl Problem<'_> {
    fn start(&self, f: &[f64], energy: f64) -> Result<(f64, f64), SpectralError> {
        match self.boundary {
            Boundary::Dirichlet => Ok((0.0, phi_factor(f[1], self.v.dx) * self.v.dx)),
            Boundary::Floquet { .. } => {
                let m = transfer(f, self.v.dx, 0, self.cell, false);
                growing_direction(m).ok_or_else(|| {
                    SpectralError::Window(format!("E = {energy} lies in an allowed band of the boundary cell"))
                })
            }
        }
    }

    fn matched(&self, energy: f64) -> Result<Matched, SpectralError> {
        let n = self.v.len();
        let f = coefficients(&self.v.values, energy);
        let c = increments(&f, self.v.dx);
        let f_rev: Vec<f64> = f.iter().rev().copied().collect();
        let c_rev: Vec<f64> = c.iter().rev().copied().collect();
        let m = self.matching;
        let left = sweep(&c, self.start(&f, energy)?, m + 1);
        let right_rev = sweep(&c_rev, self.start(&f_rev, energy)?, n - 1 - m);
        let (l0, l1) = (left[m], left[m + 1]);
        let (r0, r1) = (right_rev[n - 1 - m], right_rev[n - 2 - m]);
        let norm = l0.hypot(l1) * r0.hypot(r1);
        let casoratian = if norm > 0.0 { (l0 * r1 - l1 * r0) / norm } else { 0.0 };
        Ok(Matched {
            casoratian,
            left,
            right_rev,
            f,
        })
    }

    fn state(&self, energy: f64) -> Result<BoundState, SpectralError> {
        let mm = self.matched(energy)?;
        let n = self.v.len();
        let m = self.matching;
        let r_at = |i: usize| mm.right_rev[n - 1 - i];
        // scale the right sweep onto the left one at the larger of two samples
        let scale = if r_at(m).abs() >= r_at(m + 1).abs() {
            mm.left[m] / r_at(m)
        } else {
            mm.left[m + 1] / r_at(m + 1)
        };
        let psi: Vec<f64> = (0..n)
            .map(|i| {
                let phi = if i <= m { mm.left[i] } else { scale * r_at(i) };
                phi / phi_factor(mm.f[i], self.v.dx)
            })
            .collect();
        let peak = psi.iter().fold(0.0f64, |a, p| a.max(p.abs()));
        let floor = 1e-12 * peak;
        let mut nodes = 0;
        let mut last = 0.0f64;
        for &p in &psi {
            if p.abs() <= floor {
                continue;
            }
            if last != 0.0 && p.signum() != last.signum() {
                nodes += 1;
            }
            last = p;
        }
        let edge_cells = self.cell.max(1).min(n / 2);
        let edge = psi[..edge_cells]
            .iter()
            .chain(&psi[n - edge_cells..])
            .fold(0.0f64, |a, p| a.max(p.abs()));
        Ok(BoundState {
            energy,
            nodes,
            residual: mm.casoratian.abs(),
            edge_amplitude: if peak > 0.0 { edge / peak } else { f64::NAN },
        })
    }
}

/// Energies in `window` where the left and right boundary solutions match.
pub fn bound_states(
    v: &SampledPotential,
    window: (f64, f64),
    opts: &BoundStateOptions,
) -> Result<Vec<BoundState>, SpectralError> {
    let (lo, hi) = window;
    if !(hi > lo) || opts.scan < 2 {
        return Err(SpectralError::Window(format!("bad window [{lo}, {hi}]")));
    }
    let n = v.len();
    let cell = match opts.boundary {
        Boundary::Dirichlet => 0,
        Boundary::Floquet { cell } => {
            let len = cell.or(v.period).unwrap_or(1.0);
            ((len / v.dx).round() as usize).max(2)
        }
    };
    if n < 2 * cell + 8 {
        return Err(SpectralError::Grid(format!(
            "{n} samples are too few for boundary cells of {cell} steps"
        )));
    }
    let matching = match opts.match_at {
        Some(x) => (((x - v.x0) / v.dx).round().max(1.0) as usize).min(n - 3),
        None => n / 2,
    };
    let problem = Problem {
        v,
        boundary: opts.boundary,
        cell,
        matching,
    };
    let g = |e: f64| problem.matched(e).map(|m| m.casoratian);
    let de = (hi - lo) / (opts.scan - 1) as f64;
    let mut out: Vec<BoundState> = Vec::new();
    let mut prev = (lo, g(lo)?);
    for i in 1..opts.scan {
        let e = lo + i as f64 * de;
        let cur = (e, g(e)?);
        let root = if cur.1 == 0.0 {
            Some(e)
        } else if prev.1 != 0.0 && prev.1.signum() != cur.1.signum() {
            let (mut a, mut b, ga) = (prev.0, cur.0, prev.1);
            while b - a > opts.tol {
                let mid = 0.5 * (a + b);
                let gm = g(mid)?;
                if gm == 0.0 {
                    a = mid;
                    b = mid;
                } else if gm.signum() == ga.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            Some(0.5 * (a + b))
        } else {
            None
        };
        if let Some(e) = root {
            let st = problem.state(e)?;
            // a sign flip of the boundary eigenvector is a jump, not a root
            if st.residual < opts.residual_tol {
                out.push(st);
            }
        }
        prev = cur;
    }
    Ok(out)
}

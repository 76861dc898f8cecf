use serde::Serialize;

use super::numerov::{coefficients, transfer};
use super::SpectralError;
use crate::potential::SampledPotential;

/// Minimum observed convergence order of the discriminant under step doubling.
pub const MIN_ORDER: f64 = 3.0;
/// Differences below this (relative to `max(1, |Δ|)`) are rounding and skip the order test.
const ORDER_FLOOR: f64 = 1e-10;
/// Gaps narrower than this are closed gaps resolved by rounding and dropped.
pub const CLOSED_GAP: f64 = 1e-6;

/// Number of grid steps in one period.
fn period_steps(v: &SampledPotential) -> Result<usize, SpectralError> {
    let t = v.period.ok_or(SpectralError::NotPeriodic)?;
    let steps = t / v.dx;
    let k = steps.round();
    if !(t > 0.0) || (steps - k).abs() > 1e-6 * steps.max(1.0) {
        return Err(SpectralError::Grid(format!(
            "period {t} is not a whole number of steps dx = {}",
            v.dx
        )));
    }
    let k = k as usize;
    if v.len() < k {
        return Err(SpectralError::Grid(format!(
            "{} samples do not cover one period ({k} steps)",
            v.len()
        )));
    }
    Ok(k)
}

/// Trace of the discrete monodromy over one period, sampling every `stride`-th point.
fn discriminant_at_stride(f: &[f64], dx: f64, steps: usize, stride: usize) -> f64 {
    let sub: Vec<f64> = f[..steps].iter().step_by(stride).copied().collect();
    let m = transfer(&sub, dx * stride as f64, 0, steps / stride, true);
    m[0][0] + m[1][1]
}

/// `Δ(E)` without the order check.
pub fn hill_discriminant_unchecked(v: &SampledPotential, energy: f64) -> Result<f64, SpectralError> {
    let steps = period_steps(v)?;
    let f = coefficients(&v.values[..steps], energy);
    Ok(discriminant_at_stride(&f, v.dx, steps, 1))
}

/// `Δ(E)`, the trace of the monodromy of `-½ψ'' + Vψ = Eψ` over one
/// period. The scaled Numerov recursion has unit determinant, so its trace
/// converges to `Δ` at fourth order; the observed order over strides
/// 1, 2, 4 must reach [`MIN_ORDER`] unless the differences are at rounding level.
pub fn hill_discriminant(v: &SampledPotential, energy: f64) -> Result<f64, SpectralError> {
    let steps = period_steps(v)?;
    let f = coefficients(&v.values[..steps], energy);
    let d1 = discriminant_at_stride(&f, v.dx, steps, 1);
    if steps % 4 != 0 || steps < 64 {
        return Ok(d1);
    }
    let d2 = discriminant_at_stride(&f, v.dx, steps, 2);
    let d4 = discriminant_at_stride(&f, v.dx, steps, 4);
    let (fine, coarse) = ((d2 - d1).abs(), (d4 - d2).abs());
    let floor = ORDER_FLOOR * d1.abs().max(1.0);
    if fine > floor && coarse > floor {
        let order = (coarse / fine).log2();
        if order < MIN_ORDER {
            return Err(SpectralError::Accuracy { order, energy });
        }
    }
    Ok(d1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeKind {
    /// bottom of an allowed band
    Lower,
    /// top of an allowed band
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandEdge {
    pub energy: f64,
    pub kind: EdgeKind,
    /// `Δ` at the edge, `±2` up to the bisection tolerance
    pub discriminant: f64,
}

/// Roots of `|Δ(E)| = 2` in `range`, located on `scan` equally spaced
/// energies and refined by bisection to `tol`.
pub fn band_edges(
    v: &SampledPotential,
    range: (f64, f64),
    tol: f64,
    scan: usize,
) -> Result<Vec<BandEdge>, SpectralError> {
    edges_with(|e| hill_discriminant(v, e), range, tol, scan)
}

/// [`band_edges`] without the order check, for cells cut from a potential
/// that is only asymptotically periodic (the wrap-around jump spoils the order).
pub fn band_edges_unchecked(
    v: &SampledPotential,
    range: (f64, f64),
    tol: f64,
    scan: usize,
) -> Result<Vec<BandEdge>, SpectralError> {
    edges_with(|e| hill_discriminant_unchecked(v, e), range, tol, scan)
}

fn edges_with(
    delta: impl Fn(f64) -> Result<f64, SpectralError>,
    range: (f64, f64),
    tol: f64,
    scan: usize,
) -> Result<Vec<BandEdge>, SpectralError> {
    let (lo, hi) = range;
    if !(hi > lo) || scan < 2 {
        return Err(SpectralError::Window(format!("bad energy range [{lo}, {hi}]")));
    }
    let g = |e: f64| -> Result<f64, SpectralError> { Ok(delta(e)?.abs() - 2.0) };
    let mut edges = Vec::new();
    let de = (hi - lo) / (scan - 1) as f64;
    let mut prev = (lo, g(lo)?);
    for i in 1..scan {
        let e = lo + i as f64 * de;
        let cur = (e, g(e)?);
        if (prev.1 > 0.0) != (cur.1 > 0.0) {
            let (mut a, mut b) = (prev.0, cur.0);
            let ga = prev.1;
            while b - a > tol {
                let mid = 0.5 * (a + b);
                if (g(mid)? > 0.0) == (ga > 0.0) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let energy = 0.5 * (a + b);
            edges.push(BandEdge {
                energy,
                // leaving a gap (|Δ| > 2) upwards enters a band
                kind: if ga > 0.0 { EdgeKind::Lower } else { EdgeKind::Upper },
                discriminant: delta(energy)?,
            });
        }
        prev = cur;
    }
    // an upper edge followed closely by a lower edge is a closed gap
    let mut kept: Vec<BandEdge> = Vec::with_capacity(edges.len());
    for e in edges {
        if let Some(last) = kept.last() {
            if last.kind == EdgeKind::Upper && e.kind == EdgeKind::Lower && e.energy - last.energy < CLOSED_GAP {
                kept.pop();
                continue;
            }
        }
        kept.push(e);
    }
    Ok(kept)
}

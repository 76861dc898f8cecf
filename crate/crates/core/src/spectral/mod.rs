//! One-dimensional Schrödinger numerics for `H = -½d² + V`: Numerov
//! sweeps, the Hill discriminant and band edges of periodic potentials,
//! and bound states of truncated defect potentials.

mod bound;
mod hill;
mod numerov;

pub use bound::{bound_states, BoundState, BoundStateOptions, Boundary};
pub use hill::{
    band_edges, band_edges_unchecked, hill_discriminant, hill_discriminant_unchecked, BandEdge, EdgeKind, CLOSED_GAP,
    MIN_ORDER,
};
pub use numerov::{numerov_integrate, taylor_start, NumerovSolution, Sweep};

use serde::Serialize;
use thiserror::Error;

use crate::potential::SampledPotential;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("bad grid: {0}")]
    Grid(String),
    #[error("the potential carries no period")]
    NotPeriodic,
    #[error("observed order {order:.2} below 3 at E = {energy}: step too coarse")]
    Accuracy { order: f64, energy: f64 },
    #[error("ill-posed window: {0}")]
    Window(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub label: String,
    pub band_edges: Vec<BandEdge>,
    pub bound_states: Vec<BoundState>,
    /// `(E, Δ(E))`
    pub discriminant_samples: Vec<(f64, f64)>,
}

impl SpectralReport {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            band_edges: Vec::new(),
            bound_states: Vec::new(),
            discriminant_samples: Vec::new(),
        }
    }

    /// Band edges and `samples` discriminant values over `range`.
    pub fn periodic(v: &SampledPotential, range: (f64, f64), tol: f64, samples: usize) -> Result<Self, SpectralError> {
        let mut r = Self::new(v.label.clone());
        r.band_edges = band_edges(v, range, tol, samples.max(2))?;
        r.discriminant_samples = discriminant_samples(v, range, samples)?;
        Ok(r)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `Δ(E)` on `count` equally spaced energies.
pub fn discriminant_samples(
    v: &SampledPotential,
    range: (f64, f64),
    count: usize,
) -> Result<Vec<(f64, f64)>, SpectralError> {
    let (lo, hi) = range;
    if count == 0 {
        return Ok(Vec::new());
    }
    let de = if count > 1 { (hi - lo) / (count - 1) as f64 } else { 0.0 };
    (0..count)
        .map(|i| {
            let e = lo + i as f64 * de;
            hill_discriminant(v, e).map(|d| (e, d))
        })
        .collect()
}

/// Which end of a truncated potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Left,
    Right,
}

/// One period of `v` at the given end, as a periodic potential.
pub fn boundary_cell(v: &SampledPotential, side: Side, period: f64) -> Result<SampledPotential, SpectralError> {
    let steps = (period / v.dx).round() as usize;
    if steps < 4 || steps + 1 > v.len() || ((period / v.dx) - steps as f64).abs() > 1e-6 * steps as f64 {
        return Err(SpectralError::Grid(format!(
            "period {period} is not a whole number of steps within {} samples",
            v.len()
        )));
    }
    let (start, values) = match side {
        Side::Left => (0, v.values[..=steps].to_vec()),
        Side::Right => {
            let s = v.len() - 1 - steps;
            (s, v.values[s..].to_vec())
        }
    };
    SampledPotential::new(
        v.x(start),
        v.dx,
        values,
        Some(period),
        format!("{} ({side:?} cell)", v.label),
    )
    .map_err(|e| SpectralError::Grid(e.to_string()))
}

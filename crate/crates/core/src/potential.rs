//! Potentials as functions and as uniform samples.

use std::io::{Read, Write};

use serde::Serialize;
use thiserror::Error;

use crate::elliptic::LameSystem;

/// A real potential `V(x)` for `H = -½ d²/dx² + V`.
pub trait Potential {
    fn value(&self, x: f64) -> f64;

    /// `V'(x)`; five-point stencil unless overridden.
    fn derivative(&self, x: f64) -> f64 {
        stencil5(|t| self.value(t), x, 1e-3)
    }

    /// Real period, if any.
    fn period(&self) -> Option<f64> {
        None
    }

    fn label(&self) -> String;
}

impl Potential for LameSystem {
    fn value(&self, x: f64) -> f64 {
        self.potential(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        self.potential_derivative(x)
    }

    fn period(&self) -> Option<f64> {
        let t = LameSystem::period(self);
        t.is_finite().then_some(t)
    }

    fn label(&self) -> String {
        format!("lame(m={})", self.m)
    }
}

/// `V(x) = c x²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub coefficient: f64,
}

impl Default for Harmonic {
    fn default() -> Self {
        Self { coefficient: 1.0 }
    }
}

impl Potential for Harmonic {
    fn value(&self, x: f64) -> f64 {
        self.coefficient * x * x
    }

    fn derivative(&self, x: f64) -> f64 {
        2.0 * self.coefficient * x
    }

    fn label(&self) -> String {
        format!("harmonic(c={})", self.coefficient)
    }
}

/// `V(x) = c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Potential for Constant {
    fn value(&self, _x: f64) -> f64 {
        self.0
    }

    fn derivative(&self, _x: f64) -> f64 {
        0.0
    }

    fn label(&self) -> String {
        format!("constant({})", self.0)
    }
}

/// Wraps a closure as a potential.
pub struct FnPotential<F> {
    pub f: F,
    pub period: Option<f64>,
    pub label: String,
}

impl<F: Fn(f64) -> f64> FnPotential<F> {
    pub fn new(label: impl Into<String>, f: F) -> Self {
        Self {
            f,
            period: None,
            label: label.into(),
        }
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = Some(period);
        self
    }
}

impl<F: Fn(f64) -> f64> Potential for FnPotential<F> {
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn period(&self) -> Option<f64> {
        self.period
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Shifted view `x ↦ V(x + shift)`.
pub struct Shifted<'a, P: ?Sized> {
    pub inner: &'a P,
    pub shift: f64,
}

impl<P: Potential + ?Sized> Potential for Shifted<'_, P> {
    fn value(&self, x: f64) -> f64 {
        self.inner.value(x + self.shift)
    }

    fn derivative(&self, x: f64) -> f64 {
        self.inner.derivative(x + self.shift)
    }

    fn period(&self) -> Option<f64> {
        self.inner.period()
    }

    fn label(&self) -> String {
        format!("{}(x+{})", self.inner.label(), self.shift)
    }
}

/// Five-point central difference of `f` at `x`.
pub fn stencil5(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("grid needs dx > 0 and at least 2 points (dx = {dx}, n = {n})")]
    BadGrid { dx: f64, n: usize },
    #[error("non-finite value at x = {x}")]
    NonFinite { x: f64 },
    #[error("periodicity violated: |V(x) - V(x+T)| = {deviation:e} at x = {x}")]
    Periodicity { x: f64, deviation: f64 },
    #[error("grid is not uniform at row {row}")]
    NonUniform { row: usize },
    #[error("csv: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Uniform samples `values[i] = V(x0 + i dx)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledPotential {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<f64>,
    pub period: Option<f64>,
    pub label: String,
}

impl SampledPotential {
    pub fn new(
        x0: f64,
        dx: f64,
        values: Vec<f64>,
        period: Option<f64>,
        label: impl Into<String>,
    ) -> Result<Self, SampleError> {
        if !(dx > 0.0) || values.len() < 2 {
            return Err(SampleError::BadGrid { dx, n: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SampleError::NonFinite { x: x0 + i as f64 * dx });
        }
        Ok(Self {
            x0,
            dx,
            values,
            period,
            label: label.into(),
        })
    }

    /// Samples `pot` on `x0 + i dx`, `i < n`.
    pub fn from_potential(pot: &(impl Potential + ?Sized), x0: f64, dx: f64, n: usize) -> Result<Self, SampleError> {
        let values = (0..n).map(|i| pot.value(x0 + i as f64 * dx)).collect();
        Self::new(x0, dx, values, pot.period(), pot.label())
    }

    /// Samples `pot` on `n` points spanning `[xmin, xmax]`.
    pub fn on_interval(pot: &(impl Potential + ?Sized), xmin: f64, xmax: f64, n: usize) -> Result<Self, SampleError> {
        if n < 2 || !(xmax > xmin) {
            return Err(SampleError::BadGrid { dx: xmax - xmin, n });
        }
        Self::from_potential(pot, xmin, (xmax - xmin) / (n - 1) as f64, n)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.len() - 1)
    }

    /// Checks `|V(x) - V(x+T)| < tol` on every in-range pair; the period
    /// must be a whole number of steps to within `1e-9 dx`.
    pub fn check_periodicity(&self, tol: f64) -> Result<(), SampleError> {
        let Some(t) = self.period else {
            return Ok(());
        };
        let steps = t / self.dx;
        let k = steps.round();
        if (steps - k).abs() > 1e-9 * steps.max(1.0) {
            return Ok(());
        }
        let k = k as usize;
        for i in 0..self.len().saturating_sub(k) {
            let deviation = (self.values[i] - self.values[i + k]).abs();
            if deviation >= tol {
                return Err(SampleError::Periodicity {
                    x: self.x(i),
                    deviation,
                });
            }
        }
        Ok(())
    }

    /// Two-column CSV `x,V`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SampleError> {
        let xs = self.xs();
        write_columns(out, &["x", "V"], &[&xs, &self.values])
    }

    /// Reads a CSV whose first column is `x` and whose `value_column`
    /// (by header name, default second column) holds `V`.
    pub fn read_csv<R: Read>(
        input: R,
        value_column: Option<&str>,
        period: Option<f64>,
        label: impl Into<String>,
    ) -> Result<Self, SampleError> {
        let mut reader = csv::Reader::from_reader(input);
        let headers = reader.headers().map_err(|e| SampleError::Csv(e.to_string()))?.clone();
        let col = match value_column {
            Some(name) => headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| SampleError::Csv(format!("no column named {name:?}")))?,
            None => 1,
        };
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (row, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| SampleError::Csv(e.to_string()))?;
            let field = |i: usize| -> Result<f64, SampleError> {
                rec.get(i)
                    .ok_or_else(|| SampleError::Csv(format!("row {}: missing column {i}", row + 2)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| SampleError::Csv(format!("row {}: {e}", row + 2)))
            };
            xs.push(field(0)?);
            vs.push(field(col)?);
        }
        if xs.len() < 2 {
            return Err(SampleError::BadGrid { dx: 0.0, n: xs.len() });
        }
        let dx = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        for (i, x) in xs.iter().enumerate() {
            if (x - (xs[0] + i as f64 * dx)).abs() > 1e-9 * dx.abs().max(1e-300) * (i as f64 + 1.0) {
                return Err(SampleError::NonUniform { row: i + 2 });
            }
        }
        Self::new(xs[0], dx, vs, period, label)
    }
}

impl Potential for SampledPotential {
    /// Linear interpolation; constant extension past the ends.
    fn value(&self, x: f64) -> f64 {
        let t = (x - self.x0) / self.dx;
        if t <= 0.0 {
            return self.values[0];
        }
        let i = t.floor() as usize;
        if i + 1 >= self.len() {
            return self.values[self.len() - 1];
        }
        let f = t - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }

    fn period(&self) -> Option<f64> {
        self.period
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Formats with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes equal-length columns as CSV with a header row and LF endings.
pub fn write_columns<W: Write>(out: W, headers: &[&str], columns: &[&[f64]]) -> Result<(), SampleError> {
    let rows = columns.first().map_or(0, |c| c.len());
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let err = |e: csv::Error| SampleError::Csv(e.to_string());
    w.write_record(headers).map_err(err)?;
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| fmt17(c[i]))).map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

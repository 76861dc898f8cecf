//! Python bindings: elliptic kernel, superpotentials, Bäcklund chains and
//! spectral probes.

use darboux::backlund::{
    backlund_step as step, chain_potential as build_chain, fig1_construction, fig2_construction, ChainError, ChainSpec,
    Fig1Options, Fig2Options, Figure, Grid, Stage, StageSource,
};
use darboux::darboux::{DarbouxError, Superpotential as CoreSuperpotential};
use darboux::elliptic::{jacobi_sncndn, EllipticError, LameSystem as CoreLame, Weierstrass as CoreWeierstrass};
use darboux::potential::{SampleError, SampledPotential};
use darboux::spectral::{
    band_edges as core_band_edges, bound_states as core_bound_states, hill_discriminant as core_hill,
    BoundStateOptions, Boundary, EdgeKind, SpectralError,
};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl ToString) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn elliptic_err(e: EllipticError) -> PyErr {
    match e {
        EllipticError::Domain(_) => value_err(e),
        _ => runtime_err(e),
    }
}

fn darboux_err(e: DarbouxError) -> PyErr {
    match e {
        DarbouxError::Elliptic(inner) => elliptic_err(inner),
        other => runtime_err(other),
    }
}

fn chain_err(e: ChainError) -> PyErr {
    match e {
        ChainError::Darboux(inner) => darboux_err(inner),
        ChainError::CoincidentEnergies(..) | ChainError::InBand(_) | ChainError::Domain(_) | ChainError::Shape(_) => {
            value_err(e)
        }
        other => runtime_err(other),
    }
}

fn sample_err(e: SampleError) -> PyErr {
    value_err(e)
}

fn spectral_err(e: SpectralError) -> PyErr {
    match e {
        SpectralError::Accuracy { .. } => runtime_err(e),
        other => value_err(other),
    }
}

/// Weierstrass functions of the lattice attached to the Lamé parameter `m`.
#[pyclass(frozen)]
struct Weierstrass {
    inner: CoreWeierstrass,
}

#[pymethods]
impl Weierstrass {
    #[new]
    fn new(m: f64) -> PyResult<Self> {
        Ok(Self {
            inner: CoreWeierstrass::from_modulus(m).map_err(elliptic_err)?,
        })
    }

    #[getter]
    fn g2(&self) -> f64 {
        self.inner.invariants().g2
    }

    #[getter]
    fn g3(&self) -> f64 {
        self.inner.invariants().g3
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.invariants().omega
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.invariants().tau
    }

    fn wp(&self, z: Complex64) -> PyResult<Complex64> {
        self.inner.wp(z).map_err(elliptic_err)
    }

    fn wp_prime(&self, z: Complex64) -> PyResult<Complex64> {
        self.inner.wp_prime(z).map_err(elliptic_err)
    }

    fn zeta(&self, z: Complex64) -> PyResult<Complex64> {
        self.inner.zeta(z).map_err(elliptic_err)
    }

    fn sigma(&self, z: Complex64) -> Complex64 {
        self.inner.sigma(z)
    }
}

/// `V(x) = m sn²(x|m) - (m+1)/3` and its band edges.
#[pyclass(frozen)]
struct LameSystem {
    inner: CoreLame,
}

#[pymethods]
impl LameSystem {
    #[new]
    fn new(m: f64) -> PyResult<Self> {
        Ok(Self {
            inner: CoreLame::new(m).map_err(elliptic_err)?,
        })
    }

    #[getter]
    fn m(&self) -> f64 {
        self.inner.m
    }

    #[getter]
    fn e0(&self) -> f64 {
        self.inner.e0
    }

    #[getter]
    fn e1(&self) -> f64 {
        self.inner.e1
    }

    #[getter]
    fn e1p(&self) -> f64 {
        self.inner.e1p
    }

    #[getter]
    fn period(&self) -> f64 {
        self.inner.period()
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau()
    }

    fn potential(&self, x: f64) -> f64 {
        self.inner.potential(x)
    }

    fn in_gap(&self, energy: f64) -> bool {
        self.inner.in_gap(energy)
    }

    /// `V` on `n` points starting at `x0` with step `dx`.
    fn sample(&self, x0: f64, dx: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.inner.potential(x0 + i as f64 * dx)).collect()
    }
}

/// Displacement (`gamma=None`) or general superpotential with shift `delta`.
#[pyclass(frozen)]
struct Superpotential {
    inner: CoreSuperpotential,
}

#[pymethods]
impl Superpotential {
    #[new]
    #[pyo3(signature = (m, delta, gamma=None))]
    fn new(m: f64, delta: Complex64, gamma: Option<f64>) -> PyResult<Self> {
        let sys = CoreLame::new(m).map_err(elliptic_err)?;
        let inner = match gamma {
            Some(g) => CoreSuperpotential::general(&sys, delta, g),
            None => CoreSuperpotential::zeta(&sys, delta),
        }
        .map_err(darboux_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    #[getter]
    fn delta(&self) -> Complex64 {
        self.inner.delta
    }

    fn __call__(&self, x: f64) -> PyResult<f64> {
        self.inner.eval(x).map_err(darboux_err)
    }

    fn derivative(&self, x: f64) -> PyResult<f64> {
        self.inner.derivative(x).map_err(darboux_err)
    }

    /// `(alpha, alpha_prime)` on `n` points; guarded points are NaN.
    fn sample(&self, x0: f64, dx: f64, n: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let s = self.inner.sample(x0, dx, n).map_err(darboux_err)?;
        Ok((s.alpha, s.alpha_prime))
    }
}

#[pyfunction]
fn jacobi_elliptic(u: f64, m: f64) -> (f64, f64, f64) {
    jacobi_sncndn(u, m)
}

/// Second-stage superpotential and its derivative from two stage-1 solutions.
#[pyfunction]
#[pyo3(signature = (m, eps1, eps2, x0, dx, n, gammas=(0.0, 0.0)))]
fn backlund_step(
    m: f64,
    eps1: f64,
    eps2: f64,
    x0: f64,
    dx: f64,
    n: usize,
    gammas: (f64, f64),
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let sys = CoreLame::new(m).map_err(elliptic_err)?;
    let sample = |eps: f64, gamma: f64| -> PyResult<_> {
        let (sp, _) = darboux::backlund::stage_superpotential(
            &sys,
            &Stage {
                epsilon: eps,
                source: StageSource::General { gamma },
            },
        )
        .map_err(chain_err)?;
        sp.sample(x0, dx, n).map_err(darboux_err)
    };
    let a = sample(eps1, gammas.0)?;
    let b = sample(eps2, gammas.1)?;
    let s = step(&a, &b, eps1, eps2).map_err(chain_err)?;
    Ok((s.alpha, s.alpha_prime))
}

fn chain_dict<'py>(py: Python<'py>, tp: &darboux::backlund::TransformedPotential) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("x", tp.base.xs())?;
    d.set_item("v_base", tp.base.values.clone())?;
    d.set_item("v_stage1", tp.partial_sums[0].clone())?;
    d.set_item("v_final", tp.final_potential.values.clone())?;
    d.set_item("singularities", tp.singularities.clone())?;
    d.set_item("summary_json", tp.summary_json())?;
    Ok(d)
}

/// Chain potential from stage energies; `gammas` selects general stages.
#[pyfunction]
#[pyo3(signature = (m, energies, grid, gammas=None))]
fn chain_potential<'py>(
    py: Python<'py>,
    m: f64,
    energies: Vec<f64>,
    grid: (f64, f64, usize),
    gammas: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyDict>> {
    if let Some(g) = &gammas {
        if g.len() != energies.len() {
            return Err(value_err("one gamma per energy"));
        }
    }
    if grid.2 < 2 {
        return Err(value_err("grid needs at least two points"));
    }
    let stages = energies
        .iter()
        .enumerate()
        .map(|(i, &epsilon)| Stage {
            epsilon,
            source: match &gammas {
                Some(g) => StageSource::General { gamma: g[i] },
                None => StageSource::Zeta,
            },
        })
        .collect();
    let spec = ChainSpec {
        sys: CoreLame::new(m).map_err(elliptic_err)?,
        stages,
        grid: Grid::span(grid.0, grid.1, grid.2),
    };
    let tp = build_chain(&spec).map_err(chain_err)?;
    chain_dict(py, &tp)
}

fn figure_dict<'py>(py: Python<'py>, fig: &Figure) -> PyResult<Bound<'py, PyDict>> {
    let d = chain_dict(py, &fig.potential)?;
    d.set_item("gammas", fig.gammas.clone())?;
    d.set_item("kappas", fig.kappas.clone())?;
    d.set_item("localized", fig.localization.localized)?;
    d.set_item("tail_deviation", fig.localization.tail_deviation)?;
    Ok(d)
}

/// One level at `eps` below the ground band.
#[pyfunction]
#[pyo3(signature = (m, eps, gamma=None))]
fn fig1<'py>(py: Python<'py>, m: f64, eps: f64, gamma: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
    let opts = Fig1Options {
        gamma,
        ..Default::default()
    };
    let fig = py.detach(|| fig1_construction(m, eps, &opts)).map_err(chain_err)?;
    figure_dict(py, &fig)
}

/// Two levels at `eps1`, `eps2` inside the first gap.
#[pyfunction]
#[pyo3(signature = (m, eps1, eps2, gammas=None))]
fn fig2<'py>(
    py: Python<'py>,
    m: f64,
    eps1: f64,
    eps2: f64,
    gammas: Option<(f64, f64)>,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = Fig2Options {
        gammas,
        ..Default::default()
    };
    let fig = py
        .detach(|| fig2_construction(m, eps1, eps2, &opts))
        .map_err(chain_err)?;
    figure_dict(py, &fig)
}

fn sampled(values: Vec<f64>, x0: f64, dx: f64, period: Option<f64>) -> PyResult<SampledPotential> {
    SampledPotential::new(x0, dx, values, period, "python").map_err(sample_err)
}

/// Trace of the one-period monodromy at `energy`.
#[pyfunction]
fn hill_discriminant(values: Vec<f64>, dx: f64, period: f64, energy: f64) -> PyResult<f64> {
    let v = sampled(values, 0.0, dx, Some(period))?;
    core_hill(&v, energy).map_err(spectral_err)
}

/// `[(energy, "lower" | "upper"), ...]` in `e_range`.
#[pyfunction]
#[pyo3(signature = (values, dx, period, e_range, tol=1e-10, scan=400))]
fn band_edges(
    py: Python<'_>,
    values: Vec<f64>,
    dx: f64,
    period: f64,
    e_range: (f64, f64),
    tol: f64,
    scan: usize,
) -> PyResult<Vec<(f64, &'static str)>> {
    let v = sampled(values, 0.0, dx, Some(period))?;
    let edges = py
        .detach(|| core_band_edges(&v, e_range, tol, scan))
        .map_err(spectral_err)?;
    Ok(edges
        .iter()
        .map(|e| {
            let kind = match e.kind {
                EdgeKind::Lower => "lower",
                EdgeKind::Upper => "upper",
            };
            (e.energy, kind)
        })
        .collect())
}

/// `[(energy, nodes), ...]` in `window`; Floquet ends with the given cell, or Dirichlet.
#[pyfunction]
#[pyo3(signature = (values, x0, dx, window, cell=None, dirichlet=false))]
fn bound_states(
    py: Python<'_>,
    values: Vec<f64>,
    x0: f64,
    dx: f64,
    window: (f64, f64),
    cell: Option<f64>,
    dirichlet: bool,
) -> PyResult<Vec<(f64, usize)>> {
    let v = sampled(values, x0, dx, None)?;
    let opts = BoundStateOptions {
        boundary: if dirichlet {
            Boundary::Dirichlet
        } else {
            Boundary::Floquet { cell }
        },
        ..Default::default()
    };
    let states = py
        .detach(|| core_bound_states(&v, window, &opts))
        .map_err(spectral_err)?;
    Ok(states.iter().map(|s| (s.energy, s.nodes)).collect())
}

/// Adds the classes and functions to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Weierstrass>()?;
    m.add_class::<LameSystem>()?;
    m.add_class::<Superpotential>()?;
    m.add_function(wrap_pyfunction!(jacobi_elliptic, m)?)?;
    m.add_function(wrap_pyfunction!(backlund_step, m)?)?;
    m.add_function(wrap_pyfunction!(chain_potential, m)?)?;
    m.add_function(wrap_pyfunction!(fig1, m)?)?;
    m.add_function(wrap_pyfunction!(fig2, m)?)?;
    m.add_function(wrap_pyfunction!(hill_discriminant, m)?)?;
    m.add_function(wrap_pyfunction!(band_edges, m)?)?;
    m.add_function(wrap_pyfunction!(bound_states, m)?)?;
    Ok(())
}

#[pymodule]
fn darboux_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

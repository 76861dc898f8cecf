//! Finite-difference Bäcklund chains built from Lamé superpotentials.

mod figures;

pub use figures::{
    fig1_construction, fig2_construction, gamma_search_grid, localization, Fig1Options, Fig2Options, Figure,
    Localization, LOCALIZATION_TOL,
};

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::darboux::{
    kappa_for_energy, real_delta_for_energy, riccati_residual, DarbouxError, Direction, Form, SampledSuperpotential,
    Seed, Superpotential,
};
use crate::elliptic::LameSystem;
use crate::potential::{write_columns, SampledPotential};

/// Minimum separation of stage energies.
pub const ENERGY_SEPARATION: f64 = 1e-10;
/// `|α₁(ε₁) - α₁(ε₂)|` below this (relative) is a guarded point of a step.
pub const STEP_GUARD: f64 = 1e-10;
/// Stage residuals skip points where `|α_k|` or `|V_{k-1}|` exceeds this
/// (neighbourhoods of poles of a singular intermediate potential).
pub const POLE_CUTOFF: f64 = 1e2;
/// Largest admissible imaginary part of a chain potential (relative).
pub const REALITY_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum ChainError {
    #[error(transparent)]
    Darboux(#[from] DarbouxError),
    #[error("stage energies {0} and {1} coincide")]
    CoincidentEnergies(f64, f64),
    #[error("energy {0} lies inside an allowed band")]
    InBand(f64),
    #[error("singular step: denominator vanishes at every grid point")]
    SingularStep,
    #[error("singular chain potential at x = {abscissae:?}")]
    Singular { abscissae: Vec<f64> },
    #[error("chain potential is not real: imaginary part {imag:e}")]
    NotReal { imag: f64 },
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error("grid mismatch: {0}")]
    Shape(String),
    #[error("{0}")]
    Domain(String),
}

impl From<crate::potential::SampleError> for ChainError {
    fn from(e: crate::potential::SampleError) -> Self {
        Self::Darboux(e.into())
    }
}

/// Where a stage's first-order superpotential comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StageSource {
    /// Displacement solution; real `δ` below `E0`, `δ = iτ + κ` inside the gap.
    Zeta,
    /// General solution with mixing parameter `Γ`.
    General { gamma: f64 },
    /// `δ = iτ + κ`; `κ` is solved from the energy when not given.
    ComplexDelta { kappa: Option<f64>, gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stage {
    pub epsilon: f64,
    pub source: StageSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl Grid {
    pub fn span(xmin: f64, xmax: f64, n: usize) -> Self {
        Self {
            x0: xmin,
            dx: (xmax - xmin) / (n - 1) as f64,
            n,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSpec {
    pub sys: LameSystem,
    pub stages: Vec<Stage>,
    pub grid: Grid,
}

impl ChainSpec {
    pub fn validate(&self) -> Result<(), ChainError> {
        if self.stages.is_empty() {
            return Err(ChainError::Domain("a chain needs at least one stage".into()));
        }
        if self.grid.n < 16 || !(self.grid.dx > 0.0) {
            return Err(ChainError::Shape(format!("bad grid {:?}", self.grid)));
        }
        for (i, a) in self.stages.iter().enumerate() {
            if !self.sys.in_gap(a.epsilon) && a.epsilon != self.sys.e0 {
                return Err(ChainError::InBand(a.epsilon));
            }
            for b in &self.stages[i + 1..] {
                if (a.epsilon - b.epsilon).abs() <= ENERGY_SEPARATION {
                    return Err(ChainError::CoincidentEnergies(a.epsilon, b.epsilon));
                }
            }
        }
        Ok(())
    }
}

/// Resolved first-order superpotential of one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedStage {
    pub epsilon: f64,
    pub delta_re: f64,
    pub delta_im: f64,
    pub kappa: Option<f64>,
    pub gamma: f64,
}

/// Builds the stage-1 superpotential at `stage.epsilon`.
pub fn stage_superpotential(sys: &LameSystem, stage: &Stage) -> Result<(Superpotential, ResolvedStage), ChainError> {
    let eps = stage.epsilon;
    let below = eps <= sys.e0;
    let complex_delta = |kappa: Option<f64>| -> Result<(Complex64, f64), ChainError> {
        let k = match kappa {
            Some(k) => k,
            None => kappa_for_energy(sys, eps)?,
        };
        Ok((Complex64::new(k, sys.tau()), k))
    };
    let (delta, kappa, gamma) = match stage.source {
        StageSource::Zeta | StageSource::General { .. } if below => {
            let g = match stage.source {
                StageSource::General { gamma } => gamma,
                _ => 0.0,
            };
            (Complex64::new(real_delta_for_energy(sys, eps)?, 0.0), None, g)
        }
        StageSource::Zeta => {
            let (d, k) = complex_delta(None)?;
            (d, Some(k), 0.0)
        }
        StageSource::General { gamma } => {
            let (d, k) = complex_delta(None)?;
            (d, Some(k), gamma)
        }
        StageSource::ComplexDelta { kappa, gamma } => {
            let (d, k) = complex_delta(kappa)?;
            (d, Some(k), gamma)
        }
    };
    let sp = match stage.source {
        StageSource::Zeta => Superpotential::zeta(sys, delta)?,
        _ => Superpotential::general(sys, delta, gamma)?,
    };
    if (sp.epsilon - eps).abs() > 1e-9 * eps.abs().max(1.0) {
        return Err(ChainError::Domain(format!(
            "κ = {kappa:?} gives ε = {} instead of {eps}",
            sp.epsilon
        )));
    }
    Ok((
        sp,
        ResolvedStage {
            epsilon: eps,
            delta_re: delta.re,
            delta_im: delta.im,
            kappa,
            gamma,
        },
    ))
}

/// `α₂ = -α₁(ε₁) - 2(ε₁ - ε₂)/(α₁(ε₁) - α₁(ε₂))`, with
/// `α₂' = -α₁'(ε₁) + 2(ε₁ - ε₂)(α₁'(ε₁) - α₁'(ε₂))/(α₁(ε₁) - α₁(ε₂))²`.
pub fn backlund_step(
    a: &SampledSuperpotential,
    b: &SampledSuperpotential,
    eps1: f64,
    eps2: f64,
) -> Result<SampledSuperpotential, ChainError> {
    if (eps1 - eps2).abs() <= ENERGY_SEPARATION {
        return Err(ChainError::CoincidentEnergies(eps1, eps2));
    }
    if a.len() != b.len() || (a.x0 - b.x0).abs() > 1e-12 * a.dx || (a.dx - b.dx).abs() > 1e-12 * a.dx {
        return Err(ChainError::Shape("stage samples on different grids".into()));
    }
    let de = eps1 - eps2;
    let n = a.len();
    let mut out = SampledSuperpotential {
        x0: a.x0,
        dx: a.dx,
        alpha: Vec::with_capacity(n),
        alpha_prime: Vec::with_capacity(n),
        guarded: Vec::new(),
    };
    for i in 0..n {
        let (av, ad, bv, bd) = (a.alpha[i], a.alpha_prime[i], b.alpha[i], b.alpha_prime[i]);
        let diff = av - bv;
        let ok =
            [av, ad, bv, bd].iter().all(|v| v.is_finite()) && diff.abs() > STEP_GUARD * av.abs().max(bv.abs()).max(1.0);
        if !ok {
            out.alpha.push(f64::NAN);
            out.alpha_prime.push(f64::NAN);
            out.guarded.push(i);
            continue;
        }
        out.alpha.push(-av - 2.0 * de / diff);
        out.alpha_prime.push(-ad + 2.0 * de * (ad - bd) / (diff * diff));
    }
    if out.guarded.len() == n {
        return Err(ChainError::SingularStep);
    }
    Ok(out)
}

/// Per-stage diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: ResolvedStage,
    /// `max |-α' + α² - 2(V_{k-1} - ε_k)|` over points clear of guards and poles
    pub residual: f64,
    /// points skipped by the step guard or [`POLE_CUTOFF`]
    pub guarded: usize,
    /// stage-1 movable singularities or poles (abscissae)
    pub singular_points: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSummary {
    pub m: f64,
    pub energies: Vec<f64>,
    pub stages: Vec<StageReport>,
    pub singularities: Vec<f64>,
    /// largest `|Im V_final| / max(1, |V_final|)`
    pub imag_spread: f64,
    /// largest `|V_final - (V + Σ α_k')| / max(1, Σ|terms|)` where all stages are finite
    pub accumulation_deviation: f64,
    pub max_abs_final: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformedPotential {
    pub base: SampledPotential,
    /// `α_k'` per stage (`NaN` at guarded points)
    pub stage_alpha_prime: Vec<Vec<f64>>,
    /// `V + Σ_{j≤k} α_j'` per stage
    pub partial_sums: Vec<Vec<f64>>,
    pub final_potential: SampledPotential,
    pub singularities: Vec<f64>,
    pub summary: ChainSummary,
}

impl TransformedPotential {
    /// `x, V_base, V_stage1, V_final`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ChainError> {
        let xs = self.base.xs();
        let stage1 = &self.partial_sums[0];
        write_columns(
            out,
            &["x", "V_base", "V_stage1", "V_final"],
            &[&xs, &self.base.values, stage1, &self.final_potential.values],
        )?;
        Ok(())
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }
}

/// `ψ = u_δ - Γ u_{-δ}` at `x`, zeros of `ψ` included.
fn raw_seed(sp: &Superpotential, x: f64) -> Option<Seed> {
    if sp.form != Form::General {
        return sp.seed(x).ok();
    }
    let gamma = sp.gamma.unwrap_or_default();
    let (p, q) = sp.bloch_factors(x).ok()?;
    let top = p.log_scale.max(q.log_scale);
    let fp = (p.log_scale - top).exp();
    let fq = (q.log_scale - top).exp() * gamma;
    Some(Seed {
        log_scale: top,
        psi: p.psi * fp - q.psi * fq,
        dpsi: p.dpsi * fp - q.dpsi * fq,
    })
}

/// Seeds `ψ_k` on the grid.
fn seeds_on_grid(sp: &Superpotential, grid: &Grid) -> Vec<Option<Seed>> {
    (0..grid.n).map(|i| raw_seed(sp, grid.x(i))).collect()
}

/// Pole-free final potential for one or two stages:
/// `V - (log ψ)''` and `V - (log W(ψ₁, ψ₂))''`.
fn closed_form_final(base: &SampledPotential, seeds: &[Vec<Option<Seed>>], energies: &[f64]) -> Vec<Option<Complex64>> {
    (0..base.len())
        .map(|i| {
            let v = base.values[i];
            match (seeds.len(), seeds.first().and_then(|s| s[i])) {
                (1, Some(s)) => {
                    // α' = α² - 2(V - ε) with α = -ψ'/ψ
                    let a = s.alpha();
                    Some(Complex64::new(v, 0.0) + a * a - 2.0 * (v - energies[0]))
                }
                (2, Some(s1)) => {
                    let s2 = seeds[1][i]?;
                    let de = energies[0] - energies[1];
                    let (p1, q1) = (s1.psi, s1.dpsi);
                    let (p2, q2) = (s2.psi, s2.dpsi);
                    let w = p1 * q2 - q1 * p2;
                    let num = (q1 * q1 * p2 * p2 - q2 * q2 * p1 * p1 + p1 * p1 * p2 * p2 * (2.0 * de)) * (2.0 * de);
                    Some(Complex64::new(v, 0.0) + num / (w * w))
                }
                _ => None,
            }
        })
        .collect()
}

/// Grid abscissae where the real part of `f` changes sign or vanishes.
fn sign_changes(grid: &Grid, f: impl Fn(usize) -> Option<f64>) -> Vec<f64> {
    let mut out = Vec::new();
    let mut prev: Option<(usize, f64)> = None;
    for i in 0..grid.n {
        let Some(v) = f(i) else {
            out.push(grid.x(i));
            prev = None;
            continue;
        };
        if v == 0.0 {
            out.push(grid.x(i));
        } else if let Some((j, pv)) = prev {
            if pv.signum() != v.signum() {
                out.push(0.5 * (grid.x(j) + grid.x(i)));
            }
        }
        prev = Some((i, v));
    }
    out
}

/// Wronskian-type determinant whose zeros are the singularities of the
/// final potential (`ψ` itself for one stage).
fn final_determinant(seeds: &[Vec<Option<Seed>>], i: usize) -> Option<f64> {
    match seeds.len() {
        1 => seeds[0][i].map(|s| s.psi.re),
        2 => {
            let (s1, s2) = (seeds[0][i]?, seeds[1][i]?);
            Some((s1.psi * s2.dpsi - s1.dpsi * s2.psi).re)
        }
        _ => None,
    }
}

/// Builds `V_k = V + Σ_{j≤k} α_j'` from the stage specification.
pub fn chain_potential(spec: &ChainSpec) -> Result<TransformedPotential, ChainError> {
    spec.validate()?;
    let g = spec.grid;
    let sys = &spec.sys;
    let base = SampledPotential::from_potential(sys, g.x0, g.dx, g.n)?;
    let energies: Vec<f64> = spec.stages.iter().map(|s| s.epsilon).collect();

    let mut resolved = Vec::new();
    let mut level: Vec<SampledSuperpotential> = Vec::new();
    let mut seeds = Vec::new();
    for stage in &spec.stages {
        let (sp, r) = stage_superpotential(sys, stage)?;
        level.push(sp.sample(g.x0, g.dx, g.n)?);
        if spec.stages.len() <= 2 {
            seeds.push(seeds_on_grid(&sp, &g));
        }
        let mut sing: Vec<f64> = level.last().unwrap().guarded.iter().map(|&i| g.x(i)).collect();
        sing.extend(sp.movable_singularities(g.x0, g.dx, g.n)?);
        sing.sort_by(f64::total_cmp);
        sing.dedup();
        resolved.push((r, sing));
    }

    let mut current = base.values.clone();
    let mut stage_alpha_prime = Vec::new();
    let mut partial_sums = Vec::new();
    let mut reports = Vec::new();
    for k in 0..spec.stages.len() {
        let alpha_k = level[0].clone();
        // residual of this stage against the previous potential at ε_k
        let finite = current.iter().map(|v| if v.is_finite() { *v } else { 0.0 }).collect();
        let prev = SampledPotential::new(g.x0, g.dx, finite, None, "stage")?;
        let mut masked = alpha_k.clone();
        for (i, v) in current.iter().enumerate() {
            if !v.is_finite() || v.abs() > POLE_CUTOFF || masked.alpha[i].abs() > POLE_CUTOFF {
                masked.alpha[i] = f64::NAN;
            }
        }
        let rep = riccati_residual(&masked, &prev, energies[k], Direction::Forward)?;
        let (stage_info, sing) = resolved[k].clone();
        reports.push(StageReport {
            stage: stage_info,
            residual: rep.max,
            guarded: rep.guarded,
            singular_points: if k == 0 {
                sing
            } else {
                alpha_k.guarded.iter().map(|&i| g.x(i)).collect()
            },
        });
        for (c, d) in current.iter_mut().zip(&alpha_k.alpha_prime) {
            *c += d;
        }
        stage_alpha_prime.push(alpha_k.alpha_prime.clone());
        partial_sums.push(current.clone());
        let next: Result<Vec<_>, _> = level[1..]
            .iter()
            .zip(&energies[k + 1..])
            .map(|(b, &eb)| backlund_step(&alpha_k, b, energies[k], eb))
            .collect();
        level = next?;
    }

    let (final_values, singularities, imag_spread) = if seeds.is_empty() {
        let sing: Vec<f64> = (0..g.n).filter(|&i| !current[i].is_finite()).map(|i| g.x(i)).collect();
        (current.clone(), sing, 0.0)
    } else {
        let closed = closed_form_final(&base, &seeds, &energies);
        let sing = sign_changes(&g, |i| final_determinant(&seeds, i));
        let mut imag: f64 = 0.0;
        let values: Vec<f64> = closed
            .iter()
            .map(|z| match z {
                Some(z) if z.re.is_finite() => {
                    imag = imag.max(z.im.abs() / z.re.abs().max(1.0));
                    z.re
                }
                _ => f64::NAN,
            })
            .collect();
        (values, sing, imag)
    };

    let mut deviation: f64 = 0.0;
    for i in 0..g.n {
        let terms: Vec<f64> = stage_alpha_prime.iter().map(|s| s[i]).collect();
        if final_values[i].is_finite() && terms.iter().all(|t| t.is_finite()) {
            let scale = terms.iter().map(|t| t.abs()).sum::<f64>() + base.values[i].abs();
            deviation = deviation.max((final_values[i] - current[i]).abs() / scale.max(1.0));
        }
    }

    let max_abs_final = final_values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let summary = ChainSummary {
        m: sys.m,
        energies: energies.clone(),
        stages: reports,
        singularities: singularities.clone(),
        imag_spread,
        accumulation_deviation: deviation,
        max_abs_final,
    };
    if !singularities.is_empty() || final_values.iter().any(|v| !v.is_finite()) {
        return Err(ChainError::Singular {
            abscissae: if singularities.is_empty() {
                (0..g.n)
                    .filter(|&i| !final_values[i].is_finite())
                    .map(|i| g.x(i))
                    .collect()
            } else {
                singularities
            },
        });
    }
    if imag_spread > REALITY_TOL {
        return Err(ChainError::NotReal { imag: imag_spread });
    }
    let final_potential = SampledPotential::new(
        g.x0,
        g.dx,
        final_values,
        None,
        format!("chain(m={}, eps={:?})", sys.m, energies),
    )?;
    Ok(TransformedPotential {
        base,
        stage_alpha_prime,
        partial_sums,
        final_potential,
        singularities,
        summary,
    })
}

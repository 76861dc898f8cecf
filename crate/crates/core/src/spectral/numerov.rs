use serde::Serialize;

use super::SpectralError;

/// `|ψ|` above this triggers a rescale of the stored solution.
const RESCALE_AT: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sweep {
    /// from the first sample towards the last
    Forward,
    /// from the last sample towards the first
    Backward,
}

/// Solution of `-½ψ'' + Vψ = Eψ` on the sample grid. The true solution is
/// `psi · exp(log_scale)`; samples overwritten by a rescale are scaled too.
#[derive(Debug, Clone, PartialEq)]
pub struct NumerovSolution {
    /// indexed like the potential samples, whatever the sweep direction
    pub psi: Vec<f64>,
    pub log_scale: f64,
    pub rescaled: bool,
}

/// `f = 2(V - E)` so that `ψ'' = f ψ`.
pub(crate) fn coefficients(values: &[f64], energy: f64) -> Vec<f64> {
    values.iter().map(|v| 2.0 * (v - energy)).collect()
}

/// Numerov recursion for `ψ'' = 2(V - E)ψ` from two starting samples
/// (`start.0` at the first index of the sweep, `start.1` at the next).
pub fn numerov_integrate(
    values: &[f64],
    dx: f64,
    energy: f64,
    sweep: Sweep,
    start: (f64, f64),
) -> Result<NumerovSolution, SpectralError> {
    let n = values.len();
    if n < 3 || !(dx > 0.0) {
        return Err(SpectralError::Grid(format!("{n} samples with dx = {dx}")));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(SpectralError::Grid(format!("non-finite potential sample {i}")));
    }
    let f = coefficients(values, energy);
    let g = increments(&f, dx);
    let h2 = dx * dx / 12.0;
    let idx = |k: usize| match sweep {
        Sweep::Forward => k,
        Sweep::Backward => n - 1 - k,
    };
    // φ = (1 - h²f/12) ψ in the difference form
    let mut phi = vec![0.0; n];
    phi[idx(0)] = start.0 * (1.0 - h2 * f[idx(0)]);
    phi[idx(1)] = start.1 * (1.0 - h2 * f[idx(1)]);
    let mut d = phi[idx(1)] - phi[idx(0)];
    let mut log_scale = 0.0;
    let mut rescaled = false;
    for k in 1..n - 1 {
        d += g[idx(k)] * phi[idx(k)];
        let next = phi[idx(k)] + d;
        phi[idx(k + 1)] = next;
        if next.abs() > RESCALE_AT {
            let s = 1.0 / next.abs();
            for j in 0..=k + 1 {
                phi[idx(j)] *= s;
            }
            d *= s;
            log_scale -= s.ln();
            rescaled = true;
        }
    }
    let psi = phi.iter().zip(&f).map(|(p, fk)| p / (1.0 - h2 * fk)).collect();
    Ok(NumerovSolution {
        psi,
        log_scale,
        rescaled,
    })
}

/// Second starting sample from `ψ(x₀)`, `ψ'(x₀)` by a Taylor step, with
/// `f'` and `f''` from one-sided differences along the sweep.
pub fn taylor_start(values: &[f64], dx: f64, energy: f64, sweep: Sweep, psi0: f64, dpsi0: f64) -> f64 {
    let n = values.len();
    let at = |k: usize| {
        let i = match sweep {
            Sweep::Forward => k.min(n - 1),
            Sweep::Backward => n - 1 - k.min(n - 1),
        };
        2.0 * (values[i] - energy)
    };
    let (f0, f1, f2, f3) = (at(0), at(1), at(2), at(3));
    // derivatives along the sweep direction
    let h = dx;
    let fp = (-11.0 * f0 + 18.0 * f1 - 9.0 * f2 + 2.0 * f3) / (6.0 * h);
    let fpp = (2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) / (h * h);
    let d = match sweep {
        Sweep::Forward => dpsi0,
        Sweep::Backward => -dpsi0,
    };
    let p2 = f0 * psi0;
    let p3 = fp * psi0 + f0 * d;
    let p4 = fpp * psi0 + 2.0 * fp * d + f0 * f0 * psi0;
    psi0 + h * d + h * h / 2.0 * p2 + h.powi(3) / 6.0 * p3 + h.powi(4) / 24.0 * p4
}

/// `g_k = c_k - 2` of `φ_{k+1} + φ_{k-1} = c_k φ_k`, kept separate from the 2
/// so that sweeps can run in the difference form
/// `d_k = d_{k-1} + g_k φ_k`, `φ_{k+1} = φ_k + d_k` (round-off `O(ε/h)`
/// instead of `O(ε/h²)`).
pub(crate) fn increments(f: &[f64], dx: f64) -> Vec<f64> {
    let h2 = dx * dx;
    f.iter().map(|&fk| h2 * fk / (1.0 - h2 * fk / 12.0)).collect()
}

/// Transfer of the scaled variable `φ = (1 - h²f/12) ψ` over `steps`
/// samples from `first`, as the matrix taking `(φ_first, φ_{first+1})` to
/// `(φ_{first+steps}, φ_{first+steps+1})`. Indices wrap modulo `f.len()`
/// when `wrap` is set.
pub(crate) fn transfer(f: &[f64], dx: f64, first: usize, steps: usize, wrap: bool) -> [[f64; 2]; 2] {
    let n = f.len();
    let h2 = dx * dx;
    let g = |k: usize| {
        let fk = if wrap { f[k % n] } else { f[k] };
        h2 * fk / (1.0 - h2 * fk / 12.0)
    };
    // columns: solutions started from (1, 0) and (0, 1), carried as (φ_k, d_k)
    let mut phi = [1.0, 0.0];
    let mut d = [-1.0, 1.0];
    for k in first + 1..first + 1 + steps {
        let gk = g(k);
        for col in 0..2 {
            phi[col] += d[col];
            d[col] += gk * phi[col];
        }
    }
    [[phi[0], phi[1]], [phi[0] + d[0], phi[1] + d[1]]]
}

/// `1 - h² f / 12`, the factor between `φ` and `ψ`.
pub(crate) fn phi_factor(f: f64, dx: f64) -> f64 {
    1.0 - dx * dx * f / 12.0
}

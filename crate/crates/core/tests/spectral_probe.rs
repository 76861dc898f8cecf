use std::f64::consts::PI;

use darboux::backlund::{fig1_construction, fig2_construction, Fig1Options, Fig2Options};
use darboux::elliptic::LameSystem;
use darboux::potential::{Constant, FnPotential, SampledPotential, Shifted};
use darboux::spectral::*;
use nalgebra::DMatrix;

fn lame_period(m: f64, n: usize) -> (LameSystem, SampledPotential) {
    let s = LameSystem::new(m).unwrap();
    let t = s.period();
    let v = SampledPotential::from_potential(&s, 0.0, t / (n - 1) as f64, n).unwrap();
    (s, v)
}

fn sine_error(n: usize) -> f64 {
    let h = PI / (n - 1) as f64;
    let v = vec![0.0; n];
    let sol = numerov_integrate(&v, h, 0.5, Sweep::Forward, (0.0, h.sin())).unwrap();
    sol.psi
        .iter()
        .enumerate()
        .map(|(i, p)| (p - (i as f64 * h).sin()).abs())
        .fold(0.0, f64::max)
}

#[test]
fn numerov_reproduces_sine() {
    assert!(sine_error(2001) < 1e-9);
    let v = vec![0.0; 2001];
    let h = PI / 2000.0;
    let psi1 = taylor_start(&v, h, 0.5, Sweep::Forward, 0.0, 1.0);
    let sol = numerov_integrate(&v, h, 0.5, Sweep::Forward, (0.0, psi1)).unwrap();
    assert!((sol.psi[1000] - 1.0).abs() < 1e-9);
    assert!(!sol.rescaled);
}

#[test]
fn numerov_converges_at_fourth_order() {
    let errs: Vec<f64> = [41, 81, 161].iter().map(|&n| sine_error(n)).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 4.0).abs() < 0.3, "observed order {order}");
    }
}

#[test]
fn backward_sweep_matches_forward() {
    let n = 1001;
    let h = 6.0 / (n - 1) as f64;
    let v: Vec<f64> = (0..n).map(|i| 0.3 * (i as f64 * h).cos()).collect();
    let fwd = numerov_integrate(&v, h, 0.2, Sweep::Forward, (1.0, 1.01)).unwrap();
    let (a, b) = (fwd.psi[n - 1], fwd.psi[n - 2]);
    let bwd = numerov_integrate(&v, h, 0.2, Sweep::Backward, (a, b)).unwrap();
    assert!((bwd.psi[0] - 1.0).abs() < 1e-10);
    assert!((bwd.psi[1] - 1.01).abs() < 1e-10);
}

#[test]
fn forbidden_growth_is_rescaled() {
    // ψ = sinh(10x)/10 overflows long before x = 100
    let n = 20001;
    let h = 100.0 / (n - 1) as f64;
    let v = vec![0.0; n];
    let psi1 = taylor_start(&v, h, -50.0, Sweep::Forward, 0.0, 1.0);
    let sol = numerov_integrate(&v, h, -50.0, Sweep::Forward, (0.0, psi1)).unwrap();
    assert!(sol.rescaled);
    let log_end = sol.log_scale + sol.psi[n - 1].ln();
    let want = 1000.0 - 20f64.ln();
    assert!((log_end - want).abs() < 1e-6 * want, "{log_end} vs {want}");
    assert!(sol.psi.iter().all(|p| p.is_finite()));
}

#[test]
fn free_particle_discriminant() {
    let n = 4001;
    let v = SampledPotential::new(0.0, PI / (n - 1) as f64, vec![0.0; n], Some(PI), "free").unwrap();
    for i in 0..40 {
        let e = -1.0 + 0.15 * i as f64;
        let want = if e >= 0.0 {
            2.0 * (PI * (2.0 * e).sqrt()).cos()
        } else {
            2.0 * (PI * (-2.0 * e).sqrt()).cosh()
        };
        let got = hill_discriminant(&v, e).unwrap();
        assert!((got - want).abs() < 1e-8, "E = {e}: {got} vs {want}");
    }
}

#[test]
fn lame_band_edges() {
    for m in [0.25, 0.5, 0.75] {
        let start = std::time::Instant::now();
        let (s, v) = lame_period(m, 4001);
        let edges = band_edges(&v, (s.e0 - 0.3, s.e1p + 0.2), 1e-12, 200).unwrap();
        assert!(start.elapsed().as_secs_f64() < 30.0);
        let want = [
            (s.e0, EdgeKind::Lower),
            (s.e1, EdgeKind::Upper),
            (s.e1p, EdgeKind::Lower),
        ];
        assert_eq!(edges.len(), 3, "m = {m}: {edges:?}");
        for (e, (w, kind)) in edges.iter().zip(want) {
            assert!((e.energy - w).abs() < 1e-4, "m = {m}: {} vs {w}", e.energy);
            assert_eq!(e.kind, kind);
            assert!((e.discriminant.abs() - 2.0).abs() < 1e-6);
        }
        // E0 is a periodic edge, E1 and E1' antiperiodic
        assert!(edges[0].discriminant > 0.0 && edges[1].discriminant < 0.0 && edges[2].discriminant < 0.0);
    }
}

#[test]
fn discriminant_inside_band_and_gap() {
    let (s, v) = lame_period(0.5, 2001);
    let width = s.e1 - s.e0;
    for i in 0..20 {
        let e = s.e0 + 0.01 * width + 0.98 * width * i as f64 / 19.0;
        assert!(hill_discriminant(&v, e).unwrap().abs() <= 2.0 + 1e-8);
    }
    let gap = s.e1p - s.e1;
    for i in 0..20 {
        let e = s.e1 + 0.01 * gap + 0.98 * gap * i as f64 / 19.0;
        assert!(hill_discriminant(&v, e).unwrap().abs() > 2.0);
    }
    assert!(hill_discriminant(&v, 0.5 * (s.e1 + s.e1p)).unwrap().abs() > 2.0);
}

#[test]
fn constant_potential_has_one_edge() {
    let c = 0.3;
    let mut v = SampledPotential::from_potential(&Constant(c), 0.0, 1.0 / 1000.0, 1001).unwrap();
    v.period = Some(1.0);
    let edges = band_edges(&v, (c - 1.0, c + 30.0), 1e-12, 400).unwrap();
    assert_eq!(edges.len(), 1, "{edges:?}");
    assert!((edges[0].energy - c).abs() < 1e-9);
    assert_eq!(edges[0].kind, EdgeKind::Lower);
}

#[test]
fn coarse_steps_on_a_discontinuous_cell_fail_the_order_check() {
    // Kronig-Penney cell: Numerov loses its order at the jumps
    let kp = FnPotential::new("kp", |x: f64| if x.rem_euclid(1.0) < 0.5 { 5.0 } else { 0.0 }).with_period(1.0);
    let v = SampledPotential::from_potential(&kp, 0.013, 1.0 / 256.0, 257).unwrap();
    let err = hill_discriminant(&v, 1.7).unwrap_err();
    assert!(matches!(err, SpectralError::Accuracy { .. }), "{err}");
    let smooth = FnPotential::new("cos", |x: f64| 5.0 * (2.0 * PI * x).cos()).with_period(1.0);
    let w = SampledPotential::from_potential(&smooth, 0.0, 1.0 / 256.0, 257).unwrap();
    assert!(hill_discriminant(&w, 1.7).is_ok());
}

#[test]
fn discriminant_needs_a_period() {
    let v = SampledPotential::new(0.0, 0.01, vec![0.0; 100], None, "flat").unwrap();
    assert!(matches!(hill_discriminant(&v, 0.1), Err(SpectralError::NotPeriodic)));
}

#[test]
fn particle_in_a_box() {
    let l = 2.0;
    let n = 4001;
    let v = SampledPotential::new(0.0, l / (n - 1) as f64, vec![0.0; n], None, "box").unwrap();
    let opts = BoundStateOptions {
        boundary: Boundary::Dirichlet,
        scan: 2000,
        ..Default::default()
    };
    let levels = bound_states(&v, (0.1, 30.0), &opts).unwrap();
    assert_eq!(levels.len(), 4, "{levels:?}");
    for (k, st) in levels.iter().enumerate() {
        let j = (k + 1) as f64;
        let want = j * j * PI * PI / (2.0 * l * l);
        assert!(((st.energy - want) / want).abs() < 1e-6, "{} vs {want}", st.energy);
        assert_eq!(st.nodes, k);
    }
}

/// Lowest eigenvalues of the second-order finite-difference Hamiltonian.
fn fd_levels(v: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Vec<f64> {
    let h = (b - a) / (n + 1) as f64;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let x = a + (i + 1) as f64 * h;
        m[(i, i)] = 1.0 / (h * h) + v(x);
        if i + 1 < n {
            m[(i, i + 1)] = -0.5 / (h * h);
            m[(i + 1, i)] = -0.5 / (h * h);
        }
    }
    let mut e: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn one_soliton_well_has_one_level() {
    let well = |x: f64| 1.0 / 3.0 - 1.0 / x.cosh().powi(2);
    let v = SampledPotential::on_interval(&FnPotential::new("sech2", well), -20.0, 20.0, 8001).unwrap();
    let levels = bound_states(&v, (-0.6, 1.0 / 3.0 - 1e-3), &BoundStateOptions::default()).unwrap();
    assert_eq!(levels.len(), 1);
    assert!((levels[0].energy + 1.0 / 6.0).abs() < 1e-8);
    assert_eq!(levels[0].nodes, 0);
    let fd = fd_levels(well, -12.0, 12.0, 400);
    assert!(
        (fd[0] - levels[0].energy).abs() < 2e-3,
        "{} vs {}",
        fd[0],
        levels[0].energy
    );
    assert!(fd[1] > 1.0 / 3.0 - 1e-2);
}

#[test]
fn displaced_lame_has_no_gap_states() {
    let s = LameSystem::new(0.5).unwrap();
    let t = s.period();
    let shifted = Shifted { inner: &s, shift: 0.37 };
    let mut v = SampledPotential::from_potential(&shifted, -8.0 * t, t / 400.0, 16 * 400 + 1).unwrap();
    v.period = Some(t);
    let opts = BoundStateOptions::default();
    assert!(bound_states(&v, (s.e1 + 1e-3, s.e1p - 1e-3), &opts).unwrap().is_empty());
    assert!(bound_states(&v, (s.e0 - 1.0, s.e0 - 1e-3), &opts).unwrap().is_empty());
}

#[test]
fn window_touching_a_band_is_rejected() {
    let s = LameSystem::new(0.5).unwrap();
    let t = s.period();
    let mut v = SampledPotential::from_potential(&s, 0.0, t / 200.0, 8 * 200 + 1).unwrap();
    v.period = Some(t);
    let err = bound_states(&v, (s.e1 - 0.05, s.e1 + 0.05), &BoundStateOptions::default()).unwrap_err();
    assert!(matches!(err, SpectralError::Window(_)));
}

#[test]
fn fig1_inserts_one_level_below_the_ground_band() {
    let s = LameSystem::new(0.5).unwrap();
    let fig = fig1_construction(0.5, -0.35, &Fig1Options::default()).unwrap();
    let mut v = fig.potential.final_potential.clone();
    v.period = Some(s.period());
    let opts = BoundStateOptions::default();
    let below = bound_states(&v, (s.e0 - 1.0, s.e0 - 1e-3), &opts).unwrap();
    assert_eq!(below.len(), 1);
    assert!((below[0].energy + 0.35).abs() < 1e-3);
    assert_eq!(below[0].nodes, 0);
    assert!(below[0].edge_amplitude < 1e-4);
    assert!(bound_states(&v, (s.e1 + 1e-3, s.e1p - 1e-3), &opts).unwrap().is_empty());
}

#[test]
fn fig2_inserts_two_gap_levels() {
    let s = LameSystem::new(0.5).unwrap();
    let fig = fig2_construction(0.5, 0.08, 0.17, &Fig2Options::default()).unwrap();
    let mut v = fig.potential.final_potential.clone();
    v.period = Some(s.period());
    let opts = BoundStateOptions::default();
    let gap = bound_states(&v, (s.e1 + 1e-3, s.e1p - 1e-3), &opts).unwrap();
    assert_eq!(gap.len(), 2, "{gap:?}");
    assert!((gap[0].energy - 0.08).abs() < 1e-3);
    assert!((gap[1].energy - 0.17).abs() < 1e-3);
    assert!(bound_states(&v, (s.e0 - 1.0, s.e0 - 1e-3), &opts).unwrap().is_empty());
    // background away from the defect keeps the Lamé edges
    for side in [Side::Left, Side::Right] {
        let cell = boundary_cell(&v, side, s.period()).unwrap();
        let edges = band_edges_unchecked(&cell, (s.e0 - 0.3, s.e1p + 0.2), 1e-10, 200).unwrap();
        assert_eq!(edges.len(), 3);
        for (e, w) in edges.iter().zip([s.e0, s.e1, s.e1p]) {
            assert!((e.energy - w).abs() < 1e-3, "{side:?}: {} vs {w}", e.energy);
        }
    }
}

#[test]
fn report_is_deterministic_json() {
    let (s, v) = lame_period(0.25, 801);
    let a = SpectralReport::periodic(&v, (s.e0 - 0.2, s.e1p + 0.1), 1e-10, 50).unwrap();
    let b = SpectralReport::periodic(&v, (s.e0 - 0.2, s.e1p + 0.1), 1e-10, 50).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    let json: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
    assert_eq!(json["band_edges"].as_array().unwrap().len(), 3);
    assert_eq!(json["discriminant_samples"].as_array().unwrap().len(), 50);
    assert_eq!(json["band_edges"][0]["kind"], "Lower");
}

use std::fs::File;
use std::io::BufReader;

use darboux::elliptic::golden::{read_golden, relative_error, GoldenFn};
use darboux::elliptic::{
    addition_residual, ellipe, ellipk, jacobi_sn, lame_identity_residual, weierstrass_ode_residual, Branch,
    EllipticError, LameSystem, Weierstrass,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fixture() -> Vec<darboux::elliptic::golden::GoldenRecord> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/golden_sample.jsonl");
    read_golden(BufReader::new(File::open(path).unwrap())).unwrap()
}

#[test]
fn bundled_reference_values_agree() {
    let recs = fixture();
    assert!(recs.len() >= 60);
    let mut worst = (0.0, String::new());
    for rec in &recs {
        let err = relative_error(rec).unwrap();
        if err > worst.0 {
            worst = (err, format!("{} m={} z={}", rec.func, rec.m, rec.z));
        }
    }
    assert!(worst.0 < 1e-12, "worst relative error {:e} at {}", worst.0, worst.1);
}

#[test]
fn wp_at_half_periods_equals_roots() {
    let w = Weierstrass::from_modulus(0.5).unwrap();
    let inv = *w.invariants();
    let (om, tau) = (inv.omega, inv.tau);
    assert!((w.wp(c(om, 0.0)).unwrap() - inv.e1).norm() < 1e-13);
    assert!((w.wp(c(om, tau)).unwrap() - inv.e2).norm() < 1e-13);
    assert!((w.wp(c(0.0, tau)).unwrap() - inv.e3).norm() < 1e-13);
    for z in [c(om, 0.0), c(om, tau), c(0.0, tau)] {
        assert!(w.wp_prime(z).unwrap().norm() < 1e-12);
        assert!(weierstrass_ode_residual(&w, z).unwrap() < 1e-12);
    }
}

#[test]
fn laurent_leading_terms() {
    let w = Weierstrass::from_modulus(0.5).unwrap();
    for z in [c(1e-3, 0.0), c(2e-4, 3e-4), c(-5e-4, 1e-4)] {
        assert!((w.wp(z).unwrap() * z * z - 1.0).norm() < 1e-9);
        assert!((w.wp_prime(z).unwrap() * z * z * z + 2.0).norm() < 1e-9);
        assert!((w.sigma(z) / z - 1.0).norm() < 1e-12);
    }
}

#[test]
fn pole_exclusion() {
    let w = Weierstrass::from_modulus(0.5).unwrap();
    let om = w.invariants().omega;
    match w.wp(c(2.0 * om + 1e-8, 0.0)) {
        Err(EllipticError::Pole { distance }) => assert!(distance < 1e-7),
        other => panic!("expected pole error, got {other:?}"),
    }
    assert!(w.zeta(c(0.0, 0.0)).is_err());
    assert_eq!(w.sigma(c(0.0, 0.0)), c(0.0, 0.0));
    let relaxed = Weierstrass::from_modulus(0.5).unwrap().with_pole_radius(1e-10);
    assert!(relaxed.wp(c(1e-8, 0.0)).is_ok());
}

#[test]
fn half_period_constants() {
    // η = E(m) - e1 K(m) for the lattice with e1 - e3 = 1
    for &m in &[0.25, 0.5, 0.75] {
        let w = Weierstrass::from_modulus(m).unwrap();
        let e1 = (2.0 - m) / 3.0;
        let expected = ellipe(m) - e1 * ellipk(m);
        assert!((w.eta() - expected).abs() < 1e-13, "m={m}");
        let inv = w.invariants();
        let zeta_tau = w.zeta(c(0.0, inv.tau)).unwrap();
        assert!((zeta_tau - w.eta_prime()).norm() < 1e-12);
    }
}

fn quasi_random_cell_points(w: &Weierstrass, count: usize) -> Vec<Complex64> {
    // Halton (2, 3) over the fundamental cell [0, 2ω) × [0, 2τ)
    let inv = w.invariants();
    let halton = |mut i: usize, base: usize| {
        let (mut f, mut r) = (1.0, 0.0);
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    };
    (1..)
        .map(|i| c(2.0 * inv.omega * halton(i, 2), 2.0 * inv.tau * halton(i, 3)))
        .filter(|&z| w.lattice_distance(z) > 0.05)
        .take(count)
        .collect()
}

#[test]
fn ode_residual_on_quasi_random_points() {
    for &m in &[0.25, 0.5, 0.75] {
        let w = Weierstrass::from_modulus(m).unwrap();
        for z in quasi_random_cell_points(&w, 200) {
            let scale = w.wp(z).unwrap().norm().powi(3).max(1.0);
            let r = weierstrass_ode_residual(&w, z).unwrap();
            assert!(r / scale < 1e-9, "m={m} z={z} residual {r:e}");
        }
    }
    let w = Weierstrass::from_modulus(0.5).unwrap();
    let om = w.invariants().omega;
    assert!(weierstrass_ode_residual(&w, c(om / 2.0, 0.0)).unwrap() < 1e-10);
    assert!(weierstrass_ode_residual(&w, c(0.3, 0.9)).unwrap() < 1e-10);
    let z = c(0.7, 0.3);
    let p = w.wp(z).unwrap();
    let dp = w.wp_prime(z).unwrap();
    assert!((dp * dp - (p * p * p * 4.0 - p)).norm() < 1e-10);
}

#[test]
fn parity_and_periodicity() {
    let w = Weierstrass::from_modulus(0.5).unwrap();
    let inv = *w.invariants();
    let shift_re = c(2.0 * inv.omega, 0.0);
    let shift_im = c(0.0, 2.0 * inv.tau);
    let zeta_jump = w.zeta(c(0.8, 0.0) + shift_re).unwrap() - w.zeta(c(0.8, 0.0)).unwrap();
    for z in quasi_random_cell_points(&w, 50) {
        assert!((w.wp(-z).unwrap() - w.wp(z).unwrap()).norm() < 1e-10);
        assert!(
            (w.wp_prime(-z).unwrap() + w.wp_prime(z).unwrap()).norm() < 1e-10 * w.wp_prime(z).unwrap().norm().max(1.0)
        );
        assert!((w.zeta(-z).unwrap() + w.zeta(z).unwrap()).norm() < 1e-10);
        assert!((w.sigma(-z) + w.sigma(z)).norm() < 1e-10 * w.sigma(z).norm().max(1.0));
        assert!((w.wp(z + shift_re).unwrap() - w.wp(z).unwrap()).norm() < 1e-9);
        assert!((w.wp(z + shift_im).unwrap() - w.wp(z).unwrap()).norm() < 1e-9);
        let jump = w.zeta(z + shift_re).unwrap() - w.zeta(z).unwrap();
        assert!((jump - zeta_jump).norm() < 1e-10);
    }
    assert!((zeta_jump - 2.0 * w.eta()).norm() < 1e-12);
}

#[test]
fn derivative_chain_converges_at_second_order() {
    let w = Weierstrass::from_modulus(0.5).unwrap();
    let z = c(0.5, 0.2);
    let zeta_err = |h: f64| {
        let fd = (w.zeta(z + h).unwrap() - w.zeta(z - h).unwrap()) / (2.0 * h);
        (fd + w.wp(z).unwrap()).norm()
    };
    let sigma_err = |h: f64| {
        let fd = (w.sigma(z + h).ln() - w.sigma(z - h).ln()) / (2.0 * h);
        (fd - w.zeta(z).unwrap()).norm()
    };
    for err in [&zeta_err as &dyn Fn(f64) -> f64, &sigma_err] {
        let (e1, e2) = (err(1e-2), err(5e-3));
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.2, "observed order {order}");
    }
    // central-difference truncation is h² |℘'(z)| / 6
    let bound = 1e-8 * w.wp_prime(z).unwrap().norm() / 6.0;
    assert!(sigma_err(1e-4) < 2.0 * bound);
}

#[test]
fn lame_identity_on_grid() {
    for &m in &[0.25, 0.5, 0.75] {
        let sys = LameSystem::new(m).unwrap();
        let w = Weierstrass::new(sys.inv);
        let om = sys.omega();
        let worst = (0..2001)
            .map(|i| -3.0 * om + 6.0 * om * i as f64 / 2000.0)
            .map(|x| lame_identity_residual(&w, &sys, x).unwrap())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "m={m}: {worst:e}");
    }
    let sys = LameSystem::new(0.5).unwrap();
    let w = Weierstrass::new(sys.inv);
    let sn = jacobi_sn(0.9, 0.5);
    let rhs = w.wp(c(0.9, sys.tau())).unwrap().re + 0.5;
    assert!((0.5 * sn * sn - rhs).abs() < 1e-10);
}

#[test]
fn addition_law_both_branches() {
    let w = Weierstrass::from_modulus(0.5).unwrap();
    assert!(addition_residual(&w, 0.6, 0.9, Branch::Singular).unwrap() < 1e-9);
    assert!(addition_residual(&w, 0.6, 0.9, Branch::Regular).unwrap() < 1e-9);
    assert!(matches!(
        addition_residual(&w, 0.6, 0.6, Branch::Singular),
        Err(EllipticError::DegeneratePair { .. })
    ));
    // v = -u puts u + v on the lattice
    assert!(matches!(
        addition_residual(&w, 0.6, -0.6, Branch::Regular),
        Err(EllipticError::Pole { .. })
    ));
}

#[test]
fn degenerate_lattices_use_closed_forms() {
    let one = Weierstrass::from_modulus(1.0).unwrap();
    for &x in &[-2.0, 0.3, 1.7] {
        let z = c(x, 0.4);
        let expected = 1.0 / 3.0 + 1.0 / z.sinh().powi(2);
        assert!((one.wp(z).unwrap() - expected).norm() < 1e-13);
        assert!(weierstrass_ode_residual(&one, z).unwrap() < 1e-11);
        // regular branch is the transparent well 1/3 - sech²x
        let v = one.wp(c(x, one.invariants().tau)).unwrap();
        assert!((v.re - (1.0 / 3.0 - 1.0 / x.cosh().powi(2))).abs() < 1e-13);
        assert!(v.im.abs() < 1e-13);
    }
    let zero = Weierstrass::from_modulus(0.0).unwrap();
    let z = c(0.7, 0.2);
    assert!((zero.wp(z).unwrap() - (-1.0 / 3.0 + 1.0 / z.sin().powi(2))).norm() < 1e-13);
    assert!((zero.sigma(z) - z.sin() * (z * z / 6.0).exp()).norm() < 1e-13);
    // far out on the real axis the closed forms must stay finite
    assert!(one.zeta(c(400.0, 0.1)).unwrap().is_finite());
    assert!(one.sigma_scaled(c(900.0, 0.0)).value.is_finite());
}

#[test]
fn golden_sn_records_are_real() {
    for rec in fixture().iter().filter(|r| r.func == GoldenFn::Sn) {
        assert_eq!(rec.z.im, 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn addition_law_random_pairs(u in 0.05f64..3.6, v in 0.05f64..3.6, m in 0.2f64..0.8) {
        let w = Weierstrass::from_modulus(m).unwrap();
        let period = 2.0 * w.invariants().omega;
        let near_lattice = |x: f64| { let r = x.rem_euclid(period); r.min(period - r) < 0.05 };
        prop_assume!(!near_lattice(u) && !near_lattice(v) && !near_lattice(u + v));
        for branch in [Branch::Singular, Branch::Regular] {
            match addition_residual(&w, u, v, branch) {
                Ok(r) => {
                    let scale = w.wp(c(u + v, 0.0)).unwrap().norm().max(1.0);
                    prop_assert!(r / scale < 1e-8, "residual {r:e}");
                }
                Err(EllipticError::DegeneratePair { .. }) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }

    #[test]
    fn sigma_logarithmic_derivative_is_zeta(re in -6.0f64..6.0, im in -6.0f64..6.0) {
        let w = Weierstrass::from_modulus(0.5).unwrap();
        let z = c(re, im);
        prop_assume!(w.lattice_distance(z) > 0.1);
        let s = w.sigma_scaled(z);
        let ratio = s.derivative / s.value;
        let zeta = w.zeta(z).unwrap();
        prop_assert!((ratio - zeta).norm() < 1e-9 * zeta.norm().max(1.0));
    }
}

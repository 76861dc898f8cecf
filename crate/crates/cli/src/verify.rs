use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;

use darboux::darboux::{
    displacement_residual, factorization_energy, intertwining_residual, riccati_residual, Direction, Superpotential,
    TestFunction,
};
use darboux::elliptic::golden::{read_golden, relative_error};
use darboux::elliptic::{addition_residual, Branch, LameSystem, Weierstrass};
use darboux::potential::{Harmonic, SampledPotential, Shifted};
use num_complex::Complex64;
use serde::Serialize;

use crate::args::{PotentialKind, VerifyArgs};
use crate::error::CliError;
use crate::write_text;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub case: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    potential: &'static str,
    m: f64,
    deltas: &'a [f64],
    checks: &'a [Check],
    pass: bool,
}

fn check(suite: &'static str, case: String, residual: f64, tolerance: f64) -> Check {
    Check {
        suite,
        case,
        residual,
        tolerance,
        pass: residual < tolerance,
    }
}

/// Symmetric sampling window: three real periods, or `[-10, 10]` when the
/// period is infinite.
fn window(sys: &LameSystem) -> (f64, f64) {
    let w = sys.omega();
    if w.is_finite() {
        (-3.0 * w, 3.0 * w)
    } else {
        (-10.0, 10.0)
    }
}

fn lame_suites(args: &VerifyArgs, out: &mut Vec<Check>) -> Result<(), CliError> {
    let sys = LameSystem::new(args.m)?;
    let w = Weierstrass::new(sys.inv);
    let (a, b) = window(&sys);
    let n = 801;
    let dx = (b - a) / (n - 1) as f64;
    let tests = [
        TestFunction::Gaussian {
            center: 0.3,
            width: 0.8,
        },
        TestFunction::WindowedWave {
            center: -1.0,
            width: 1.2,
            k: 2.0,
        },
    ];
    let xs: Vec<f64> = (0..161).map(|i| -4.0 + 0.05 * i as f64).collect();
    let base = SampledPotential::from_potential(&sys, a, dx, n)?;
    for &d in &args.deltas.0 {
        let tag = format!("m={} delta={d}", args.m);
        let v = if (d / 2.0 + 0.1 - d).abs() < 1e-3 {
            d / 2.0 + 0.3
        } else {
            d / 2.0 + 0.1
        };
        for (branch, name) in [(Branch::Singular, "singular"), (Branch::Regular, "regular")] {
            let r = addition_residual(&w, d, v, branch)?;
            out.push(check("addition", format!("{tag} v={v} {name}"), r, args.tol_addition));
        }
        let rep = displacement_residual(&sys, d, a, b, n)?;
        out.push(check(
            "displacement",
            format!("{tag} spread"),
            rep.spread,
            args.tol_displacement,
        ));
        let eps = factorization_energy(&w, Complex64::new(d, 0.0))?;
        out.push(check(
            "displacement",
            format!("{tag} energy"),
            (rep.epsilon_recovered - eps).abs(),
            args.tol_displacement,
        ));
        let sp = Superpotential::zeta(&sys, Complex64::new(d, 0.0))?;
        let mut partner: f64 = 0.0;
        for i in 0..n {
            let x = base.x(i);
            let r = sys.potential(x + d) - sys.potential(x) - sp.derivative(x)?;
            partner = partner.max(if r.is_finite() { r.abs() } else { f64::INFINITY });
        }
        out.push(check("partner", tag.clone(), partner, args.tol_displacement));
        let sampled = sp.sample(a, dx, n)?;
        let rr = riccati_residual(&sampled, &base, sp.epsilon, Direction::Forward)?;
        out.push(check("riccati", tag.clone(), rr.max, args.tol_riccati));
        let shifted = Shifted { inner: &sys, shift: d };
        let ir = intertwining_residual(|x| sp.jet(x), &sys, &shifted, &tests, &xs)?;
        out.push(check("intertwining", tag, ir, args.tol_intertwining));
    }
    Ok(())
}

fn harmonic_suite(args: &VerifyArgs, out: &mut Vec<Check>) -> Result<(), CliError> {
    let h = Harmonic::default();
    for &d in &args.deltas.0 {
        let rep = displacement_residual(&h, d, -5.0, 5.0, 801)?;
        out.push(check(
            "displacement",
            format!("harmonic delta={d} spread"),
            rep.spread,
            args.tol_displacement,
        ));
    }
    Ok(())
}

fn golden_suite(args: &VerifyArgs, out: &mut Vec<Check>) -> Result<(), CliError> {
    let path = std::env::var_os("DARBOUX_GOLDEN")
        .ok_or_else(|| CliError::Usage("--golden needs DARBOUX_GOLDEN to name the golden-vector file".into()))?;
    let file = File::open(&path).map_err(|e| CliError::Usage(format!("{}: {e}", path.to_string_lossy())))?;
    let records = read_golden(BufReader::new(file))?;
    if records.is_empty() {
        return Err(CliError::Numerical("golden-vector file holds no records".into()));
    }
    // worst record per function tag
    let mut worst: BTreeMap<String, (f64, usize, String)> = BTreeMap::new();
    for rec in &records {
        let e = relative_error(rec)?;
        let e = if e.is_nan() { f64::INFINITY } else { e };
        let entry = worst.entry(rec.func.to_string()).or_insert((0.0, 0, String::new()));
        entry.1 += 1;
        if e >= entry.0 {
            entry.0 = e;
            entry.2 = format!("m={} z={}{:+}i", rec.m, rec.z.re, rec.z.im);
        }
    }
    for (tag, (e, count, at)) in worst {
        out.push(check(
            "golden",
            format!("{tag} ({count} records, worst at {at})"),
            e,
            args.tol_golden,
        ));
    }
    Ok(())
}

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    let mut checks = Vec::new();
    let label = match args.potential {
        PotentialKind::Lame => {
            lame_suites(args, &mut checks)?;
            "lame"
        }
        PotentialKind::Harmonic => {
            harmonic_suite(args, &mut checks)?;
            "harmonic"
        }
    };
    if args.golden {
        golden_suite(args, &mut checks)?;
    }
    for c in &checks {
        println!(
            "{:<13} {:<48} {:>10.3e} < {:<8.1e} {}",
            c.suite,
            c.case,
            c.residual,
            c.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    let pass = checks.iter().all(|c| c.pass);
    if let Some(path) = &args.json {
        let report = Report {
            potential: label,
            m: args.m,
            deltas: &args.deltas.0,
            checks: &checks,
            pass,
        };
        write_text(
            Some(path),
            &serde_json::to_string_pretty(&report).expect("report serializes"),
        )?;
    }
    if pass {
        println!("all {} checks passed", checks.len());
        return Ok(());
    }
    let worst = checks
        .iter()
        .filter(|c| !c.pass)
        .max_by(|a, b| (a.residual / a.tolerance).total_cmp(&(b.residual / b.tolerance)))
        .expect("a failing check");
    Err(CliError::Verification(format!(
        "{} of {} checks failed; worst offender {} [{}]: {:e} against {:e}",
        checks.iter().filter(|c| !c.pass).count(),
        checks.len(),
        worst.suite,
        worst.case,
        worst.residual,
        worst.tolerance
    )))
}

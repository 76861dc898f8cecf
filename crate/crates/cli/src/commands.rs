use std::fs::{self, File};
use std::io::BufReader;

use darboux::backlund::{
    chain_potential, fig1_construction, fig2_construction, ChainSpec, Fig1Options, Fig2Options, Grid, Localization,
    Stage, StageSource,
};
use darboux::darboux::{emit_csv, kappa_for_energy, real_delta_for_energy, Superpotential};
use darboux::elliptic::{jacobi_sncndn, LameSystem, Weierstrass};
use darboux::potential::{fmt17, write_columns, SampledPotential};
use darboux::spectral::{
    band_edges, bound_states, discriminant_samples, BandEdge, BoundState, BoundStateOptions, Boundary, SpectralReport,
};
use num_complex::Complex64;
use serde::Serialize;

use crate::args::{BoundaryKind, ChainArgs, DisplaceArgs, EllipticArgs, FigureArgs, Func, SpectrumArgs, Which};
use crate::error::CliError;
use crate::{plot, sink, write_text};

/// `(xmin, xmax, n)` with `n ≥ 16` and `xmin < xmax`.
pub fn grid_from(values: &[f64]) -> Result<Grid, CliError> {
    let [xmin, xmax, n] = values else {
        return Err(CliError::Usage("a grid needs XMIN XMAX N".into()));
    };
    if n.fract() != 0.0 || *n < 16.0 {
        return Err(CliError::Usage(format!(
            "grid size {n} must be an integer of at least 16"
        )));
    }
    if !(xmax > xmin) {
        return Err(CliError::Usage(format!("grid needs xmin < xmax, got [{xmin}, {xmax}]")));
    }
    Ok(Grid::span(*xmin, *xmax, *n as usize))
}

fn kernel_value(func: Func, sys: &LameSystem, w: &Weierstrass, z: Complex64) -> Result<Complex64, CliError> {
    let real_only = matches!(func, Func::Sn | Func::Cn | Func::Dn | Func::Lame);
    if real_only && z.im != 0.0 {
        return Err(CliError::Usage(format!("{func:?} takes real arguments only")));
    }
    let (sn, cn, dn) = jacobi_sncndn(z.re, sys.m);
    let r = |v: f64| Ok(Complex64::new(v, 0.0));
    match func {
        Func::Wp => Ok(w.wp(z)?),
        Func::Wpp => Ok(w.wp_prime(z)?),
        Func::Zeta => Ok(w.zeta(z)?),
        Func::Sigma => Ok(w.sigma(z)),
        Func::Sn => r(sn),
        Func::Cn => r(cn),
        Func::Dn => r(dn),
        Func::Lame => r(sys.potential(z.re)),
    }
}

pub fn elliptic(args: &EllipticArgs) -> Result<(), CliError> {
    let sys = LameSystem::new(args.m)?;
    let w = Weierstrass::new(sys.inv);
    if let Some(re) = args.re {
        let v = kernel_value(args.func, &sys, &w, Complex64::new(re, args.im))?;
        return write_text(args.out.as_deref(), &format!("{} {}\n", fmt17(v.re), fmt17(v.im)));
    }
    let grid = match (&args.grid, &args.period_grid) {
        (Some(g), _) => grid_from(g)?,
        (None, Some(pg)) => {
            let t = sys.period();
            if !t.is_finite() {
                return Err(CliError::Usage(format!("m = {} has no finite period", args.m)));
            }
            grid_from(&[0.0, pg[0] * t, pg[1]])?
        }
        (None, None) => unreachable!("clap requires a point or a grid"),
    };
    let (mut xs, mut re, mut im) = (Vec::new(), Vec::new(), Vec::new());
    let mut poles = 0;
    for i in 0..grid.n {
        let x = grid.x(i);
        let v = match kernel_value(args.func, &sys, &w, Complex64::new(x, args.im)) {
            Ok(v) => v,
            Err(CliError::Numerical(_)) if w.lattice_distance(Complex64::new(x, args.im)) <= w.pole_radius() => {
                poles += 1;
                Complex64::new(f64::NAN, f64::NAN)
            }
            Err(e) => return Err(e),
        };
        xs.push(x);
        re.push(v.re);
        im.push(v.im);
    }
    if poles > 0 {
        eprintln!("{poles} grid points inside the pole-exclusion radius written as NaN");
    }
    write_columns(
        sink(args.out.as_deref())?,
        &["x", "value_re", "value_im"],
        &[&xs, &re, &im],
    )?;
    Ok(())
}

/// Displacement or general superpotential at a given energy or shift.
fn superpotential_for(args: &DisplaceArgs, sys: &LameSystem) -> Result<Superpotential, CliError> {
    let delta = match (args.delta, args.eps) {
        (Some(d), _) => Complex64::new(d, args.delta_im),
        (None, Some(eps)) if eps <= sys.e0 => Complex64::new(real_delta_for_energy(sys, eps)?, 0.0),
        (None, Some(eps)) => Complex64::new(kappa_for_energy(sys, eps)?, sys.tau()),
        (None, None) => unreachable!("clap requires --delta or --eps"),
    };
    Ok(match args.gamma {
        Some(g) => Superpotential::general(sys, delta, g)?,
        None => Superpotential::zeta(sys, delta)?,
    })
}

pub fn displace(args: &DisplaceArgs) -> Result<(), CliError> {
    let sys = LameSystem::new(args.m)?;
    let grid = grid_from(&args.grid)?;
    let sp = superpotential_for(args, &sys)?;
    emit_csv(&sp, grid.x0, grid.dx, grid.n, sink(args.out.as_deref())?)?;
    Ok(())
}

pub fn chain(args: &ChainArgs) -> Result<(), CliError> {
    let sys = LameSystem::new(args.m)?;
    let grid = grid_from(&args.grid)?;
    if let Some(g) = &args.gamma {
        if g.0.len() != args.eps.0.len() {
            return Err(CliError::Usage(format!(
                "{} energies but {} gamma values",
                args.eps.0.len(),
                g.0.len()
            )));
        }
    }
    let stages = args
        .eps
        .0
        .iter()
        .enumerate()
        .map(|(i, &epsilon)| Stage {
            epsilon,
            source: match &args.gamma {
                Some(g) => StageSource::General { gamma: g.0[i] },
                None => StageSource::Zeta,
            },
        })
        .collect();
    let tp = chain_potential(&ChainSpec { sys, stages, grid })?;
    tp.write_csv(sink(args.out.as_deref())?)?;
    if let Some(path) = &args.json {
        write_text(Some(path), &tp.summary_json())?;
    }
    let worst = tp
        .summary
        .stages
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.residual.total_cmp(&b.1.residual))
        .expect("at least one stage");
    if !(worst.1.residual < args.tol_stage) {
        return Err(CliError::Verification(format!(
            "stage {} Riccati residual {:e} exceeds {:e}",
            worst.0 + 1,
            worst.1.residual,
            args.tol_stage
        )));
    }
    Ok(())
}

/// Band edges over a range grown upwards until `want` edges are found.
fn edges_until(
    v: &SampledPotential,
    want: Option<usize>,
    args: &SpectrumArgs,
) -> Result<(Vec<BandEdge>, (f64, f64)), CliError> {
    if let Some(r) = &args.range {
        if !(r[1] > r[0]) {
            return Err(CliError::Usage(format!("energy range needs EMIN < EMAX, got {r:?}")));
        }
        return Ok((band_edges(v, (r[0], r[1]), args.tol, args.scan)?, (r[0], r[1])));
    }
    let lo = v.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let unit = (hi - lo).max(1.0);
    let lo = lo - 0.1 * unit;
    let mut top = hi + unit;
    for _ in 0..6 {
        let edges = band_edges(v, (lo, top), args.tol, args.scan)?;
        if want.is_none_or(|k| edges.len() >= k) {
            return Ok((edges, (lo, top)));
        }
        top = lo + 2.0 * (top - lo);
    }
    Ok((band_edges(v, (lo, top), args.tol, args.scan)?, (lo, top)))
}

pub fn spectrum(args: &SpectrumArgs) -> Result<(), CliError> {
    let file = File::open(&args.input).map_err(|e| CliError::Usage(format!("{}: {e}", args.input.display())))?;
    let label = args
        .input
        .file_name()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let mut v = SampledPotential::read_csv(BufReader::new(file), args.column.as_deref(), args.period, label)?;
    if v.period.is_none() && args.window.is_none() {
        v.period = Some(v.x_max() - v.x0);
    }
    let mut report = SpectralReport::new(v.label.clone());
    if args.window.is_none() || args.bands.is_some() {
        if v.period.is_none() {
            return Err(CliError::Usage(
                "band edges need --period when a --window is given".into(),
            ));
        }
        let (mut edges, range) = edges_until(&v, args.bands, args)?;
        if let Some(k) = args.bands {
            if edges.len() < k {
                return Err(CliError::Numerical(format!(
                    "found {} of {k} band edges in [{}, {}]",
                    edges.len(),
                    range.0,
                    range.1
                )));
            }
            edges.truncate(k);
        }
        report.band_edges = edges;
        report.discriminant_samples = discriminant_samples(&v, range, args.samples)?;
    }
    if let Some(w) = &args.window {
        let opts = BoundStateOptions {
            boundary: match args.boundary {
                BoundaryKind::Floquet => Boundary::Floquet { cell: args.cell },
                BoundaryKind::Dirichlet => Boundary::Dirichlet,
            },
            scan: args.scan,
            tol: args.level_tol,
            residual_tol: args.residual_tol,
            ..Default::default()
        };
        report.bound_states = bound_states(&v, (w[0], w[1]), &opts)?;
    }
    let json = report.to_json() + "\n";
    match &args.out {
        Some(path) => {
            write_text(Some(path), &json)?;
            for e in &report.band_edges {
                println!("edge {:?} {}", e.kind, fmt17(e.energy));
            }
            for s in &report.bound_states {
                println!("level {} nodes {}", fmt17(s.energy), s.nodes);
            }
        }
        None => print!("{json}"),
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct FigureReport<'a> {
    figure: &'static str,
    m: f64,
    energies: &'a [f64],
    gammas: &'a [f64],
    kappas: &'a [Option<f64>],
    candidates_tried: usize,
    localization: Localization,
    levels_below_ground_band: &'a [BoundState],
    levels_in_first_gap: &'a [BoundState],
    chain: &'a darboux::backlund::ChainSummary,
    confirmed: bool,
}

pub fn figure(args: &FigureArgs) -> Result<(), CliError> {
    let eps = &args.eps.0;
    let gammas = args.gamma.as_ref().map(|g| g.0.as_slice());
    let (name, fig) = match args.which {
        Which::Fig1 => {
            let ([e], None | Some([_])) = (eps.as_slice(), gammas) else {
                return Err(CliError::Usage("fig1 takes one energy and at most one gamma".into()));
            };
            let opts = Fig1Options {
                gamma: gammas.map(|g| g[0]),
                periods: args.periods,
                window_periods: args.window_periods,
                points_per_period: args.points_per_period,
            };
            ("fig1", fig1_construction(args.m, *e, &opts)?)
        }
        Which::Fig2 => {
            let ([e1, e2], None | Some([_, _])) = (eps.as_slice(), gammas) else {
                return Err(CliError::Usage(
                    "fig2 takes two energies and either no or two gammas".into(),
                ));
            };
            let opts = Fig2Options {
                gammas: gammas.map(|g| (g[0], g[1])),
                periods: args.periods,
                window_periods: args.window_periods,
                points_per_period: args.points_per_period,
            };
            ("fig2", fig2_construction(args.m, *e1, *e2, &opts)?)
        }
    };
    let sys = LameSystem::new(args.m)?;
    let mut v = fig.potential.final_potential.clone();
    v.period = Some(sys.period());
    let opts = BoundStateOptions::default();
    let below = bound_states(&v, (sys.e0 - 1.0, sys.e0 - 1e-3), &opts)?;
    let gap = bound_states(&v, (sys.e1 + 1e-3, sys.e1p - 1e-3), &opts)?;
    let mut targets = eps.clone();
    targets.sort_by(f64::total_cmp);
    let (found, spurious) = match args.which {
        Which::Fig1 => (&below, &gap),
        Which::Fig2 => (&gap, &below),
    };
    let matches = found.len() == targets.len()
        && found
            .iter()
            .zip(&targets)
            .all(|(s, t)| (s.energy - t).abs() < args.tol_level);
    let confirmed = matches && spurious.is_empty();

    fs::create_dir_all(&args.out_dir)?;
    let csv_path = args.out_dir.join(format!("{name}.csv"));
    fig.potential.write_csv(File::create(&csv_path)?)?;
    let report = FigureReport {
        figure: name,
        m: args.m,
        energies: eps,
        gammas: &fig.gammas,
        kappas: &fig.kappas,
        candidates_tried: fig.tried,
        localization: fig.localization,
        levels_below_ground_band: &below,
        levels_in_first_gap: &gap,
        chain: &fig.potential.summary,
        confirmed,
    };
    let json_path = args.out_dir.join(format!("{name}.json"));
    write_text(
        Some(&json_path),
        &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"),
    )?;
    if args.plot {
        let xs = fig.potential.base.xs();
        plot::render(
            &args.out_dir.join(format!("{name}.svg")),
            &format!("{name}: m = {}, eps = {:?}", args.m, eps),
            &xs,
            &[
                ("V", &fig.potential.base.values),
                ("V_final", &fig.potential.final_potential.values),
            ],
        )?;
    }
    println!(
        "{name}: m = {} gammas = {:?} written to {}",
        args.m,
        fig.gammas,
        csv_path.display()
    );
    for s in found.iter() {
        println!(
            "level {} nodes {} edge amplitude {:.1e}",
            fmt17(s.energy),
            s.nodes,
            s.edge_amplitude
        );
    }
    if confirmed {
        println!(
            "confirmed: {} level(s) at {:?} within {:e}",
            targets.len(),
            targets,
            args.tol_level
        );
        Ok(())
    } else {
        let got: Vec<f64> = found.iter().map(|s| s.energy).collect();
        let stray: Vec<f64> = spurious.iter().map(|s| s.energy).collect();
        Err(CliError::Verification(format!(
            "{name}: expected levels {targets:?}, found {got:?}, spurious {stray:?}"
        )))
    }
}

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Result};
use gpe_core::analytic::{self, VariationalOutcome, VariationalSurface};
use gpe_core::collapse::{optimality_scan, resolution_study, OptimalityScan, ThresholdResult};
use gpe_core::dynamics::{boost, displace, ehrenfest_check, propagate_with_snapshots, PropagationConfig, Scheme, Sponge};
use gpe_core::groundstate::{default_initial, relax_in, DescentConfig, GroundStateResult};
use gpe_core::observables::{compare_profiles, moments, ObservableRecord, Section};
use gpe_core::units::{self, FrequencyConvention, PhysicalParams};
use gpe_core::{EnergyBreakdown, Geometry, Grid, GridSpec, MeanField, TrapSpec, Wavefunction};
use num_complex::Complex64;

use crate::config::Resolver;
use crate::output::{num, sibling, CsvFile, DIMENSIONLESS};
use crate::{setup, AnalyticArgs, CollapseArgs, EvolveArgs, Figure, FiguresArgs, GroundArgs, UnitsArgs, UsageError};

fn path(cfg: &mut Resolver, key: &str, flag: &Option<PathBuf>, default: &str) -> Result<PathBuf> {
    let s = cfg.get(key, flag.as_ref().map(|p| p.display().to_string()), default.to_string())?;
    Ok(PathBuf::from(s))
}

fn default_lambda_z(geometry: Geometry) -> f64 {
    if geometry == Geometry::SphericalRadial {
        1.0
    } else {
        0.0
    }
}

fn write_state(path: &Path, title: &str, u: &Wavefunction) -> Result<()> {
    let mut csv = CsvFile::create(Some(path), title, DIMENSIONLESS, &[], "rho,s,re_u,im_u")?;
    let g = u.grid();
    for (k, v) in u.values().iter().enumerate() {
        let (r, s) = g.coords(k);
        csv.row(&[num(r), num(s), num(v.re), num(v.im)])?;
    }
    csv.finish()?;
    Ok(())
}

fn energy_fields(e: &EnergyBreakdown) -> Vec<String> {
    [e.kinetic, e.trap, e.interaction, e.total, e.chemical_potential]
        .iter()
        .map(|&x| num(x))
        .collect()
}

fn relax_default(field: &MeanField, d: &DescentConfig) -> Result<GroundStateResult> {
    let seed = default_initial(field.grid().clone(), field.trap(), field.q())?;
    Ok(relax_in(field, &seed, d)?)
}

pub fn ground(cfg: &mut Resolver, a: GroundArgs) -> Result<()> {
    let q: f64 = cfg.require("q", a.q)?;
    let geometry = cfg.get("geometry", a.grid.geometry, Geometry::Cylindrical)?;
    let lambda_z = cfg.get("lambda-z", a.lambda_z, default_lambda_z(geometry))?;
    let grid = setup::grid(cfg, &a.grid, geometry, q, lambda_z)?;
    let d = setup::descent(cfg, &a.descent)?;
    let ext = setup::potential(cfg, &a.potential)?;
    let out = path(cfg, "out", &a.out, "ground.csv")?;
    cfg.finish()?;

    let trap = TrapSpec::new(lambda_z)?;
    let mut field = MeanField::new(grid, trap, q)?;
    if let Some(e) = &ext {
        field = field.with_external(e)?;
    }
    let r = relax_default(&field, &d)?;
    let w_s = moments(&r.wavefunction).map(|m| m.w_s).unwrap_or(f64::NAN);

    write_state(&out, &format!("ground state, {geometry} grid, Q = {q}, lambda_z = {lambda_z}"), &r.wavefunction)?;
    let summary = sibling(&out, ".summary.csv");
    let mut csv = CsvFile::create(
        Some(&summary),
        "ground-state summary",
        DIMENSIONLESS,
        &[],
        "Q,lambda_z,kinetic,trap,interaction,total,mu,iterations,converged,collapsed,residual,W_s",
    )?;
    let mut row = vec![num(q), num(lambda_z)];
    row.extend(energy_fields(&r.energy));
    row.extend([
        r.iterations.to_string(),
        r.converged.to_string(),
        r.collapsed.to_string(),
        num(r.residual),
        num(w_s),
    ]);
    csv.row(&row)?;
    csv.finish()?;
    cfg.write_manifest(&sibling(&out, ".manifest"), "ground")?;

    let status = if r.converged {
        "converged"
    } else if r.collapsed {
        "collapsed"
    } else {
        "not converged"
    };
    println!(
        "{status} after {} iterations: E = {:.10}, mu = {:.10}, W_s = {w_s:.6}",
        r.iterations, r.energy.total, r.energy.chemical_potential
    );
    if r.unresolved() {
        eprintln!("warning: iteration budget exhausted; raise --max-iters");
    }
    Ok(())
}

pub fn evolve(cfg: &mut Resolver, a: EvolveArgs) -> Result<()> {
    let q: f64 = cfg.require("q", a.q)?;
    let geometry = cfg.get("geometry", a.grid.geometry, Geometry::Cylindrical)?;
    let lambda_z = cfg.get("lambda-z", a.lambda_z, default_lambda_z(geometry))?;
    let grid = setup::grid(cfg, &a.grid, geometry, q, lambda_z)?;
    let initial = cfg.get("initial", a.initial.clone(), "ground".to_string())?;
    let d = setup::descent(cfg, &a.descent)?;
    let v = cfg.get("boost", a.boost, 0.0)?;
    let shift = cfg.get("displace", a.displace, 0.0)?;
    let dt = cfg.get("dt", a.dt, 1e-3)?;
    let t_final = cfg.get("t-final", a.t_final, 10.0)?;
    let observe_every = cfg.get("observe-every", a.observe_every, 100)?;
    let scheme = cfg.get("scheme", a.scheme, Scheme::SplitStep)?;
    let sponge_width: Option<f64> = cfg.get_opt("sponge-width", a.sponge_width)?;
    let sponge_strength = cfg.get("sponge-strength", a.sponge_strength, 1.0)?;
    let ext = setup::potential(cfg, &a.potential)?;
    let snapshots: Vec<f64> = cfg.list("snapshots", a.snapshots.as_deref(), "")?;
    let out = path(cfg, "out", &a.out, "trajectory.csv")?;
    cfg.finish()?;

    let trap = TrapSpec::new(lambda_z)?;
    let u0 = match initial.as_str() {
        "ground" => {
            let r = relax_default(&MeanField::new(grid.clone(), trap, q)?, &d)?;
            if !r.converged {
                bail!(
                    "the ground state at Q = {q} did not converge (collapsed: {}); \
                     choose another --initial or a smaller Q",
                    r.collapsed
                );
            }
            r.wavefunction
        }
        "composite" => Wavefunction::from_fn(grid.clone(), |r, s| {
            analytic::composite_profile(q, r, s).unwrap_or(Complex64::new(0.0, 0.0))
        })
        .normalized()?,
        "gaussian" => {
            if !(lambda_z > 0.0) {
                bail!("--initial gaussian needs lambda_z > 0");
            }
            Wavefunction::from_fn(grid.clone(), |r, s| {
                Complex64::new(analytic::gaussian_ground_state(lambda_z, r, s).unwrap_or(0.0), 0.0)
            })
            .normalized()?
        }
        other => {
            return Err(UsageError(format!(
                "unknown initial state `{other}` (expected ground|composite|gaussian)"
            ))
            .into())
        }
    };
    let mut u0 = u0;
    if shift != 0.0 {
        u0 = displace(&u0, shift)?;
    }
    if v != 0.0 {
        u0 = boost(&u0, v)?;
    }

    let mut field = MeanField::new(grid, trap, q)?;
    if let Some(e) = &ext {
        field = field.with_external(e)?;
    }
    let pc = PropagationConfig {
        dt,
        t_final,
        observe_every,
        scheme,
        sponge: sponge_width.map(|width| Sponge {
            width,
            strength: sponge_strength,
        }),
    };
    let (traj, snaps) = propagate_with_snapshots(field, &u0, &pc, &snapshots)?;

    let mut csv = CsvFile::create(
        Some(&out),
        &format!("trajectory, {geometry} grid, Q = {q}, lambda_z = {lambda_z}, dt = {dt}, {scheme}"),
        DIMENSIONLESS,
        &[],
        ObservableRecord::CSV_HEADER,
    )?;
    for r in &traj.records {
        csv.line(&r.csv_row())?;
    }
    csv.finish()?;
    write_state(&sibling(&out, ".final.csv"), &format!("state at tau = {}", traj.steps as f64 * dt), &traj.final_state)?;
    for (t, s) in &snaps {
        write_state(&sibling(&out, &format!(".snapshot_t{t}.csv")), &format!("state at tau = {t}"), s)?;
    }

    let harmonic = lambda_z > 0.0 && ext.is_none();
    let report = ehrenfest_check(&traj.records, harmonic).or_else(|_| ehrenfest_check(&traj.records, false));
    match report {
        Ok(rep) => {
            let mut csv = CsvFile::create(
                Some(&sibling(&out, ".ehrenfest.csv")),
                "centroid dynamics against the mean axial force",
                DIMENSIONLESS,
                &[],
                "velocity_residual,acceleration_residual,mean_acceleration,mean_force,frequency,amplitude,amplitude_drift,periods",
            )?;
            let mut row = vec![
                num(rep.velocity_residual),
                num(rep.acceleration_residual),
                num(rep.mean_acceleration),
                num(rep.mean_force),
            ];
            match rep.oscillation {
                Some(o) => row.extend([num(o.frequency), num(o.amplitude), num(o.amplitude_drift), num(o.periods)]),
                None => row.extend(std::iter::repeat_n(String::new(), 4)),
            }
            csv.row(&row)?;
            csv.finish()?;
        }
        Err(e) => eprintln!("note: no centroid report: {e}"),
    }
    cfg.write_manifest(&sibling(&out, ".manifest"), "evolve")?;

    let last = traj.records.last().expect("at least the initial record");
    let first = &traj.records[0];
    println!(
        "{} steps to tau = {}: norm {:.12}, energy drift {:.3e}, X_s = {:.6}",
        traj.steps,
        last.tau,
        last.norm,
        (last.energy.total - first.energy.total).abs() / first.energy.total.abs(),
        last.x_s
    );
    Ok(())
}

fn threshold_rows(csv: &mut CsvFile, factor: usize, r: &ThresholdResult) -> Result<()> {
    for t in &r.trials {
        csv.row(&[
            factor.to_string(),
            "trial".into(),
            num(t.q),
            t.outcome.to_string(),
            t.iterations.to_string(),
            num(t.energy),
            String::new(),
            String::new(),
        ])?;
    }
    let iterations: usize = r.trials.iter().map(|t| t.iterations).sum();
    csv.row(&[
        factor.to_string(),
        "summary".into(),
        num(r.estimate()),
        "threshold".into(),
        iterations.to_string(),
        String::new(),
        num(r.q_lo),
        num(r.q_hi),
    ])
}

fn write_scan(out: &Path, scan: &OptimalityScan) -> Result<()> {
    let mut csv = CsvFile::create(Some(out), "critical Q against lambda_z (cylindrical grid)", DIMENSIONLESS, &[], OptimalityScan::CSV_HEADER)?;
    for r in &scan.rows {
        csv.row(&[num(r.lambda_z), num(r.threshold.q_lo), num(r.threshold.q_hi), num(r.threshold.estimate()), num(r.variational)])?;
    }
    csv.finish()?;
    let mut csv = CsvFile::create(
        Some(&sibling(out, ".trials.csv")),
        "bisection probes",
        DIMENSIONLESS,
        &[],
        "lambda_z,q,outcome,iterations,energy_total",
    )?;
    for r in &scan.rows {
        for t in &r.threshold.trials {
            csv.row(&[num(r.lambda_z), num(t.q), t.outcome.to_string(), t.iterations.to_string(), num(t.energy)])?;
        }
    }
    csv.finish()?;
    Ok(())
}

pub fn collapse(cfg: &mut Resolver, a: CollapseArgs) -> Result<()> {
    let geometry = cfg.get("geometry", a.geometry, Geometry::Cylindrical)?;
    let spherical = geometry == Geometry::SphericalRadial;
    let lambda_z = cfg.get("lambda-z", a.lambda_z, default_lambda_z(geometry))?;
    let q_min = cfg.get("q-min", a.q_min, if spherical { 8.0 } else { 10.0 })?;
    let q_max = cfg.get("q-max", a.q_max, if spherical { 20.0 } else { 25.0 })?;
    let tol = cfg.get("tol", a.tol, 0.5)?;
    let d = setup::descent(cfg, &a.descent)?;
    let scan: Vec<f64> = cfg.list("scan", a.scan.as_deref(), "")?;
    let refine: Vec<usize> = cfg.list("refine", a.refine.as_deref(), "1")?;
    let out = path(cfg, "out", &a.out, "collapse.csv")?;
    cfg.finish()?;

    if !scan.is_empty() {
        if geometry != Geometry::Cylindrical {
            return Err(UsageError("--scan runs on cylindrical grids only".into()).into());
        }
        let s = optimality_scan(&scan, (q_min, q_max), tol, &d)?;
        write_scan(&out, &s)?;
        cfg.write_manifest(&sibling(&out, ".manifest"), "collapse")?;
        print!("{}", s.report());
        return Ok(());
    }

    if refine.is_empty() {
        return Err(UsageError("--refine needs at least one factor".into()).into());
    }
    let results = resolution_study(geometry, lambda_z, (q_min, q_max), tol, &d, &refine)?;
    let mut notes = vec![format!(
        "collapse proxy: amplitude above {} x the reference peak or energy below the floor",
        d.collapse_guard
    )];
    for (f, r) in refine.iter().zip(&results) {
        notes.push(format!("grid factor {f}: {}", grid_label(&r.grid)));
        for w in &r.warnings {
            eprintln!("warning: {w}");
            notes.push(format!("warning (factor {f}): {w}"));
        }
    }
    let mut csv = CsvFile::create(
        Some(&out),
        &format!("critical Q, {geometry} grid, lambda_z = {lambda_z}, tol = {tol}"),
        DIMENSIONLESS,
        &notes,
        "grid_factor,kind,q,outcome,iterations,energy_total,q_lo,q_hi",
    )?;
    for (f, r) in refine.iter().zip(&results) {
        threshold_rows(&mut csv, *f, r)?;
    }
    csv.finish()?;
    cfg.write_manifest(&sibling(&out, ".manifest"), "collapse")?;
    for (f, r) in refine.iter().zip(&results) {
        println!("grid factor {f}: Q_c in [{:.4}, {:.4}]", r.q_lo, r.q_hi);
    }
    Ok(())
}

fn grid_label(spec: &GridSpec) -> String {
    match *spec {
        GridSpec::Line { s_min, s_max, n_s } => format!("line {n_s} on [{s_min}, {s_max}]"),
        GridSpec::Cylindrical {
            rho_max,
            n_rho,
            s_min,
            s_max,
            n_s,
        } => format!("cylindrical {n_rho} x {n_s}, rho <= {rho_max}, s in [{s_min}, {s_max}]"),
        GridSpec::SphericalRadial { r_max, n_r } => format!("spherical-radial {n_r}, r <= {r_max}"),
    }
}

pub fn analytic(cfg: &mut Resolver, a: AnalyticArgs) -> Result<()> {
    let q = cfg.get("q", a.q, 5.0)?;
    let lambda_z = cfg.get("lambda-z", a.lambda_z, 0.0)?;
    let q_list: Vec<f64> = cfg.list("q-list", a.q_list.as_deref(), "2,5,10,17,19.5")?;
    let lambda_list: Vec<f64> = cfg.list("lambda-list", a.lambda_list.as_deref(), "0,0.25,0.5,0.75,1")?;
    let s_max = cfg.get("s-max", a.s_max, 4.0 * analytic::soliton_width(q)?)?;
    let samples = cfg.get("samples", a.samples, 401usize)?;
    let out = path(cfg, "out", &a.out, "analytic")?;
    cfg.finish()?;
    if samples < 2 {
        return Err(UsageError("--samples must be at least 2".into()).into());
    }
    let s_at = |i: usize| -s_max + 2.0 * s_max * i as f64 / (samples - 1) as f64;

    let with_gaussian = lambda_z > 0.0;
    let mut header = "s,soliton,composite_rho0".to_string();
    if with_gaussian {
        header.push_str(",gaussian_rho0");
    }
    let mut csv = CsvFile::create(
        Some(&out.join("profile.csv")),
        &format!("axial profiles, Q = {q}, lambda_z = {lambda_z}"),
        DIMENSIONLESS,
        &[],
        &header,
    )?;
    for i in 0..samples {
        let s = s_at(i);
        let mut row = vec![
            num(analytic::soliton_profile(q, s)?.re),
            num(analytic::composite_profile(q, 0.0, s)?.re),
        ];
        if with_gaussian {
            row.push(num(analytic::gaussian_ground_state(lambda_z, 0.0, s)?));
        }
        row.insert(0, num(s));
        csv.row(&row)?;
    }
    csv.finish()?;

    let mut csv = CsvFile::create(
        Some(&out.join("width.csv")),
        "soliton width against Q",
        DIMENSIONLESS,
        &[],
        "Q,W_s,s2,trap_to_interaction,transverse_trap_dominates",
    )?;
    for &qq in &q_list {
        csv.row(&[
            num(qq),
            num(analytic::soliton_width(qq)?),
            num(analytic::soliton_second_moment(qq)?),
            num(32.0 * std::f64::consts::PI.powi(2) / (qq * qq)),
            analytic::transverse_trap_dominates(qq)?.to_string(),
        ])?;
    }
    csv.finish()?;

    let mut csv = CsvFile::create(
        Some(&out.join("ratio.csv")),
        &format!("transverse trap energy over self-interaction, Q = {q}"),
        DIMENSIONLESS,
        &[],
        "rho,s,ratio",
    )?;
    for rho in [0.25, 0.5, 1.0, 1.5, 2.0] {
        for i in (0..samples).step_by((samples / 40).max(1)) {
            let s = s_at(i);
            csv.row(&[num(rho), num(s), num(analytic::dominance_ratio(q, rho, s)?)])?;
        }
    }
    csv.finish()?;

    let mut csv = CsvFile::create(
        Some(&out.join("variational.csv")),
        "largest Q with a local minimum of the Gaussian-ansatz energy",
        DIMENSIONLESS,
        &[],
        "lambda_z,q_c_gaussian",
    )?;
    for &lz in &lambda_list {
        csv.row(&[num(lz), num(analytic::variational_critical_q(lz)?)])?;
    }
    csv.finish()?;

    let mut csv = CsvFile::create(
        Some(&out.join("variational_minimum.csv")),
        "Gaussian-ansatz minimizer",
        DIMENSIONLESS,
        &[],
        "Q,lambda_z,outcome,w_rho,w_s,energy",
    )?;
    let row = match VariationalSurface::new(q, lambda_z)?.minimize() {
        VariationalOutcome::Minimum { w_rho, w_s, energy } => {
            vec![num(q), num(lambda_z), "minimum".into(), num(w_rho), num(w_s), num(energy)]
        }
        VariationalOutcome::Runaway => {
            vec![num(q), num(lambda_z), "runaway".into(), String::new(), String::new(), String::new()]
        }
    };
    csv.row(&row)?;
    csv.finish()?;
    cfg.write_manifest(&out.join("analytic.manifest"), "analytic")?;
    println!("wrote profile, width, ratio and variational tables to {}", out.display());
    Ok(())
}

pub fn units(cfg: &mut Resolver, a: UnitsArgs) -> Result<()> {
    let ns: Vec<f64> = cfg.list("n", a.n.as_deref(), "")?;
    let qs: Vec<f64> = cfg.list("q", a.q.as_deref(), "10,17,19.5,16.7,13.7")?;
    let a_angstrom = cfg.get("a-angstrom", a.a_angstrom, units::LITHIUM7_SCATTERING_LENGTH * 1e10)?;
    let nu_hz = cfg.get("nu-hz", a.nu_hz, units::LITHIUM7_TRAP_FREQUENCY_HZ)?;
    let mass_u = cfg.get("mass-u", a.mass_u, units::LITHIUM7_MASS_U)?;
    let convention = cfg.get("convention", a.convention, FrequencyConvention::Angular)?;
    let lambda_z = cfg.get("lambda-z", a.lambda_z, 0.0)?;
    let out: Option<String> = cfg.get_opt("out", a.out.as_ref().map(|p| p.display().to_string()))?;
    cfg.finish()?;

    let base = PhysicalParams {
        scattering_length_a: a_angstrom * 1e-10,
        atom_mass_m: mass_u * units::ATOMIC_MASS_UNIT,
        radial_frequency_nu: convention.angular_frequency(nu_hz),
        particle_number_n: 0.0,
        lambda_z,
    };
    let a0 = units::oscillator_length(&base)?;
    let mut rows = Vec::new();
    for &n in &ns {
        let q = units::q_from_n(&PhysicalParams {
            particle_number_n: n,
            ..base
        })?;
        rows.push([n, q]);
    }
    for &q in &qs {
        rows.push([units::n_from_q(&base, q)?, q]);
    }
    let out = out.filter(|s| !s.is_empty()).map(PathBuf::from);
    let mut csv = CsvFile::create(
        out.as_deref(),
        &format!("a = {a_angstrom} angstrom, nu = {nu_hz} Hz ({convention} convention), m = {mass_u} u"),
        "N particles; Q = 8 pi N |a| / a0 dimensionless; a0 = sqrt(hbar/(m omega_rho)) in meters; lambda_z = omega_z/omega_rho",
        &[],
        "N,Q,a0_m,lambda_z",
    )?;
    for [n, q] in rows {
        csv.row(&[num(n), num(q), num(a0), num(lambda_z)])?;
    }
    if let Some(p) = csv.finish()? {
        cfg.write_manifest(&sibling(&p, ".manifest"), "units")?;
    }
    Ok(())
}

/// `|u|` along the innermost radial node.
fn s_section(u: &Wavefunction) -> Vec<(f64, f64)> {
    let g = u.grid();
    let (_, ns) = g.shape();
    (0..ns).map(|j| (g.axial_nodes()[j], u.values()[g.index(0, j)].norm())).collect()
}

/// `|u|` along the axial node nearest `s = 0`.
fn rho_section(u: &Wavefunction) -> Vec<(f64, f64)> {
    let g = u.grid();
    let (nr, _) = g.shape();
    let j = g.axial_origin();
    (0..nr).map(|i| (g.radial_nodes()[i], u.values()[g.index(i, j)].norm())).collect()
}

fn converged_state(grid: &Arc<Grid>, lambda_z: f64, q: f64, d: &DescentConfig) -> Result<GroundStateResult> {
    let field = MeanField::new(grid.clone(), TrapSpec::new(lambda_z)?, q)?;
    let r = relax_default(&field, d)?;
    if !r.converged {
        bail!("ground state at Q = {q}, lambda_z = {lambda_z} did not converge");
    }
    Ok(r)
}

pub fn figures(cfg: &mut Resolver, a: FiguresArgs) -> Result<()> {
    let d = setup::descent(cfg, &a.descent)?;
    let out = path(cfg, "out", &a.out, "figures")?;
    cfg.finish()?;
    match a.figure {
        Figure::Fig1 => fig1(&out, &d)?,
        Figure::Fig2 => fig2(&out, &d)?,
    }
    let name = match a.figure {
        Figure::Fig1 => "fig1",
        Figure::Fig2 => "fig2",
    };
    cfg.write_manifest(&out.join(format!("{name}.manifest")), &format!("figures {name}"))?;
    Ok(())
}

fn overlay(q: f64, lambda_z: f64, rho: f64, s: f64) -> Result<f64> {
    Ok(if lambda_z > 0.0 {
        analytic::gaussian_ground_state(lambda_z, rho, s)?
    } else {
        analytic::composite_profile(q, rho, s)?.re
    })
}

fn fig1(out: &Path, d: &DescentConfig) -> Result<()> {
    const Q: f64 = 5.0;
    const LAMBDAS: [f64; 3] = [0.4, 0.2, 0.0];
    let grid = Arc::new(Grid::build(GridSpec::default_for(Geometry::Cylindrical, Q, 0.0)?)?);
    let runs: Vec<GroundStateResult> = LAMBDAS
        .iter()
        .map(|&lz| converged_state(&grid, lz, Q, d))
        .collect::<Result<_>>()?;

    let mut header = "s".to_string();
    for lz in LAMBDAS {
        header.push_str(&format!(",u_lz{lz}"));
    }
    for lz in LAMBDAS {
        header.push_str(&format!(",overlay_lz{lz}"));
    }
    let rho0 = grid.radial_nodes()[0];
    let sections: Vec<Vec<(f64, f64)>> = runs.iter().map(|r| s_section(&r.wavefunction)).collect();
    let note = vec![format!(
        "sections at rho = {rho0}; overlays: sech soliton x Gaussian for lambda_z = 0, trap Gaussian otherwise"
    )];
    let mut csv = CsvFile::create(Some(&out.join("fig1_s_sections.csv")), "Q = 5 ground states, axial sections", DIMENSIONLESS, &note, &header)?;
    for (j, &(s, _)) in sections[0].iter().enumerate() {
        let mut row = vec![num(s)];
        row.extend(sections.iter().map(|sec| num(sec[j].1)));
        for lz in LAMBDAS {
            row.push(num(overlay(Q, lz, rho0, s)?));
        }
        csv.row(&row)?;
    }
    csv.finish()?;

    let s0 = grid.axial_nodes()[grid.axial_origin()];
    let sections: Vec<Vec<(f64, f64)>> = runs.iter().map(|r| rho_section(&r.wavefunction)).collect();
    let mut csv = CsvFile::create(
        Some(&out.join("fig1_rho_sections.csv")),
        "Q = 5 ground states, radial sections",
        DIMENSIONLESS,
        &[format!("sections at s = {s0}")],
        &header.replacen('s', "rho", 1),
    )?;
    for (i, &(rho, _)) in sections[0].iter().enumerate() {
        let mut row = vec![num(rho)];
        row.extend(sections.iter().map(|sec| num(sec[i].1)));
        for lz in LAMBDAS {
            row.push(num(overlay(Q, lz, rho, s0)?));
        }
        csv.row(&row)?;
    }
    csv.finish()?;

    let mut csv = CsvFile::create(
        Some(&out.join("fig1_summary.csv")),
        "Q = 5 ground states against their overlays",
        DIMENSIONLESS,
        &[],
        "lambda_z,s2,W_s,energy_total,mu,iterations,linf_s_section,linf_rho_section",
    )?;
    for (lz, r) in LAMBDAS.iter().zip(&runs) {
        let m = moments(&r.wavefunction)?;
        let reference = Wavefunction::from_fn(grid.clone(), |rho, s| Complex64::new(overlay(Q, *lz, rho, s).unwrap_or(0.0), 0.0));
        let ds = compare_profiles(&r.wavefunction, &reference, Section::SSectionAtRhoZero)?;
        let dr = compare_profiles(&r.wavefunction, &reference, Section::RhoSectionAtSZero)?;
        csv.row(&[
            num(*lz),
            num(m.s2),
            num(m.w_s),
            num(r.energy.total),
            num(r.energy.chemical_potential),
            r.iterations.to_string(),
            num(ds.linf_rel),
            num(dr.linf_rel),
        ])?;
        println!("lambda_z = {lz}: <s^2> = {:.6}, max deviation from overlay {:.2}% (s), {:.2}% (rho)", m.s2, 100.0 * ds.linf_rel, 100.0 * dr.linf_rel);
    }
    csv.finish()?;
    Ok(())
}

fn fig2(out: &Path, d: &DescentConfig) -> Result<()> {
    const Q: f64 = 10.0;
    let grid = Arc::new(Grid::build(GridSpec::default_for(Geometry::Cylindrical, Q, 0.0)?)?);
    let r = converged_state(&grid, 0.0, Q, d)?;
    let composite = Wavefunction::from_fn(grid.clone(), |rho, s| analytic::composite_profile(Q, rho, s).unwrap_or_default());
    let header = "coordinate,numerical,composite";
    for (name, num_sec, ref_sec) in [
        ("fig2_s_section.csv", s_section(&r.wavefunction), s_section(&composite)),
        ("fig2_rho_section.csv", rho_section(&r.wavefunction), rho_section(&composite)),
    ] {
        let mut csv = CsvFile::create(Some(&out.join(name)), "Q = 10, lambda_z = 0: ground state and composite profile", DIMENSIONLESS, &[], header)?;
        for ((x, a), (_, b)) in num_sec.iter().zip(&ref_sec) {
            csv.row(&[num(*x), num(*a), num(*b)])?;
        }
        csv.finish()?;
    }
    let ds = compare_profiles(&r.wavefunction, &composite, Section::SSectionAtRhoZero)?;
    let dr = compare_profiles(&r.wavefunction, &composite, Section::RhoSectionAtSZero)?;
    let mut csv = CsvFile::create(
        Some(&out.join("fig2_summary.csv")),
        "peak-normalized deviation of the ground state from the composite profile",
        DIMENSIONLESS,
        &[],
        "section,linf_rel,l2_rel",
    )?;
    csv.row(&["s".into(), num(ds.linf_rel), num(ds.l2_rel)])?;
    csv.row(&["rho".into(), num(dr.linf_rel), num(dr.l2_rel)])?;
    csv.finish()?;
    println!(
        "max deviation {:.2}% (s section), {:.2}% (rho section)",
        100.0 * ds.linf_rel,
        100.0 * dr.linf_rel
    );
    Ok(())
}

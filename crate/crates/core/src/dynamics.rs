//! Real-time propagation.
//!
//! Both schemes are Strang compositions of unitary factors around a full
//! kinetic step:
//!
//! * [`Scheme::SplitStep`]: exact pointwise phase `exp(-i dt/2 (V - g|u|^2))`,
//!   kinetic step, phase again. The kinetic step is the exact spectral
//!   propagator on line grids and the Crank-Nicolson (Cayley) factors of the
//!   radial and axial second differences on cylindrical and spherical grids.
//!   The radial and axial difference operators commute, so the product of
//!   their Cayley factors is the Peaceman-Rachford step and stays unitary.
//! * [`Scheme::SemiImplicit`]: Crank-Nicolson (Cayley) in every factor,
//!   including the spectral kinetic factor on line grids, with the
//!   nonlinearity lagged and extrapolated as `3/2 u^n - 1/2 u^(n-1)`.
//!
//! The norm is checked at every observation and every 1000 steps.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::energy::{MeanField, TrapSpec};
use crate::error::{domain, GpeError, Result};
use crate::grid::{Geometry, Grid};
use crate::observables::{moments, ObservableRecord};
use crate::par;
use crate::potential::ExternalPotential;
use crate::tridiag::Tridiagonal;
use crate::wavefunction::Wavefunction;

/// Largest norm change allowed over any 1000 steps.
pub const NORM_DRIFT_PER_1000: f64 = 1e-8;
/// Largest norm change allowed over a whole run.
pub const NORM_DRIFT_TOTAL: f64 = 1e-6;
/// Peak density growth (relative to the initial peak) treated as blowup.
pub const BLOWUP_FACTOR: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    SplitStep,
    SemiImplicit,
}

impl std::str::FromStr for Scheme {
    type Err = GpeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "split-step" | "splitstep" => Ok(Self::SplitStep),
            "semi-implicit" | "semiimplicit" => Ok(Self::SemiImplicit),
            other => domain(format!(
                "unknown scheme `{other}` (expected split-step|semi-implicit)"
            )),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::SplitStep => "split-step",
            Self::SemiImplicit => "semi-implicit",
        })
    }
}

/// Absorbing layer at the outer boundaries: the field is damped at rate
/// `strength * sin^2` rising over the outermost `width` of each open
/// direction. Radiation leaving the condensate is removed instead of
/// reflected, so the norm is no longer conserved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sponge {
    pub width: f64,
    pub strength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    pub dt: f64,
    pub t_final: f64,
    pub observe_every: usize,
    pub scheme: Scheme,
    pub sponge: Option<Sponge>,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_final: 10.0,
            observe_every: 100,
            scheme: Scheme::SplitStep,
            sponge: None,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return domain(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return domain(format!("t_final must be non-negative, got {}", self.t_final));
        }
        if self.observe_every == 0 {
            return domain("observe_every must be at least 1");
        }
        if let Some(s) = self.sponge {
            if !(s.width > 0.0) || !(s.strength >= 0.0) {
                return domain("sponge width must be positive and strength non-negative");
            }
        }
        Ok(())
    }

    /// Number of steps: `t_final / dt` rounded to the nearest integer.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<ObservableRecord>,
    pub final_state: Wavefunction,
    pub steps: usize,
}

/// Cayley factors `(1 + i c L)^-1 (1 - i c L)` of a second-difference band
/// scaled so that the pair advances `-1/2 L` by `dt`.
#[derive(Debug, Clone)]
struct CayleyLine {
    lower: Vec<Complex64>,
    diag: Vec<Complex64>,
    upper: Vec<Complex64>,
    solve: Tridiagonal<Complex64>,
}

impl CayleyLine {
    fn new(lower: &[f64], diag: &[f64], upper: &[f64], dt: f64) -> Self {
        // i u_t = -1/2 L u  =>  (1 - i dt/4 L) u+ = (1 + i dt/4 L) u
        let c = Complex64::new(0.0, dt / 4.0);
        let explicit = |x: &[f64], add: f64| -> Vec<Complex64> {
            x.iter().map(|v| add + c * v).collect()
        };
        let implicit = |x: &[f64], add: f64| -> Vec<Complex64> {
            x.iter().map(|v| add - c * v).collect()
        };
        Self {
            lower: explicit(lower, 0.0),
            diag: explicit(diag, 1.0),
            upper: explicit(upper, 0.0),
            solve: Tridiagonal::factor(&implicit(lower, 0.0), &implicit(diag, 1.0), &implicit(upper, 0.0)),
        }
    }

    fn apply(&self, row: &mut [Complex64], tmp: &mut Vec<Complex64>) {
        tmp.clear();
        tmp.extend_from_slice(row);
        crate::tridiag::apply(&self.lower, &self.diag, &self.upper, tmp, row);
        self.solve.solve(row);
    }
}

#[derive(Debug, Clone)]
enum Kinetic {
    Spectral { phase: Vec<Complex64> },
    Cayley {
        radial: Option<CayleyLine>,
        axial: Option<CayleyLine>,
    },
}

/// Steps a state forward in time under a fixed operator.
#[derive(Debug, Clone)]
pub struct Propagator {
    field: MeanField,
    dt: f64,
    scheme: Scheme,
    kinetic: Kinetic,
    damping: Option<Vec<f64>>,
    previous: Option<Vec<Complex64>>,
}

impl Propagator {
    pub fn new(field: MeanField, dt: f64, scheme: Scheme, sponge: Option<Sponge>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return domain(format!("dt must be positive, got {dt}"));
        }
        let grid = field.grid().clone();
        let kinetic = match (grid.geometry(), grid.spectral()) {
            (Geometry::Line, Some(sp)) => Kinetic::Spectral {
                phase: sp
                    .wavenumbers()
                    .iter()
                    .map(|k| {
                        let w = 0.5 * k * k;
                        match scheme {
                            Scheme::SplitStep => Complex64::from_polar(1.0, -w * dt),
                            Scheme::SemiImplicit => {
                                let c = Complex64::new(0.0, 0.5 * w * dt);
                                (1.0 - c) / (1.0 + c)
                            }
                        }
                    })
                    .collect(),
            },
            _ => Kinetic::Cayley {
                radial: grid
                    .radial_band()
                    .map(|b| CayleyLine::new(&b.lower, &b.diag, &b.upper, dt)),
                axial: grid
                    .axial_band()
                    .map(|b| CayleyLine::new(&b.lower, &b.diag, &b.upper, dt)),
            },
        };
        let damping = sponge.map(|s| sponge_profile(&grid, s));
        Ok(Self {
            field,
            dt,
            scheme,
            kinetic,
            damping,
            previous: None,
        })
    }

    pub fn field(&self) -> &MeanField {
        &self.field
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn kinetic_step(&self, u: &mut [Complex64]) {
        let grid = self.field.grid();
        let (nr, ns) = grid.shape();
        match &self.kinetic {
            Kinetic::Spectral { phase } => {
                let sp = grid.spectral().expect("spectral line grid");
                let mut scratch = sp.scratch();
                sp.filter(u, &mut scratch, |j| phase[j]);
            }
            Kinetic::Cayley { radial, axial } => {
                if let Some(a) = axial {
                    par::for_each_row(u, ns, |_, row| a.apply(row, &mut Vec::with_capacity(ns)));
                }
                if let Some(r) = radial {
                    if ns == 1 {
                        r.apply(u, &mut Vec::with_capacity(nr));
                    } else {
                        let mut t = par::transpose(u, nr, ns);
                        par::for_each_row(&mut t, nr, |_, col| r.apply(col, &mut Vec::with_capacity(nr)));
                        u.copy_from_slice(&par::transpose(&t, ns, nr));
                    }
                }
            }
        }
    }

    /// Exact pointwise phase over `fraction * dt`; the density is read from
    /// `u` itself, which the phase leaves unchanged.
    fn phase(&self, u: &mut [Complex64], fraction: f64) {
        let h = fraction * self.dt;
        let g = self.field.nonlinear();
        par::update(u, |k, x| {
            let w = self.field.potential(k) - g * x.norm_sqr();
            *x *= Complex64::from_polar(1.0, -w * h);
        });
    }

    /// Crank-Nicolson pointwise factor over half a step with a given density.
    fn cayley_half(&self, u: &mut [Complex64], dens: &[f64]) {
        let h = 0.5 * self.dt;
        let g = self.field.nonlinear();
        par::update(u, |k, x| {
            let w = self.field.potential(k) - g * dens[k];
            let c = Complex64::new(0.0, 0.5 * h * w);
            *x *= (1.0 - c) / (1.0 + c);
        });
    }

    fn damp(&self, u: &mut [Complex64]) {
        if let Some(d) = &self.damping {
            let dt = self.dt;
            par::update(u, |k, x| *x *= (-d[k] * dt).exp());
        }
    }

    /// Advances `u` by one step.
    pub fn step(&mut self, u: &mut [Complex64]) {
        self.advance(u, 1);
    }

    /// Advances `u` by `n` steps. Split-step phase factors of consecutive
    /// steps commute with each other and are merged into one.
    pub fn advance(&mut self, u: &mut [Complex64], n: usize) {
        if n == 0 {
            return;
        }
        match self.scheme {
            Scheme::SplitStep => {
                self.phase(u, 0.5);
                for i in 0..n {
                    self.kinetic_step(u);
                    self.damp(u);
                    if i + 1 < n {
                        self.phase(u, 1.0);
                    }
                }
                self.phase(u, 0.5);
            }
            Scheme::SemiImplicit => {
                for _ in 0..n {
                    let lagged: Vec<f64> = match &self.previous {
                        Some(prev) => u
                            .iter()
                            .zip(prev)
                            .map(|(a, b)| (1.5 * a - 0.5 * b).norm_sqr())
                            .collect(),
                        None => u.iter().map(|v| v.norm_sqr()).collect(),
                    };
                    match &mut self.previous {
                        Some(prev) => prev.copy_from_slice(u),
                        None => self.previous = Some(u.to_vec()),
                    }
                    self.cayley_half(u, &lagged);
                    self.kinetic_step(u);
                    self.cayley_half(u, &lagged);
                    self.damp(u);
                }
            }
        }
    }

    fn record(&self, tau: f64, u: &Wavefunction) -> Result<ObservableRecord> {
        let m = moments(u)?;
        let e = self.field.energy(u)?;
        let f = self.field.mean_axial_force(u)?;
        Ok(ObservableRecord::from_moments(tau, &m, e, f))
    }
}

fn sponge_profile(grid: &Grid, s: Sponge) -> Vec<f64> {
    let ramp = |dist_to_edge: f64| {
        if dist_to_edge >= s.width {
            0.0
        } else {
            let x = 1.0 - dist_to_edge.max(0.0) / s.width;
            s.strength * (0.5 * PI * x).sin().powi(2)
        }
    };
    let axial = grid.axial_nodes();
    let (s_lo, s_hi) = (axial[0], axial[axial.len() - 1]);
    let radial_max = match *grid.spec() {
        crate::grid::GridSpec::Cylindrical { rho_max, .. } => Some(rho_max),
        crate::grid::GridSpec::SphericalRadial { r_max, .. } => Some(r_max),
        _ => None,
    };
    let geometry = grid.geometry();
    (0..grid.len())
        .map(|k| {
            let (r, z) = grid.coords(k);
            let mut d: f64 = 0.0;
            if geometry != Geometry::SphericalRadial {
                d = d.max(ramp((z - s_lo).min(s_hi - z)));
            }
            if let Some(rm) = radial_max {
                d = d.max(ramp(rm - r));
            }
            d
        })
        .collect()
}

/// Propagates `u0` in the harmonic trap with an optional external potential.
pub fn propagate(
    u0: &Wavefunction,
    trap: TrapSpec,
    q: f64,
    ext: Option<&ExternalPotential>,
    cfg: &PropagationConfig,
) -> Result<Trajectory> {
    let mut field = MeanField::new(u0.grid().clone(), trap, q)?;
    if let Some(e) = ext {
        field = field.with_external(e)?;
    }
    propagate_in(field, u0, cfg)
}

/// Propagates `u0` under `field`, recording observables at `tau = 0` and
/// every `observe_every` steps (and at the final step).
pub fn propagate_in(field: MeanField, u0: &Wavefunction, cfg: &PropagationConfig) -> Result<Trajectory> {
    Ok(run(field, u0, cfg, &[])?.0)
}

/// [`propagate_in`] that also returns copies of the state at the given
/// times, each rounded to the nearest step.
pub fn propagate_with_snapshots(
    field: MeanField,
    u0: &Wavefunction,
    cfg: &PropagationConfig,
    times: &[f64],
) -> Result<(Trajectory, Vec<(f64, Wavefunction)>)> {
    cfg.validate()?;
    let steps = cfg.steps();
    let mut at = Vec::with_capacity(times.len());
    for &t in times {
        let n = (t / cfg.dt).round();
        if !(n >= 0.0) || n as usize > steps {
            return domain(format!("snapshot time {t} lies outside [0, {}]", cfg.t_final));
        }
        at.push(n as usize);
    }
    at.sort_unstable();
    at.dedup();
    run(field, u0, cfg, &at)
}

fn run(
    field: MeanField,
    u0: &Wavefunction,
    cfg: &PropagationConfig,
    snapshot_steps: &[usize],
) -> Result<(Trajectory, Vec<(f64, Wavefunction)>)> {
    cfg.validate()?;
    let norm0 = u0.norm();
    if (norm0 - 1.0).abs() > 1e-8 {
        return Err(GpeError::NotNormalized(norm0));
    }
    let mut prop = Propagator::new(field, cfg.dt, cfg.scheme, cfg.sponge)?;
    let check_norm = cfg.sponge.is_none();
    let steps = cfg.steps();
    let mut u = u0.clone();
    let peak0 = u.max_abs().powi(2);
    let mut records = vec![prop.record(0.0, &u)?];
    let mut checkpoint = (0usize, norm0);
    let mut snapshots = Vec::with_capacity(snapshot_steps.len());
    let mut pending = snapshot_steps.iter().copied().peekable();
    let mut n = 0;
    loop {
        while let Some(&k) = pending.peek() {
            if k > n {
                break;
            }
            snapshots.push((k as f64 * cfg.dt, u.clone()));
            pending.next();
        }
        if n >= steps {
            break;
        }
        let next_observe = ((n / cfg.observe_every) + 1) * cfg.observe_every;
        let next_check = (n / 1000 + 1) * 1000;
        let next_snapshot = pending.peek().copied().unwrap_or(usize::MAX);
        let target = next_observe.min(next_check).min(next_snapshot).min(steps);
        prop.advance(u.values_mut(), target - n);
        n = target;
        let tau = n as f64 * cfg.dt;
        let observe = n % cfg.observe_every == 0 || n == steps;
        {
            let norm = u.norm();
            if !norm.is_finite() || !u.is_finite() {
                return Err(GpeError::Blowup {
                    tau,
                    detail: "field is no longer finite".into(),
                });
            }
            let peak = u.max_abs().powi(2);
            if peak > BLOWUP_FACTOR * peak0 {
                return Err(GpeError::Blowup {
                    tau,
                    detail: format!("peak density grew from {peak0:.3e} to {peak:.3e}"),
                });
            }
            if check_norm {
                if (norm - norm0).abs() > NORM_DRIFT_TOTAL {
                    return Err(GpeError::StepSize(format!(
                        "norm drifted to {norm:.12} by tau = {tau}; reduce dt"
                    )));
                }
                if n % 1000 == 0 {
                    let (n_prev, norm_prev) = checkpoint;
                    if (norm - norm_prev).abs() > NORM_DRIFT_PER_1000 {
                        return Err(GpeError::StepSize(format!(
                            "norm changed by {:.3e} over steps {n_prev}..{n}; reduce dt",
                            (norm - norm_prev).abs()
                        )));
                    }
                    checkpoint = (n, norm);
                }
            }
        }
        if observe {
            records.push(prop.record(tau, &u)?);
        }
    }
    let trajectory = Trajectory {
        records,
        final_state: u,
        steps,
    };
    Ok((trajectory, snapshots))
}

fn require_axial(u: &Wavefunction, what: &str) -> Result<()> {
    if u.grid().geometry() == Geometry::SphericalRadial {
        return Err(GpeError::GeometryMismatch(format!(
            "{what} needs an axial coordinate (line or cylindrical grid)"
        )));
    }
    Ok(())
}

/// Multiplies by the plane wave `exp(i v s)`.
pub fn boost(u: &Wavefunction, v: f64) -> Result<Wavefunction> {
    require_axial(u, "boost")?;
    let grid = u.grid().clone();
    let mut out = u.clone();
    par::update(out.values_mut(), |k, x| {
        *x *= Complex64::from_polar(1.0, v * grid.coords(k).1)
    });
    Ok(out)
}

/// Band-limited translation `u(s) -> u(s - ds)` along the axis, followed by
/// renormalization. Fails when more than `1e-8` of the norm would cross the
/// ends of the axial domain.
pub fn displace(u: &Wavefunction, ds: f64) -> Result<Wavefunction> {
    require_axial(u, "displace")?;
    let grid = u.grid().clone();
    let sp = grid.spectral().expect("axial grids carry transforms");
    let ns = grid.shape().1;
    let axial = grid.axial_nodes();
    let h = grid.d_axial();
    let (lo, hi) = (axial[0], axial[0] + ns as f64 * h);
    let w = grid.weights();
    let v = u.values();
    let lost = par::sum_by(v.len(), |k| {
        let s = axial[k % ns] + ds;
        if s < lo || s >= hi {
            w[k] * v[k].norm_sqr()
        } else {
            0.0
        }
    }) * grid.norm_factor();
    let norm = u.norm();
    if lost > 1e-8 * norm {
        return domain(format!(
            "displacing by {ds} pushes {:.3e} of the norm off the grid",
            lost / norm
        ));
    }
    let mut out = u.clone();
    par::for_each_row(out.values_mut(), ns, |_, row| {
        sp.translate(row, &mut sp.scratch(), ds);
    });
    out.scale((norm / out.norm()).sqrt());
    Ok(out)
}

/// Harmonic-oscillation fit of the centroid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationFit {
    pub frequency: f64,
    pub amplitude: f64,
    /// `|A_last - A_first| / A_first` between fits over the first and last
    /// period.
    pub amplitude_drift: f64,
    pub periods: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EhrenfestReport {
    /// `max |dX/dtau - <P>|` with centered differences of the samples.
    pub velocity_residual: f64,
    /// `max |d^2X/dtau^2 - F|` with centered second differences.
    pub acceleration_residual: f64,
    /// Least-squares constant acceleration of `X(tau)` (quadratic fit).
    pub mean_acceleration: f64,
    /// Mean recorded force.
    pub mean_force: f64,
    /// Present for a pure harmonic axial trap.
    pub oscillation: Option<OscillationFit>,
}

/// Checks the centroid against Newton's law with the recorded mean force.
/// `harmonic` requests the oscillation fit, which needs at least two periods
/// at eight samples per period.
pub fn ehrenfest_check(records: &[ObservableRecord], harmonic: bool) -> Result<EhrenfestReport> {
    let n = records.len();
    if n < 3 {
        return Err(GpeError::InsufficientSamples(format!(
            "need at least 3 samples, got {n}"
        )));
    }
    let t: Vec<f64> = records.iter().map(|r| r.tau).collect();
    let x: Vec<f64> = records.iter().map(|r| r.x_s).collect();
    let mut vel: f64 = 0.0;
    let mut acc: f64 = 0.0;
    for i in 1..n - 1 {
        let (h0, h1) = (t[i] - t[i - 1], t[i + 1] - t[i]);
        let dx = (x[i + 1] - x[i - 1]) / (h0 + h1);
        vel = vel.max((dx - records[i].p_s).abs());
        let d2 = 2.0 * ((x[i + 1] - x[i]) / h1 - (x[i] - x[i - 1]) / h0) / (h0 + h1);
        acc = acc.max((d2 - records[i].force_s).abs());
    }
    let mean_force = records.iter().map(|r| r.force_s).sum::<f64>() / n as f64;
    let oscillation = if harmonic {
        Some(fit_oscillation(&t, &x)?)
    } else {
        None
    };
    Ok(EhrenfestReport {
        velocity_residual: vel,
        acceleration_residual: acc,
        mean_acceleration: 2.0 * polyfit2(&t, &x)[2],
        mean_force,
        oscillation,
    })
}

/// Least-squares `c0 + c1 t + c2 t^2`.
fn polyfit2(t: &[f64], x: &[f64]) -> [f64; 3] {
    let basis = |tt: f64| [1.0, tt, tt * tt];
    least_squares(t, x, basis)
}

/// Normal equations for a three-function linear fit.
fn least_squares(t: &[f64], x: &[f64], basis: impl Fn(f64) -> [f64; 3]) -> [f64; 3] {
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for (&tt, &xx) in t.iter().zip(x) {
        let f = basis(tt);
        for i in 0..3 {
            b[i] += f[i] * xx;
            for j in 0..3 {
                a[i][j] += f[i] * f[j];
            }
        }
    }
    solve3(a, b)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for c in 0..3 {
        let p = (c..3)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap_or(c);
        a.swap(c, p);
        b.swap(c, p);
        if a[c][c] == 0.0 {
            continue;
        }
        for r in c + 1..3 {
            let f = a[r][c] / a[c][c];
            for k in c..3 {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut out = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|k| a[r][k] * out[k]).sum();
        out[r] = if a[r][r] != 0.0 { (b[r] - s) / a[r][r] } else { 0.0 };
    }
    out
}

fn sinusoid_fit(t: &[f64], x: &[f64], omega: f64) -> ([f64; 3], f64) {
    let basis = |tt: f64| [1.0, (omega * tt).cos(), (omega * tt).sin()];
    let c = least_squares(t, x, basis);
    let sse = t
        .iter()
        .zip(x)
        .map(|(&tt, &xx)| {
            let f = basis(tt);
            (xx - c[0] * f[0] - c[1] * f[1] - c[2] * f[2]).powi(2)
        })
        .sum();
    (c, sse)
}

fn fit_oscillation(t: &[f64], x: &[f64]) -> Result<OscillationFit> {
    let n = t.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    // Coarse frequency from the spacing of mean crossings.
    let mut crossings = Vec::new();
    for i in 1..n {
        let (a, b) = (x[i - 1] - mean, x[i] - mean);
        if a == 0.0 || a * b < 0.0 {
            crossings.push(t[i - 1] + (t[i] - t[i - 1]) * a / (a - b));
        }
    }
    if crossings.len() < 3 {
        return Err(GpeError::InsufficientSamples(format!(
            "centroid crosses its mean {} times; need at least two periods",
            crossings.len()
        )));
    }
    let half_period = (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
    let period = 2.0 * half_period;
    let span = t[n - 1] - t[0];
    let per_period = period / (span / (n - 1) as f64);
    if span < 2.0 * period || per_period < 8.0 {
        return Err(GpeError::InsufficientSamples(format!(
            "{:.2} periods at {per_period:.1} samples per period; need 2 periods at 8 samples",
            span / period
        )));
    }
    // Golden-section refinement of the least-squares frequency.
    let omega0 = 2.0 * PI / period;
    let (mut lo, mut hi) = (0.9 * omega0, 1.1 * omega0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (sinusoid_fit(t, x, a).1, sinusoid_fit(t, x, b).1);
    for _ in 0..200 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = sinusoid_fit(t, x, a).1;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = sinusoid_fit(t, x, b).1;
        }
        if hi - lo < 1e-12 * omega0 {
            break;
        }
    }
    let omega = 0.5 * (lo + hi);
    let (c, _) = sinusoid_fit(t, x, omega);
    let amplitude = c[1].hypot(c[2]);
    let period = 2.0 * PI / omega;
    let window = |from: f64, to: f64| -> f64 {
        let (tt, xx): (Vec<f64>, Vec<f64>) = t
            .iter()
            .zip(x)
            .filter(|(&s, _)| s >= from && s <= to)
            .map(|(&s, &v)| (s, v))
            .unzip();
        let (c, _) = sinusoid_fit(&tt, &xx, omega);
        c[1].hypot(c[2])
    };
    let first = window(t[0], t[0] + period);
    let last = window(t[n - 1] - period, t[n - 1]);
    Ok(OscillationFit {
        frequency: omega,
        amplitude,
        amplitude_drift: (last - first).abs() / first,
        periods: span / period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;
    use crate::analytic;
    use crate::grid::GridSpec;
    use crate::observables::moments;

    fn line(half: f64, n: usize) -> Arc<Grid> {
        Arc::new(Grid::build(GridSpec::Line { s_min: -half, s_max: half, n_s: n }).unwrap())
    }

    fn soliton(g: &Arc<Grid>, q: f64) -> Wavefunction {
        let sol = analytic::SolitonProfile::new(q).unwrap();
        Wavefunction::from_fn(g.clone(), |_, s| Complex64::new(sol.value(s), 0.0))
            .normalized()
            .unwrap()
    }

    #[test]
    fn boost_is_a_pure_phase() {
        let g = line(60.0, 1024);
        let u = soliton(&g, 5.0);
        let b = boost(&u, 0.5).unwrap();
        for (x, y) in u.values().iter().zip(b.values()) {
            assert!((x.norm() - y.norm()).abs() < 1e-15);
        }
        assert_eq!(boost(&u, 0.0).unwrap().values(), u.values());
        let dp = moments(&b).unwrap().p_s - moments(&u).unwrap().p_s;
        assert!((dp - 0.5).abs() < 1e-10);
    }

    #[test]
    fn displacement_moves_the_centroid() {
        let g = line(60.0, 1024);
        let u = soliton(&g, 5.0);
        let h = g.d_axial();
        assert!(displace(&u, 0.0).unwrap().distance(&u).unwrap() < 1e-10);
        let one = displace(&u, 1.3).unwrap();
        assert!((moments(&one).unwrap().x_s - 1.3).abs() < h / 10.0);
        let two = displace(&one, 1.3).unwrap();
        assert!(two.distance(&displace(&u, 2.6).unwrap()).unwrap() < 1e-10);
        assert!(displace(&u, 55.0).is_err());
    }

    #[test]
    fn line_soliton_is_stationary() {
        let g = line(60.0, 1024);
        let u = soliton(&g, 5.0);
        let cfg = PropagationConfig { dt: 1e-2, t_final: 5.0, observe_every: 50, ..Default::default() };
        let traj = propagate(&u, TrapSpec::new(0.0).unwrap(), 5.0, None, &cfg).unwrap();
        let end = &traj.final_state;
        let change = u
            .values()
            .iter()
            .zip(end.values())
            .map(|(a, b)| (a.norm() - b.norm()).abs())
            .fold(0.0, f64::max)
            / u.max_abs();
        assert!(change < 1e-4, "{change}");
        for r in &traj.records {
            assert!((r.norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn snapshots_match_shorter_runs() {
        let g = line(60.0, 512);
        let u = displace(&soliton(&g, 5.0), 1.0).unwrap();
        let field = MeanField::new(g.clone(), TrapSpec::new(0.1).unwrap(), 5.0).unwrap();
        let cfg = PropagationConfig { dt: 1e-2, t_final: 2.0, observe_every: 30, ..Default::default() };
        let (full, snaps) = propagate_with_snapshots(field.clone(), &u, &cfg, &[0.0, 0.57, 1.0]).unwrap();
        assert_eq!(snaps.len(), 3);
        assert_eq!(snaps[0].1.values(), u.values());
        let short = PropagationConfig { t_final: 0.57, ..cfg };
        let part = propagate_in(field.clone(), &u, &short).unwrap();
        assert!(snaps[1].1.distance(&part.final_state).unwrap() < 1e-13);
        // snapshots do not perturb the trajectory
        let plain = propagate_in(field.clone(), &u, &cfg).unwrap();
        assert!(plain.final_state.distance(&full.final_state).unwrap() < 1e-13);
        assert_eq!(plain.records.len(), full.records.len());
        assert!(propagate_with_snapshots(field, &u, &cfg, &[3.0]).is_err());
    }

    #[test]
    fn oscillation_fit_recovers_a_sinusoid() {
        let recs: Vec<ObservableRecord> = (0..400)
            .map(|i| {
                let tau = i as f64 * 0.5;
                let mut r = ObservableRecord::from_moments(
                    tau,
                    &crate::observables::Moments {
                        norm: 1.0,
                        x_s: 2.0 * (0.2 * tau).cos(),
                        p_s: -0.4 * (0.2 * tau).sin(),
                        s2: 0.0,
                        w_s: 0.0,
                        w_rho: 0.0,
                        peak_density: 0.0,
                    },
                    Default::default(),
                    0.0,
                );
                r.force_s = -0.04 * r.x_s;
                r
            })
            .collect();
        let rep = ehrenfest_check(&recs, true).unwrap();
        let fit = rep.oscillation.unwrap();
        assert!((fit.frequency - 0.2).abs() < 1e-9);
        assert!((fit.amplitude - 2.0).abs() < 1e-9);
        assert!(fit.amplitude_drift < 1e-9);
        assert!(rep.velocity_residual < 0.01);
        assert!(ehrenfest_check(&recs[..20], true).is_err());
    }
}

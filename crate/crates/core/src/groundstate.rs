//! Ground states by normalized steepest descent of the energy functional.
//!
//! Each iteration moves the state against the functional gradient
//! `2 H[u] u`, renormalizes, and accepts the step only if the energy did
//! not rise (relative tolerance `1e-12`); a rejected step halves the
//! pseudo-time step. Two metrics are available:
//!
//! * [`DescentMethod::Gradient`]: `u <- u - dt 2 H[u] u`, the plain flow.
//! * [`DescentMethod::Preconditioned`]: `u <- u - dt P^-1 2 (H[u] - mu) u`
//!   with `P = (1 + a (-lap_r/2 + V_r)) (1 + a (-lap_s/2 + V_s))`, a
//!   separable Sobolev metric that damps the stiff grid modes so far larger
//!   steps are stable. Same fixed points, far fewer iterations.
//!
//! Collapse is flagged when `max |u|` exceeds `collapse_guard` times the
//! peak of the analytic reference state, when the energy drops below
//! `-1e3`, or when the field stops being finite.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::analytic;
use crate::energy::{residual_norm, EnergyBreakdown, MeanField, TrapSpec};
use crate::error::{domain, GpeError, Result};
use crate::grid::{Geometry, Grid};
use crate::par;
use crate::tridiag::{Separable, Tridiagonal};
use crate::wavefunction::Wavefunction;

/// Energies below this are taken as runaway descent into collapse.
pub const ENERGY_FLOOR: f64 = -1e3;

/// Consecutive rejected steps before giving up.
const MAX_REJECTIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentMethod {
    Gradient,
    Preconditioned,
}

impl std::str::FromStr for DescentMethod {
    type Err = GpeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gradient" => Ok(Self::Gradient),
            "preconditioned" => Ok(Self::Preconditioned),
            other => domain(format!(
                "unknown descent method `{other}` (expected gradient|preconditioned)"
            )),
        }
    }
}

impl std::fmt::Display for DescentMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Gradient => "gradient",
            Self::Preconditioned => "preconditioned",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentConfig {
    /// Pseudo-time step.
    pub step_size: f64,
    pub max_iters: usize,
    /// Relative energy change per accepted step.
    pub energy_tol: f64,
    /// Target for `||H u - mu u||`.
    pub residual_tol: f64,
    /// Amplitude ceiling in units of the reference peak.
    pub collapse_guard: f64,
    pub method: DescentMethod,
}

impl Default for DescentConfig {
    fn default() -> Self {
        Self {
            step_size: 0.5,
            max_iters: 50_000,
            energy_tol: 1e-10,
            residual_tol: 1e-6,
            collapse_guard: 5.0,
            method: DescentMethod::Preconditioned,
        }
    }
}

impl DescentConfig {
    /// The plain gradient flow with `dt = 1e-3`.
    pub fn gradient() -> Self {
        Self {
            step_size: 1e-3,
            method: DescentMethod::Gradient,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !self.step_size.is_finite() {
            return domain(format!("step_size must be positive, got {}", self.step_size));
        }
        if !(self.energy_tol > 0.0) || !(self.residual_tol > 0.0) {
            return domain("tolerances must be positive");
        }
        if !(self.collapse_guard > 1.0) {
            return domain(format!("collapse_guard must exceed 1, got {}", self.collapse_guard));
        }
        if self.max_iters == 0 {
            return domain("max_iters must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub wavefunction: Wavefunction,
    pub energy: EnergyBreakdown,
    pub iterations: usize,
    pub converged: bool,
    pub collapsed: bool,
    pub residual: f64,
    /// Total energy after every accepted step, starting with the seed.
    pub energy_history: Vec<f64>,
}

impl GroundStateResult {
    /// Neither converged nor collapsed within the iteration budget.
    pub fn unresolved(&self) -> bool {
        !self.converged && !self.collapsed
    }
}

/// Peak amplitude of the analytic state the collapse guard is measured
/// against: the composite soliton without an axial trap, the larger of the
/// soliton and the trap Gaussian with one, the isotropic Gaussian on
/// spherical grids.
pub fn reference_peak(geometry: Geometry, trap: TrapSpec, q: f64) -> f64 {
    let gaussian = |lz: f64| lz.powf(0.25) * PI.powf(-0.75);
    let soliton = if q > 0.0 { q.sqrt() / (4.0 * PI) } else { 0.0 };
    let peak = match geometry {
        Geometry::SphericalRadial => gaussian(1.0),
        _ if trap.lambda_z == 0.0 => soliton,
        _ => soliton.max(gaussian(trap.lambda_z)),
    };
    if peak > 0.0 {
        peak
    } else {
        1.0
    }
}

/// Seed state: the noninteracting Gaussian with an axial trap, the
/// composite soliton without one; normalized on the grid.
pub fn default_initial(grid: Arc<Grid>, trap: TrapSpec, q: f64) -> Result<Wavefunction> {
    trap.validate()?;
    let u = match grid.geometry() {
        Geometry::SphericalRadial => Wavefunction::from_fn(grid, |r, _| {
            Complex64::new(PI.powf(-0.75) * (-0.5 * r * r).exp(), 0.0)
        }),
        Geometry::Line | Geometry::Cylindrical if trap.lambda_z > 0.0 => {
            let lz = trap.lambda_z;
            Wavefunction::from_fn(grid, move |r, s| {
                Complex64::new(analytic::gaussian_ground_state(lz, r, s).unwrap_or(0.0), 0.0)
            })
        }
        _ => {
            let sol = analytic::SolitonProfile::new(q)?;
            Wavefunction::from_fn(grid, move |r, s| {
                Complex64::new(sol.value(s) * (-0.5 * r * r).exp(), 0.0)
            })
        }
    };
    u.normalized()
}

/// Separable Sobolev preconditioner.
struct Preconditioner {
    solves: Separable<f64>,
}

impl Preconditioner {
    const ALPHA: f64 = 1.0;

    fn new(grid: &Grid, trap: TrapSpec) -> Self {
        let a = Self::ALPHA;
        let factor = |lower: &[f64], diag: &[f64], upper: &[f64], v: &dyn Fn(usize) -> f64| {
            let l: Vec<f64> = lower.iter().map(|x| -0.5 * a * x).collect();
            let u: Vec<f64> = upper.iter().map(|x| -0.5 * a * x).collect();
            let d: Vec<f64> = diag
                .iter()
                .enumerate()
                .map(|(i, x)| 1.0 - 0.5 * a * x + a * v(i))
                .collect();
            Tridiagonal::factor(&l, &d, &u)
        };
        let radial = grid.radial_band().map(|b| {
            let nodes = grid.radial_nodes();
            factor(&b.lower, &b.diag, &b.upper, &|i| 0.5 * nodes[i] * nodes[i])
        });
        let lz2 = trap.lambda_z * trap.lambda_z;
        let axial = grid.axial_band().map(|b| {
            let nodes = grid.axial_nodes();
            factor(&b.lower, &b.diag, &b.upper, &|j| 0.5 * lz2 * nodes[j] * nodes[j])
        });
        Self {
            solves: Separable::new(grid.shape(), radial, axial),
        }
    }
}

/// State of the current iterate: values, `H u` and its energy.
struct Iterate {
    u: Wavefunction,
    hu: Vec<Complex64>,
    energy: EnergyBreakdown,
}

fn evaluate(field: &MeanField, u: Wavefunction) -> Result<Iterate> {
    let v = u.values();
    let lap = field.grid().laplacian(v)?;
    let energy = field.energy_with_laplacian(v, &lap);
    let g = field.nonlinear();
    let mut hu = lap;
    par::update(&mut hu, |k, x| {
        *x = -0.5 * *x + v[k] * (field.potential(k) - g * v[k].norm_sqr());
    });
    Ok(Iterate { u, hu, energy })
}

/// Relaxes `initial` in the harmonic trap at interaction `q`.
pub fn relax(initial: &Wavefunction, trap: TrapSpec, q: f64, cfg: &DescentConfig) -> Result<GroundStateResult> {
    let field = MeanField::new(initial.grid().clone(), trap, q)?;
    relax_in(&field, initial, cfg)
}

/// Relaxes `initial` under an arbitrary mean-field operator (for instance
/// one with an external potential).
pub fn relax_in(field: &MeanField, initial: &Wavefunction, cfg: &DescentConfig) -> Result<GroundStateResult> {
    cfg.validate()?;
    let norm = initial.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(GpeError::NotNormalized(norm));
    }
    let grid = field.grid().clone();
    let ceiling = cfg.collapse_guard * reference_peak(grid.geometry(), field.trap(), field.q());
    let precond = match cfg.method {
        DescentMethod::Preconditioned => Some(Preconditioner::new(&grid, field.trap())),
        DescentMethod::Gradient => None,
    };
    let w = grid.weights();
    let nf = grid.norm_factor();

    let mut seed = initial.clone();
    seed.normalize()?;
    let mut cur = evaluate(field, seed)?;
    let mut history = vec![cur.energy.total];
    let mut dt = cfg.step_size;
    let mut rejections = 0;
    let mut last_change = f64::INFINITY;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut collapsed = false;
    let mut converged = false;

    while iterations < cfg.max_iters {
        let v = cur.u.values();
        let mu = cur.energy.chemical_potential;
        residual = residual_norm(&grid, v, &cur.hu, mu);
        if last_change < cfg.energy_tol && residual < cfg.residual_tol {
            converged = true;
            break;
        }

        let mut dir: Vec<Complex64> = match &precond {
            None => cur.hu.iter().map(|x| 2.0 * x).collect(),
            Some(p) => {
                let mut d: Vec<Complex64> = (0..v.len()).map(|k| 2.0 * (cur.hu[k] - mu * v[k])).collect();
                p.solves.solve(&mut d);
                let [re, im] = par::sum_array(v.len(), |k| {
                    let c = v[k].conj() * d[k] * w[k];
                    [c.re, c.im]
                });
                let proj = Complex64::new(re, im) * nf;
                par::update(&mut d, |k, x| *x -= proj * v[k]);
                d
            }
        };
        par::update(&mut dir, |k, x| *x = v[k] - dt * *x);
        let mut trial = Wavefunction::new(grid.clone(), dir)?;
        iterations += 1;
        if !trial.is_finite() || trial.normalize().is_err() {
            collapsed = true;
            break;
        }
        let next = evaluate(field, trial)?;
        let (e_old, e_new) = (cur.energy.total, next.energy.total);
        if !e_new.is_finite() || e_new < ENERGY_FLOOR || next.u.max_abs() > ceiling {
            cur = next;
            collapsed = true;
            break;
        }
        if e_new - e_old > 1e-12 * e_old.abs() {
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(GpeError::StepSize(format!(
                    "energy rose on {MAX_REJECTIONS} consecutive steps down to dt = {dt:.3e}; \
                     reduce step_size or refine the grid"
                )));
            }
            dt *= 0.5;
            continue;
        }
        rejections = 0;
        last_change = (e_new - e_old).abs() / e_new.abs().max(f64::MIN_POSITIVE);
        cur = next;
        history.push(e_new);
        dt = (dt * 1.25).min(cfg.step_size);
    }
    if collapsed {
        residual = f64::NAN;
    }
    Ok(GroundStateResult {
        energy: cur.energy,
        wavefunction: cur.u,
        iterations,
        converged,
        collapsed,
        residual,
        energy_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::observables::{compare_profiles, Section};

    #[test]
    fn noninteracting_limit_is_gaussian() {
        let g = Arc::new(Grid::build(GridSpec::Cylindrical {
            rho_max: 6.0,
            n_rho: 64,
            s_min: -12.0,
            s_max: 12.0,
            n_s: 128,
        }).unwrap());
        let trap = TrapSpec::new(0.4).unwrap();
        let seed = default_initial(g.clone(), trap, 0.1).unwrap();
        let r = relax(&seed, trap, 0.1, &DescentConfig::default()).unwrap();
        assert!(r.converged, "{} iterations, residual {}", r.iterations, r.residual);
        assert!((r.wavefunction.norm() - 1.0).abs() < 1e-10);
        for pair in r.energy_history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12 * pair[0].abs());
        }
        let d = compare_profiles(&r.wavefunction, &seed, Section::Full).unwrap();
        assert!(d.linf_rel < 0.01, "{d:?}");
    }

    #[test]
    fn rejects_unnormalized_seed() {
        let g = Arc::new(Grid::build(GridSpec::SphericalRadial { r_max: 6.0, n_r: 64 }).unwrap());
        let mut seed = default_initial(g, TrapSpec::isotropic(), 1.0).unwrap();
        seed.scale(2.0);
        assert!(matches!(
            relax(&seed, TrapSpec::isotropic(), 1.0, &DescentConfig::default()),
            Err(GpeError::NotNormalized(_))
        ));
    }

    #[test]
    fn seeds_are_normalized() {
        let g = Arc::new(Grid::build(GridSpec::default_for(Geometry::Cylindrical, 5.0, 0.0).unwrap()).unwrap());
        for lz in [0.0, 0.4] {
            let u = default_initial(g.clone(), TrapSpec::new(lz).unwrap(), 5.0).unwrap();
            assert!((u.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn supercritical_spherical_collapses() {
        let g = Arc::new(Grid::build(GridSpec::SphericalRadial { r_max: 8.0, n_r: 256 }).unwrap());
        let seed = default_initial(g, TrapSpec::isotropic(), 20.0).unwrap();
        let r = relax(&seed, TrapSpec::isotropic(), 20.0, &DescentConfig::default()).unwrap();
        assert!(r.collapsed && !r.converged);
    }
}

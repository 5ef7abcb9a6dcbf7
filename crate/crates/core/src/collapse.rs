//! Critical interaction strength by bisection on ground-state existence.
//!
//! A probe is one relaxation at fixed `Q`. It either converges to a
//! stationary state, trips the collapse flag of the descent, or exhausts its
//! iteration budget. The last case is counted on the collapsed side: no
//! ground state was found, and a warning is attached to the result.
//!
//! Above the threshold the local energy minimum disappears, so which side a
//! probe lands on depends on its seed. Every probe after the bracket check
//! is seeded with the converged state at the largest `Q` known to converge.

use std::fmt;
use std::sync::Arc;

use crate::analytic;
use crate::energy::TrapSpec;
use crate::error::{domain, GpeError, Result};
use crate::grid::{Geometry, Grid, GridSpec};
use crate::groundstate::{default_initial, relax, DescentConfig, GroundStateResult};
use crate::par;
use crate::wavefunction::Wavefunction;

/// Consecutive outcome flips tolerated before a resolution warning.
pub const MAX_FLIPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Converged,
    Collapsed,
    Unresolved,
}

impl Outcome {
    fn of(r: &GroundStateResult) -> Self {
        if r.converged {
            Self::Converged
        } else if r.collapsed {
            Self::Collapsed
        } else {
            Self::Unresolved
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::Collapsed => "collapsed",
            Self::Unresolved => "unresolved",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub q: f64,
    pub outcome: Outcome,
    pub iterations: usize,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct ThresholdResult {
    pub geometry: Geometry,
    pub lambda_z: f64,
    pub grid: GridSpec,
    /// Largest probed `Q` with a converged ground state.
    pub q_lo: f64,
    /// Smallest probed `Q` without one.
    pub q_hi: f64,
    pub tolerance: f64,
    pub trials: Vec<Trial>,
    pub warnings: Vec<String>,
}

impl ThresholdResult {
    pub const CSV_HEADER: &'static str = "q,outcome,iterations,energy_total";

    /// Midpoint of the final bracket.
    pub fn estimate(&self) -> f64 {
        0.5 * (self.q_lo + self.q_hi)
    }

    pub fn contains(&self, q: f64) -> bool {
        self.q_lo <= q && q <= self.q_hi
    }
}

fn probe(seed: &Wavefunction, trap: TrapSpec, q: f64, cfg: &DescentConfig) -> Result<(Trial, GroundStateResult)> {
    let r = relax(seed, trap, q, cfg)?;
    let trial = Trial {
        q,
        outcome: Outcome::of(&r),
        iterations: r.iterations,
        energy: r.energy.total,
    };
    Ok((trial, r))
}

/// Longest run of consecutive outcome changes in the probe sequence.
fn longest_flip_run(trials: &[Trial]) -> usize {
    let mut best = 0;
    let mut run = 0;
    for pair in trials.windows(2) {
        let a = pair[0].outcome == Outcome::Converged;
        let b = pair[1].outcome == Outcome::Converged;
        if a != b {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

/// Bisects `bracket = [q_min, q_max]` down to width `tol` on the default
/// grid for `geometry`, sized for the widest state in the bracket.
pub fn find_threshold(
    geometry: Geometry,
    lambda_z: f64,
    bracket: (f64, f64),
    tol: f64,
    cfg: &DescentConfig,
) -> Result<ThresholdResult> {
    let spec = GridSpec::default_for(geometry, bracket.0.max(f64::MIN_POSITIVE), lambda_z)?;
    find_threshold_on(spec, lambda_z, bracket, tol, cfg)
}

/// [`find_threshold`] on an explicit grid.
pub fn find_threshold_on(
    spec: GridSpec,
    lambda_z: f64,
    bracket: (f64, f64),
    tol: f64,
    cfg: &DescentConfig,
) -> Result<ThresholdResult> {
    let (q_min, q_max) = bracket;
    if !(q_min.is_finite() && q_max.is_finite()) || !(0.0 < q_min && q_min < q_max) {
        return Err(GpeError::InvalidBracket(format!(
            "need 0 < q_min < q_max, got [{q_min}, {q_max}]"
        )));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    cfg.validate()?;
    let trap = TrapSpec::new(lambda_z)?;
    let geometry = spec.geometry();
    if geometry == Geometry::Line {
        return Err(GpeError::GeometryMismatch(
            "the line reduction has no collapse; use cylindrical or spherical-radial".into(),
        ));
    }
    let grid = Arc::new(Grid::build(spec)?);

    let lo_seed = default_initial(grid.clone(), trap, q_min)?;
    let hi_seed = default_initial(grid.clone(), trap, q_max)?;
    let (lo, hi) = par::join(
        || probe(&lo_seed, trap, q_min, cfg),
        || probe(&hi_seed, trap, q_max, cfg),
    );
    let (lo_trial, lo_run) = lo?;
    let (hi_trial, _) = hi?;
    if lo_trial.outcome != Outcome::Converged {
        return Err(GpeError::InvalidBracket(format!(
            "relaxation at q_min = {q_min} did not converge ({})",
            lo_trial.outcome
        )));
    }
    if hi_trial.outcome != Outcome::Collapsed {
        return Err(GpeError::InvalidBracket(format!(
            "relaxation at q_max = {q_max} did not collapse ({})",
            hi_trial.outcome
        )));
    }

    let mut trials = vec![lo_trial, hi_trial];
    let mut warnings = Vec::new();
    let (mut q_lo, mut q_hi) = (q_min, q_max);
    let mut warm = lo_run.wavefunction;
    while q_hi - q_lo > tol {
        let q = 0.5 * (q_lo + q_hi);
        let (trial, run) = probe(&warm, trap, q, cfg)?;
        match trial.outcome {
            Outcome::Converged => {
                q_lo = q;
                warm = run.wavefunction;
            }
            Outcome::Collapsed => q_hi = q,
            Outcome::Unresolved => {
                warnings.push(format!(
                    "probe at Q = {q} neither converged nor collapsed in {} iterations; \
                     counted as no ground state",
                    trial.iterations
                ));
                q_hi = q;
            }
        }
        trials.push(trial);
    }

    let flips = longest_flip_run(&trials[2..]);
    if flips > MAX_FLIPS {
        warnings.push(format!(
            "probe outcomes alternated over {flips} consecutive refinements; \
             the threshold may be below the grid resolution"
        ));
    }
    let variational = analytic::variational_critical_q(lambda_z).ok();
    if let Some(qv) = variational {
        if q_lo >= qv {
            warnings.push(format!(
                "a ground state converged at Q = {q_lo}, above the Gaussian bound {qv:.4}"
            ));
        }
    }

    Ok(ThresholdResult {
        geometry,
        lambda_z,
        grid: spec,
        q_lo,
        q_hi,
        tolerance: q_hi - q_lo,
        trials,
        warnings,
    })
}

#[derive(Debug, Clone)]
pub struct ScanRow {
    pub lambda_z: f64,
    pub threshold: ThresholdResult,
    pub variational: f64,
}

#[derive(Debug, Clone)]
pub struct OptimalityScan {
    pub rows: Vec<ScanRow>,
    /// Thresholds do not increase with `lambda_z` beyond the bracket
    /// tolerances.
    pub non_increasing: bool,
    /// Every numerical bracket lies strictly below the Gaussian bound.
    pub below_variational: bool,
}

impl OptimalityScan {
    pub const CSV_HEADER: &'static str = "lambda_z,q_lo,q_hi,q_c,q_variational";

    pub fn report(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&format!(
                "lambda_z = {:<5} Q_c in [{:.4}, {:.4}]  Gaussian bound {:.4}\n",
                r.lambda_z, r.threshold.q_lo, r.threshold.q_hi, r.variational
            ));
        }
        out.push_str(&format!(
            "non-increasing in lambda_z: {}\nbelow the Gaussian bound: {}\n",
            self.non_increasing, self.below_variational
        ));
        out
    }
}

/// Thresholds on the cylindrical grid for each anisotropy in
/// `lambda_zs` (each in `[0, 1]`).
pub fn optimality_scan(
    lambda_zs: &[f64],
    bracket: (f64, f64),
    tol: f64,
    cfg: &DescentConfig,
) -> Result<OptimalityScan> {
    if lambda_zs.is_empty() {
        return domain("optimality scan needs at least one lambda_z");
    }
    let mut rows = Vec::with_capacity(lambda_zs.len());
    for &lz in lambda_zs {
        if !(0.0..=1.0).contains(&lz) {
            return domain(format!("lambda_z must lie in [0, 1], got {lz}"));
        }
        let threshold = find_threshold(Geometry::Cylindrical, lz, bracket, tol, cfg)?;
        let variational = analytic::variational_critical_q(lz)?;
        rows.push(ScanRow {
            lambda_z: lz,
            threshold,
            variational,
        });
    }
    let mut sorted: Vec<&ScanRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.lambda_z.total_cmp(&b.lambda_z));
    let non_increasing = sorted
        .windows(2)
        .all(|p| p[1].threshold.q_lo <= p[0].threshold.q_hi);
    let below_variational = rows.iter().all(|r| r.threshold.q_hi < r.variational);
    Ok(OptimalityScan {
        rows,
        non_increasing,
        below_variational,
    })
}

/// Repeats [`find_threshold`] with every grid resolution multiplied by
/// each of `factors`, to show how far the bracket moves with the grid.
pub fn resolution_study(
    geometry: Geometry,
    lambda_z: f64,
    bracket: (f64, f64),
    tol: f64,
    cfg: &DescentConfig,
    factors: &[usize],
) -> Result<Vec<ThresholdResult>> {
    let base = GridSpec::default_for(geometry, bracket.0.max(f64::MIN_POSITIVE), lambda_z)?;
    factors
        .iter()
        .map(|&f| {
            if f == 0 {
                return domain("refinement factor must be at least 1");
            }
            find_threshold_on(base.refined(f), lambda_z, bracket, tol, cfg)
        })
        .collect()
}

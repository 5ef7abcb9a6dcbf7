//! Closed-form reference solutions.
//!
//! * the stationary sech soliton of the reduced axial equation and its width;
//! * the ratio of transverse trap energy to self-interaction that justifies
//!   factorizing the state into a transverse Gaussian and an axial profile;
//! * the noninteracting Gaussian ground state and the composite
//!   sech x Gaussian profile;
//! * the energy of a Gaussian trial state with radial and axial widths, and
//!   the largest `Q` for which that energy keeps a local minimum.
//!
//! Energies here use the same convention as [`crate::energy`]: twice the
//! Schrodinger energy, i.e. `integral |grad u|^2 + V |u|^2 - Q/2 |u|^4` with
//! `V = rho^2 + lambda_z^2 s^2`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Ground-state eigenvalue of the transverse two-dimensional oscillator in
/// units of the radial trap quantum.
pub const TRANSVERSE_EIGENVALUE: f64 = 1.0;

/// Threshold on `32 pi^2 / Q^2` above which the transverse trap is taken to
/// dominate the self-interaction.
pub const DOMINANCE_THRESHOLD: f64 = 10.0;

fn require_positive_q(q: f64) -> Result<()> {
    if !(q > 0.0) || !q.is_finite() {
        return domain(format!("Q must be positive, got {q}"));
    }
    Ok(())
}

/// The sech soliton `A sech(b s)` with `A = sqrt(Q)/(4 pi)`, `b = Q/(8 pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonProfile {
    q: f64,
}

impl SolitonProfile {
    pub fn new(q: f64) -> Result<Self> {
        require_positive_q(q)?;
        Ok(Self { q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn amplitude(&self) -> f64 {
        self.q.sqrt() / (4.0 * PI)
    }

    pub fn inverse_width(&self) -> f64 {
        self.q / (8.0 * PI)
    }

    /// `integral |phi|^2 ds = 2 A^2 / b = 1/pi`.
    pub fn line_norm(&self) -> f64 {
        2.0 * self.amplitude().powi(2) / self.inverse_width()
    }

    /// Binding energy `b^2/2 = Q^2 / (128 pi^2)` of the axial bound state.
    pub fn binding_energy(&self) -> f64 {
        0.5 * self.inverse_width().powi(2)
    }

    /// Phase-rotation rate of the composite state: the transverse eigenvalue
    /// lowered by the axial binding energy, `1 - Q^2/(128 pi^2)`.
    pub fn chemical_potential(&self) -> f64 {
        TRANSVERSE_EIGENVALUE - self.binding_energy()
    }

    pub fn value(&self, s: f64) -> f64 {
        self.amplitude() / (self.inverse_width() * s).cosh()
    }
}

/// `(sqrt(Q)/(4 pi)) sech(Q s / (8 pi))`.
pub fn soliton_profile(q: f64, s: f64) -> Result<Complex64> {
    Ok(Complex64::new(SolitonProfile::new(q)?.value(s), 0.0))
}

/// Root-mean-square axial width `4 pi^2 / (Q sqrt 3)` of the soliton.
pub fn soliton_width(q: f64) -> Result<f64> {
    require_positive_q(q)?;
    Ok(4.0 * PI * PI / (q * 3f64.sqrt()))
}

/// `<s^2> = 16 pi^4 / (3 Q^2)`.
pub fn soliton_second_moment(q: f64) -> Result<f64> {
    require_positive_q(q)?;
    Ok(16.0 * PI.powi(4) / (3.0 * q * q))
}

/// Ratio of the transverse trap potential to the self-interaction potential
/// of the composite soliton, `16 pi^2 rho^2 exp(rho^2) / (Q^2 sech(Q s/8 pi))`.
pub fn dominance_ratio(q: f64, rho: f64, s: f64) -> Result<f64> {
    require_positive_q(q)?;
    let sech = 1.0 / (q * s / (8.0 * PI)).cosh();
    Ok(16.0 * PI * PI * rho * rho * (rho * rho).exp() / (q * q * sech))
}

/// Whether `32 pi^2 / Q^2` exceeds [`DOMINANCE_THRESHOLD`], i.e. the
/// factorized soliton is expected to be accurate.
pub fn transverse_trap_dominates(q: f64) -> Result<bool> {
    require_positive_q(q)?;
    Ok(32.0 * PI * PI / (q * q) >= DOMINANCE_THRESHOLD)
}

/// Noninteracting ground state `lambda_z^(1/4) pi^(-3/4) exp(-rho^2/2 - lambda_z s^2/2)`.
pub fn gaussian_ground_state(lambda_z: f64, rho: f64, s: f64) -> Result<f64> {
    if !(lambda_z > 0.0) || !lambda_z.is_finite() {
        return domain(format!("lambda_z must be positive, got {lambda_z}"));
    }
    Ok(lambda_z.powf(0.25) * PI.powf(-0.75) * (-0.5 * rho * rho - 0.5 * lambda_z * s * s).exp())
}

/// Eigenvalue `1 + lambda_z/2` of the noninteracting ground state.
pub fn gaussian_chemical_potential(lambda_z: f64) -> f64 {
    TRANSVERSE_EIGENVALUE + 0.5 * lambda_z
}

/// Composite profile `(sqrt(Q)/(4 pi)) sech(Q s/(8 pi)) exp(-rho^2/2)`, unit
/// three-dimensional norm.
pub fn composite_profile(q: f64, rho: f64, s: f64) -> Result<Complex64> {
    let sol = SolitonProfile::new(q)?;
    Ok(Complex64::new(sol.value(s) * (-0.5 * rho * rho).exp(), 0.0))
}

/// Coefficient of the Gaussian-ansatz interaction energy,
/// `integral |u|^4 = 1 / ((2 pi)^(3/2) w_rho^2 w_s)`, times the `1/2` of
/// the energy functional.
fn interaction_coefficient() -> f64 {
    0.5 / (2.0 * PI).powf(1.5)
}

/// Energy surface of the normalized Gaussian trial state
/// `exp(-rho^2/(2 w_rho^2) - s^2/(2 w_s^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalSurface {
    pub q: f64,
    pub lambda_z: f64,
}

/// Local behavior of the variational surface for given `(Q, lambda_z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VariationalOutcome {
    Minimum { w_rho: f64, w_s: f64, energy: f64 },
    /// Descent ran to vanishing radial width (collapse) or unbounded axial
    /// width (no bound state).
    Runaway,
}

impl VariationalSurface {
    pub fn new(q: f64, lambda_z: f64) -> Result<Self> {
        if !(q >= 0.0) || !(lambda_z >= 0.0) || !q.is_finite() || !lambda_z.is_finite() {
            return domain(format!(
                "variational surface needs Q >= 0 and lambda_z >= 0 (got {q}, {lambda_z})"
            ));
        }
        Ok(Self { q, lambda_z })
    }

    pub fn energy(&self, w_rho: f64, w_s: f64) -> Result<f64> {
        if !(w_rho > 0.0) || !(w_s > 0.0) {
            return domain(format!("widths must be positive, got ({w_rho}, {w_s})"));
        }
        Ok(self.energy_unchecked(w_rho, w_s))
    }

    fn energy_unchecked(&self, w_rho: f64, w_s: f64) -> f64 {
        let (r2, s2) = (w_rho * w_rho, w_s * w_s);
        1.0 / r2 + 0.5 / s2 + r2 + 0.5 * self.lambda_z.powi(2) * s2
            - interaction_coefficient() * self.q / (r2 * w_s)
    }

    /// Energy, gradient and Hessian in log-width coordinates.
    fn local(&self, a: f64, b: f64) -> (f64, [f64; 2], [[f64; 3]; 1]) {
        let cq = interaction_coefficient() * self.q;
        let l2 = self.lambda_z.powi(2);
        let (em2a, e2a, em2b, e2b) = ((-2.0 * a).exp(), (2.0 * a).exp(), (-2.0 * b).exp(), (2.0 * b).exp());
        let int = cq * (-2.0 * a - b).exp();
        let e = em2a + 0.5 * em2b + e2a + 0.5 * l2 * e2b - int;
        let ga = -2.0 * em2a + 2.0 * e2a + 2.0 * int;
        let gb = -em2b + l2 * e2b + int;
        let haa = 4.0 * em2a + 4.0 * e2a - 4.0 * int;
        let hab = -2.0 * int;
        let hbb = 2.0 * em2b + 2.0 * l2 * e2b - int;
        (e, [ga, gb], [[haa, hab, hbb]])
    }

    /// Whether the energy decreases monotonically along the segment from
    /// `(a, b)` to `(a + da, b + db)`, so an accepted step never hops over
    /// the barrier that guards a shallow minimum.
    fn monotone(&self, a: f64, b: f64, da: f64, db: f64) -> bool {
        const SAMPLES: usize = 16;
        let mut prev = self.local(a, b).0;
        (1..=SAMPLES).all(|i| {
            let f = i as f64 / SAMPLES as f64;
            let e = self.local(a + f * da, b + f * db).0;
            let ok = e <= prev;
            prev = e;
            ok
        })
    }

    /// Noninteracting minimizer (or, without an axial trap, the axial optimum
    /// at unit radial width).
    fn start(&self) -> Option<(f64, f64)> {
        if self.lambda_z > 0.0 {
            Some((0.0, -0.5 * self.lambda_z.ln()))
        } else if self.q > 0.0 {
            Some((0.0, -(interaction_coefficient() * self.q).ln()))
        } else {
            None
        }
    }

    /// Bounded descent (damped Newton, gradient fallback, Armijo line search)
    /// from the noninteracting minimizer.
    pub fn minimize(&self) -> VariationalOutcome {
        const MAX_ITERS: usize = 200_000;
        const MAX_STEP: f64 = 0.05;
        let Some((mut a, mut b)) = self.start() else {
            return VariationalOutcome::Runaway;
        };
        let (min_a, max_b) = (1e-3f64.ln(), 1e8f64.ln());
        for _ in 0..MAX_ITERS {
            let (e, g, [[haa, hab, hbb]]) = self.local(a, b);
            let gnorm = g[0].hypot(g[1]);
            if gnorm < 1e-11 {
                return VariationalOutcome::Minimum {
                    w_rho: a.exp(),
                    w_s: b.exp(),
                    energy: e,
                };
            }
            let det = haa * hbb - hab * hab;
            let (mut da, mut db) = if haa > 0.0 && det > 0.0 {
                (-(hbb * g[0] - hab * g[1]) / det, -(haa * g[1] - hab * g[0]) / det)
            } else {
                (-g[0], -g[1])
            };
            if da * g[0] + db * g[1] >= 0.0 {
                da = -g[0];
                db = -g[1];
            }
            // Cap the step so a single update never jumps across the basin.
            let len = da.hypot(db);
            if len > MAX_STEP {
                da *= MAX_STEP / len;
                db *= MAX_STEP / len;
            }
            let slope = da * g[0] + db * g[1];
            let mut t = 1.0;
            loop {
                let e_new = self.local(a + t * da, b + t * db).0;
                if e_new <= e + 1e-4 * t * slope && self.monotone(a, b, t * da, t * db) {
                    break;
                }
                t *= 0.5;
                if t < 1e-20 {
                    break;
                }
            }
            if t < 1e-20 {
                // No further decrease possible at machine precision.
                return VariationalOutcome::Minimum {
                    w_rho: a.exp(),
                    w_s: b.exp(),
                    energy: e,
                };
            }
            let (a_new, b_new) = (a + t * da, b + t * db);
            if a_new == a && b_new == b {
                return VariationalOutcome::Minimum {
                    w_rho: a.exp(),
                    w_s: b.exp(),
                    energy: e,
                };
            }
            (a, b) = (a_new, b_new);
            if a < min_a || b > max_b || !a.is_finite() || !b.is_finite() {
                return VariationalOutcome::Runaway;
            }
        }
        VariationalOutcome::Runaway
    }
}

/// Energy of the normalized Gaussian trial state with widths `(w_rho, w_s)`.
pub fn variational_energy(q: f64, lambda_z: f64, w_rho: f64, w_s: f64) -> Result<f64> {
    VariationalSurface::new(q, lambda_z)?.energy(w_rho, w_s)
}

/// Largest `Q` for which the Gaussian trial energy keeps a local minimum,
/// found by bisection to `1e-7`.
pub fn variational_critical_q(lambda_z: f64) -> Result<f64> {
    if !(lambda_z >= 0.0) || !lambda_z.is_finite() {
        return domain(format!("lambda_z must be non-negative, got {lambda_z}"));
    }
    let has_min = |q: f64| -> Result<bool> {
        Ok(matches!(
            VariationalSurface::new(q, lambda_z)?.minimize(),
            VariationalOutcome::Minimum { .. }
        ))
    };
    let (mut lo, mut hi) = (1e-3, 100.0);
    if !has_min(lo)? || has_min(hi)? {
        return domain(format!(
            "variational threshold for lambda_z = {lambda_z} is outside [{lo}, {hi}]"
        ));
    }
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if has_min(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

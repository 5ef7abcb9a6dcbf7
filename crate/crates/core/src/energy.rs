//! The energy functional and the mean-field operator.
//!
//! Energies follow the functional
//! `H = integral |grad u|^2 + (rho^2 + lambda_z^2 s^2) |u|^2 - (Q/2) |u|^4`,
//! which is twice the Schrodinger energy of the evolution equation
//! `i u_t = [-1/2 lap + 1/2 (rho^2 + lambda_z^2 s^2) + V_ext - (Q/2) |u|^2] u`.
//! An external potential enters the functional as `2 V_ext`. The chemical
//! potential is the eigenvalue of the evolution operator,
//! `mu = (kinetic/2 + trap/2 + interaction) / norm`.
//!
//! On line grids a field `xi(s)` stands for `exp(-rho^2/2) xi(s)`; its
//! energies are reported for that three-dimensional state, so the transverse
//! zero-point motion contributes `norm` to both kinetic and trap terms and
//! the operator is `-1/2 d_ss + 1 + 1/2 lambda_z^2 s^2 + V_ext - (Q/4) |xi|^2`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{domain, GpeError, Result};
use crate::grid::{Geometry, Grid};
use crate::par;
use crate::potential::ExternalPotential;
use crate::wavefunction::Wavefunction;

/// Trap anisotropy; the transverse frequencies are fixed to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapSpec {
    pub lambda_z: f64,
}

impl TrapSpec {
    pub fn new(lambda_z: f64) -> Result<Self> {
        let t = Self { lambda_z };
        t.validate()?;
        Ok(t)
    }

    pub fn isotropic() -> Self {
        Self { lambda_z: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_z >= 0.0) || !self.lambda_z.is_finite() {
            return domain(format!("lambda_z must be >= 0, got {}", self.lambda_z));
        }
        Ok(())
    }
}

/// Energy components of a state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub trap: f64,
    pub interaction: f64,
    pub total: f64,
    pub chemical_potential: f64,
}

impl EnergyBreakdown {
    pub const CSV_HEADER: &'static str = "kinetic,trap,interaction,total,mu";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.kinetic, self.trap, self.interaction, self.total, self.chemical_potential
        )
    }
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if !q.is_finite() {
        return domain(format!("Q must be finite, got {q}"));
    }
    if q < 0.0 {
        return Err(GpeError::UnsupportedRegime(format!(
            "Q = {q} < 0 describes a repulsive condensate; only attractive interactions are modeled"
        )));
    }
    Ok(())
}

/// The operator `H[u] = -1/2 lap + V - g |u|^2` on a fixed grid.
#[derive(Debug, Clone)]
pub struct MeanField {
    grid: Arc<Grid>,
    trap: TrapSpec,
    q: f64,
    /// Trap plus external potential in evolution-equation units.
    potential: Vec<f64>,
    /// `s`-derivative of the external potential (zero without one).
    external_gradient: Vec<f64>,
    has_external: bool,
    /// Transverse zero-point energy folded into line grids.
    transverse: f64,
    /// Coefficient `g` of the cubic term.
    nonlinear: f64,
}

impl MeanField {
    pub fn new(grid: Arc<Grid>, trap: TrapSpec, q: f64) -> Result<Self> {
        trap.validate()?;
        check_q(q)?;
        let geometry = grid.geometry();
        if geometry == Geometry::SphericalRadial && trap.lambda_z != 1.0 {
            return Err(GeometryMismatch::spherical(trap.lambda_z));
        }
        let lz2 = trap.lambda_z * trap.lambda_z;
        let (transverse, nonlinear) = match geometry {
            Geometry::Line => (1.0, q / 4.0),
            _ => (0.0, q / 2.0),
        };
        let mut potential = vec![0.0; grid.len()];
        par::fill(&mut potential, |k| {
            let (r, s) = grid.coords(k);
            match geometry {
                Geometry::Line => 0.5 * lz2 * s * s,
                Geometry::Cylindrical => 0.5 * (r * r + lz2 * s * s),
                Geometry::SphericalRadial => 0.5 * r * r,
            }
        });
        let n = grid.len();
        Ok(Self {
            grid,
            trap,
            q,
            potential,
            external_gradient: vec![0.0; n],
            has_external: false,
            transverse,
            nonlinear,
        })
    }

    /// Adds an external potential to the trap term.
    pub fn with_external(mut self, ext: &ExternalPotential) -> Result<Self> {
        if self.grid.geometry() == Geometry::SphericalRadial {
            return Err(GpeError::GeometryMismatch(
                "external potentials need an axial coordinate (line or cylindrical grid)".into(),
            ));
        }
        let samples = ext.sample(&self.grid)?;
        for (p, v) in self.potential.iter_mut().zip(&samples.values) {
            *p += v;
        }
        self.external_gradient = samples.gradient_s;
        self.has_external = true;
        Ok(self)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn trap(&self) -> TrapSpec {
        self.trap
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn has_external(&self) -> bool {
        self.has_external
    }

    /// Pointwise potential seen by the field, including the transverse
    /// zero-point energy on line grids.
    pub fn potential(&self, k: usize) -> f64 {
        self.potential[k] + self.transverse
    }

    /// `d V_ext / ds` at node `k`.
    pub fn external_gradient(&self, k: usize) -> f64 {
        self.external_gradient[k]
    }

    /// Coefficient of `|u|^2 u` in the operator.
    pub fn nonlinear(&self) -> f64 {
        self.nonlinear
    }

    /// Force `-d V / ds` averaged over the normalized density.
    pub fn mean_axial_force(&self, u: &Wavefunction) -> Result<f64> {
        self.check(u)?;
        if self.grid.geometry() == Geometry::SphericalRadial {
            return Ok(0.0);
        }
        let w = self.grid.weights();
        let lz2 = self.trap.lambda_z * self.trap.lambda_z;
        let v = u.values();
        let [norm, f] = par::sum_array(v.len(), |k| {
            let d = w[k] * v[k].norm_sqr();
            let s = self.grid.coords(k).1;
            [d, -d * (lz2 * s + self.external_gradient[k])]
        });
        if !(norm > 0.0) {
            return Err(GpeError::ZeroField);
        }
        Ok(f / norm)
    }

    fn check(&self, u: &Wavefunction) -> Result<()> {
        if u.grid().len() != self.grid.len() || **u.grid() != *self.grid {
            return Err(GpeError::GeometryMismatch(
                "wavefunction and operator use different grids".into(),
            ));
        }
        Ok(())
    }

    /// `out = H[u] u`.
    pub fn apply(&self, u: &Wavefunction, out: &mut [Complex64]) -> Result<()> {
        self.check(u)?;
        let v = u.values();
        self.grid.laplacian_into(v, out)?;
        par::update(out, |k, lap| {
            let dens = v[k].norm_sqr();
            *lap = -0.5 * *lap + v[k] * (self.potential[k] + self.transverse - self.nonlinear * dens);
        });
        Ok(())
    }

    /// Energy components of `u` (any norm; `mu` is divided by the norm).
    pub fn energy(&self, u: &Wavefunction) -> Result<EnergyBreakdown> {
        self.check(u)?;
        let v = u.values();
        let lap = self.grid.laplacian(v)?;
        Ok(self.energy_with_laplacian(v, &lap))
    }

    pub(crate) fn energy_with_laplacian(&self, v: &[Complex64], lap: &[Complex64]) -> EnergyBreakdown {
        let w = self.grid.weights();
        let [norm, kin, pot, quartic] = par::sum_array(v.len(), |k| {
            let d = v[k].norm_sqr();
            let wk = w[k];
            [
                wk * d,
                -wk * (v[k].conj() * lap[k]).re,
                wk * self.potential[k] * d,
                wk * d * d,
            ]
        });
        let nf = self.grid.norm_factor();
        let norm = nf * norm;
        let kinetic = nf * kin + self.transverse * norm;
        let trap = 2.0 * nf * pot + self.transverse * norm;
        let interaction = -nf * self.nonlinear * quartic;
        let total = kinetic + trap + interaction;
        let chemical_potential = if norm > 0.0 {
            (0.5 * kinetic + 0.5 * trap + interaction) / norm
        } else {
            0.0
        };
        EnergyBreakdown {
            kinetic,
            trap,
            interaction,
            total,
            chemical_potential,
        }
    }

    /// Eigen-residual `||H u - mu u||` of a unit-norm state.
    pub fn residual(&self, u: &Wavefunction) -> Result<f64> {
        let mut hu = vec![Complex64::default(); u.values().len()];
        self.apply(u, &mut hu)?;
        let mu = self.energy(u)?.chemical_potential;
        Ok(residual_norm(&self.grid, u.values(), &hu, mu))
    }
}

pub(crate) fn residual_norm(grid: &Grid, v: &[Complex64], hu: &[Complex64], mu: f64) -> f64 {
    let w = grid.weights();
    let r = par::sum_by(v.len(), |k| w[k] * (hu[k] - v[k] * mu).norm_sqr());
    (grid.norm_factor() * r).sqrt()
}

struct GeometryMismatch;

impl GeometryMismatch {
    fn spherical(lz: f64) -> GpeError {
        GpeError::GeometryMismatch(format!(
            "spherical-radial grids model the isotropic trap (lambda_z = 1), got lambda_z = {lz}"
        ))
    }
}

/// Energy of `u` in the harmonic trap `trap` at interaction `q`.
pub fn hamiltonian(u: &Wavefunction, trap: TrapSpec, q: f64) -> Result<EnergyBreakdown> {
    MeanField::new(u.grid().clone(), trap, q)?.energy(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::grid::GridSpec;
    use std::f64::consts::PI;

    fn sph(n: usize) -> Arc<Grid> {
        Arc::new(Grid::build(GridSpec::SphericalRadial { r_max: 10.0, n_r: n }).unwrap())
    }

    #[test]
    fn isotropic_oscillator_energy() {
        let g = sph(2000);
        let u = Wavefunction::from_fn(g, |r, _| {
            Complex64::new(PI.powf(-0.75) * (-r * r / 2.0).exp(), 0.0)
        });
        let e = hamiltonian(&u, TrapSpec::isotropic(), 0.0).unwrap();
        assert!((e.total - 3.0).abs() < 1e-5, "{e:?}");
        assert!((e.chemical_potential - 1.5).abs() < 1e-5);
        assert!((e.total - (e.kinetic + e.trap + e.interaction)).abs() < 1e-12);
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let g = sph(64);
        let e = hamiltonian(&Wavefunction::zeros(g), TrapSpec::isotropic(), 3.0).unwrap();
        assert_eq!(e, EnergyBreakdown::default());
    }

    #[test]
    fn line_interaction_matches_sech4_integral() {
        let q = 5.0;
        let g = Arc::new(
            Grid::build(GridSpec::Line {
                s_min: -80.0,
                s_max: 80.0,
                n_s: 8192,
            })
            .unwrap(),
        );
        let sol = analytic::SolitonProfile::new(q).unwrap();
        let u = Wavefunction::from_fn(g, |_, s| Complex64::new(sol.value(s), 0.0));
        assert!((u.norm() - 1.0).abs() < 1e-9);
        let e = hamiltonian(&u, TrapSpec::new(0.0).unwrap(), q).unwrap();
        // -(pi Q/4) A^4 * 4/(3b)
        let a = sol.amplitude();
        let b = sol.inverse_width();
        let exact = -(PI * q / 4.0) * a.powi(4) * 4.0 / (3.0 * b);
        assert!((e.interaction - exact).abs() < 1e-9 * exact.abs());
        assert!((e.chemical_potential - sol.chemical_potential()).abs() < 1e-5);
    }

    #[test]
    fn spherical_requires_isotropy() {
        assert!(matches!(
            MeanField::new(sph(32), TrapSpec::new(0.5).unwrap(), 1.0),
            Err(GpeError::GeometryMismatch(_))
        ));
        assert!(matches!(
            MeanField::new(sph(32), TrapSpec::isotropic(), -1.0),
            Err(GpeError::UnsupportedRegime(_))
        ));
    }
}

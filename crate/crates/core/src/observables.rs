//! Moments, widths and profile comparisons.
//!
//! On spherical-radial grids the axial moments are those of the isotropic
//! state: `<s^2> = <r^2>/3`, `<rho^2> = 2 <r^2>/3`, zero centroid and momentum.
//! On line grids `<rho^2> = 1`, the transverse Gaussian's value.
//!
//! The axial momentum `P_s = Im integral u* d_s u` uses the derivative that
//! matches the kinetic operator: spectral on line grids, the centered
//! difference on cylindrical grids. With either choice `dX_s/dtau = P_s`
//! holds exactly for the spatially discretized dynamics.

use num_complex::Complex64;

use crate::energy::EnergyBreakdown;
use crate::error::{GpeError, Result};
use crate::grid::Geometry;
use crate::par;
use crate::wavefunction::Wavefunction;

/// Normalized first and second moments of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub norm: f64,
    pub x_s: f64,
    pub p_s: f64,
    /// `<s^2>` about the origin.
    pub s2: f64,
    /// `sqrt(<s^2> - X_s^2)`.
    pub w_s: f64,
    /// `sqrt(<rho^2>)`.
    pub w_rho: f64,
    pub peak_density: f64,
}

pub fn moments(u: &Wavefunction) -> Result<Moments> {
    let grid = u.grid();
    let v = u.values();
    let w = grid.weights();
    let ns = grid.shape().1;
    let geometry = grid.geometry();
    let h = grid.d_axial();
    let [m0, m1, m2, r2, p] = par::sum_array(v.len(), |k| {
        let d = w[k] * v[k].norm_sqr();
        let (r, s) = grid.coords(k);
        let momentum = if geometry != Geometry::Cylindrical {
            0.0
        } else {
            let j = k % ns;
            let left = if j > 0 { v[k - 1] } else { Complex64::default() };
            let right = if j + 1 < ns { v[k + 1] } else { Complex64::default() };
            w[k] * (v[k].conj() * (right - left)).im / (2.0 * h)
        };
        [d, d * s, d * s * s, d * r * r, momentum]
    });
    if !(m0 > 0.0) || !m0.is_finite() {
        return Err(GpeError::ZeroField);
    }
    let p = match (geometry, grid.spectral()) {
        (Geometry::Line, Some(sp)) => {
            let mut d = v.to_vec();
            sp.derivative(&mut d, &mut sp.scratch());
            par::sum_by(v.len(), |k| w[k] * (v[k].conj() * d[k]).im)
        }
        _ => p,
    };
    let (x_s, s2, rho2, p_s) = match geometry {
        Geometry::SphericalRadial => (0.0, r2 / m0 / 3.0, 2.0 * r2 / m0 / 3.0, 0.0),
        Geometry::Line => (m1 / m0, m2 / m0, 1.0, p / m0),
        Geometry::Cylindrical => (m1 / m0, m2 / m0, r2 / m0, p / m0),
    };
    Ok(Moments {
        norm: m0 * grid.norm_factor(),
        x_s,
        p_s,
        s2,
        w_s: (s2 - x_s * x_s).max(0.0).sqrt(),
        w_rho: rho2.sqrt(),
        peak_density: par::max_by(v.len(), |k| v[k].norm_sqr()),
    })
}

/// One sample of a trajectory or a static diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableRecord {
    pub tau: f64,
    pub norm: f64,
    pub energy: EnergyBreakdown,
    pub x_s: f64,
    pub p_s: f64,
    pub w_s: f64,
    pub w_rho: f64,
    pub peak_density: f64,
    /// Mean axial force `-<dV/ds>` of trap plus external potential.
    pub force_s: f64,
}

impl ObservableRecord {
    pub const CSV_HEADER: &'static str =
        "tau,norm,energy_total,X_s,P_s,W_s,W_rho,peak_density,force_s";

    pub fn from_moments(tau: f64, m: &Moments, energy: EnergyBreakdown, force_s: f64) -> Self {
        Self {
            tau,
            norm: m.norm,
            energy,
            x_s: m.x_s,
            p_s: m.p_s,
            w_s: m.w_s,
            w_rho: m.w_rho,
            peak_density: m.peak_density,
            force_s,
        }
    }

    pub fn csv_row(&self) -> String {
        [
            self.tau,
            self.norm,
            self.energy.total,
            self.x_s,
            self.p_s,
            self.w_s,
            self.w_rho,
            self.peak_density,
            self.force_s,
        ]
        .iter()
        .map(|x| format!("{x:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    /// Axial profile at the innermost radial node.
    SSectionAtRhoZero,
    /// Radial profile at the axial node nearest `s = 0`.
    RhoSectionAtSZero,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileDiff {
    /// `max | |u| - |ref| | / max |ref|` over the section.
    pub linf_rel: f64,
    /// Weighted `|| |u| - |ref| || / || ref ||` over the section.
    pub l2_rel: f64,
}

/// Compares moduli of two states along a section. On spherical-radial grids
/// both section modes select the radial profile; line grids have no radial
/// section.
pub fn compare_profiles(u: &Wavefunction, reference: &Wavefunction, mode: Section) -> Result<ProfileDiff> {
    u.same_grid(reference)?;
    let grid = u.grid();
    let (nr, ns) = grid.shape();
    let w = grid.weights();
    let nodes: Vec<usize> = match (grid.geometry(), mode) {
        (_, Section::Full) => (0..grid.len()).collect(),
        (Geometry::SphericalRadial, _) => (0..nr).collect(),
        (_, Section::SSectionAtRhoZero) => (0..ns).collect(),
        (Geometry::Line, Section::RhoSectionAtSZero) => {
            return Err(GpeError::GeometryMismatch(
                "line grids have no radial section".into(),
            ))
        }
        (_, Section::RhoSectionAtSZero) => {
            let j = grid.axial_origin();
            (0..nr).map(|i| grid.index(i, j)).collect()
        }
    };
    let a = u.values();
    let b = reference.values();
    let mut peak = 0.0f64;
    let mut worst = 0.0f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for &k in &nodes {
        let d = a[k].norm() - b[k].norm();
        peak = peak.max(b[k].norm());
        worst = worst.max(d.abs());
        num += w[k] * d * d;
        den += w[k] * b[k].norm_sqr();
    }
    if !(peak > 0.0) {
        return Err(GpeError::ZeroField);
    }
    Ok(ProfileDiff {
        linf_rel: worst / peak,
        l2_rel: (num / den).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::grid::{Grid, GridSpec};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn cyl(n_rho: usize, n_s: usize, half: f64) -> Arc<Grid> {
        Arc::new(
            Grid::build(GridSpec::Cylindrical {
                rho_max: 8.0,
                n_rho,
                s_min: -half,
                s_max: half,
                n_s,
            })
            .unwrap(),
        )
    }

    #[test]
    fn composite_soliton_width() {
        let q = 5.0;
        let g = cyl(64, 2048, 80.0);
        let u = Wavefunction::from_fn(g, |r, s| analytic::composite_profile(q, r, s).unwrap());
        let m = moments(&u).unwrap();
        let exact = analytic::soliton_width(q).unwrap();
        assert!(m.x_s.abs() < 1e-6);
        assert!((m.w_s - exact).abs() < 5e-3 * exact);
    }

    #[test]
    fn isotropic_gaussian_widths() {
        let g = cyl(400, 400, 9.0);
        let u = Wavefunction::from_fn(g, |r, s| {
            Complex64::new(analytic::gaussian_ground_state(1.0, r, s).unwrap(), 0.0)
        });
        let m = moments(&u).unwrap();
        assert!((m.w_s - 0.5f64.sqrt()).abs() < 1e-4);
        assert!((m.w_rho - 1.0).abs() < 1e-4);
        assert!((m.peak_density.sqrt() - PI.powf(-0.75)).abs() < 1e-3);
    }

    #[test]
    fn boost_shifts_momentum() {
        let line = Arc::new(Grid::build(GridSpec::Line { s_min: -60.0, s_max: 60.0, n_s: 1024 }).unwrap());
        let sol = analytic::SolitonProfile::new(5.0).unwrap();
        let v = 0.5;
        let u = Wavefunction::from_fn(line.clone(), |_, s| Complex64::new(sol.value(s), 0.0));
        let moved = Wavefunction::from_fn(line, |_, s| Complex64::from_polar(sol.value(s), v * s));
        let p0 = moments(&u).unwrap().p_s;
        let p1 = moments(&moved).unwrap().p_s;
        assert!(p0.abs() < 1e-14);
        assert!((p1 - p0 - v).abs() < 1e-10, "{p1}");

        // On the cylindrical lattice the boost shifts the lattice momentum.
        let g = cyl(32, 1024, 40.0);
        let u = Wavefunction::from_fn(g.clone(), |r, s| analytic::composite_profile(5.0, r, s).unwrap());
        let moved = Wavefunction::from_fn(g.clone(), |r, s| {
            analytic::composite_profile(5.0, r, s).unwrap() * Complex64::from_polar(1.0, v * s)
        });
        let h = g.d_axial();
        let ns = g.shape().1;
        let a = u.values();
        let overlap: f64 = (0..a.len())
            .filter(|k| k % ns + 1 < ns)
            .map(|k| g.weights()[k] * a[k].re * a[k + 1].re)
            .sum::<f64>()
            / (0..a.len()).map(|k| g.weights()[k] * a[k].norm_sqr()).sum::<f64>();
        let p1 = moments(&moved).unwrap().p_s;
        assert!((p1 - (v * h).sin() / h * overlap).abs() < 1e-12);
        assert!((p1 - v).abs() < 2e-3);
    }

    #[test]
    fn comparison_metrics() {
        let g = cyl(32, 128, 20.0);
        let u = Wavefunction::from_fn(g, |r, s| analytic::composite_profile(5.0, r, s).unwrap());
        for mode in [Section::SSectionAtRhoZero, Section::RhoSectionAtSZero, Section::Full] {
            let d = compare_profiles(&u, &u, mode).unwrap();
            assert_eq!((d.linf_rel, d.l2_rel), (0.0, 0.0));
            let mut big = u.clone();
            big.scale(1.05);
            let d = compare_profiles(&big, &u, mode).unwrap();
            assert!((d.linf_rel - 0.05).abs() < 1e-12);
            assert!((d.l2_rel - 0.05).abs() < 1e-12);
        }
        assert!(moments(&Wavefunction::zeros(u.grid().clone())).is_err());
    }
}

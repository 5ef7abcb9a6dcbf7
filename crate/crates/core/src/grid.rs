//! Spatial discretization in line (s), cylindrical (rho, s) or
//! spherical-radial (r) geometry.
//!
//! Radial nodes sit at half-integer offsets `(i + 1/2) h`, so no node lies on
//! the coordinate axis. Radial quadrature weights are the exact volumes of
//! the cells `[i h, (i + 1) h]`, which makes `integrate(1)` reproduce the
//! domain volume and the finite-volume Laplacian self-adjoint in the weighted
//! inner product. Axial nodes are `s_min + j h` for `j < n_s`. Cylindrical
//! fields are taken to vanish one spacing outside the sampled range
//! (homogeneous Dirichlet ghosts); line fields are periodic with period
//! `s_max - s_min` and differentiated spectrally.
//!
//! Field samples are stored row-major with the radial index outermost:
//! `index = i * n_axial + j`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::analytic;
use crate::error::{domain, GpeError, Result};
use crate::par;
use crate::spectral::Spectral;

/// Smallest resolution accepted along any active dimension.
pub const MIN_RESOLUTION: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// The axial line; a field `xi(s)` stands for the factorized state
    /// `exp(-rho^2/2) xi(s)` with the transverse oscillator ground state.
    Line,
    Cylindrical,
    SphericalRadial,
}

impl Geometry {
    pub fn name(self) -> &'static str {
        match self {
            Self::Line => "line",
            Self::Cylindrical => "cylindrical",
            Self::SphericalRadial => "spherical",
        }
    }
}

impl std::str::FromStr for Geometry {
    type Err = GpeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(Self::Line),
            "cylindrical" | "cigar" => Ok(Self::Cylindrical),
            "spherical" | "spherical-radial" => Ok(Self::SphericalRadial),
            other => domain(format!(
                "unknown geometry `{other}` (expected line|cylindrical|spherical)"
            )),
        }
    }
}

impl std::fmt::Display for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Extents and resolutions of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    Line {
        s_min: f64,
        s_max: f64,
        n_s: usize,
    },
    Cylindrical {
        rho_max: f64,
        n_rho: usize,
        s_min: f64,
        s_max: f64,
        n_s: usize,
    },
    SphericalRadial {
        r_max: f64,
        n_r: usize,
    },
}

/// Default transverse extent of cylindrical grids.
pub const DEFAULT_RHO_MAX: f64 = 6.0;
pub const DEFAULT_N_RHO: usize = 96;
pub const DEFAULT_N_S_CYLINDRICAL: usize = 384;
pub const DEFAULT_N_S_LINE: usize = 1024;
pub const DEFAULT_R_MAX: f64 = 8.0;
pub const DEFAULT_N_R: usize = 512;

/// Half-length of the default axial domain.
///
/// A free soliton decays like `exp(-Q |s| / 8 pi)`; twelve widths of the
/// width law put the boundary density below `1e-9` of the peak. A harmonic
/// axial trap bounds the state by the oscillator length `1/sqrt(lambda_z)`.
pub fn axial_half_extent(q: f64, lambda_z: f64) -> Result<f64> {
    crate::energy::check_q(q)?;
    crate::energy::TrapSpec::new(lambda_z)?;
    let soliton = if q > 0.0 {
        12.0 * analytic::soliton_width(q)?
    } else {
        f64::INFINITY
    };
    let trap = if lambda_z > 0.0 {
        8.0 / lambda_z.sqrt()
    } else {
        f64::INFINITY
    };
    let half = soliton.min(trap);
    if !half.is_finite() {
        return domain("Q = 0 with lambda_z = 0 has no localized state; give explicit extents");
    }
    Ok(half.max(6.0))
}

impl GridSpec {
    /// Default grid for a ground state at interaction `q` and anisotropy
    /// `lambda_z`: 96 x 384 cylindrical, 1024 line, 512 spherical-radial.
    pub fn default_for(geometry: Geometry, q: f64, lambda_z: f64) -> Result<Self> {
        Ok(match geometry {
            Geometry::SphericalRadial => Self::SphericalRadial {
                r_max: DEFAULT_R_MAX,
                n_r: DEFAULT_N_R,
            },
            Geometry::Line => {
                let half = axial_half_extent(q, lambda_z)?;
                Self::Line {
                    s_min: -half,
                    s_max: half,
                    n_s: DEFAULT_N_S_LINE,
                }
            }
            Geometry::Cylindrical => {
                let half = axial_half_extent(q, lambda_z)?;
                Self::Cylindrical {
                    rho_max: DEFAULT_RHO_MAX,
                    n_rho: DEFAULT_N_RHO,
                    s_min: -half,
                    s_max: half,
                    n_s: DEFAULT_N_S_CYLINDRICAL,
                }
            }
        })
    }

    pub fn geometry(&self) -> Geometry {
        match self {
            Self::Line { .. } => Geometry::Line,
            Self::Cylindrical { .. } => Geometry::Cylindrical,
            Self::SphericalRadial { .. } => Geometry::SphericalRadial,
        }
    }

    /// Same extents with every resolution multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        match *self {
            Self::Line { s_min, s_max, n_s } => Self::Line {
                s_min,
                s_max,
                n_s: n_s * factor,
            },
            Self::Cylindrical {
                rho_max,
                n_rho,
                s_min,
                s_max,
                n_s,
            } => Self::Cylindrical {
                rho_max,
                n_rho: n_rho * factor,
                s_min,
                s_max,
                n_s: n_s * factor,
            },
            Self::SphericalRadial { r_max, n_r } => Self::SphericalRadial {
                r_max,
                n_r: n_r * factor,
            },
        }
    }
}

/// Tridiagonal band of a one-dimensional second-difference operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Grid {
    spec: GridSpec,
    n_radial: usize,
    n_axial: usize,
    d_radial: f64,
    d_axial: f64,
    radial_nodes: Vec<f64>,
    axial_nodes: Vec<f64>,
    radial_measure: Vec<f64>,
    axial_measure: f64,
    radial_band: Option<Band>,
    weights: Vec<f64>,
    spectral: Option<Arc<Spectral>>,
}

/// Grids are equal when built from the same specification.
impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

fn check_resolution(name: &str, n: usize) -> Result<()> {
    if n < MIN_RESOLUTION {
        return domain(format!(
            "{name} = {n} is below the minimum resolution {MIN_RESOLUTION}"
        ));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return domain(format!("{name} must be positive and finite, got {v}"));
    }
    Ok(())
}

fn check_axial(s_min: f64, s_max: f64, n_s: usize) -> Result<()> {
    if !(s_max > s_min) || !s_min.is_finite() || !s_max.is_finite() {
        return domain(format!("axial extent [{s_min}, {s_max}] must be non-empty"));
    }
    check_resolution("n_s", n_s)
}

impl Grid {
    pub fn build(spec: GridSpec) -> Result<Self> {
        let (radial, axial) = match spec {
            GridSpec::Line { s_min, s_max, n_s } => {
                check_axial(s_min, s_max, n_s)?;
                (None, Some((s_min, s_max, n_s)))
            }
            GridSpec::Cylindrical {
                rho_max,
                n_rho,
                s_min,
                s_max,
                n_s,
            } => {
                check_positive("rho_max", rho_max)?;
                check_resolution("n_rho", n_rho)?;
                check_axial(s_min, s_max, n_s)?;
                (Some((rho_max, n_rho)), Some((s_min, s_max, n_s)))
            }
            GridSpec::SphericalRadial { r_max, n_r } => {
                check_positive("r_max", r_max)?;
                check_resolution("n_r", n_r)?;
                (Some((r_max, n_r)), None)
            }
        };
        let spherical = matches!(spec, GridSpec::SphericalRadial { .. });

        let (n_radial, d_radial, radial_nodes, radial_measure, radial_band) = match radial {
            None => (1, 0.0, vec![0.0], vec![1.0], None),
            Some((max, n)) => {
                let h = max / n as f64;
                let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
                let face = |i: usize| i as f64 * h;
                // Cell volumes and face areas of the radial measure.
                let (measure, area): (Vec<f64>, Box<dyn Fn(f64) -> f64>) = if spherical {
                    let vol = (0..n)
                        .map(|i| 4.0 * PI / 3.0 * (face(i + 1).powi(3) - face(i).powi(3)))
                        .collect();
                    (vol, Box::new(|r: f64| 4.0 * PI * r * r))
                } else {
                    let vol = (0..n)
                        .map(|i| PI * (face(i + 1).powi(2) - face(i).powi(2)))
                        .collect();
                    (vol, Box::new(|r: f64| 2.0 * PI * r))
                };
                let mut band = Band {
                    lower: vec![0.0; n],
                    diag: vec![0.0; n],
                    upper: vec![0.0; n],
                };
                for i in 0..n {
                    let up = area(face(i + 1)) / (h * measure[i]);
                    let down = area(face(i)) / (h * measure[i]);
                    band.lower[i] = if i > 0 { down } else { 0.0 };
                    band.upper[i] = if i + 1 < n { up } else { 0.0 };
                    band.diag[i] = -(up + down);
                }
                (n, h, nodes, measure, Some(band))
            }
        };

        let (n_axial, d_axial, axial_nodes, axial_measure) = match axial {
            None => (1, 0.0, vec![0.0], 1.0),
            Some((s_min, s_max, n)) => {
                let h = (s_max - s_min) / n as f64;
                let nodes = (0..n).map(|j| s_min + j as f64 * h).collect();
                (n, h, nodes, h)
            }
        };

        let mut weights = vec![0.0; n_radial * n_axial];
        par::fill(&mut weights, |k| radial_measure[k / n_axial] * axial_measure);

        Ok(Self {
            spec,
            n_radial,
            n_axial,
            d_radial,
            d_axial,
            radial_nodes,
            axial_nodes,
            radial_measure,
            axial_measure,
            radial_band,
            weights,
            spectral: (n_axial > 1).then(|| Arc::new(Spectral::new(n_axial, d_axial))),
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn geometry(&self) -> Geometry {
        self.spec.geometry()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `(n_radial, n_axial)`, with 1 for an absent dimension.
    pub fn shape(&self) -> (usize, usize) {
        (self.n_radial, self.n_axial)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n_axial + j
    }

    /// Radial spacing (0 on a line grid).
    pub fn d_radial(&self) -> f64 {
        self.d_radial
    }

    /// Axial spacing (0 on a spherical-radial grid).
    pub fn d_axial(&self) -> f64 {
        self.d_axial
    }

    /// Radial node coordinates (rho or r); `[0.0]` on a line grid.
    pub fn radial_nodes(&self) -> &[f64] {
        &self.radial_nodes
    }

    /// Axial node coordinates; `[0.0]` on a spherical-radial grid.
    pub fn axial_nodes(&self) -> &[f64] {
        &self.axial_nodes
    }

    /// Per-node volume weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Radial part of the measure for row `i` (1 on a line grid).
    pub fn radial_measure(&self) -> &[f64] {
        &self.radial_measure
    }

    /// Axial part of the measure (1 on a spherical-radial grid).
    pub fn axial_measure(&self) -> f64 {
        self.axial_measure
    }

    /// `(radial, axial)` coordinates of flat index `k`.
    pub fn coords(&self, k: usize) -> (f64, f64) {
        (
            self.radial_nodes[k / self.n_axial],
            self.axial_nodes[k % self.n_axial],
        )
    }

    /// Index of the axial node nearest to `s = 0`.
    pub fn axial_origin(&self) -> usize {
        let mut best = 0;
        for (j, s) in self.axial_nodes.iter().enumerate() {
            if s.abs() < self.axial_nodes[best].abs() {
                best = j;
            }
        }
        best
    }

    /// Factor turning `integrate(|u|^2)` into the three-dimensional norm:
    /// `pi` on a line grid (the transverse factor `exp(-rho^2/2)` squared and
    /// integrated over the plane), 1 otherwise.
    pub fn norm_factor(&self) -> f64 {
        match self.geometry() {
            Geometry::Line => PI,
            _ => 1.0,
        }
    }

    /// Analytic volume of the sampled domain.
    pub fn volume(&self) -> f64 {
        match self.spec {
            GridSpec::Line { s_min, s_max, .. } => s_max - s_min,
            GridSpec::Cylindrical {
                rho_max,
                s_min,
                s_max,
                ..
            } => PI * rho_max * rho_max * (s_max - s_min),
            GridSpec::SphericalRadial { r_max, .. } => 4.0 * PI / 3.0 * r_max.powi(3),
        }
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(GpeError::SizeMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }

    /// Weighted sum of `field` with the geometry's measure.
    pub fn integrate(&self, field: &[f64]) -> Result<f64> {
        self.check_len(field.len())?;
        Ok(par::sum_by(field.len(), |k| self.weights[k] * field[k]))
    }

    /// Band of the radial part of the Laplacian (absent on line grids).
    pub fn radial_band(&self) -> Option<&Band> {
        self.radial_band.as_ref()
    }

    /// Band of the axial second difference (absent on spherical grids).
    pub fn axial_band(&self) -> Option<Band> {
        if self.geometry() == Geometry::SphericalRadial {
            return None;
        }
        let n = self.n_axial;
        let c = 1.0 / (self.d_axial * self.d_axial);
        let mut lower = vec![c; n];
        let mut upper = vec![c; n];
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        Some(Band {
            lower,
            diag: vec![-2.0 * c; n],
            upper,
        })
    }

    /// Fourier transforms along the axial coordinate (line and cylindrical
    /// grids).
    pub fn spectral(&self) -> Option<&Arc<Spectral>> {
        self.spectral.as_ref()
    }

    /// Laplacian: Fourier pseudo-spectral (periodic) on line grids, second
    /// order finite volumes with regular-axis and Dirichlet outer conditions
    /// otherwise.
    pub fn laplacian(&self, field: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::default(); self.len()];
        self.laplacian_into(field, &mut out)?;
        Ok(out)
    }

    pub fn laplacian_into(&self, field: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        self.check_len(field.len())?;
        self.check_len(out.len())?;
        if let (Geometry::Line, Some(sp)) = (self.geometry(), self.spectral.as_ref()) {
            out.copy_from_slice(field);
            sp.second_derivative(out, &mut sp.scratch());
            return Ok(());
        }
        let (nr, ns) = (self.n_radial, self.n_axial);
        let axial = self.geometry() != Geometry::SphericalRadial;
        let cs = if axial {
            1.0 / (self.d_axial * self.d_axial)
        } else {
            0.0
        };
        let radial = self.radial_band.as_ref();
        par::for_each_row(out, ns, |i, row| {
            let base = i * ns;
            for j in 0..ns {
                let f = field[base + j];
                let mut acc = Complex64::default();
                if let Some(b) = radial {
                    acc += f * b.diag[i];
                    if i > 0 {
                        acc += field[base + j - ns] * b.lower[i];
                    }
                    if i + 1 < nr {
                        acc += field[base + j + ns] * b.upper[i];
                    }
                }
                if axial {
                    let left = if j > 0 { field[base + j - 1] } else { Complex64::default() };
                    let right = if j + 1 < ns {
                        field[base + j + 1]
                    } else {
                        Complex64::default()
                    };
                    acc += (left + right - 2.0 * f) * cs;
                }
                row[j] = acc;
            }
        });
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyl(rho_max: f64, n_rho: usize, half: f64, n_s: usize) -> Grid {
        Grid::build(GridSpec::Cylindrical {
            rho_max,
            n_rho,
            s_min: -half,
            s_max: half,
            n_s,
        })
        .unwrap()
    }

    #[test]
    fn line_spacing() {
        let g = Grid::build(GridSpec::Line {
            s_min: -20.0,
            s_max: 20.0,
            n_s: 400,
        })
        .unwrap();
        assert!((g.d_axial() - 0.1).abs() < 1e-15);
        assert_eq!(g.axial_nodes()[g.axial_origin()], 0.0);
    }

    #[test]
    fn half_offset_radial_nodes() {
        let g = cyl(5.0, 50, 4.0, 32);
        assert!((g.radial_nodes()[0] - 0.05).abs() < 1e-15);
        let s = Grid::build(GridSpec::SphericalRadial { r_max: 1.0, n_r: 20 }).unwrap();
        assert!((s.radial_nodes()[0] - 0.025).abs() < 1e-15);
    }

    #[test]
    fn cylinder_volume() {
        let g = cyl(2.0, 40, 1.0, 32);
        let v = g.integrate(&vec![1.0; g.len()]).unwrap();
        assert!((v - 8.0 * PI).abs() < 1e-10 * 8.0 * PI);
        assert!((g.volume() - 8.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn volumes_are_exact() {
        for g in [
            cyl(3.7, 33, 2.5, 17),
            Grid::build(GridSpec::SphericalRadial { r_max: 2.3, n_r: 51 }).unwrap(),
            Grid::build(GridSpec::Line { s_min: -1.5, s_max: 4.0, n_s: 77 }).unwrap(),
        ] {
            let v = g.integrate(&vec![1.0; g.len()]).unwrap();
            assert!((v / g.volume() - 1.0).abs() < 1e-12, "{:?}", g.geometry());
        }
    }

    #[test]
    fn weights_follow_the_measure() {
        let g = cyl(4.0, 40, 3.0, 30);
        let (h_r, h_s) = (g.d_radial(), g.d_axial());
        for (k, w) in g.weights().iter().enumerate() {
            let (rho, _) = g.coords(k);
            assert!((w - 2.0 * PI * rho * h_r * h_s).abs() < 1e-14);
        }
        let s = Grid::build(GridSpec::SphericalRadial { r_max: 4.0, n_r: 40 }).unwrap();
        let h = s.d_radial();
        for (k, w) in s.weights().iter().enumerate() {
            let r = s.radial_nodes()[k];
            assert!((w - 4.0 * PI * h * (r * r + h * h / 12.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_field_integrates_to_zero() {
        let g = cyl(2.0, 16, 1.0, 16);
        assert_eq!(g.integrate(&vec![0.0; g.len()]).unwrap(), 0.0);
        assert!(matches!(g.integrate(&[1.0; 3]), Err(GpeError::SizeMismatch { .. })));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(Grid::build(GridSpec::Line { s_min: 1.0, s_max: -1.0, n_s: 64 }).is_err());
        assert!(Grid::build(GridSpec::Line { s_min: -1.0, s_max: 1.0, n_s: 8 }).is_err());
        assert!(Grid::build(GridSpec::SphericalRadial { r_max: 0.0, n_r: 64 }).is_err());
        assert!(Grid::build(GridSpec::Cylindrical {
            rho_max: 1.0,
            n_rho: 15,
            s_min: -1.0,
            s_max: 1.0,
            n_s: 64
        })
        .is_err());
    }

    #[test]
    fn spectral_laplacian_on_line() {
        let g = Grid::build(GridSpec::Line { s_min: -5.0, s_max: 5.0, n_s: 64 }).unwrap();
        let f = vec![Complex64::new(2.5, -1.0); g.len()];
        assert!(g.laplacian(&f).unwrap().iter().all(|v| v.norm() < 1e-12));
        let g = Grid::build(GridSpec::Line { s_min: -12.0, s_max: 12.0, n_s: 256 }).unwrap();
        let f: Vec<Complex64> = g.axial_nodes().iter().map(|s| Complex64::new((-s * s / 2.0).exp(), 0.0)).collect();
        let lap = g.laplacian(&f).unwrap();
        for (s, v) in g.axial_nodes().iter().zip(&lap) {
            assert!((v.re - (s * s - 1.0) * (-s * s / 2.0).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn default_extents_follow_width_rule() {
        let half = axial_half_extent(5.0, 0.0).unwrap();
        assert!((half - 12.0 * analytic::soliton_width(5.0).unwrap()).abs() < 1e-12);
        assert_eq!(axial_half_extent(5.0, 4.0).unwrap(), 6.0);
        assert!(axial_half_extent(0.0, 0.0).is_err());
        match GridSpec::default_for(Geometry::Cylindrical, 10.0, 0.0).unwrap() {
            GridSpec::Cylindrical { n_rho, n_s, .. } => assert_eq!((n_rho, n_s), (96, 384)),
            other => panic!("{other:?}"),
        }
    }
}

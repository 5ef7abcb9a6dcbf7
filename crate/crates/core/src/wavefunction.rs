use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{GpeError, Result};
use crate::grid::Grid;
use crate::par;

/// A complex field sampled on a grid.
///
/// On a line grid the samples are the axial amplitude `xi(s)` of the
/// factorized state `exp(-rho^2/2) xi(s)`; [`Wavefunction::norm`] reports the
/// norm of that three-dimensional state, so a unit-norm line state has
/// `integral |xi|^2 ds = 1/pi`.
#[derive(Debug, Clone)]
pub struct Wavefunction {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

impl Wavefunction {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GpeError::SizeMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(radial, axial)` at every node. On line grids the radial
    /// argument is 0; on spherical-radial grids the axial argument is 0.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64, f64) -> Complex64 + Sync) -> Self {
        let mut values = vec![Complex64::default(); grid.len()];
        par::fill(&mut values, |k| {
            let (r, s) = grid.coords(k);
            f(r, s)
        });
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = vec![Complex64::default(); grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// Three-dimensional norm `integral |u|^2`.
    pub fn norm(&self) -> f64 {
        let w = self.grid.weights();
        self.grid.norm_factor() * par::sum_by(self.values.len(), |k| w[k] * self.values[k].norm_sqr())
    }

    /// Rescales to unit norm and returns the norm before rescaling.
    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(GpeError::ZeroField);
        }
        self.scale(1.0 / n.sqrt());
        Ok(n)
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    pub fn scale(&mut self, c: f64) {
        par::update(&mut self.values, |_, v| *v *= c);
    }

    /// Inner product `<self, other>` with the three-dimensional measure.
    pub fn inner(&self, other: &Wavefunction) -> Result<Complex64> {
        self.same_grid(other)?;
        let w = self.grid.weights();
        let [re, im] = par::sum_array(self.values.len(), |k| {
            let p = self.values[k].conj() * other.values[k] * w[k];
            [p.re, p.im]
        });
        Ok(Complex64::new(re, im) * self.grid.norm_factor())
    }

    /// L2 distance `||self - other||`.
    pub fn distance(&self, other: &Wavefunction) -> Result<f64> {
        self.same_grid(other)?;
        let w = self.grid.weights();
        let d = par::sum_by(self.values.len(), |k| {
            w[k] * (self.values[k] - other.values[k]).norm_sqr()
        });
        Ok((d * self.grid.norm_factor()).sqrt())
    }

    pub fn max_abs(&self) -> f64 {
        par::max_by(self.values.len(), |k| self.values[k].norm())
    }

    pub fn same_grid(&self, other: &Wavefunction) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(GpeError::GeometryMismatch(
                "wavefunctions live on different grids".into(),
            ))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::f64::consts::PI;

    #[test]
    fn line_norm_includes_transverse_factor() {
        let g = Arc::new(
            Grid::build(GridSpec::Line {
                s_min: -30.0,
                s_max: 30.0,
                n_s: 600,
            })
            .unwrap(),
        );
        // exp(-s^2/2) has integral sqrt(pi) of its square.
        let u = Wavefunction::from_fn(g, |_, s| Complex64::new((-s * s / 2.0).exp(), 0.0));
        assert!((u.norm() - PI * PI.sqrt()).abs() < 1e-12);
        let u = u.normalized().unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-14);
        assert!(u.distance(&u).unwrap() == 0.0);
        assert!((u.inner(&u).unwrap().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_field_cannot_be_normalized() {
        let g = Arc::new(Grid::build(GridSpec::SphericalRadial { r_max: 3.0, n_r: 32 }).unwrap());
        let mut u = Wavefunction::zeros(g.clone());
        assert!(matches!(u.normalize(), Err(GpeError::ZeroField)));
        assert!(Wavefunction::new(g, vec![Complex64::default(); 3]).is_err());
    }
}

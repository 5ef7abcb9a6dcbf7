//! Periodic Fourier transforms along the axial coordinate.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct Spectral {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral").field("n", &self.k.len()).finish()
    }
}

impl Spectral {
    /// Transforms of length `n` on a period of `n * h`.
    pub fn new(n: usize, h: f64) -> Self {
        let mut planner = FftPlanner::new();
        let dk = 2.0 * PI / (n as f64 * h);
        let k = (0..n)
            .map(|j| if j <= n / 2 { j as f64 } else { j as f64 - n as f64 } * dk)
            .collect();
        Self {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            k,
        }
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Angular wavenumbers in transform order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn scratch(&self) -> Vec<Complex64> {
        let n = self
            .fwd
            .get_inplace_scratch_len()
            .max(self.inv.get_inplace_scratch_len());
        vec![Complex64::default(); n]
    }

    /// `row <- IFFT(m(k_j) FFT(row))`, with `m` given per transform index.
    pub fn filter(&self, row: &mut [Complex64], scratch: &mut [Complex64], m: impl Fn(usize) -> Complex64) {
        self.fwd.process_with_scratch(row, scratch);
        let norm = 1.0 / self.k.len() as f64;
        for (j, v) in row.iter_mut().enumerate() {
            *v *= m(j) * norm;
        }
        self.inv.process_with_scratch(row, scratch);
    }

    pub fn second_derivative(&self, row: &mut [Complex64], scratch: &mut [Complex64]) {
        self.filter(row, scratch, |j| Complex64::new(-self.k[j] * self.k[j], 0.0));
    }

    /// First derivative; the unpaired Nyquist mode is dropped.
    pub fn derivative(&self, row: &mut [Complex64], scratch: &mut [Complex64]) {
        let n = self.k.len();
        self.filter(row, scratch, |j| {
            if n % 2 == 0 && j == n / 2 {
                Complex64::default()
            } else {
                Complex64::new(0.0, self.k[j])
            }
        });
    }

    /// Band-limited translation `f(s) -> f(s - shift)`.
    pub fn translate(&self, row: &mut [Complex64], scratch: &mut [Complex64], shift: f64) {
        let n = self.k.len();
        self.filter(row, scratch, |j| {
            if n % 2 == 0 && j == n / 2 {
                Complex64::new((self.k[j] * shift).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, -self.k[j] * shift)
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_a_gaussian() {
        let (n, h) = (256, 0.1);
        let sp = Spectral::new(n, h);
        let s: Vec<f64> = (0..n).map(|j| -12.8 + j as f64 * h).collect();
        let f: Vec<Complex64> = s.iter().map(|x| Complex64::new((-x * x).exp(), 0.0)).collect();
        let mut scratch = sp.scratch();
        let mut d1 = f.clone();
        sp.derivative(&mut d1, &mut scratch);
        let mut d2 = f.clone();
        sp.second_derivative(&mut d2, &mut scratch);
        for j in 0..n {
            let x = s[j];
            let g = (-x * x).exp();
            assert!((d1[j].re + 2.0 * x * g).abs() < 1e-12);
            assert!((d2[j].re - (4.0 * x * x - 2.0) * g).abs() < 1e-11);
        }
    }

    #[test]
    fn translation_by_whole_nodes_is_a_rotation() {
        let (n, h) = (64, 0.5);
        let sp = Spectral::new(n, h);
        let f: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new((-((j as f64 - 20.0) * h).powi(2)).exp(), 0.0))
            .collect();
        let mut g = f.clone();
        sp.translate(&mut g, &mut sp.scratch(), 3.0 * h);
        for j in 3..n {
            assert!((g[j] - f[j - 3]).norm() < 1e-12);
        }
    }
}

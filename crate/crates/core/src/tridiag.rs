//! Thomas-algorithm solver for tridiagonal systems with real or complex
//! coefficients acting on complex right-hand sides.

use num_complex::Complex64;
use num_traits::Num;
use std::ops::Mul;

use crate::par;

/// A factored tridiagonal matrix. `lower[0]` and `upper[n-1]` are ignored.
#[derive(Debug, Clone)]
pub struct Tridiagonal<T> {
    lower: Vec<T>,
    cprime: Vec<T>,
    inv_denom: Vec<T>,
}

impl<T> Tridiagonal<T>
where
    T: Num + Copy,
{
    /// Factors the matrix. The caller guarantees the matrix is diagonally
    /// dominant (no pivoting is done).
    pub fn factor(lower: &[T], diag: &[T], upper: &[T]) -> Self {
        let n = diag.len();
        assert!(lower.len() == n && upper.len() == n, "band lengths differ");
        let mut cprime = vec![T::zero(); n];
        let mut inv_denom = vec![T::zero(); n];
        let mut prev_c = T::zero();
        for i in 0..n {
            let denom = if i == 0 { diag[0] } else { diag[i] - lower[i] * prev_c };
            let inv = T::one() / denom;
            inv_denom[i] = inv;
            cprime[i] = upper[i] * inv;
            prev_c = cprime[i];
        }
        Self {
            lower: lower.to_vec(),
            cprime,
            inv_denom,
        }
    }

    pub fn len(&self) -> usize {
        self.inv_denom.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_denom.is_empty()
    }

    pub fn solve(&self, rhs: &mut [Complex64])
    where
        Complex64: Mul<T, Output = Complex64>,
    {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        rhs[0] = rhs[0] * self.inv_denom[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - rhs[i - 1] * self.lower[i]) * self.inv_denom[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] - rhs[i + 1] * self.cprime[i];
        }
    }
}

/// Applies a tridiagonal matrix: `out = A x`.
pub fn apply<T>(lower: &[T], diag: &[T], upper: &[T], x: &[Complex64], out: &mut [Complex64])
where
    T: Copy,
    Complex64: Mul<T, Output = Complex64>,
{
    let n = x.len();
    for i in 0..n {
        let mut acc = x[i] * diag[i];
        if i > 0 {
            acc += x[i - 1] * lower[i];
        }
        if i + 1 < n {
            acc += x[i + 1] * upper[i];
        }
        out[i] = acc;
    }
}

/// Independent tridiagonal solves along the radial and axial directions of a
/// row-major `n_radial x n_axial` field: `x <- (R^-1 (x) A^-1) x`.
#[derive(Debug, Clone)]
pub struct Separable<T> {
    shape: (usize, usize),
    radial: Option<Tridiagonal<T>>,
    axial: Option<Tridiagonal<T>>,
}

impl<T> Separable<T>
where
    T: Num + Copy + Send + Sync,
    Complex64: Mul<T, Output = Complex64>,
{
    pub fn new(shape: (usize, usize), radial: Option<Tridiagonal<T>>, axial: Option<Tridiagonal<T>>) -> Self {
        if let Some(r) = &radial {
            assert_eq!(r.len(), shape.0, "radial factor size");
        }
        if let Some(a) = &axial {
            assert_eq!(a.len(), shape.1, "axial factor size");
        }
        Self { shape, radial, axial }
    }

    pub fn solve(&self, x: &mut [Complex64]) {
        let (nr, ns) = self.shape;
        assert_eq!(x.len(), nr * ns, "field size");
        if let Some(a) = &self.axial {
            par::for_each_row(x, ns, |_, row| a.solve(row));
        }
        if let Some(r) = &self.radial {
            if ns == 1 {
                r.solve(x);
            } else {
                let mut t = par::transpose(x, nr, ns);
                par::for_each_row(&mut t, nr, |_, col| r.solve(col));
                let back = par::transpose(&t, ns, nr);
                x.copy_from_slice(&back);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_real_and_complex_systems() {
        let n = 50;
        let lower: Vec<f64> = (0..n).map(|i| -1.0 - 0.01 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| -0.5 + 0.02 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 4.0 + (i % 3) as f64).collect();
        let x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut b = vec![Complex64::default(); n];
        apply(&lower, &diag, &upper, &x, &mut b);
        Tridiagonal::factor(&lower, &diag, &upper).solve(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-13);
        }

        let i = Complex64::i();
        let cl: Vec<Complex64> = lower.iter().map(|&l| i * l).collect();
        let cu: Vec<Complex64> = upper.iter().map(|&u| i * u).collect();
        let cd: Vec<Complex64> = diag.iter().map(|&d| 1.0 + i * d).collect();
        apply(&cl, &cd, &cu, &x, &mut b);
        Tridiagonal::factor(&cl, &cd, &cu).solve(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).norm() < 1e-13);
        }
    }
}

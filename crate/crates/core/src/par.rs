//! Data-parallel kernels with a sequential fallback.
//!
//! With the `parallel` feature the helpers dispatch to rayon. Reductions
//! always split the index range into fixed blocks of [`BLOCK`] elements and
//! combine block sums pairwise, so a reduction returns bitwise-identical
//! results for every thread count (and with the feature disabled).

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Reduction block length.
pub const BLOCK: usize = 1024;

fn pairwise<const K: usize>(parts: &[[f64; K]]) -> [f64; K] {
    match parts.len() {
        0 => [0.0; K],
        1 => parts[0],
        n => {
            let (a, b) = parts.split_at(n / 2);
            let (x, y) = (pairwise(a), pairwise(b));
            std::array::from_fn(|k| x[k] + y[k])
        }
    }
}

fn block_sum<const K: usize, F>(lo: usize, hi: usize, f: &F) -> [f64; K]
where
    F: Fn(usize) -> [f64; K],
{
    let mut acc = [0.0; K];
    for i in lo..hi {
        let v = f(i);
        for k in 0..K {
            acc[k] += v[k];
        }
    }
    acc
}

/// Sums `K` quantities over `0..n` in one pass.
pub fn sum_array<const K: usize, F>(n: usize, f: F) -> [f64; K]
where
    F: Fn(usize) -> [f64; K] + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let run = |b: usize| block_sum(b * BLOCK, ((b + 1) * BLOCK).min(n), &f);
    #[cfg(feature = "parallel")]
    let parts: Vec<[f64; K]> = (0..blocks).into_par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<[f64; K]> = (0..blocks).map(run).collect();
    pairwise(&parts)
}

pub fn sum_by<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    sum_array(n, |i| [f(i)])[0]
}

/// Maximum of `f` over `0..n` (`-inf` for an empty range).
pub fn max_by<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .with_min_len(BLOCK)
            .map(&f)
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Writes `f(i)` into `out[i]`.
pub fn fill<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    out.par_iter_mut()
        .with_min_len(BLOCK)
        .enumerate()
        .for_each(|(i, x)| *x = f(i));
    #[cfg(not(feature = "parallel"))]
    out.iter_mut().enumerate().for_each(|(i, x)| *x = f(i));
}

/// Updates every element in place with access to its index.
pub fn update<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync,
{
    #[cfg(feature = "parallel")]
    data.par_iter_mut()
        .with_min_len(BLOCK)
        .enumerate()
        .for_each(|(i, x)| f(i, x));
    #[cfg(not(feature = "parallel"))]
    data.iter_mut().enumerate().for_each(|(i, x)| f(i, x));
}

/// Runs `f(row_index, row)` over consecutive rows of length `row_len`.
pub fn for_each_row<T, F>(data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(row_len)
        .enumerate()
        .for_each(|(r, row)| f(r, row));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(row_len)
        .enumerate()
        .for_each(|(r, row)| f(r, row));
}

/// Runs two closures, concurrently when the `parallel` feature is on.
pub fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    {
        rayon::join(a, b)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (a(), b())
    }
}

/// Transposes a row-major `rows x cols` matrix.
pub fn transpose<T: Copy + Send + Sync + Default>(src: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut out = vec![T::default(); src.len()];
    for_each_row(&mut out, rows, |c, col| {
        for (r, x) in col.iter_mut().enumerate() {
            *x = src[r * cols + c];
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_match_closed_form() {
        let n = 10_000;
        let s = sum_by(n, |i| i as f64);
        assert_eq!(s, (n * (n - 1) / 2) as f64);
        let [a, b] = sum_array(n, |i| [1.0, 2.0 * i as f64]);
        assert_eq!(a, n as f64);
        assert_eq!(b, (n * (n - 1)) as f64);
        assert_eq!(sum_by(0, |_| 1.0), 0.0);
    }

    #[test]
    fn transpose_roundtrip() {
        let m: Vec<usize> = (0..12).collect();
        let t = transpose(&m, 3, 4);
        assert_eq!(t[1], 4);
        assert_eq!(transpose(&t, 4, 3), m);
    }

    #[test]
    fn max_and_fill() {
        let mut v = vec![0.0; 5000];
        fill(&mut v, |i| (i as f64 - 2500.0).abs());
        assert_eq!(max_by(v.len(), |i| v[i]), 2500.0);
    }
}

//! Row-blocked data-parallel kernels with a sequential fallback.
//!
//! Work is split into fixed-size row chunks and partial results are combined
//! in chunk order, so both execution modes return bitwise-identical values
//! regardless of the thread count.

use std::ops::Range;

use crate::linalg::{DenseMatrix, Vector};

/// Rows per work unit.
pub const CHUNK_ROWS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise runs sequentially.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

fn chunks(n: usize) -> Vec<Range<usize>> {
    (0..n).step_by(CHUNK_ROWS.max(1)).map(|s| s..(s + CHUNK_ROWS).min(n)).collect()
}

/// Applies `f` to each index in `0..n`, preserving order.
pub fn map_indexed<T, F>(n: usize, exec: Exec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

fn map_chunks<T, F>(n: usize, exec: Exec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    let ranges = chunks(n);
    map_indexed(ranges.len(), exec, |k| f(ranges[k].clone()))
}

/// `Aᵀ diag(w) A`.
pub fn weighted_gram(a: &DenseMatrix, w: &[f64], exec: Exec) -> DenseMatrix {
    assert_eq!(a.nrows(), w.len(), "weighted_gram: weight length");
    let d = a.ncols();
    let parts = map_chunks(a.nrows(), exec, |r| {
        let block = a.rows(r.start, r.len());
        let mut scaled = block.clone_owned();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            row *= w[r.start + i];
        }
        block.transpose() * scaled
    });
    parts.into_iter().fold(DenseMatrix::zeros(d, d), |acc, p| acc + p)
}

/// `Aᵀ v`.
pub fn transpose_mul(a: &DenseMatrix, v: &[f64], exec: Exec) -> Vector {
    assert_eq!(a.nrows(), v.len(), "transpose_mul: vector length");
    let d = a.ncols();
    let parts = map_chunks(a.nrows(), exec, |r| {
        let block = a.rows(r.start, r.len());
        block.transpose() * Vector::from_column_slice(&v[r.clone()])
    });
    parts.into_iter().fold(Vector::zeros(d), |acc, p| acc + p)
}

/// `A v`.
pub fn mul(a: &DenseMatrix, v: &Vector, exec: Exec) -> Vec<f64> {
    let parts = map_chunks(a.nrows(), exec, |r| (a.rows(r.start, r.len()) * v).as_slice().to_vec());
    parts.concat()
}

/// `diagonal(A M Aᵀ)`.
pub fn row_quadratic(a: &DenseMatrix, m: &DenseMatrix, exec: Exec) -> Vec<f64> {
    let parts = map_chunks(a.nrows(), exec, |r| {
        let block = a.rows(r.start, r.len());
        let bm = block * m;
        (0..r.len()).map(|i| block.row(i).dot(&bm.row(i))).collect::<Vec<_>>()
    });
    parts.concat()
}

/// Elementwise map over a slice, preserving order.
pub fn map_slice<T, F>(x: &[f64], exec: Exec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync + Send,
{
    let parts = map_chunks(x.len(), exec, |r| x[r].iter().map(|&v| f(v)).collect::<Vec<_>>());
    parts.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design(n: usize, d: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n, d, |i, j| ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.4 + (i as f64 * 0.01).sin())
    }

    #[test]
    fn modes_agree_bitwise() {
        let a = design(1000, 7);
        let w: Vec<f64> = (0..1000).map(|i| 0.1 + (i % 13) as f64 * 0.05).collect();
        let m = DenseMatrix::from_fn(7, 7, |i, j| if i == j { 2.0 } else { 0.1 });
        assert_eq!(weighted_gram(&a, &w, Exec::Sequential), weighted_gram(&a, &w, Exec::Parallel));
        assert_eq!(transpose_mul(&a, &w, Exec::Sequential), transpose_mul(&a, &w, Exec::Parallel));
        assert_eq!(row_quadratic(&a, &m, Exec::Sequential), row_quadratic(&a, &m, Exec::Parallel));
        let v = Vector::from_element(7, 0.3);
        assert_eq!(mul(&a, &v, Exec::Sequential), mul(&a, &v, Exec::Parallel));
    }

    #[test]
    fn kernels_match_dense_algebra() {
        let a = design(300, 4);
        let w: Vec<f64> = (0..300).map(|i| 1.0 + (i % 5) as f64).collect();
        let dense = a.transpose() * DenseMatrix::from_diagonal(&Vector::from_vec(w.clone())) * &a;
        assert!((weighted_gram(&a, &w, Exec::default()) - dense).amax() < 1e-10);
        let m = DenseMatrix::identity(4, 4);
        let q = row_quadratic(&a, &m, Exec::default());
        let direct = (&a * a.transpose()).diagonal();
        for i in 0..300 {
            assert!((q[i] - direct[i]).abs() < 1e-12);
        }
    }
}

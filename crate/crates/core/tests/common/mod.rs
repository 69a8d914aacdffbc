#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stpt_core::{DenseTensor, Matrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn tensor(rng: &mut ChaCha8Rng, dims: &[usize]) -> DenseTensor {
    DenseTensor::from_fn(dims, |_| rng.gen_range(-1.0..1.0)).unwrap()
}

/// Orthonormal columns from the left singular vectors of a random matrix.
pub fn orthonormal(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    assert!(cols <= rows);
    let q = stpt_core::svd(&matrix(rng, rows, cols)).unwrap().u;
    q.leading_columns(cols)
}

pub fn tensor_diff(a: &DenseTensor, b: &DenseTensor) -> f64 {
    assert_eq!(a.dims(), b.dims());
    a.sub(b).unwrap().frobenius_norm()
}

pub fn matrix_diff(a: &Matrix, b: &Matrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.sub(b).unwrap().frobenius_norm()
}

/// Singular values by nalgebra, nonincreasing.
pub fn oracle_singular_values(a: &Matrix) -> Vec<f64> {
    let m = nalgebra::DMatrix::from_column_slice(a.rows(), a.cols(), a.as_slice());
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Ã with row `j·m1 + i` equal to `vec(A_{i,j})ᵀ`, built entry by entry.
pub fn oracle_rearrange(a: &Matrix, s1: usize, s2: usize) -> Matrix {
    let (m1, n1) = (a.rows() / s1, a.cols() / s2);
    Matrix::from_fn(m1 * n1, s1 * s2, |row, col| {
        let (i, j) = (row % m1, row / m1);
        let (p, q) = (col % s1, col / s1);
        a[(i * s1 + p, j * s2 + q)]
    })
}

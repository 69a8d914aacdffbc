//! The (left) semi-tensor product.
//!
//! For `m` with `m.cols() = n.rows()·k`, `m ⋉ n = m·(n ⊗ I_k)`; for
//! `n.rows() = m.cols()·k`, `m ⋉ n = (m ⊗ I_k)·n`; equal inner sizes give the
//! ordinary product. The modal product `t ⋉_k u` applies `u ⊗ I_{s_k}` along
//! mode k, where `s_k = n_k / u.cols()`.
//!
//! Only the left STP exists here. The Kronecker-with-identity factors are never
//! formed: the kernels below visit exactly the nonzero terms of the dense
//! product, in the same order, so results match it bit for bit.

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, Matrix};
use crate::tensor::{refold, unfold, DenseTensor};

/// Which side's inner size divides the other's.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StpCase {
    /// The right operand's size divides the left operand's (`s = t·n`).
    LeftFactor,
    /// The left operand's size divides the right operand's (`t = s·n`).
    RightFactor,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StpShapeRelation {
    pub case: StpCase,
    /// Quotient of the larger inner size by the smaller; 1 iff `Equal`.
    pub multiplier: usize,
}

impl StpShapeRelation {
    /// Classifies inner sizes `left` (columns of the left factor, or length of the
    /// row vector) and `right` (rows of the right factor).
    pub fn classify(left: usize, right: usize) -> Result<Self> {
        if left == 0 || right == 0 {
            return Err(Error::IncompatibleDimensions(format!(
                "STP inner sizes must be positive, got {left} and {right}"
            )));
        }
        if left == right {
            Ok(Self {
                case: StpCase::Equal,
                multiplier: 1,
            })
        } else if left % right == 0 {
            Ok(Self {
                case: StpCase::LeftFactor,
                multiplier: left / right,
            })
        } else if right % left == 0 {
            Ok(Self {
                case: StpCase::RightFactor,
                multiplier: right / left,
            })
        } else {
            Err(Error::IncompatibleDimensions(format!(
                "neither of {left} and {right} divides the other"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Row,
    Column,
    Scalar,
}

/// Result of the vector STP: a row vector, a column vector, or a scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct StpVector {
    pub values: Vec<f64>,
    pub orientation: Orientation,
}

/// `xᵀ ⋉ y` for a row vector `x` (length s) and column vector `y` (length t).
///
/// If `s = t·n`, `x` splits into `t` blocks of length `n` and the result is the
/// row vector `Σ_k y_k x_kᵀ`. If `t = s·n`, `y` splits into `s` blocks and the
/// result is the column vector `Σ_k x_k y_k`. Equal lengths give the dot product.
pub fn stp_vec(x: &[f64], y: &[f64]) -> Result<StpVector> {
    let rel = StpShapeRelation::classify(x.len(), y.len())?;
    let n = rel.multiplier;
    Ok(match rel.case {
        StpCase::Equal => StpVector {
            values: vec![dot(x, y)],
            orientation: Orientation::Scalar,
        },
        StpCase::LeftFactor => {
            let mut values = vec![0.0; n];
            for (block, &yk) in x.chunks_exact(n).zip(y) {
                axpy(yk, block, &mut values);
            }
            StpVector {
                values,
                orientation: Orientation::Row,
            }
        }
        StpCase::RightFactor => {
            let mut values = vec![0.0; n];
            for (block, &xk) in y.chunks_exact(n).zip(x) {
                axpy(xk, block, &mut values);
            }
            StpVector {
                values,
                orientation: Orientation::Column,
            }
        }
    })
}

/// Left semi-tensor product `m ⋉ n`.
pub fn stp_mat(m: &Matrix, n: &Matrix) -> Result<Matrix> {
    let rel = StpShapeRelation::classify(m.cols(), n.rows())?;
    match rel.case {
        StpCase::Equal => m.matmul(n),
        StpCase::LeftFactor => Ok(mul_kron_identity(m, n, rel.multiplier)),
        StpCase::RightFactor => Ok(kron_identity_mul(m, rel.multiplier, n)),
    }
}

/// `m · (n ⊗ I_k)` where `m.cols() = n.rows()·k`.
pub(crate) fn mul_kron_identity(m: &Matrix, n: &Matrix, k: usize) -> Matrix {
    debug_assert_eq!(m.cols(), n.rows() * k);
    let mut out = Matrix::zeros(m.rows(), n.cols() * k);
    for j in 0..n.cols() {
        for a in 0..k {
            let ocol = out.col_mut(j * k + a);
            for q in 0..n.rows() {
                let b = n[(q, j)];
                if b == 0.0 {
                    continue;
                }
                axpy(b, m.col(q * k + a), ocol);
            }
        }
    }
    out
}

/// `(m ⊗ I_k) · n` where `n.rows() = m.cols()·k`.
pub(crate) fn kron_identity_mul(m: &Matrix, k: usize, n: &Matrix) -> Matrix {
    debug_assert_eq!(n.rows(), m.cols() * k);
    let rows = m.rows() * k;
    let mut out = Matrix::zeros(rows, n.cols());
    for j in 0..n.cols() {
        let ncol = n.col(j);
        let ocol = out.col_mut(j);
        for q in 0..m.cols() {
            let mcol = m.col(q);
            for a in 0..k {
                let x = ncol[q * k + a];
                if x == 0.0 {
                    continue;
                }
                for (i, &mi) in mcol.iter().enumerate() {
                    ocol[i * k + a] += x * mi;
                }
            }
        }
    }
    out
}

/// Modal STP `t ⋉_k u` (mode `k` is 1-based): `(t ⋉_k u)₍k₎ = u ⋉ t₍k₎`.
///
/// The factor `s_k = n_k / u.cols()` is inferred; mode k of the result has size
/// `s_k · u.rows()`.
pub fn mode_stp(t: &DenseTensor, k: usize, u: &Matrix) -> Result<DenseTensor> {
    let factor = mode_factor(t, k, u)?;
    let unfolded = unfold(t, k)?;
    let product = if factor == 1 {
        u.matmul(&unfolded)?
    } else {
        kron_identity_mul(u, factor, &unfolded)
    };
    let mut dims = t.dims().to_vec();
    dims[k - 1] = factor * u.rows();
    refold(&product, k, &dims)
}

/// [`mode_stp`] that additionally checks the inferred factor against `expected_factor`.
pub fn mode_stp_checked(
    t: &DenseTensor,
    k: usize,
    u: &Matrix,
    expected_factor: usize,
) -> Result<DenseTensor> {
    let factor = mode_factor(t, k, u)?;
    if factor != expected_factor {
        return Err(Error::IncompatibleDimensions(format!(
            "mode {k}: {}x{} factor implies s = {factor}, expected {expected_factor}",
            u.rows(),
            u.cols()
        )));
    }
    mode_stp(t, k, u)
}

fn mode_factor(t: &DenseTensor, k: usize, u: &Matrix) -> Result<usize> {
    if k == 0 || k > t.order() {
        return Err(Error::ModeOutOfRange {
            mode: k,
            order: t.order(),
        });
    }
    let nk = t.dims()[k - 1];
    if u.cols() == 0 || nk % u.cols() != 0 {
        return Err(Error::IncompatibleDimensions(format!(
            "mode {k}: matrix with {} columns does not divide mode size {nk}",
            u.cols()
        )));
    }
    Ok(nk / u.cols())
}

/// Applies `⋉_k` for every `(k, u)` in order: `t ⋉_{k₁} u₁ ⋉_{k₂} u₂ ⋯`.
pub fn multi_mode_stp<'a>(
    t: &DenseTensor,
    factors: impl IntoIterator<Item = (usize, &'a Matrix)>,
) -> Result<DenseTensor> {
    let mut out = t.clone();
    for (k, u) in factors {
        out = mode_stp(&out, k, u)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron;
    use crate::tensor::mode_product;

    #[test]
    fn classify_cases() {
        let r = StpShapeRelation::classify(6, 3).unwrap();
        assert_eq!((r.case, r.multiplier), (StpCase::LeftFactor, 2));
        let r = StpShapeRelation::classify(2, 8).unwrap();
        assert_eq!((r.case, r.multiplier), (StpCase::RightFactor, 4));
        let r = StpShapeRelation::classify(5, 5).unwrap();
        assert_eq!((r.case, r.multiplier), (StpCase::Equal, 1));
        assert!(matches!(
            StpShapeRelation::classify(4, 6),
            Err(Error::IncompatibleDimensions(_))
        ));
    }

    #[test]
    fn stp_vec_examples() {
        let r = stp_vec(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.values, vec![22.0, 28.0]);
        assert_eq!(r.orientation, Orientation::Row);

        let r = stp_vec(&[1.0, 2.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(r.values, vec![7.0, 10.0]);
        assert_eq!(r.orientation, Orientation::Column);
        // Cross-check Case 2 against (xᵀ ⊗ I₂) y.
        let x = Matrix::from_rows(&[&[1.0, 2.0]]);
        let y = Matrix::column_vector(&[1.0, 2.0, 3.0, 4.0]);
        let oracle = kron(&x, &Matrix::identity(2)).unwrap().matmul(&y).unwrap();
        assert_eq!(oracle.as_slice(), &r.values[..]);

        let r = stp_vec(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.values, vec![11.0]);
        assert_eq!(r.orientation, Orientation::Scalar);

        assert!(matches!(
            stp_vec(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(Error::IncompatibleDimensions(_))
        ));
    }

    #[test]
    fn stp_mat_examples() {
        let a = Matrix::from_rows(&[&[1.0, 2.0, 3.0, 4.0]]);
        let b = Matrix::column_vector(&[5.0, 6.0]);
        let c = stp_mat(&a, &b).unwrap();
        assert_eq!(c, Matrix::from_rows(&[&[23.0, 34.0]]));
        let oracle = a.matmul(&kron(&b, &Matrix::identity(2)).unwrap()).unwrap();
        assert_eq!(c, oracle);

        let a = Matrix::from_fn(3, 4, |i, j| (i as f64) - 0.5 * j as f64);
        let b = Matrix::from_fn(4, 2, |i, j| (i * j) as f64 + 1.0);
        assert_eq!(stp_mat(&a, &b).unwrap(), a.matmul(&b).unwrap());

        let b = Matrix::column_vector(&[1.5, -2.0, 0.25, 4.0]);
        assert_eq!(stp_mat(&Matrix::identity(2), &b).unwrap(), b);

        assert!(stp_mat(&Matrix::zeros(2, 3), &Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn matrix_times_vector_branch() {
        // A (m×n) ⋉ x with x of length p: p = t·n gives a tm column vector,
        // n = s·p gives an m×s matrix.
        let a = Matrix::from_fn(2, 3, |i, j| (1 + i + 2 * j) as f64);
        let x = Matrix::column_vector(&[1.0, -1.0, 2.0, 0.5, 3.0, 1.0]);
        assert_eq!(stp_mat(&a, &x).unwrap().shape(), (4, 1));
        let a = Matrix::from_fn(2, 6, |i, j| (i + j) as f64);
        let x = Matrix::column_vector(&[1.0, 2.0, 3.0]);
        assert_eq!(stp_mat(&a, &x).unwrap().shape(), (2, 2));
    }

    #[test]
    fn mode_stp_examples() {
        let a = Matrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let t = DenseTensor::from_matrix(a.clone());
        let doubled = mode_stp(&t, 1, &Matrix::from_rows(&[&[2.0]])).unwrap();
        assert_eq!(doubled, DenseTensor::from_matrix(a.scaled(2.0)));

        let t = DenseTensor::from_fn(&[4, 6, 3], |i| (i[0] + 10 * i[1] + 100 * i[2]) as f64).unwrap();
        for (k, s) in [(1, 2), (1, 4), (2, 3), (2, 1), (3, 3)] {
            let nk = t.dims()[k - 1];
            assert_eq!(mode_stp(&t, k, &Matrix::identity(nk / s)).unwrap(), t);
        }
        let u = Matrix::from_fn(5, 6, |i, j| (i as f64 + 1.0) / (j as f64 + 2.0));
        assert_eq!(mode_stp(&t, 2, &u).unwrap(), mode_product(&t, 2, &u).unwrap());

        let u = Matrix::from_fn(5, 3, |i, j| (i * 3 + j) as f64 - 4.0);
        let via_kron = mode_product(&t, 2, &kron(&u, &Matrix::identity(2)).unwrap()).unwrap();
        let got = mode_stp(&t, 2, &u).unwrap();
        assert_eq!(got.dims(), &[4, 10, 3]);
        assert_eq!(got, via_kron);

        assert!(matches!(
            mode_stp(&t, 2, &Matrix::zeros(2, 4)),
            Err(Error::IncompatibleDimensions(_))
        ));
        assert!(matches!(
            mode_stp(&t, 4, &Matrix::zeros(2, 2)),
            Err(Error::ModeOutOfRange { .. })
        ));
        assert!(mode_stp_checked(&t, 2, &u, 2).is_ok());
        assert!(mode_stp_checked(&t, 2, &u, 3).is_err());
    }
}

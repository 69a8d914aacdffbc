//! Nearest Kronecker product: `min ‖A − B ⊗ C‖_F` via the rank-one
//! approximation of the rearranged matrix `Ã` (Van Loan–Pitsianis).

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2, svd, Matrix};

/// Above this `min(m1·n1, m2·n2)` the dominant triplet of `Ã` comes from power
/// iteration instead of a full SVD.
pub const FULL_SVD_MAX_DIM: usize = 512;
pub const POWER_TOLERANCE: f64 = 1e-12;
pub const POWER_MAX_ITERATIONS: usize = 10_000;
/// Relative gap `(σ̃₁ − σ̃₂)/σ̃₁` at or below which the minimizer is flagged as non-unique.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// An `(m1·m2) × (n1·n2)` matrix viewed as an `m1 × n1` grid of `m2 × n2` blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KronBlockPartition {
    pub m1: usize,
    pub n1: usize,
    pub m2: usize,
    pub n2: usize,
}

impl KronBlockPartition {
    /// Partition for a `B ⊗ C` fit with `C` of shape `s1 × s2`.
    pub fn for_factor(rows: usize, cols: usize, s1: usize, s2: usize) -> Result<Self> {
        if s1 == 0 || s2 == 0 || rows % s1 != 0 || cols % s2 != 0 {
            return Err(Error::IncompatibleDimensions(format!(
                "block size {s1}x{s2} does not divide {rows}x{cols}"
            )));
        }
        Ok(Self {
            m1: rows / s1,
            n1: cols / s2,
            m2: s1,
            n2: s2,
        })
    }

    fn check(&self, rows: usize, cols: usize) -> Result<()> {
        if self.m1.checked_mul(self.m2) != Some(rows) || self.n1.checked_mul(self.n2) != Some(cols) {
            return Err(Error::ShapeMismatch(format!(
                "partition {}x{} blocks of {}x{} does not tile a {rows}x{cols} matrix",
                self.m1, self.n1, self.m2, self.n2
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NkpResult {
    pub b: Matrix,
    pub c: Matrix,
    /// `‖A − b ⊗ c‖_F`, reported as `√tail_energy`.
    pub residual: f64,
    /// Singular values of `Ã`, nonincreasing. Only `[σ̃₁]` when the power route was taken.
    pub tilde_sigma: Vec<f64>,
    /// `Σ_{i≥2} σ̃ᵢ²`.
    pub tail_energy: f64,
    /// `σ̃₁ − σ̃₂ ≤ 1e−10·σ̃₁`. On the power route σ̃₂ is bounded by `√tail_energy`,
    /// so the flag is conservative there.
    pub near_degenerate: bool,
}

/// Row `j·m1 + i` of `Ã` is `vec(A_{i,j})ᵀ` (0-based block indices).
pub fn rearrange(a: &Matrix, part: KronBlockPartition) -> Result<Matrix> {
    part.check(a.rows(), a.cols())?;
    let KronBlockPartition { m1, n1, m2, n2 } = part;
    let rows = m1 * n1;
    let mut data = Vec::with_capacity(a.len());
    for q in 0..n2 {
        for p in 0..m2 {
            for j in 0..n1 {
                let src = a.col(j * n2 + q);
                data.extend((0..m1).map(|i| src[i * m2 + p]));
            }
        }
    }
    Ok(Matrix::from_raw(rows, m2 * n2, data))
}

/// Inverse of [`rearrange`].
pub fn unrearrange(at: &Matrix, part: KronBlockPartition) -> Result<Matrix> {
    let KronBlockPartition { m1, n1, m2, n2 } = part;
    if at.rows() != m1 * n1 || at.cols() != m2 * n2 {
        return Err(Error::ShapeMismatch(format!(
            "rearranged matrix is {}x{}, partition expects {}x{}",
            at.rows(),
            at.cols(),
            m1 * n1,
            m2 * n2
        )));
    }
    let mut out = Matrix::zeros(m1 * m2, n1 * n2);
    for q in 0..n2 {
        for p in 0..m2 {
            let src = at.col(q * m2 + p);
            for j in 0..n1 {
                let dst = out.col_mut(j * n2 + q);
                for i in 0..m1 {
                    dst[i * m2 + p] = src[j * m1 + i];
                }
            }
        }
    }
    Ok(out)
}

/// Best `b ⊗ c` approximation of `a` with `c` of shape `s1 × s2`.
pub fn nearest_kron(a: &Matrix, s1: usize, s2: usize) -> Result<NkpResult> {
    let part = KronBlockPartition::for_factor(a.rows(), a.cols(), s1, s2)?;
    let at = rearrange(a, part)?;
    let (sigma1, u1, v1, tilde_sigma, tail_energy, sigma2_bound) =
        if at.rows().min(at.cols()) <= FULL_SVD_MAX_DIM {
            let f = svd(&at)?;
            let tail: f64 = f.sigma.iter().skip(1).map(|s| s * s).sum();
            let s2nd = f.sigma.get(1).copied().unwrap_or(0.0);
            (f.sigma[0], f.u.col(0).to_vec(), f.v.col(0).to_vec(), f.sigma, tail, s2nd)
        } else {
            let (sigma1, u1, v1) = dominant_triplet(&at)?;
            let total = at.frobenius_norm().powi(2);
            let tail = (total - sigma1 * sigma1).max(0.0);
            (sigma1, u1, v1, vec![sigma1], tail, tail.sqrt())
        };

    if sigma1 == 0.0 {
        return Ok(NkpResult {
            b: Matrix::zeros(part.m1, part.n1),
            c: Matrix::zeros(part.m2, part.n2),
            residual: 0.0,
            tilde_sigma,
            tail_energy: 0.0,
            near_degenerate: false,
        });
    }
    let root = sigma1.sqrt();
    let b = Matrix::from_raw(part.m1, part.n1, u1.iter().map(|x| root * x).collect());
    let c = Matrix::from_raw(part.m2, part.n2, v1.iter().map(|x| root * x).collect());
    Ok(NkpResult {
        b,
        c,
        residual: tail_energy.sqrt(),
        tilde_sigma,
        tail_energy,
        near_degenerate: sigma1 - sigma2_bound <= DEGENERACY_GAP * sigma1,
    })
}

/// Dominant singular triplet by alternating power iteration, with the sign
/// convention applied to the left vector.
fn dominant_triplet(a: &Matrix) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let (m, n) = a.shape();
    // Start from the row of largest norm; it is never orthogonal to v₁ unless a = 0.
    let mut best = (0, -1.0);
    let mut row = vec![0.0; n];
    for i in 0..m {
        for (j, r) in row.iter_mut().enumerate() {
            *r = a[(i, j)];
        }
        let norm = norm2(&row);
        if norm > best.1 {
            best = (i, norm);
        }
    }
    if best.1 <= 0.0 {
        let mut u = vec![0.0; m];
        u[0] = 1.0;
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        return Ok((0.0, u, v));
    }
    let mut v: Vec<f64> = (0..n).map(|j| a[(best.0, j)] / best.1).collect();
    let mut u = vec![0.0; m];
    let mut sigma = 0.0;
    for _ in 0..POWER_MAX_ITERATIONS {
        u.iter_mut().for_each(|x| *x = 0.0);
        for (j, &vj) in v.iter().enumerate() {
            if vj != 0.0 {
                axpy(vj, a.col(j), &mut u);
            }
        }
        let unorm = norm2(&u);
        if unorm == 0.0 {
            break;
        }
        u.iter_mut().for_each(|x| *x /= unorm);
        for (j, vj) in v.iter_mut().enumerate() {
            *vj = dot(a.col(j), &u);
        }
        let next = norm2(&v);
        v.iter_mut().for_each(|x| *x /= next);
        let converged = (next - sigma).abs() <= POWER_TOLERANCE * next;
        sigma = next;
        if converged {
            let mut big = 0;
            for (i, x) in u.iter().enumerate() {
                if x.abs() > u[big].abs() {
                    big = i;
                }
            }
            if u[big] < 0.0 {
                u.iter_mut().for_each(|x| *x = -*x);
                v.iter_mut().for_each(|x| *x = -*x);
            }
            return Ok((sigma, u, v));
        }
    }
    Err(Error::ConvergenceFailure {
        iterations: POWER_MAX_ITERATIONS,
    })
}

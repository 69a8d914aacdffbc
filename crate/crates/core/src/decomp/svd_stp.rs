use crate::error::{Error, Result};
use crate::linalg::{complete_orthonormal_basis, kron, svd, Matrix};
use crate::nkp::nearest_kron;

/// `A ≈ U ⋉ Σ ⋉ Vᵀ` with `Σ = Σ_B ⊗ C` held compactly as `(sigma_b, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdStpFactors {
    /// `(rows/s1) × r`, orthonormal columns.
    pub u: Matrix,
    /// `(cols/s2) × r`, orthonormal columns.
    pub v: Matrix,
    /// Leading `r` singular values of `B`.
    pub sigma_b: Vec<f64>,
    /// Discarded singular values `σ_{r+1}, …, σ_p` of `B`.
    pub sigma_b_tail: Vec<f64>,
    pub c: Matrix,
    pub s1: usize,
    pub s2: usize,
    pub r: usize,
    pub rows: usize,
    pub cols: usize,
    /// `Σ_{i≥2} σ̃ᵢ²`, the squared error of the full decomposition.
    pub tail_energy: f64,
    pub tilde_sigma: Vec<f64>,
    pub near_degenerate: bool,
}

impl SvdStpFactors {
    /// `p = min(rows/s1, cols/s2)`.
    pub fn max_rank(&self) -> usize {
        (self.rows / self.s1).min(self.cols / self.s2)
    }

    /// `‖S_k‖_F = σ_k·‖C‖_F` for the kept blocks.
    pub fn block_norms(&self) -> Vec<f64> {
        let c = self.c.frobenius_norm();
        self.sigma_b.iter().map(|s| s * c).collect()
    }

    /// `‖S_k‖_F` for the discarded blocks `k > r`.
    pub fn tail_block_norms(&self) -> Vec<f64> {
        let c = self.c.frobenius_norm();
        self.sigma_b_tail.iter().map(|s| s * c).collect()
    }

    /// `u` completed to a square orthogonal matrix.
    pub fn full_u(&self) -> Matrix {
        complete_orthonormal_basis(&self.u)
    }

    pub fn full_v(&self) -> Matrix {
        complete_orthonormal_basis(&self.v)
    }
}

/// Full decomposition, `r = p`.
pub fn svd_stp(a: &Matrix, s1: usize, s2: usize) -> Result<SvdStpFactors> {
    let nkp = nearest_kron(a, s1, s2)?;
    let f = svd(&nkp.b)?;
    let p = f.sigma.len();
    Ok(SvdStpFactors {
        u: f.u,
        v: f.v,
        sigma_b: f.sigma,
        sigma_b_tail: Vec::new(),
        c: nkp.c,
        s1,
        s2,
        r: p,
        rows: a.rows(),
        cols: a.cols(),
        tail_energy: nkp.tail_energy,
        tilde_sigma: nkp.tilde_sigma,
        near_degenerate: nkp.near_degenerate,
    })
}

/// Keeps the leading `r` triplets of the full decomposition, `1 ≤ r ≤ p`.
pub fn truncated_svd_stp(a: &Matrix, s1: usize, s2: usize, r: usize) -> Result<SvdStpFactors> {
    if s1 > 0 && s2 > 0 && a.rows() % s1 == 0 && a.cols() % s2 == 0 {
        let p = (a.rows() / s1).min(a.cols() / s2);
        if r == 0 || r > p {
            return Err(Error::RankOutOfRange { rank: r, max: p, mode: None });
        }
    }
    Ok(truncate(svd_stp(a, s1, s2)?, r))
}

pub(crate) fn truncate(mut f: SvdStpFactors, r: usize) -> SvdStpFactors {
    debug_assert!(r <= f.r);
    if r < f.r {
        let mut tail = f.sigma_b.split_off(r);
        tail.extend_from_slice(&f.sigma_b_tail);
        f.sigma_b_tail = tail;
        f.u = f.u.leading_columns(r);
        f.v = f.v.leading_columns(r);
        f.r = r;
    }
    f
}

/// `√(Σ_{i≥2} σ̃ᵢ²) + √(Σ_{i>r} ‖S_i‖_F²)`.
pub fn svd_stp_error_bound(f: &SvdStpFactors) -> f64 {
    let dropped: f64 = f.tail_block_norms().iter().map(|x| x * x).sum();
    f.tail_energy.sqrt() + dropped.sqrt()
}

/// `blkdiag(S_1, …, S_r)` with `S_k = σ_k·C`. When `r = p`, the result is
/// zero-padded to `rows × cols` so that it pairs with [`SvdStpFactors::full_u`]
/// and [`SvdStpFactors::full_v`].
pub fn materialize_sigma(f: &SvdStpFactors) -> Matrix {
    let (s1, s2) = (f.s1, f.s2);
    let (rows, cols) = if f.r == f.max_rank() {
        (f.rows, f.cols)
    } else {
        (f.r * s1, f.r * s2)
    };
    let mut out = Matrix::zeros(rows, cols);
    for (k, &sigma) in f.sigma_b.iter().enumerate() {
        for q in 0..s2 {
            let col = out.col_mut(k * s2 + q);
            for p in 0..s1 {
                col[k * s1 + p] = sigma * f.c[(p, q)];
            }
        }
    }
    out
}

/// `U ⋉ Σ ⋉ Vᵀ`, evaluated as `(U diag(σ) Vᵀ) ⊗ C`.
pub fn reconstruct_svd_stp(f: &SvdStpFactors) -> Result<Matrix> {
    let mut us = f.u.clone();
    for (k, &sigma) in f.sigma_b.iter().enumerate() {
        us.col_mut(k).iter_mut().for_each(|x| *x *= sigma);
    }
    let b = us.matmul_t(&f.v)?;
    kron(&b, &f.c)
}

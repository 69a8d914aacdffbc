//! Singular value decomposition.
//!
//! Two kernels: one-sided (Hestenes) Jacobi when the short side is at most
//! [`JACOBI_MAX_DIM`], Golub–Kahan bidiagonalization followed by implicit-shift
//! QR on the bidiagonal otherwise. Both work on a tall matrix; wide inputs are
//! transposed first. Results are sorted in nonincreasing order and carry a
//! deterministic sign convention: in every left singular vector the entry of
//! largest magnitude (lowest index on ties) is positive.

use super::{dot, norm2, Matrix};
use crate::error::{Error, Result};

/// Short-side size up to which the Jacobi kernel is used.
pub const JACOBI_MAX_DIM: usize = 32;


/// `a = u · diag(sigma) · vᵀ` with orthonormal columns in `u` and `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdTriple {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub v: Matrix,
}

impl SvdTriple {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `u · diag(sigma) · vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for (j, &s) in self.sigma.iter().enumerate() {
            us.col_mut(j).iter_mut().for_each(|x| *x *= s);
        }
        us.matmul_t(&self.v).expect("factor shapes agree")
    }

    /// Keeps the leading `r` triplets.
    pub fn truncate(&self, r: usize) -> Result<SvdTriple> {
        if r == 0 || r > self.rank() {
            return Err(Error::RankOutOfRange {
                rank: r,
                max: self.rank(),
                mode: None,
            });
        }
        Ok(SvdTriple {
            u: self.u.leading_columns(r),
            sigma: self.sigma[..r].to_vec(),
            v: self.v.leading_columns(r),
        })
    }
}

/// Thin SVD: `u` is m×p, `v` is n×p with p = min(m, n).
///
/// Columns belonging to zero singular values are completed to an orthonormal set.
pub fn svd(a: &Matrix) -> Result<SvdTriple> {
    if a.rows() >= a.cols() {
        let mut t = svd_tall(a)?;
        finish(&mut t);
        Ok(t)
    } else {
        let t = svd_tall(&a.transpose())?;
        let mut t = SvdTriple {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        };
        finish(&mut t);
        Ok(t)
    }
}

/// Leading `r` singular triplets of [`svd`].
pub fn truncated_svd(a: &Matrix, r: usize) -> Result<SvdTriple> {
    let p = a.rows().min(a.cols());
    if r == 0 || r > p {
        return Err(Error::RankOutOfRange {
            rank: r,
            max: p,
            mode: None,
        });
    }
    svd(a)?.truncate(r)
}

fn svd_tall(a: &Matrix) -> Result<SvdTriple> {
    debug_assert!(a.rows() >= a.cols());
    if a.cols() == 0 {
        return Ok(SvdTriple {
            u: Matrix::zeros(a.rows(), 0),
            sigma: Vec::new(),
            v: Matrix::zeros(0, 0),
        });
    }
    if a.cols() <= JACOBI_MAX_DIM {
        jacobi(a)
    } else {
        golub_kahan(a)
    }
}

/// Sorts triplets by nonincreasing sigma and applies the sign convention.
fn finish(t: &mut SvdTriple) {
    let p = t.sigma.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| t.sigma[j].total_cmp(&t.sigma[i]));
    if order.iter().enumerate().any(|(k, &i)| k != i) {
        let u = permute_columns(&t.u, &order);
        let v = permute_columns(&t.v, &order);
        let sigma = order.iter().map(|&i| t.sigma[i]).collect();
        *t = SvdTriple { u, sigma, v };
    }
    for j in 0..p {
        let col = t.u.col(j);
        let mut best = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            t.u.col_mut(j).iter_mut().for_each(|x| *x = -*x);
            t.v.col_mut(j).iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn permute_columns(m: &Matrix, order: &[usize]) -> Matrix {
    let mut data = Vec::with_capacity(m.rows() * order.len());
    for &j in order {
        data.extend_from_slice(m.col(j));
    }
    Matrix::from_raw(m.rows(), order.len(), data)
}

/// One-sided Jacobi on a tall matrix: orthogonalizes the columns of a working
/// copy by plane rotations, accumulating them into `v`.
fn jacobi(a: &Matrix) -> Result<SvdTriple> {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = Matrix::identity(n);
    let tol = f64::EPSILON * (m as f64).sqrt();
    let max_sweeps = 100 * n.max(1);

    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = dot(w.col(i), w.col(i));
                let beta = dot(w.col(j), w.col(j));
                let gamma = dot(w.col(i), w.col(j));
                if gamma == 0.0 || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(w.as_mut_slice(), m, i, j, c, s);
                rotate_pair(v.as_mut_slice(), n, i, j, c, s);
            }
        }
        sweeps += 1;
        if !rotated {
            break;
        }
        if sweeps >= max_sweeps {
            return Err(Error::ConvergenceFailure { iterations: sweeps });
        }
    }

    let sigma: Vec<f64> = (0..n).map(|j| norm2(w.col(j))).collect();
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let cutoff = smax * f64::EPSILON * f64::EPSILON;
    let mut u = w;
    let mut degenerate = Vec::new();
    for (j, &s) in sigma.iter().enumerate() {
        if s == 0.0 || s <= cutoff {
            degenerate.push(j);
        } else {
            u.col_mut(j).iter_mut().for_each(|x| *x /= s);
        }
    }
    if !degenerate.is_empty() {
        fill_degenerate_columns(&mut u, &degenerate);
    }
    Ok(SvdTriple { u, sigma, v })
}

/// `(x, y) ← (c·x − s·y, s·x + c·y)` on columns `i` and `j` (i < j).
fn rotate_pair(data: &mut [f64], rows: usize, i: usize, j: usize, c: f64, s: f64) {
    let (left, right) = data.split_at_mut(j * rows);
    let x = &mut left[i * rows..(i + 1) * rows];
    let y = &mut right[..rows];
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let a = *xi;
        let b = *yi;
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// Replaces the listed columns of `u` with unit vectors orthogonal to every
/// other column.
fn fill_degenerate_columns(u: &mut Matrix, degenerate: &[usize]) {
    let good: Vec<usize> = (0..u.cols()).filter(|j| !degenerate.contains(j)).collect();
    let mut basis = Matrix::zeros(u.rows(), good.len());
    for (k, &j) in good.iter().enumerate() {
        basis.col_mut(k).copy_from_slice(u.col(j));
    }
    let extended = extend_orthonormal(&basis, u.cols());
    for (k, &j) in degenerate.iter().enumerate() {
        u.col_mut(j).copy_from_slice(extended.col(good.len() + k));
    }
}

/// Extends a matrix with orthonormal columns to a square orthogonal matrix whose
/// leading columns are the input.
pub fn complete_orthonormal_basis(q: &Matrix) -> Matrix {
    extend_orthonormal(q, q.rows())
}

/// Appends unit vectors to the orthonormal columns of `q` until it has `target`
/// columns. Candidates are the standard basis vectors, taken greedily by the
/// size of their component outside the current span.
fn extend_orthonormal(q: &Matrix, target: usize) -> Matrix {
    let m = q.rows();
    assert!(target <= m && q.cols() <= target);
    let mut cols: Vec<Vec<f64>> = (0..q.cols()).map(|j| q.col(j).to_vec()).collect();
    // Squared norm of row i of the current basis = ‖projection of e_i‖².
    let mut captured: Vec<f64> = (0..m)
        .map(|i| cols.iter().map(|c| c[i] * c[i]).sum())
        .collect();
    while cols.len() < target {
        let mut best = 0;
        for i in 1..m {
            if captured[i] < captured[best] {
                best = i;
            }
        }
        let mut x = vec![0.0; m];
        x[best] = 1.0;
        for _ in 0..2 {
            for c in &cols {
                let h = dot(c, &x);
                for (xi, ci) in x.iter_mut().zip(c) {
                    *xi -= h * ci;
                }
            }
        }
        let nx = norm2(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        for (cap, xi) in captured.iter_mut().zip(&x) {
            *cap += xi * xi;
        }
        // Never pick the same axis twice.
        captured[best] = f64::INFINITY;
        cols.push(x);
    }
    let mut data = Vec::with_capacity(m * target);
    for c in cols {
        data.extend(c);
    }
    Matrix::from_raw(m, target, data)
}

/// Golub–Kahan–Reinsch SVD of a tall matrix (m ≥ n).
///
/// Householder bidiagonalization, explicit accumulation of the left and right
/// transformations, then implicit Wilkinson-shift QR sweeps on the bidiagonal.
/// Rotations are recorded and replayed on `u` and `v` in row-blocked batches.
fn golub_kahan(a: &Matrix) -> Result<SvdTriple> {
    let (m, n) = a.shape();
    debug_assert!(m >= n && n > 0);
    let mut a = a.clone().into_vec();
    let at = |i: usize, j: usize| i + j * m;
    let mut s = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut u = vec![0.0; m * n];
    let mut v = vec![0.0; n * n];
    let mut work = vec![0.0; m];

    let nct = (m - 1).min(n);
    let nrt = n.saturating_sub(2).min(m);
    for k in 0..nct.max(nrt) {
        if k < nct {
            let col = &mut a[at(k, k)..at(m, k)];
            let mut nrm = norm2(col);
            if nrm != 0.0 {
                if col[0] < 0.0 {
                    nrm = -nrm;
                }
                col.iter_mut().for_each(|x| *x /= nrm);
                col[0] += 1.0;
            }
            s[k] = -nrm;
        }
        for j in k + 1..n {
            if k < nct && s[k] != 0.0 {
                let (left, right) = a.split_at_mut(at(0, j));
                let hk = &left[at(k, k)..at(m, k)];
                let cj = &mut right[k..m];
                let t = -dot(hk, cj) / hk[0];
                for (c, h) in cj.iter_mut().zip(hk) {
                    *c += t * h;
                }
            }
            e[j] = a[at(k, j)];
        }
        if k < nct {
            u[at(k, k)..at(m, k)].copy_from_slice(&a[at(k, k)..at(m, k)]);
        }
        if k < nrt {
            let mut nrm = norm2(&e[k + 1..n]);
            if nrm != 0.0 {
                if e[k + 1] < 0.0 {
                    nrm = -nrm;
                }
                e[k + 1..n].iter_mut().for_each(|x| *x /= nrm);
                e[k + 1] += 1.0;
            }
            e[k] = -nrm;
            if k + 1 < m && e[k] != 0.0 {
                work[k + 1..m].iter_mut().for_each(|w| *w = 0.0);
                for j in k + 1..n {
                    let ej = e[j];
                    for (w, x) in work[k + 1..m].iter_mut().zip(&a[at(k + 1, j)..at(m, j)]) {
                        *w += ej * x;
                    }
                }
                for j in k + 1..n {
                    let t = -e[j] / e[k + 1];
                    for (x, w) in a[at(k + 1, j)..at(m, j)].iter_mut().zip(&work[k + 1..m]) {
                        *x += t * w;
                    }
                }
            }
            for i in k + 1..n {
                v[i + k * n] = e[i];
            }
        }
    }

    // Final bidiagonal of order p = n.
    let mut p = n;
    if nct < n {
        s[nct] = a[at(nct, nct)];
    }
    if nrt + 1 < p {
        e[nrt] = a[at(nrt, p - 1)];
    }
    e[p - 1] = 0.0;

    // Generate U.
    for j in nct..n {
        u[at(0, j)..at(m, j)].iter_mut().for_each(|x| *x = 0.0);
        u[at(j, j)] = 1.0;
    }
    for k in (0..nct).rev() {
        if s[k] != 0.0 {
            for j in k + 1..n {
                let (left, right) = u.split_at_mut(at(0, j));
                let hk = &left[at(k, k)..at(m, k)];
                let cj = &mut right[k..m];
                let t = -dot(hk, cj) / hk[0];
                for (c, h) in cj.iter_mut().zip(hk) {
                    *c += t * h;
                }
            }
            u[at(k, k)..at(m, k)].iter_mut().for_each(|x| *x = -*x);
            u[at(k, k)] += 1.0;
            u[at(0, k)..at(k, k)].iter_mut().for_each(|x| *x = 0.0);
        } else {
            u[at(0, k)..at(m, k)].iter_mut().for_each(|x| *x = 0.0);
            u[at(k, k)] = 1.0;
        }
    }

    // Generate V.
    for k in (0..n).rev() {
        if k < nrt && e[k] != 0.0 {
            for j in k + 1..n {
                let (left, right) = v.split_at_mut(j * n);
                let hk = &left[k * n + k + 1..(k + 1) * n];
                let cj = &mut right[k + 1..n];
                let t = -dot(hk, cj) / hk[0];
                for (c, h) in cj.iter_mut().zip(hk) {
                    *c += t * h;
                }
            }
        }
        v[k * n..(k + 1) * n].iter_mut().for_each(|x| *x = 0.0);
        v[k * n + k] = 1.0;
    }

    // Implicit QR on the bidiagonal (s, e).
    let eps = f64::EPSILON;
    let tiny = 2f64.powi(-966);
    let max_steps = 100 * n;
    let mut steps = 0;
    let mut ops_u = ColumnOps::new(m);
    let mut ops_v = ColumnOps::new(n);

    while p > 0 {
        // Find the largest k < p-1 with negligible e[k] (None means k = -1).
        let mut k = None;
        for kk in (0..p - 1).rev() {
            if e[kk].abs() <= tiny + eps * (s[kk].abs() + s[kk + 1].abs()) {
                e[kk] = 0.0;
                k = Some(kk);
                break;
            }
        }
        enum Case {
            DeflateLast,
            Split,
            QrStep,
            Converged,
        }
        let (case, start) = if p == 1 || k == Some(p - 2) {
            (Case::Converged, p - 1)
        } else {
            // Look for a negligible s[ks] with k < ks ≤ p-1.
            let lo = k.map_or(0, |k| k + 1);
            let mut found = None;
            for ks in (lo..p).rev() {
                let t = (if ks != p { e[ks].abs() } else { 0.0 })
                    + (if ks != lo { e[ks - 1].abs() } else { 0.0 });
                if s[ks].abs() <= tiny + eps * t {
                    s[ks] = 0.0;
                    found = Some(ks);
                    break;
                }
            }
            match found {
                None => (Case::QrStep, lo),
                Some(ks) if ks == p - 1 => (Case::DeflateLast, lo),
                Some(ks) => (Case::Split, ks + 1),
            }
        };
        let k = start;

        match case {
            Case::DeflateLast => {
                let mut f = e[p - 2];
                e[p - 2] = 0.0;
                for j in (k..=p - 2).rev() {
                    let t = s[j].hypot(f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    if j != k {
                        f = -sn * e[j - 1];
                        e[j - 1] *= cs;
                    }
                    ops_v.push(&mut v, ColumnOp::Rotate { j, l: p - 1, cs, sn });
                }
            }
            Case::Split => {
                let mut f = e[k - 1];
                e[k - 1] = 0.0;
                for j in k..p {
                    let t = s[j].hypot(f);
                    let cs = s[j] / t;
                    let sn = f / t;
                    s[j] = t;
                    f = -sn * e[j];
                    e[j] *= cs;
                    ops_u.push(&mut u, ColumnOp::Rotate { j, l: k - 1, cs, sn });
                }
            }
            Case::QrStep => {
                let scale = s[p - 1]
                    .abs()
                    .max(s[p - 2].abs())
                    .max(e[p - 2].abs())
                    .max(s[k].abs())
                    .max(e[k].abs());
                let sp = s[p - 1] / scale;
                let spm1 = s[p - 2] / scale;
                let epm1 = e[p - 2] / scale;
                let sk = s[k] / scale;
                let ek = e[k] / scale;
                let b = ((spm1 + sp) * (spm1 - sp) + epm1 * epm1) / 2.0;
                let c = (sp * epm1) * (sp * epm1);
                let mut shift = 0.0;
                if b != 0.0 || c != 0.0 {
                    shift = (b * b + c).sqrt();
                    if b < 0.0 {
                        shift = -shift;
                    }
                    shift = c / (b + shift);
                }
                let mut f = (sk + sp) * (sk - sp) + shift;
                let mut g = sk * ek;
                let len = p - 1 - k;
                let mut cs_v = Vec::with_capacity(len);
                let mut sn_v = Vec::with_capacity(len);
                let mut cs_u = Vec::with_capacity(len);
                let mut sn_u = Vec::with_capacity(len);
                for j in k..p - 1 {
                    let t = f.hypot(g);
                    let cs = f / t;
                    let sn = g / t;
                    if j != k {
                        e[j - 1] = t;
                    }
                    f = cs * s[j] + sn * e[j];
                    e[j] = cs * e[j] - sn * s[j];
                    g = sn * s[j + 1];
                    s[j + 1] *= cs;
                    cs_v.push(cs);
                    sn_v.push(sn);

                    let t = f.hypot(g);
                    let cs = f / t;
                    let sn = g / t;
                    s[j] = t;
                    f = cs * e[j] + sn * s[j + 1];
                    s[j + 1] = -sn * e[j] + cs * s[j + 1];
                    g = sn * e[j + 1];
                    e[j + 1] *= cs;
                    cs_u.push(cs);
                    sn_u.push(sn);
                }
                e[p - 2] = f;
                ops_v.push(&mut v, ColumnOp::Chain { first: k, cs: cs_v, sn: sn_v });
                ops_u.push(&mut u, ColumnOp::Chain { first: k, cs: cs_u, sn: sn_u });
                steps += 1;
                if steps > max_steps || !f.is_finite() {
                    return Err(Error::ConvergenceFailure { iterations: steps });
                }
            }
            Case::Converged => {
                if s[k] <= 0.0 {
                    s[k] = if s[k] < 0.0 { -s[k] } else { 0.0 };
                    ops_v.push(&mut v, ColumnOp::Negate(k));
                }
                let mut k = k;
                while k + 1 < n && s[k] < s[k + 1] {
                    s.swap(k, k + 1);
                    ops_v.push(&mut v, ColumnOp::Swap(k, k + 1));
                    ops_u.push(&mut u, ColumnOp::Swap(k, k + 1));
                    k += 1;
                }
                p -= 1;
            }
        }
    }

    ops_u.flush(&mut u);
    ops_v.flush(&mut v);
    Ok(SvdTriple {
        u: Matrix::from_raw(m, n, u),
        sigma: s,
        v: Matrix::from_raw(n, n, v),
    })
}

/// Column operations on a factor matrix, queued and replayed one row block at
/// a time so that several QR sweeps share a single pass over memory. Every
/// entry sees the same operations in the same order as with eager application.
struct ColumnOps {
    rows: usize,
    ops: Vec<ColumnOp>,
    pending_chains: usize,
}

enum ColumnOp {
    /// Rotation `t` acts on columns `first + t` and `first + t + 1`.
    Chain { first: usize, cs: Vec<f64>, sn: Vec<f64> },
    /// `col_j ← cs·col_j + sn·col_l`, `col_l ← −sn·col_j + cs·col_l`.
    Rotate { j: usize, l: usize, cs: f64, sn: f64 },
    Negate(usize),
    Swap(usize, usize),
}

/// Sweeps buffered before the factor is touched.
const MAX_PENDING_CHAINS: usize = 24;

impl ColumnOps {
    fn new(rows: usize) -> Self {
        Self {
            rows,
            ops: Vec::new(),
            pending_chains: 0,
        }
    }

    fn push(&mut self, data: &mut [f64], op: ColumnOp) {
        if matches!(op, ColumnOp::Chain { .. }) {
            self.pending_chains += 1;
        }
        self.ops.push(op);
        if self.pending_chains >= MAX_PENDING_CHAINS {
            self.flush(data);
        }
    }

    fn flush(&mut self, data: &mut [f64]) {
        if self.ops.is_empty() {
            return;
        }
        let rows = self.rows;
        let cols = data.len() / rows.max(1);
        // One row block across all columns stays around 512 KiB.
        let block = (64 * 1024 / cols.max(1)).clamp(8, 1024);
        let mut r0 = 0;
        while r0 < rows {
            let r1 = (r0 + block).min(rows);
            for op in &self.ops {
                match op {
                    ColumnOp::Chain { first, cs, sn } => {
                        for (t, (&c, &s)) in cs.iter().zip(sn).enumerate() {
                            let (x, y) = two_cols(data, rows, first + t, first + t + 1);
                            rotate_slices(&mut x[r0..r1], &mut y[r0..r1], c, s);
                        }
                    }
                    &ColumnOp::Rotate { j, l, cs, sn } => {
                        let (x, y) = two_cols(data, rows, j, l);
                        rotate_slices(&mut x[r0..r1], &mut y[r0..r1], cs, sn);
                    }
                    &ColumnOp::Negate(j) => {
                        data[j * rows + r0..j * rows + r1]
                            .iter_mut()
                            .for_each(|x| *x = -*x);
                    }
                    &ColumnOp::Swap(j, l) => {
                        let (x, y) = two_cols(data, rows, j, l);
                        x[r0..r1].swap_with_slice(&mut y[r0..r1]);
                    }
                }
            }
            r0 = r1;
        }
        self.ops.clear();
        self.pending_chains = 0;
    }
}

#[inline]
fn rotate_slices(x: &mut [f64], y: &mut [f64], cs: f64, sn: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let t = cs * *xi + sn * *yi;
        *yi = -sn * *xi + cs * *yi;
        *xi = t;
    }
}

fn two_cols(data: &mut [f64], rows: usize, j: usize, l: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert_ne!(j, l);
    if j < l {
        let (left, right) = data.split_at_mut(l * rows);
        (&mut left[j * rows..(j + 1) * rows], &mut right[..rows])
    } else {
        let (left, right) = data.split_at_mut(j * rows);
        (&mut right[..rows], &mut left[l * rows..(l + 1) * rows])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        Matrix::from_fn(rows, cols, |_, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
    }

    fn orthonormality_defect(q: &Matrix) -> f64 {
        let g = q.t_matmul(q).unwrap();
        g.sub(&Matrix::identity(q.cols())).unwrap().frobenius_norm()
    }

    fn check(a: &Matrix) {
        let t = svd(a).unwrap();
        let p = a.rows().min(a.cols());
        assert_eq!(t.u.shape(), (a.rows(), p));
        assert_eq!(t.v.shape(), (a.cols(), p));
        assert!(orthonormality_defect(&t.u) <= 1e-10 * p as f64);
        assert!(orthonormality_defect(&t.v) <= 1e-10 * p as f64);
        assert!(t.sigma.windows(2).all(|w| w[0] >= w[1]));
        assert!(t.sigma.iter().all(|&s| s >= 0.0));
        let err = a.sub(&t.reconstruct()).unwrap().frobenius_norm();
        assert!(err <= 1e-10 * a.frobenius_norm().max(f64::MIN_POSITIVE), "err {err}");
    }

    #[test]
    fn diagonal_example() {
        let t = svd(&Matrix::from_diag(&[3.0, 1.0])).unwrap();
        assert_eq!(t.sigma, vec![3.0, 1.0]);
        assert_eq!(t.u, Matrix::identity(2));
        assert_eq!(t.v, Matrix::identity(2));
    }

    #[test]
    fn permutation_example() {
        let t = svd(&Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert!((t.sigma[0] - 1.0).abs() < 1e-15 && (t.sigma[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rank_one_ones() {
        let a = Matrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let t = svd(&a).unwrap();
        assert!((t.sigma[0] - 2.0).abs() < 1e-14);
        assert!(t.sigma[1].abs() < 1e-14);
        assert!(orthonormality_defect(&t.u) < 1e-14);
        let t1 = truncated_svd(&a, 1).unwrap();
        assert!(a.sub(&t1.reconstruct()).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn truncated_examples() {
        let t = truncated_svd(&Matrix::from_diag(&[3.0, 1.0]), 1).unwrap();
        assert_eq!(t.sigma, vec![3.0]);
        assert_eq!(t.u, Matrix::column_vector(&[1.0, 0.0]));
        assert_eq!(t.v, Matrix::column_vector(&[1.0, 0.0]));
        let a = lcg_matrix(5, 3, 9);
        assert_eq!(truncated_svd(&a, 3).unwrap(), svd(&a).unwrap());
        assert_eq!(
            truncated_svd(&a, 4),
            Err(Error::RankOutOfRange { rank: 4, max: 3, mode: None })
        );
        assert!(truncated_svd(&a, 0).is_err());
    }

    #[test]
    fn zero_matrix_gets_orthonormal_factors() {
        for (m, n) in [(3, 3), (4, 2), (2, 5), (40, 35)] {
            let t = svd(&Matrix::zeros(m, n)).unwrap();
            assert!(t.sigma.iter().all(|&s| s == 0.0));
            assert!(orthonormality_defect(&t.u) < 1e-14);
            assert!(orthonormality_defect(&t.v) < 1e-14);
        }
    }

    #[test]
    fn both_kernels_on_assorted_shapes() {
        for (seed, (m, n)) in [(1, 6), (6, 1), (7, 7), (50, 20), (20, 50), (33, 33), (80, 45), (45, 80), (120, 120)]
            .into_iter()
            .enumerate()
        {
            check(&lcg_matrix(m, n, seed as u64));
        }
    }

    #[test]
    fn rank_deficient_large() {
        // Rank 3 product exercising the split/deflation branches of the QR kernel.
        let a = lcg_matrix(60, 3, 4).matmul(&lcg_matrix(3, 50, 5)).unwrap();
        check(&a);
        let t = svd(&a).unwrap();
        assert!(t.sigma[3] <= 1e-12 * t.sigma[0]);
        let mut graded = lcg_matrix(40, 40, 8);
        for j in 0..40 {
            let scale = 10f64.powi(-(j as i32) / 4);
            graded.col_mut(j).iter_mut().for_each(|x| *x *= scale);
        }
        check(&graded);
    }

    #[test]
    fn sign_convention_holds() {
        let t = svd(&lcg_matrix(10, 7, 3)).unwrap();
        for j in 0..7 {
            let col = t.u.col(j);
            let max = col.iter().cloned().fold(0.0_f64, |m, x| m.max(x.abs()));
            let first = col.iter().position(|x| x.abs() == max).unwrap();
            assert!(col[first] > 0.0);
        }
    }

    #[test]
    fn completion_is_orthogonal() {
        let t = svd(&lcg_matrix(9, 4, 11)).unwrap();
        let full = complete_orthonormal_basis(&t.u);
        assert_eq!(full.shape(), (9, 9));
        assert_eq!(full.leading_columns(4), t.u);
        assert!(orthonormality_defect(&full) < 1e-13);
    }
}

//! Dense order-d tensors, the multi-index linearization, modal unfoldings and
//! the conventional mode-k product.
//!
//! Element `(i₁,…,i_d)` is stored at linear position
//! `⟨i⟩ = i₁ + Σ_{α≥2} (i_α − 1)·n₁⋯n_{α−1}` (1-based), i.e. first mode fastest.
//! With this layout `vec` is the identity on storage and the column index of a
//! mode-k unfolding is the same linearization applied to the remaining modes.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    /// Validates dims (at least one mode, all positive), length and finiteness.
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let n = checked_numel(&dims)?;
        if data.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "dims {dims:?} need {n} entries, got {}",
                data.len()
            )));
        }
        if let Some(offset) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { offset });
        }
        Ok(Self { dims, data })
    }

    pub(crate) fn from_raw(dims: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        Self { dims, data }
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let n = checked_numel(dims)?;
        Ok(Self::from_raw(dims.to_vec(), vec![0.0; n]))
    }

    /// Fills entries in storage order; `f` receives the 0-based index tuple.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let n = checked_numel(dims)?;
        let mut idx = vec![0usize; dims.len()];
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f(&idx));
            for (k, i) in idx.iter_mut().enumerate() {
                *i += 1;
                if *i < dims[k] {
                    break;
                }
                *i = 0;
            }
        }
        Ok(Self::from_raw(dims.to_vec(), data))
    }

    /// Views a matrix as an order-2 tensor; storage is shared verbatim.
    pub fn from_matrix(m: Matrix) -> Self {
        let (r, c) = m.shape();
        Self::from_raw(vec![r, c], m.into_vec())
    }

    /// Order-2 tensor back to a matrix.
    pub fn into_matrix(self) -> Result<Matrix> {
        if self.dims.len() != 2 {
            return Err(Error::ShapeMismatch(format!(
                "expected an order-2 tensor, got dims {:?}",
                self.dims
            )));
        }
        Ok(Matrix::from_raw(self.dims[0], self.dims[1], self.data))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Entry at a 0-based index tuple.
    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut pos = 0;
        let mut stride = 1;
        for (&i, &n) in idx.iter().zip(&self.dims) {
            debug_assert!(i < n);
            pos += i * stride;
            stride *= n;
        }
        self.data[pos]
    }

    pub fn frobenius_norm(&self) -> f64 {
        crate::linalg::norm2(&self.data)
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch(format!(
                "dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(Self::from_raw(
            self.dims.clone(),
            self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn scaled(&self, alpha: f64) -> DenseTensor {
        Self::from_raw(self.dims.clone(), self.data.iter().map(|x| alpha * x).collect())
    }

    fn check_mode(&self, k: usize) -> Result<()> {
        check_mode(k, self.order())
    }
}

fn check_mode(k: usize, order: usize) -> Result<()> {
    if k == 0 || k > order {
        return Err(Error::ModeOutOfRange { mode: k, order });
    }
    Ok(())
}

pub(crate) fn checked_numel(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument("a tensor needs at least one mode".into()));
    }
    if let Some(k) = dims.iter().position(|&n| n == 0) {
        return Err(Error::InvalidArgument(format!("mode {} has size 0", k + 1)));
    }
    dims.iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or(Error::DimensionOverflow)
}

/// Sizes of the modes before, at, and after mode `k` (1-based).
fn split_dims(dims: &[usize], k: usize) -> (usize, usize, usize) {
    let left = dims[..k - 1].iter().product();
    let right = dims[k..].iter().product();
    (left, dims[k - 1], right)
}

/// 1-based linear position of the 1-based multi-index `i` in a tensor of shape `dims`.
pub fn multi_index(dims: &[usize], i: &[usize]) -> Result<usize> {
    if dims.len() != i.len() {
        return Err(Error::ShapeMismatch(format!(
            "multi-index of length {} for an order-{} tensor",
            i.len(),
            dims.len()
        )));
    }
    let mut pos = 0usize;
    let mut stride = 1usize;
    for (k, (&ik, &nk)) in i.iter().zip(dims).enumerate() {
        if ik == 0 || ik > nk {
            return Err(Error::IndexOutOfRange {
                mode: k + 1,
                index: ik,
                size: nk,
            });
        }
        pos += (ik - 1) * stride;
        stride = stride.checked_mul(nk).ok_or(Error::DimensionOverflow)?;
    }
    Ok(pos + 1)
}

/// Mode-k unfolding: an `n_k × (n/n_k)` matrix whose columns are the mode-k
/// fibers, column `⟨i₋k⟩` holding the fiber at the remaining indices.
pub fn unfold(t: &DenseTensor, k: usize) -> Result<Matrix> {
    t.check_mode(k)?;
    let (left, nk, right) = split_dims(&t.dims, k);
    let cols = left * right;
    if left == 1 {
        return Ok(Matrix::from_raw(nk, cols, t.data.clone()));
    }
    let mut out = vec![0.0; t.data.len()];
    for b in 0..right {
        for i in 0..nk {
            let src = &t.data[(i + b * nk) * left..(i + b * nk + 1) * left];
            for (a, &x) in src.iter().enumerate() {
                out[i + (a + b * left) * nk] = x;
            }
        }
    }
    Ok(Matrix::from_raw(nk, cols, out))
}

/// Inverse of [`unfold`]: rebuilds the tensor of shape `dims` from its mode-k unfolding.
pub fn refold(m: &Matrix, k: usize, dims: &[usize]) -> Result<DenseTensor> {
    let n = checked_numel(dims)?;
    check_mode(k, dims.len())?;
    let (left, nk, right) = split_dims(dims, k);
    if m.rows() != nk || m.cols() != n / nk {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} matrix is not a mode-{k} unfolding of dims {dims:?} (expected {nk}x{})",
            m.rows(),
            m.cols(),
            n / nk
        )));
    }
    let src = m.as_slice();
    if left == 1 {
        return Ok(DenseTensor::from_raw(dims.to_vec(), src.to_vec()));
    }
    let mut out = vec![0.0; n];
    for b in 0..right {
        for i in 0..nk {
            let dst = &mut out[(i + b * nk) * left..(i + b * nk + 1) * left];
            for (a, x) in dst.iter_mut().enumerate() {
                *x = src[i + (a + b * left) * nk];
            }
        }
    }
    Ok(DenseTensor::from_raw(dims.to_vec(), out))
}

/// Vectorization; entry `⟨i⟩` is the tensor entry at multi-index `i`.
pub fn vec(t: &DenseTensor) -> Vec<f64> {
    t.data.clone()
}

/// Conventional mode-k product `t ×_k u`, defined by `(t ×_k u)₍k₎ = u · t₍k₎`.
pub fn mode_product(t: &DenseTensor, k: usize, u: &Matrix) -> Result<DenseTensor> {
    t.check_mode(k)?;
    let nk = t.dims[k - 1];
    if u.cols() != nk {
        return Err(Error::ShapeMismatch(format!(
            "mode-{k} product needs a matrix with {nk} columns, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    let product = u.matmul(&unfold(t, k)?)?;
    let mut dims = t.dims.clone();
    dims[k - 1] = u.rows();
    refold(&product, k, &dims)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq_tensor(dims: &[usize]) -> DenseTensor {
        let n = dims.iter().product::<usize>();
        DenseTensor::new(dims.to_vec(), (1..=n).map(|x| x as f64).collect()).unwrap()
    }

    #[test]
    fn multi_index_examples() {
        assert_eq!(multi_index(&[2, 3, 4], &[1, 1, 1]), Ok(1));
        assert_eq!(multi_index(&[2, 3, 4], &[2, 3, 4]), Ok(24));
        assert_eq!(multi_index(&[2, 3, 4], &[1, 2, 3]), Ok(15));
        assert_eq!(
            multi_index(&[2, 3, 4], &[1, 4, 1]),
            Err(Error::IndexOutOfRange { mode: 2, index: 4, size: 3 })
        );
        assert!(matches!(
            multi_index(&[2, 3, 4], &[0, 1, 1]),
            Err(Error::IndexOutOfRange { mode: 1, .. })
        ));
    }

    #[test]
    fn multi_index_is_a_bijection() {
        let dims = [3, 5, 4, 7, 2];
        let n: usize = dims.iter().product();
        let mut seen = vec![false; n];
        let t = DenseTensor::from_fn(&dims, |_| 0.0).unwrap();
        let mut idx = vec![1usize; dims.len()];
        for _ in 0..n {
            let pos = multi_index(&dims, &idx).unwrap();
            assert!((1..=n).contains(&pos));
            assert!(!seen[pos - 1]);
            seen[pos - 1] = true;
            for (k, i) in idx.iter_mut().enumerate() {
                *i += 1;
                if *i <= dims[k] {
                    break;
                }
                *i = 1;
            }
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(t.len(), n);
    }

    #[test]
    fn unfold_matrix_case() {
        let a = Matrix::from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let t = DenseTensor::from_matrix(a.clone());
        assert_eq!(unfold(&t, 1).unwrap(), a);
        assert_eq!(unfold(&t, 2).unwrap(), a.transpose());
    }

    #[test]
    fn unfold_cube_examples() {
        let t = seq_tensor(&[2, 2, 2]);
        assert_eq!(
            unfold(&t, 1).unwrap(),
            Matrix::from_rows(&[&[1.0, 3.0, 5.0, 7.0], &[2.0, 4.0, 6.0, 8.0]])
        );
        assert_eq!(
            unfold(&t, 3).unwrap(),
            Matrix::from_rows(&[&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0, 7.0, 8.0]])
        );
        assert_eq!(
            unfold(&t, 2).unwrap(),
            Matrix::from_rows(&[&[1.0, 2.0, 5.0, 6.0], &[3.0, 4.0, 7.0, 8.0]])
        );
        assert_eq!(unfold(&t, 4), Err(Error::ModeOutOfRange { mode: 4, order: 3 }));
        assert_eq!(unfold(&t, 0), Err(Error::ModeOutOfRange { mode: 0, order: 3 }));
    }

    #[test]
    fn unfold_matches_definition() {
        // Entry (i_k, ⟨i₋k⟩) of the unfolding equals t(i), checked via multi_index.
        let dims = [3, 2, 4, 2];
        let t = DenseTensor::from_fn(&dims, |i| {
            i.iter().enumerate().map(|(k, &x)| (x as f64 + 1.0) * 10f64.powi(k as i32)).sum()
        })
        .unwrap();
        for k in 1..=dims.len() {
            let m = unfold(&t, k).unwrap();
            let rest: Vec<usize> = dims.iter().enumerate().filter(|&(a, _)| a + 1 != k).map(|(_, &n)| n).collect();
            DenseTensor::from_fn(&dims, |idx| {
                let one_based: Vec<usize> = idx.iter().map(|x| x + 1).collect();
                let minus: Vec<usize> = one_based.iter().enumerate().filter(|&(a, _)| a + 1 != k).map(|(_, &x)| x).collect();
                let col = multi_index(&rest, &minus).unwrap() - 1;
                assert_eq!(m[(idx[k - 1], col)], t.get(idx));
                0.0
            })
            .unwrap();
        }
    }

    #[test]
    fn refold_examples() {
        let t = seq_tensor(&[2, 2, 2]);
        let m = Matrix::from_rows(&[&[1.0, 3.0, 5.0, 7.0], &[2.0, 4.0, 6.0, 8.0]]);
        assert_eq!(refold(&m, 1, &[2, 2, 2]).unwrap(), t);
        assert_eq!(
            refold(&Matrix::zeros(3, 8), 2, &[2, 3, 4]).unwrap(),
            DenseTensor::zeros(&[2, 3, 4]).unwrap()
        );
        assert!(matches!(refold(&m, 2, &[2, 2, 3]), Err(Error::ShapeMismatch(_))));
        for k in 1..=4 {
            let t = seq_tensor(&[3, 1, 4, 2]);
            assert_eq!(refold(&unfold(&t, k).unwrap(), k, t.dims()).unwrap(), t);
        }
    }

    #[test]
    fn vec_examples() {
        assert_eq!(vec(&DenseTensor::zeros(&[2, 3]).unwrap()), vec![0.0; 6]);
        let m = Matrix::from_rows(&[&[1.0, 3.0], &[2.0, 4.0]]);
        assert_eq!(vec(&DenseTensor::from_matrix(m)), vec![1.0, 2.0, 3.0, 4.0]);
        let u = Matrix::from_fn(3, 4, |i, j| (i * 7 + j * 3) as f64);
        let t = refold(&u, 1, &[3, 2, 2]).unwrap();
        assert_eq!(vec(&t), u.as_slice().to_vec());
    }

    #[test]
    fn mode_product_examples() {
        let t = seq_tensor(&[2, 3, 4]);
        for k in 1..=3 {
            let nk = t.dims()[k - 1];
            assert_eq!(mode_product(&t, k, &Matrix::identity(nk)).unwrap(), t);
            let doubled = mode_product(&t, k, &Matrix::identity(nk).scaled(2.0)).unwrap();
            assert_eq!(doubled, t.scaled(2.0));
        }
        let a = Matrix::from_fn(3, 2, |i, j| (i + 3 * j) as f64 - 1.5);
        let u = Matrix::from_fn(4, 3, |i, j| (i * j) as f64 + 0.25);
        let v = Matrix::from_fn(5, 2, |i, j| i as f64 - j as f64);
        let at = DenseTensor::from_matrix(a.clone());
        assert_eq!(
            mode_product(&at, 1, &u).unwrap().into_matrix().unwrap(),
            u.matmul(&a).unwrap()
        );
        assert_eq!(
            mode_product(&at, 2, &v).unwrap().into_matrix().unwrap(),
            a.matmul_t(&v).unwrap()
        );
        assert!(matches!(mode_product(&at, 1, &v), Err(Error::ShapeMismatch(_))));
    }
}

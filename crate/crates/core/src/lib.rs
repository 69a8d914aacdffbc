//! Dense matrix and tensor kernels plus the semi-tensor-product (STP) Tucker-like
//! decompositions built on them.
//!
//! Layout conventions: matrices are column-major, tensors use the
//! first-mode-fastest linearization, so a tensor's storage order is its
//! vectorization and a mode-k unfolding is pure index arithmetic.
//!
//! Tensor modes are 1-based (`unfold(&t, 1)` is the mode-1 unfolding), element
//! offsets into `Matrix` and `DenseTensor` are 0-based.

pub mod decomp;
pub mod error;
pub mod linalg;
pub mod nkp;
pub mod stp;
pub mod tensor;

pub use error::{Error, Result};
pub use linalg::{frobenius, kron, svd, truncated_svd, Matrix, SvdTriple};
pub use tensor::DenseTensor;

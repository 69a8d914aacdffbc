//! Approximation quality: relative error, and PSNR/SSIM on 8-bit quantized images.

use serde::Serialize;
use stpt_core::{Error, Matrix, Result};

use crate::pgm::quantize;

pub const SSIM_WINDOW: usize = 8;
const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    /// `‖a − b‖_F / ‖a‖_F` on the unquantized values.
    pub relative_error: f64,
    /// The same ratio after both inputs are quantized to 8 bits.
    pub quantized_relative_error: f64,
    pub psnr_db: f64,
    pub ssim: f64,
    pub elapsed_seconds: f64,
    pub storage_original: u64,
    pub storage_factors: u64,
}

pub fn relative_error(a: &Matrix, b: &Matrix) -> Result<f64> {
    let diff = a.sub(b)?.frobenius_norm();
    let norm = a.frobenius_norm();
    Ok(if norm == 0.0 {
        if diff == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        diff / norm
    })
}

fn quantized(m: &Matrix) -> Matrix {
    Matrix::from_fn(m.rows(), m.cols(), |i, j| f64::from(quantize(m[(i, j)])))
}

fn check_shapes(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

/// `20·log₁₀(255/√MSE)` over the 8-bit images; `+∞` when they coincide.
pub fn psnr(a: &Matrix, b: &Matrix) -> Result<f64> {
    check_shapes(a, b)?;
    let (qa, qb) = (quantized(a), quantized(b));
    let sq = qa.sub(&qb)?.frobenius_norm().powi(2);
    let mse = sq / a.len() as f64;
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        20.0 * (255.0 / mse.sqrt()).log10()
    })
}

/// Mean SSIM over non-overlapping 8×8 windows of the 8-bit images. Windows at the
/// right and bottom edges are clipped to the image.
pub fn ssim(a: &Matrix, b: &Matrix) -> Result<f64> {
    check_shapes(a, b)?;
    let (qa, qb) = (quantized(a), quantized(b));
    let (rows, cols) = a.shape();
    let mut total = 0.0;
    let mut windows = 0usize;
    for i0 in (0..rows).step_by(SSIM_WINDOW) {
        for j0 in (0..cols).step_by(SSIM_WINDOW) {
            let h = SSIM_WINDOW.min(rows - i0);
            let w = SSIM_WINDOW.min(cols - j0);
            let n = (h * w) as f64;
            let cells = || (j0..j0 + w).flat_map(move |j| (i0..i0 + h).map(move |i| (i, j)));
            let mu_a = cells().map(|(i, j)| qa[(i, j)]).sum::<f64>() / n;
            let mu_b = cells().map(|(i, j)| qb[(i, j)]).sum::<f64>() / n;
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for (i, j) in cells() {
                let (x, y) = (qa[(i, j)] - mu_a, qb[(i, j)] - mu_b);
                va += x * x;
                vb += y * y;
                cov += x * y;
            }
            let (va, vb, cov) = (va / n, vb / n, cov / n);
            total += ((2.0 * mu_a * mu_b + C1) * (2.0 * cov + C2))
                / ((mu_a * mu_a + mu_b * mu_b + C1) * (va + vb + C2));
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}

/// Quality of `approx` against `original`; timing and storage fields are left for
/// the caller (zero time, both storages equal to the element count).
pub fn metrics(original: &Matrix, approx: &Matrix) -> Result<MetricsReport> {
    check_shapes(original, approx)?;
    Ok(MetricsReport {
        relative_error: relative_error(original, approx)?,
        quantized_relative_error: relative_error(&quantized(original), &quantized(approx))?,
        psnr_db: psnr(original, approx)?,
        ssim: ssim(original, approx)?,
        elapsed_seconds: 0.0,
        storage_original: original.len() as u64,
        storage_factors: approx.len() as u64,
    })
}

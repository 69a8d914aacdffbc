//! Binary tensor files.
//!
//! Layout: `"STPT"`, version byte `1`, dtype byte `1` (f64 LE), order as u32 LE,
//! `order` dims as u32 LE, then the entries as f64 LE, first mode fastest.

use std::fs;
use std::path::Path;

use stpt_core::{DenseTensor, Matrix};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"STPT";
pub const VERSION: u8 = 1;
pub const DTYPE_F64: u8 = 1;

#[derive(Debug, Error)]
pub enum TensorFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("non-finite value at element {index}")]
    NonFinite { index: usize },
}

fn format_err(offset: usize, message: impl Into<String>) -> TensorFileError {
    TensorFileError::Format {
        offset,
        message: message.into(),
    }
}

pub fn encode(t: &DenseTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(10 + 4 * t.order() + 8 * t.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(DTYPE_F64);
    out.extend_from_slice(&(t.order() as u32).to_le_bytes());
    for &d in t.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for x in t.as_slice() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<DenseTensor, TensorFileError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(format_err(0, "bad magic"));
    }
    match bytes.get(4) {
        Some(&VERSION) => {}
        Some(v) => return Err(format_err(4, format!("unsupported version {v}"))),
        None => return Err(format_err(4, "missing version")),
    }
    match bytes.get(5) {
        Some(&DTYPE_F64) => {}
        Some(v) => return Err(format_err(5, format!("unsupported dtype {v}"))),
        None => return Err(format_err(5, "missing dtype")),
    }
    let word = |offset: usize| -> Result<usize, TensorFileError> {
        bytes
            .get(offset..offset + 4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()) as usize)
            .ok_or_else(|| format_err(offset, "header ends early"))
    };
    let order = word(6)?;
    if order == 0 {
        return Err(format_err(6, "order must be positive"));
    }
    let mut dims = Vec::with_capacity(order);
    for k in 0..order {
        let offset = 10 + 4 * k;
        let d = word(offset)?;
        if d == 0 {
            return Err(format_err(offset, "zero dimension"));
        }
        dims.push(d);
    }
    let start = 10 + 4 * order;
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| format_err(10, "dimensions overflow"))?;
    let payload = &bytes[start..];
    if payload.len() < count {
        return Err(TensorFileError::Truncated {
            expected: count,
            found: payload.len(),
        });
    }
    if payload.len() > count {
        return Err(format_err(start + count, "trailing bytes after payload"));
    }
    let mut data = Vec::with_capacity(count / 8);
    for (index, chunk) in payload.chunks_exact(8).enumerate() {
        let x = f64::from_le_bytes(chunk.try_into().unwrap());
        if !x.is_finite() {
            return Err(TensorFileError::NonFinite { index });
        }
        data.push(x);
    }
    Ok(DenseTensor::new(dims, data).expect("validated above"))
}

pub fn write_tensor(t: &DenseTensor, path: impl AsRef<Path>) -> Result<(), TensorFileError> {
    fs::write(path, encode(t))?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<DenseTensor, TensorFileError> {
    decode(&fs::read(path)?)
}

pub fn write_matrix(m: &Matrix, path: impl AsRef<Path>) -> Result<(), TensorFileError> {
    write_tensor(&DenseTensor::from_matrix(m.clone()), path)
}

/// Reads an order-2 file; order-1 files are read as column vectors.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<Matrix, TensorFileError> {
    let t = read_tensor(path)?;
    match *t.dims() {
        [_] => Ok(Matrix::column_vector(t.as_slice())),
        [_, _] => Ok(t.into_matrix().expect("order 2")),
        _ => Err(format_err(6, format!("expected a matrix, found order {}", t.order()))),
    }
}

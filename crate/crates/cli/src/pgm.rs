//! Binary grayscale PGM (`P5`, maxval 255). Pixel (row y, col x) is matrix entry (y, x).

use std::fs;
use std::path::Path;

use stpt_core::Matrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("unsupported image: {0}")]
    Unsupported(String),
    #[error("malformed PGM: {0}")]
    Malformed(String),
}

/// Rounds half away from zero and clamps to `0..=255`.
pub fn quantize(x: f64) -> u8 {
    x.round().clamp(0.0, 255.0) as u8
}

pub fn decode(bytes: &[u8]) -> Result<Matrix, PgmError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(PgmError::Unsupported("only binary P5 graymaps are read".into()));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PgmError::Malformed(format!("bad header field at byte {start}")))?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(PgmError::Unsupported(format!("maxval {maxval}, expected 255")));
    }
    if width == 0 || height == 0 {
        return Err(PgmError::Malformed("empty image".into()));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(PgmError::Malformed("missing separator after header".into()));
    }
    let pixels = &bytes[pos + 1..];
    if pixels.len() < width * height {
        return Err(PgmError::Malformed(format!(
            "expected {} pixels, found {}",
            width * height,
            pixels.len()
        )));
    }
    Ok(Matrix::from_fn(height, width, |y, x| f64::from(pixels[y * width + x])))
}

pub fn encode(m: &Matrix) -> Vec<u8> {
    let (height, width) = m.shape();
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.reserve(width * height);
    for y in 0..height {
        for x in 0..width {
            out.push(quantize(m[(y, x)]));
        }
    }
    out
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<Matrix, PgmError> {
    decode(&fs::read(path)?)
}

pub fn write_pgm(m: &Matrix, path: impl AsRef<Path>) -> Result<(), PgmError> {
    fs::write(path, encode(m))?;
    Ok(())
}

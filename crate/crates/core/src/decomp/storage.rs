use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Decompositions whose factor storage is counted by [`storage_cost`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StorageKind {
    /// Rank-r SVD of an `n × n` matrix: `2nr + r`.
    Tsvd,
    /// Full SVD-STP with square `s × s` blocks: `2n²/s² + n/s + s²`.
    FsvdStp,
    /// Truncated SVD-STP: `2nr/s + r + s²`.
    TsvdStp,
    /// Truncated HOSVD of an order-d cube: `r^d + dnr`.
    Thosvd,
    /// Truncated HOSVD-STP: `(rs)^d + dnr/s`.
    ThosvdStp,
}

impl StorageKind {
    pub const ALL: [StorageKind; 5] = [
        StorageKind::Tsvd,
        StorageKind::FsvdStp,
        StorageKind::TsvdStp,
        StorageKind::Thosvd,
        StorageKind::ThosvdStp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StorageKind::Tsvd => "tsvd",
            StorageKind::FsvdStp => "fsvd_stp",
            StorageKind::TsvdStp => "tsvd_stp",
            StorageKind::Thosvd => "thosvd",
            StorageKind::ThosvdStp => "thosvd_stp",
        }
    }
}

impl fmt::Display for StorageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StorageKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown storage kind {s:?}")))
    }
}

/// Number of stored reals for the given decomposition of an `n × n` matrix
/// (`d = 2`) or an `n × ⋯ × n` order-`d` tensor. Parameters that a formula does
/// not use are ignored, except that all must be positive and `s` must divide `n`.
pub fn storage_cost(kind: StorageKind, n: u64, s: u64, r: u64, d: u32) -> Result<u64> {
    if n == 0 || s == 0 || r == 0 || d == 0 {
        return Err(Error::InvalidArgument("storage parameters must be positive".into()));
    }
    if n % s != 0 {
        return Err(Error::IncompatibleDimensions(format!("s = {s} does not divide n = {n}")));
    }
    let ns = n / s;
    let d64 = u64::from(d);
    let value = match kind {
        StorageKind::Tsvd => mul(2, mul(n, r)?)?.checked_add(r),
        StorageKind::FsvdStp => mul(2, mul(ns, ns)?)?
            .checked_add(ns)
            .and_then(|x| x.checked_add(s * s)),
        StorageKind::TsvdStp => mul(2, mul(ns, r)?)?
            .checked_add(r)
            .and_then(|x| x.checked_add(s * s)),
        StorageKind::Thosvd => r.checked_pow(d).zip(mul(d64, mul(n, r)?).ok()).and_then(|(a, b)| a.checked_add(b)),
        StorageKind::ThosvdStp => mul(r, s)?
            .checked_pow(d)
            .zip(mul(d64, mul(ns, r)?).ok())
            .and_then(|(a, b)| a.checked_add(b)),
    };
    value.ok_or(Error::DimensionOverflow)
}

fn mul(a: u64, b: u64) -> Result<u64> {
    a.checked_mul(b).ok_or(Error::DimensionOverflow)
}

/// Smallest real `n` at which truncated HOSVD-STP stores no more than truncated
/// HOSVD: `r^{d−1}·s·(s^d − 1) / (d·(s − 1))`. Requires `s > 1`.
pub fn thosvd_crossover(d: u32, s: u64, r: u64) -> Result<f64> {
    if s <= 1 || d == 0 || r == 0 {
        return Err(Error::InvalidArgument("crossover needs s > 1 and positive d, r".into()));
    }
    let (s, r, d) = (s as f64, r as f64, d as i32);
    Ok(r.powi(d - 1) * s * (s.powi(d) - 1.0) / (f64::from(d) * (s - 1.0)))
}

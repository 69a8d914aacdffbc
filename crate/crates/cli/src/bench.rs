//! Timing and accuracy comparison on uniform(0,1) random inputs.
//!
//! Inputs are drawn from a ChaCha8 stream seeded with `seed`; entries are filled
//! in storage order (first mode fastest), and successive trials continue the same
//! stream. Identical configurations therefore produce identical rows.

use std::fmt;
use std::time::Instant;

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use stpt_core::decomp::{
    hosvd_stp_with, reconstruct_hosvd, reconstruct_svd_stp, svd_stp, truncated_hosvd_stp_with,
    truncated_svd_stp, DecompConfig,
};
use stpt_core::stp::mode_stp;
use stpt_core::tensor::unfold;
use stpt_core::{truncated_svd, DenseTensor, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub r: usize,
    pub trials: usize,
    pub seed: u64,
    /// When false, `mean_seconds` is left empty so that rows are reproducible.
    pub timing: bool,
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BenchMethod {
    #[serde(rename = "FSVD-STP")]
    FsvdStp,
    #[serde(rename = "TSVD-STP")]
    TsvdStp,
    #[serde(rename = "TSVD")]
    Tsvd,
    #[serde(rename = "FHOSVD-STP")]
    FhosvdStp,
    #[serde(rename = "THOSVD-STP")]
    ThosvdStp,
    #[serde(rename = "THOSVD")]
    Thosvd,
}

impl BenchMethod {
    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::FsvdStp => "FSVD-STP",
            BenchMethod::TsvdStp => "TSVD-STP",
            BenchMethod::Tsvd => "TSVD",
            BenchMethod::FhosvdStp => "FHOSVD-STP",
            BenchMethod::ThosvdStp => "THOSVD-STP",
            BenchMethod::Thosvd => "THOSVD",
        }
    }
}

impl fmt::Display for BenchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    pub r: usize,
    pub trials: usize,
    pub seed: u64,
    pub method: BenchMethod,
    pub mean_seconds: Option<f64>,
    pub mean_relative_error: f64,
}

pub fn uniform_tensor(rng: &mut ChaCha8Rng, dims: &[usize]) -> Result<DenseTensor> {
    Ok(DenseTensor::from_fn(dims, |_| rng.gen::<f64>())?)
}

pub fn run(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    let BenchConfig { n, d, s, r, trials, .. } = *config;
    if n == 0 || s == 0 || r == 0 || trials == 0 {
        bail!("n, s, r and trials must be positive");
    }
    if d < 2 {
        bail!("d must be at least 2");
    }
    if n % s != 0 {
        return Err(stpt_core::Error::IncompatibleDimensions(format!("s = {s} does not divide n = {n}")).into());
    }
    if r > n / s {
        return Err(stpt_core::Error::RankOutOfRange { rank: r, max: n / s, mode: None }.into());
    }
    let methods: &[BenchMethod] = if d == 2 {
        &[BenchMethod::FsvdStp, BenchMethod::TsvdStp, BenchMethod::Tsvd]
    } else {
        &[BenchMethod::FhosvdStp, BenchMethod::ThosvdStp, BenchMethod::Thosvd]
    };
    let decomp = DecompConfig { threads: config.threads };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut seconds = vec![0.0; methods.len()];
    let mut errors = vec![0.0; methods.len()];
    let dims = vec![n; d];
    for _ in 0..trials {
        let t = uniform_tensor(&mut rng, &dims)?;
        let norm = t.frobenius_norm();
        for (i, &method) in methods.iter().enumerate() {
            let (elapsed, approx) = run_method(method, &t, s, r, &decomp)?;
            seconds[i] += elapsed;
            errors[i] += t.sub(&approx)?.frobenius_norm() / norm;
        }
    }
    let k = trials as f64;
    Ok(methods
        .iter()
        .enumerate()
        .map(|(i, &method)| BenchRow {
            n,
            d,
            s,
            r,
            trials,
            seed: config.seed,
            method,
            mean_seconds: config.timing.then(|| seconds[i] / k),
            mean_relative_error: errors[i] / k,
        })
        .collect())
}

/// Returns the decomposition time (reconstruction excluded) and the approximation.
fn run_method(
    method: BenchMethod,
    t: &DenseTensor,
    s: usize,
    r: usize,
    config: &DecompConfig,
) -> Result<(f64, DenseTensor)> {
    let d = t.order();
    let matrix = || t.clone().into_matrix();
    let start = Instant::now();
    Ok(match method {
        BenchMethod::FsvdStp => {
            let f = svd_stp(&matrix()?, s, s)?;
            let elapsed = start.elapsed().as_secs_f64();
            (elapsed, DenseTensor::from_matrix(reconstruct_svd_stp(&f)?))
        }
        BenchMethod::TsvdStp => {
            let f = truncated_svd_stp(&matrix()?, s, s, r)?;
            let elapsed = start.elapsed().as_secs_f64();
            (elapsed, DenseTensor::from_matrix(reconstruct_svd_stp(&f)?))
        }
        BenchMethod::Tsvd => {
            let f = truncated_svd(&matrix()?, r)?;
            let elapsed = start.elapsed().as_secs_f64();
            (elapsed, DenseTensor::from_matrix(f.reconstruct()))
        }
        BenchMethod::FhosvdStp => {
            let f = hosvd_stp_with(t, &vec![s; d], config)?;
            let elapsed = start.elapsed().as_secs_f64();
            (elapsed, reconstruct_hosvd(&f)?)
        }
        BenchMethod::ThosvdStp => {
            let f = truncated_hosvd_stp_with(t, &vec![s; d], &vec![r; d], config)?;
            let elapsed = start.elapsed().as_secs_f64();
            (elapsed, reconstruct_hosvd(&f)?)
        }
        BenchMethod::Thosvd => {
            let (core, factors) = truncated_hosvd(t, r)?;
            let elapsed = start.elapsed().as_secs_f64();
            let mut out = core;
            for (k, u) in factors.iter().enumerate() {
                out = mode_stp(&out, k + 1, u)?;
            }
            (elapsed, out)
        }
    })
}

/// Conventional truncated HOSVD with multilinear rank `(r, …, r)`.
pub fn truncated_hosvd(t: &DenseTensor, r: usize) -> Result<(DenseTensor, Vec<Matrix>)> {
    let factors = (1..=t.order())
        .map(|k| Ok(truncated_svd(&unfold(t, k)?, r)?.u))
        .collect::<Result<Vec<_>>>()?;
    let mut core = t.clone();
    for (k, u) in factors.iter().enumerate() {
        core = mode_stp(&core, k + 1, &u.transpose())?;
    }
    Ok((core, factors))
}

pub fn write_csv<W: std::io::Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

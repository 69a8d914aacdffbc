use std::thread;

use crate::error::{Error, Result};
use crate::linalg::{complete_orthonormal_basis, Matrix};
use crate::stp::mode_stp;
use crate::tensor::{unfold, DenseTensor};

use super::svd_stp::svd_stp;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecompConfig {
    /// Upper bound on worker threads for the per-mode factor computations; 0 picks
    /// the available parallelism. Results do not depend on this value.
    pub threads: usize,
}

impl Default for DecompConfig {
    fn default() -> Self {
        Self { threads: 1 }
    }
}

impl DecompConfig {
    fn worker_count(&self, jobs: usize) -> usize {
        let n = if self.threads == 0 {
            thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            self.threads
        };
        n.clamp(1, jobs.max(1))
    }
}

/// Per-mode by-products of the SVD-STP of `t₍k₎`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDiagnostics {
    /// `Σ_{i≥2} σ̃ᵢ^(k)²`.
    pub tail_energy: f64,
    /// `‖C^(k)‖_F`.
    pub c_norm: f64,
    /// All `p_k` singular values of `B^(k)`.
    pub sigma_b: Vec<f64>,
    pub near_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HosvdStpFactors {
    /// Dims `r_k·s_k`.
    pub core: DenseTensor,
    /// `U^(k)`, `(n_k/s_k) × r_k` with orthonormal columns.
    pub factors: Vec<Matrix>,
    pub s: Vec<usize>,
    pub r: Vec<usize>,
    pub modes: Vec<ModeDiagnostics>,
}

impl HosvdStpFactors {
    /// `‖S_i^(k)‖_F` for the discarded blocks `i > r_k` of every mode.
    pub fn tail_block_norms(&self) -> Vec<Vec<f64>> {
        self.modes
            .iter()
            .zip(&self.r)
            .map(|(m, &r)| m.sigma_b.iter().skip(r).map(|s| s * m.c_norm).collect())
            .collect()
    }
}

struct ModeFactor {
    u: Matrix,
    diagnostics: ModeDiagnostics,
}

/// Full HOSVD-STP. Each `U^(k)` is square, `(n_k/s_k) × (n_k/s_k)`; when
/// `p_k < n_k/s_k` the SVD-STP factor is completed to an orthogonal matrix.
pub fn hosvd_stp(t: &DenseTensor, s: &[usize]) -> Result<HosvdStpFactors> {
    hosvd_stp_with(t, s, &DecompConfig::default())
}

pub fn hosvd_stp_with(t: &DenseTensor, s: &[usize], config: &DecompConfig) -> Result<HosvdStpFactors> {
    check_factors(t, s)?;
    let modes = mode_factors(t, s, config)?;
    let mut factors = Vec::with_capacity(modes.len());
    let mut diagnostics = Vec::with_capacity(modes.len());
    for m in modes {
        factors.push(complete_orthonormal_basis(&m.u));
        diagnostics.push(m.diagnostics);
    }
    let r = factors.iter().map(Matrix::cols).collect();
    finish(t, s, r, factors, diagnostics)
}

/// Truncated HOSVD-STP with `1 ≤ r_k ≤ p_k` on every mode.
pub fn truncated_hosvd_stp(t: &DenseTensor, s: &[usize], r: &[usize]) -> Result<HosvdStpFactors> {
    truncated_hosvd_stp_with(t, s, r, &DecompConfig::default())
}

pub fn truncated_hosvd_stp_with(
    t: &DenseTensor,
    s: &[usize],
    r: &[usize],
    config: &DecompConfig,
) -> Result<HosvdStpFactors> {
    check_factors(t, s)?;
    if r.len() != t.order() {
        return Err(Error::ShapeMismatch(format!(
            "{} ranks given for an order-{} tensor",
            r.len(),
            t.order()
        )));
    }
    let total: usize = s.iter().product();
    for (k, (&rk, (&nk, &sk))) in r.iter().zip(t.dims().iter().zip(s)).enumerate() {
        let complement = t.len() / nk;
        let pk = (nk / sk).min(complement / (total / sk));
        if rk == 0 || rk > pk {
            return Err(Error::RankOutOfRange {
                rank: rk,
                max: pk,
                mode: Some(k + 1),
            });
        }
    }
    let modes = mode_factors(t, s, config)?;
    let mut factors = Vec::with_capacity(modes.len());
    let mut diagnostics = Vec::with_capacity(modes.len());
    for (m, &rk) in modes.into_iter().zip(r) {
        factors.push(m.u.leading_columns(rk));
        diagnostics.push(m.diagnostics);
    }
    finish(t, s, r.to_vec(), factors, diagnostics)
}

fn check_factors(t: &DenseTensor, s: &[usize]) -> Result<()> {
    if s.len() != t.order() {
        return Err(Error::ShapeMismatch(format!(
            "{} factors given for an order-{} tensor",
            s.len(),
            t.order()
        )));
    }
    for (k, (&nk, &sk)) in t.dims().iter().zip(s).enumerate() {
        if sk == 0 || nk % sk != 0 {
            return Err(Error::IncompatibleDimensions(format!(
                "mode {}: s = {sk} does not divide n = {nk}",
                k + 1
            )));
        }
    }
    Ok(())
}

/// SVD-STP of every unfolding of the original tensor, modes spread over workers.
fn mode_factors(t: &DenseTensor, s: &[usize], config: &DecompConfig) -> Result<Vec<ModeFactor>> {
    let d = t.order();
    let workers = config.worker_count(d);
    if workers == 1 {
        return (1..=d).map(|k| mode_factor(t, s, k)).collect();
    }
    let mut slots: Vec<Option<Result<ModeFactor>>> = (0..d).map(|_| None).collect();
    thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    (1..=d)
                        .skip(w)
                        .step_by(workers)
                        .map(|k| (k, mode_factor(t, s, k)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (k, res) in h.join().expect("mode worker panicked") {
                slots[k - 1] = Some(res);
            }
        }
    });
    slots.into_iter().map(|x| x.expect("every mode computed")).collect()
}

fn mode_factor(t: &DenseTensor, s: &[usize], k: usize) -> Result<ModeFactor> {
    let sk = s[k - 1];
    let complement: usize = s.iter().product::<usize>() / sk;
    let f = svd_stp(&unfold(t, k)?, sk, complement)?;
    Ok(ModeFactor {
        diagnostics: ModeDiagnostics {
            tail_energy: f.tail_energy,
            c_norm: f.c.frobenius_norm(),
            sigma_b: f.sigma_b,
            near_degenerate: f.near_degenerate,
        },
        u: f.u,
    })
}

fn finish(
    t: &DenseTensor,
    s: &[usize],
    r: Vec<usize>,
    factors: Vec<Matrix>,
    modes: Vec<ModeDiagnostics>,
) -> Result<HosvdStpFactors> {
    let mut core = t.clone();
    for (k, u) in factors.iter().enumerate() {
        core = mode_stp(&core, k + 1, &u.transpose())?;
    }
    Ok(HosvdStpFactors {
        core,
        factors,
        s: s.to_vec(),
        r,
        modes,
    })
}

/// `core ⋉₁ U^(1) ⋉₂ ⋯ ⋉_d U^(d)`.
pub fn reconstruct_hosvd(f: &HosvdStpFactors) -> Result<DenseTensor> {
    let mut out = f.core.clone();
    for (k, u) in f.factors.iter().enumerate() {
        out = mode_stp(&out, k + 1, u)?;
    }
    Ok(out)
}

/// `√(Σ_k Σ_{i≥2} σ̃ᵢ^(k)²) + √(Σ_k Σ_{i>r_k} ‖S_i^(k)‖_F²)`.
pub fn hosvd_error_bound(f: &HosvdStpFactors) -> f64 {
    let tilde: f64 = f.modes.iter().map(|m| m.tail_energy).sum();
    let dropped: f64 = f
        .tail_block_norms()
        .iter()
        .flatten()
        .map(|x| x * x)
        .sum();
    tilde.sqrt() + dropped.sqrt()
}

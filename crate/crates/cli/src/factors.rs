//! Factor directories: a `manifest.json` plus one tensor file per factor.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use stpt_core::decomp::{
    hosvd_error_bound, reconstruct_hosvd, reconstruct_svd_stp, svd_stp_error_bound, HosvdStpFactors,
    ModeDiagnostics, SvdStpFactors,
};
use stpt_core::DenseTensor;

use crate::tensorfile::{read_matrix, read_tensor, write_matrix, write_tensor};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SvdStp,
    HosvdStp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub tail_energy: f64,
    pub c_norm: f64,
    pub sigma_b: Vec<f64>,
    pub near_degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub method: Method,
    pub dims: Vec<usize>,
    pub s: Vec<usize>,
    pub r: Vec<usize>,
    pub error_bound: f64,
    pub files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_b_tail: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub near_degenerate: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<ModeRecord>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Factors {
    SvdStp(SvdStpFactors),
    HosvdStp(HosvdStpFactors),
}

impl Factors {
    pub fn reconstruct(&self) -> Result<DenseTensor> {
        Ok(match self {
            Factors::SvdStp(f) => DenseTensor::from_matrix(reconstruct_svd_stp(f)?),
            Factors::HosvdStp(f) => reconstruct_hosvd(f)?,
        })
    }

    pub fn error_bound(&self) -> f64 {
        match self {
            Factors::SvdStp(f) => svd_stp_error_bound(f),
            Factors::HosvdStp(f) => hosvd_error_bound(f),
        }
    }

    /// Number of stored reals, with `Σ` counted compactly as `(σ_B, C)`.
    pub fn storage(&self) -> u64 {
        let n = match self {
            Factors::SvdStp(f) => f.u.len() + f.v.len() + f.sigma_b.len() + f.c.len(),
            Factors::HosvdStp(f) => f.core.len() + f.factors.iter().map(|u| u.len()).sum::<usize>(),
        };
        n as u64
    }
}

pub fn save(factors: &Factors, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let manifest = match factors {
        Factors::SvdStp(f) => {
            let files = ["u.stpt", "v.stpt", "sigma_b.stpt", "c.stpt"];
            write_matrix(&f.u, dir.join(files[0]))?;
            write_matrix(&f.v, dir.join(files[1]))?;
            write_tensor(&DenseTensor::new(vec![f.sigma_b.len()], f.sigma_b.clone())?, dir.join(files[2]))?;
            write_matrix(&f.c, dir.join(files[3]))?;
            Manifest {
                method: Method::SvdStp,
                dims: vec![f.rows, f.cols],
                s: vec![f.s1, f.s2],
                r: vec![f.r],
                error_bound: svd_stp_error_bound(f),
                files: files.map(String::from).to_vec(),
                tail_energy: Some(f.tail_energy),
                sigma_b_tail: Some(f.sigma_b_tail.clone()),
                near_degenerate: Some(f.near_degenerate),
                modes: None,
            }
        }
        Factors::HosvdStp(f) => {
            let mut files = vec!["core.stpt".to_string()];
            write_tensor(&f.core, dir.join(&files[0]))?;
            for (k, u) in f.factors.iter().enumerate() {
                let name = format!("u{}.stpt", k + 1);
                write_matrix(u, dir.join(&name))?;
                files.push(name);
            }
            let dims = f
                .factors
                .iter()
                .zip(&f.s)
                .map(|(u, s)| u.rows() * s)
                .collect();
            Manifest {
                method: Method::HosvdStp,
                dims,
                s: f.s.clone(),
                r: f.r.clone(),
                error_bound: hosvd_error_bound(f),
                files,
                tail_energy: None,
                sigma_b_tail: None,
                near_degenerate: None,
                modes: Some(
                    f.modes
                        .iter()
                        .map(|m| ModeRecord {
                            tail_energy: m.tail_energy,
                            c_norm: m.c_norm,
                            sigma_b: m.sigma_b.clone(),
                            near_degenerate: m.near_degenerate,
                        })
                        .collect(),
                ),
            }
        }
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join(MANIFEST), text)?;
    Ok(())
}

pub fn load_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn load(dir: &Path) -> Result<Factors> {
    let m = load_manifest(dir)?;
    match m.method {
        Method::SvdStp => {
            let (&[rows, cols], &[s1, s2], &[r]) = (&m.dims[..], &m.s[..], &m.r[..]) else {
                bail!("svd_stp manifest needs two dims, two factors and one rank");
            };
            let sigma_b = read_tensor(dir.join("sigma_b.stpt"))?.into_vec();
            if sigma_b.len() != r {
                bail!("sigma_b has {} entries, manifest rank is {r}", sigma_b.len());
            }
            Ok(Factors::SvdStp(SvdStpFactors {
                u: read_matrix(dir.join("u.stpt"))?,
                v: read_matrix(dir.join("v.stpt"))?,
                sigma_b,
                sigma_b_tail: m.sigma_b_tail.unwrap_or_default(),
                c: read_matrix(dir.join("c.stpt"))?,
                s1,
                s2,
                r,
                rows,
                cols,
                tail_energy: m.tail_energy.unwrap_or(0.0),
                tilde_sigma: Vec::new(),
                near_degenerate: m.near_degenerate.unwrap_or(false),
            }))
        }
        Method::HosvdStp => {
            let d = m.dims.len();
            if m.s.len() != d || m.r.len() != d {
                bail!("hosvd_stp manifest has inconsistent lengths");
            }
            let core = read_tensor(dir.join("core.stpt"))?;
            let factors = (1..=d)
                .map(|k| read_matrix(dir.join(format!("u{k}.stpt"))))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let modes = m
                .modes
                .unwrap_or_default()
                .into_iter()
                .map(|r| ModeDiagnostics {
                    tail_energy: r.tail_energy,
                    c_norm: r.c_norm,
                    sigma_b: r.sigma_b,
                    near_degenerate: r.near_degenerate,
                })
                .collect();
            Ok(Factors::HosvdStp(HosvdStpFactors {
                core,
                factors,
                s: m.s,
                r: m.r,
                modes,
            }))
        }
    }
}

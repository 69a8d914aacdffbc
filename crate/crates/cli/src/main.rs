use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use stpt::bench::{self, BenchConfig};
use stpt::factors::{self, Factors};
use stpt::metrics::{metrics, MetricsReport};
use stpt::pgm::{read_pgm, write_pgm};
use stpt::tensorfile::{read_tensor, write_tensor};
use stpt_core::decomp::{
    hosvd_stp_with, reconstruct_svd_stp, storage_cost, svd_stp, truncated_hosvd_stp_with, truncated_svd_stp,
    DecompConfig, StorageKind,
};
use stpt_core::tensor::unfold;
use stpt_core::{truncated_svd, DenseTensor, Matrix};

#[derive(Parser)]
#[command(name = "stpt", version, about = "Semi-tensor-product SVD and HOSVD tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Describe a tensor file, PGM image or factor directory.
    Info { path: PathBuf },
    /// SVD-STP of a matrix; full unless --rank is given.
    Svdstp {
        input: PathBuf,
        #[arg(long)]
        s1: usize,
        #[arg(long)]
        s2: usize,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// HOSVD-STP of a tensor; full unless --rank is given.
    Hosvdstp {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        rank: Option<Vec<usize>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild the approximation stored in a factor directory.
    Reconstruct {
        dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Low-rank approximation of a grayscale image.
    CompressImage {
        input: PathBuf,
        #[arg(long)]
        s1: usize,
        #[arg(long)]
        s2: usize,
        #[arg(long)]
        rank: usize,
        #[arg(long)]
        out: PathBuf,
        /// Method whose result is written to --out.
        #[arg(long, value_enum, default_value_t = ImageMethod::TsvdStp)]
        method: ImageMethod,
        /// CSV comparing all three methods at the given rank.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Leave timing columns empty.
        #[arg(long)]
        no_timing: bool,
    },
    /// Compare an approximation against a reference.
    Metrics {
        reference: PathBuf,
        approx: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Time and accuracy of the STP decompositions against their conventional counterparts.
    Bench {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Leave the mean_seconds column empty so rows are byte-reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Number of stored reals for a decomposition.
    Storage {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1)]
        s: u64,
        #[arg(long)]
        r: u64,
        #[arg(long, default_value_t = 2)]
        d: u32,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
enum ImageMethod {
    #[serde(rename = "FSVD-STP")]
    FsvdStp,
    #[serde(rename = "TSVD-STP")]
    TsvdStp,
    #[serde(rename = "TSVD")]
    Tsvd,
}

/// 3 for numerical failures, 2 for usage and validation errors.
fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err.chain().any(|e| {
        matches!(
            e.downcast_ref::<stpt_core::Error>(),
            Some(stpt_core::Error::ConvergenceFailure { .. })
        )
    });
    if numerical {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn threads() -> Result<usize> {
    match std::env::var("STPT_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("STPT_THREADS must be a non-negative integer, got {v:?}")),
        Err(_) => Ok(0),
    }
}

fn is_pgm(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

fn load(path: &Path) -> Result<DenseTensor> {
    if is_pgm(path) {
        Ok(DenseTensor::from_matrix(read_pgm(path).with_context(|| path.display().to_string())?))
    } else {
        read_tensor(path).with_context(|| path.display().to_string())
    }
}

fn load_matrix(path: &Path) -> Result<Matrix> {
    let t = load(path)?;
    if t.order() != 2 {
        bail!("{} holds an order-{} tensor, expected a matrix", path.display(), t.order());
    }
    Ok(t.into_matrix()?)
}

fn save(t: DenseTensor, path: &Path) -> Result<()> {
    if is_pgm(path) {
        if t.order() != 2 {
            bail!("only matrices can be written as PGM");
        }
        write_pgm(&t.into_matrix()?, path)?;
    } else {
        write_tensor(&t, path)?;
    }
    Ok(())
}

/// Tensors of order above two are compared through their mode-1 unfoldings.
fn as_matrix(t: DenseTensor) -> Result<Matrix> {
    Ok(match t.order() {
        1 => Matrix::column_vector(t.as_slice()),
        2 => t.into_matrix()?,
        _ => unfold(&t, 1)?,
    })
}

fn write_rows<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Info { path } => info(&path),
        Command::Svdstp { input, s1, s2, rank, out } => {
            let a = load_matrix(&input)?;
            let f = match rank {
                Some(r) => truncated_svd_stp(&a, s1, s2, r)?,
                None => svd_stp(&a, s1, s2)?,
            };
            let rel = a.sub(&reconstruct_svd_stp(&f)?)?.frobenius_norm() / a.frobenius_norm();
            let factors = Factors::SvdStp(f);
            factors::save(&factors, &out)?;
            println!("rank            {}", rank.map_or("full".to_string(), |r| r.to_string()));
            println!("relative error  {rel:e}");
            println!("error bound     {:e}", factors.error_bound());
            println!("stored reals    {} (original {})", factors.storage(), a.len());
            Ok(())
        }
        Command::Hosvdstp { input, s, rank, out } => {
            let t = load(&input)?;
            let config = DecompConfig { threads: threads()? };
            let f = match &rank {
                Some(r) => truncated_hosvd_stp_with(&t, &s, r, &config)?,
                None => hosvd_stp_with(&t, &s, &config)?,
            };
            let core_dims = f.core.dims().to_vec();
            let factors = Factors::HosvdStp(f);
            let rel = t.sub(&factors.reconstruct()?)?.frobenius_norm() / t.frobenius_norm();
            factors::save(&factors, &out)?;
            println!("core dims       {core_dims:?}");
            println!("relative error  {rel:e}");
            println!("error bound     {:e}", factors.error_bound());
            println!("stored reals    {} (original {})", factors.storage(), t.len());
            Ok(())
        }
        Command::Reconstruct { dir, out } => {
            let f = factors::load(&dir)?;
            let t = f.reconstruct()?;
            println!("dims {:?}", t.dims());
            save(t, &out)
        }
        Command::CompressImage { input, s1, s2, rank, out, method, report, no_timing } => {
            compress_image(&input, s1, s2, rank, &out, method, report.as_deref(), !no_timing)
        }
        Command::Metrics { reference, approx, csv } => {
            let a = as_matrix(load(&reference)?)?;
            let b = as_matrix(load(&approx)?)?;
            let m = metrics(&a, &b)?;
            println!("relative error            {:e}", m.relative_error);
            println!("relative error (8-bit)    {:e}", m.quantized_relative_error);
            println!("PSNR (dB)                 {}", m.psnr_db);
            println!("SSIM                      {}", m.ssim);
            if let Some(path) = csv {
                #[derive(Serialize)]
                struct Row {
                    relative_error: f64,
                    quantized_relative_error: f64,
                    psnr_db: f64,
                    ssim: f64,
                }
                write_rows(
                    &[Row {
                        relative_error: m.relative_error,
                        quantized_relative_error: m.quantized_relative_error,
                        psnr_db: m.psnr_db,
                        ssim: m.ssim,
                    }],
                    &path,
                )?;
            }
            Ok(())
        }
        Command::Bench { n, d, s, r, trials, seed, csv, no_timing } => {
            let rows = bench::run(&BenchConfig {
                n,
                d,
                s,
                r,
                trials,
                seed,
                timing: !no_timing,
                threads: threads()?,
            })?;
            println!("{:<12} {:>14} {:>22}", "method", "mean time (s)", "mean relative error");
            for row in &rows {
                let time = row.mean_seconds.map_or("-".to_string(), |t| format!("{t:.4}"));
                println!("{:<12} {:>14} {:>22.6e}", row.method.name(), time, row.mean_relative_error);
            }
            if let Some(path) = csv {
                let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                bench::write_csv(&rows, file)?;
            }
            Ok(())
        }
        Command::Storage { kind, n, s, r, d, csv } => {
            let k: StorageKind = kind.parse()?;
            let cost = storage_cost(k, n, s, r, d)?;
            println!("{cost}");
            if let Some(path) = csv {
                #[derive(Serialize)]
                struct Row {
                    kind: String,
                    n: u64,
                    s: u64,
                    r: u64,
                    d: u32,
                    storage: u64,
                }
                write_rows(&[Row { kind: k.to_string(), n, s, r, d, storage: cost }], &path)?;
            }
            Ok(())
        }
    }
}

fn info(path: &Path) -> Result<()> {
    if path.is_dir() {
        let m = factors::load_manifest(path)?;
        println!("factor directory ({:?})", m.method);
        println!("dims         {:?}", m.dims);
        println!("s            {:?}", m.s);
        println!("r            {:?}", m.r);
        println!("error bound  {:e}", m.error_bound);
        return Ok(());
    }
    let t = load(path)?;
    let (lo, hi) = t
        .as_slice()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    println!("{}", if is_pgm(path) { "PGM image" } else { "tensor file" });
    println!("order      {}", t.order());
    println!("dims       {:?}", t.dims());
    println!("frobenius  {:e}", t.frobenius_norm());
    println!("range      [{lo}, {hi}]");
    Ok(())
}

#[derive(Serialize)]
struct ImageRow {
    method: ImageMethod,
    s1: usize,
    s2: usize,
    rank: usize,
    relative_error: f64,
    quantized_relative_error: f64,
    psnr_db: f64,
    ssim: f64,
    elapsed_seconds: Option<f64>,
    storage_original: u64,
    storage_factors: u64,
}

impl ImageMethod {
    fn name(self) -> &'static str {
        match self {
            ImageMethod::FsvdStp => "FSVD-STP",
            ImageMethod::TsvdStp => "TSVD-STP",
            ImageMethod::Tsvd => "TSVD",
        }
    }
}

fn approximate(a: &Matrix, method: ImageMethod, s1: usize, s2: usize, rank: usize) -> Result<(f64, Matrix, u64)> {
    let start = Instant::now();
    Ok(match method {
        ImageMethod::FsvdStp => {
            let f = svd_stp(a, s1, s2)?;
            let elapsed = start.elapsed().as_secs_f64();
            let storage = Factors::SvdStp(f.clone()).storage();
            (elapsed, reconstruct_svd_stp(&f)?, storage)
        }
        ImageMethod::TsvdStp => {
            let f = truncated_svd_stp(a, s1, s2, rank)?;
            let elapsed = start.elapsed().as_secs_f64();
            let storage = Factors::SvdStp(f.clone()).storage();
            (elapsed, reconstruct_svd_stp(&f)?, storage)
        }
        ImageMethod::Tsvd => {
            let f = truncated_svd(a, rank)?;
            let elapsed = start.elapsed().as_secs_f64();
            let storage = (f.u.len() + f.v.len() + f.sigma.len()) as u64;
            (elapsed, f.reconstruct(), storage)
        }
    })
}

#[allow(clippy::too_many_arguments)]
fn compress_image(
    input: &Path,
    s1: usize,
    s2: usize,
    rank: usize,
    out: &Path,
    method: ImageMethod,
    report: Option<&Path>,
    timing: bool,
) -> Result<()> {
    let a = read_pgm(input).with_context(|| input.display().to_string())?;
    let methods = match report {
        Some(_) => vec![ImageMethod::FsvdStp, ImageMethod::TsvdStp, ImageMethod::Tsvd],
        None => vec![method],
    };
    let mut rows = Vec::new();
    for m in methods {
        let (elapsed, approx, storage) = approximate(&a, m, s1, s2, rank)?;
        let q: MetricsReport = metrics(&a, &approx)?;
        println!(
            "{:<9} relative error {:.4e}  PSNR {:.2} dB  SSIM {:.4}  stored {} of {}",
            m.name(),
            q.relative_error,
            q.psnr_db,
            q.ssim,
            storage,
            q.storage_original
        );
        if m == method {
            write_pgm(&approx, out)?;
        }
        rows.push(ImageRow {
            method: m,
            s1,
            s2,
            rank,
            relative_error: q.relative_error,
            quantized_relative_error: q.quantized_relative_error,
            psnr_db: q.psnr_db,
            ssim: q.ssim,
            elapsed_seconds: timing.then_some(elapsed),
            storage_original: q.storage_original,
            storage_factors: storage,
        });
    }
    if let Some(path) = report {
        write_rows(&rows, path)?;
    }
    Ok(())
}

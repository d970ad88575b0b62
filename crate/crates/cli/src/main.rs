use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lbd_core::pipeline::{describe_image, edge_correlation, invert_records, psnr, FastParams};
use lbd_core::{
    build_brief, build_freak, BihtConfig, DescriptorFile, FreakVariant, GrayImage, LbdError, Pattern, PdConfig,
    SamplingMode, SolverChoice, Sparsity,
};

#[derive(Parser)]
#[command(name = "lbd", version, about = "Describe images with local binary descriptors and invert them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Brief,
    Freak,
    RaFreak,
    ExFreak,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Grid,
    Fast,
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Pd,
    Biht,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sampling pattern and write it as JSON.
    Pattern {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 32)]
        side: usize,
        /// Number of measurement pairs (ignored by ex-freak).
        #[arg(long, default_value_t = 512)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute descriptors of an image and write a descriptor file.
    Describe {
        image: PathBuf,
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Grid)]
        mode: Mode,
        /// Grid stride in pixels; defaults to the patch side.
        #[arg(long)]
        offset: Option<usize>,
        /// Store 1-bit descriptors (the default).
        #[arg(long, conflicts_with = "real")]
        binary: bool,
        /// Store the real-valued measurements instead.
        #[arg(long)]
        real: bool,
        #[arg(long, default_value_t = 0.08)]
        fast_threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct an image from a descriptor file.
    Invert {
        descriptors: PathBuf,
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long, value_enum, default_value_t = Solver::Biht)]
        solver: Solver,
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        /// Iterations; 1000 for pd, 200 for biht when unset.
        #[arg(long)]
        iters: Option<usize>,
        /// Fraction of wavelet coefficients kept by biht.
        #[arg(long, default_value_t = 0.4)]
        k_frac: f64,
        /// Let the pd solver read binary descriptors as ±1 reals.
        #[arg(long)]
        force_real: bool,
        /// Canvas size; defaults to the extent of the stored patches.
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        height: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two images.
    Eval { a: PathBuf, b: PathBuf },
}

fn read_pattern(path: &Path) -> lbd_core::Result<Pattern> {
    Pattern::from_json(&fs::read_to_string(path)?)
}

fn workers() -> lbd_core::Result<usize> {
    match std::env::var("LBD_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| LbdError::Parameter(format!("LBD_THREADS must be a count, got {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn run(cli: Cli) -> lbd_core::Result<()> {
    match cli.command {
        Command::Pattern {
            kind,
            side,
            m,
            seed,
            out,
        } => {
            let pattern = match kind {
                Kind::Brief => build_brief(side, m, seed)?,
                Kind::Freak => build_freak(side, m, FreakVariant::Freak, seed)?,
                Kind::RaFreak => build_freak(side, m, FreakVariant::RaFreak, seed)?,
                Kind::ExFreak => build_freak(side, m, FreakVariant::ExFreak, seed)?,
            };
            fs::write(&out, pattern.to_canonical_json())?;
            println!("pattern_id={:016x}", pattern.id());
            println!("pairs={}", pattern.len());
        }
        Command::Describe {
            image,
            pattern,
            mode,
            offset,
            binary: _,
            real,
            fast_threshold,
            out,
        } => {
            let pattern = read_pattern(&pattern)?;
            let image = GrayImage::read(&image)?;
            let mode = match mode {
                Mode::Grid => SamplingMode::Grid {
                    offset: offset.unwrap_or(pattern.patch_side()),
                },
                Mode::Fast => SamplingMode::Keypoints(FastParams {
                    threshold: fast_threshold,
                    ..Default::default()
                }),
            };
            let records = describe_image(&image, &pattern, &mode, !real)?;
            let file = DescriptorFile::new(&pattern, records)?;
            fs::write(&out, file.to_bytes()?)?;
            println!("records={}", file.records.len());
        }
        Command::Invert {
            descriptors,
            pattern,
            solver,
            lambda,
            iters,
            k_frac,
            force_real,
            width,
            height,
            out,
        } => {
            let pattern = read_pattern(&pattern)?;
            let file = DescriptorFile::from_bytes(&fs::read(&descriptors)?)?;
            file.check_pattern(&pattern)?;
            let solver = match solver {
                Solver::Pd => SolverChoice::PrimalDual(PdConfig {
                    lambda,
                    iterations: iters.unwrap_or(1000),
                    allow_binary: force_real,
                    ..Default::default()
                }),
                Solver::Biht => {
                    if !file.binary {
                        return Err(LbdError::PayloadType(
                            "biht needs binary descriptors; use --solver pd for real ones".into(),
                        ));
                    }
                    SolverChoice::Biht(BihtConfig {
                        sparsity: Sparsity::Fraction(k_frac),
                        iterations: iters.unwrap_or(200),
                        ..Default::default()
                    })
                }
            };
            let (ew, eh) = file.extent();
            let rec = invert_records(
                &file.records,
                &pattern,
                &solver,
                width.unwrap_or(ew),
                height.unwrap_or(eh),
                workers()?,
            )?;
            rec.image.write_pgm(&out)?;
            println!("patches={}", rec.patches);
            if let Some(c) = rec.mean_consistency {
                println!("mean_consistency={c:.4}");
            }
        }
        Command::Eval { a, b } => {
            let (a, b) = (GrayImage::read(&a)?, GrayImage::read(&b)?);
            if (a.width(), a.height()) != (b.width(), b.height()) {
                return Err(LbdError::Parameter(format!(
                    "image sizes differ: {}x{} vs {}x{}",
                    a.width(),
                    a.height(),
                    b.width(),
                    b.height()
                )));
            }
            // pixels left black by a reconstruction are treated as uncovered
            let mask: Vec<bool> = a.values().iter().zip(b.values()).map(|(x, y)| *x != 0.0 || *y != 0.0).collect();
            let mask = mask.iter().any(|&m| m).then_some(mask);
            let p = psnr(&a, &b, mask.as_deref())?;
            if p.is_infinite() {
                println!("psnr_db=inf");
            } else {
                println!("psnr_db={p:.3}");
            }
            println!("edge_corr={:.3}", edge_correlation(&a, &b)?);
        }
    }
    Ok(())
}

fn exit_code(err: &LbdError) -> u8 {
    match err {
        LbdError::Parameter(_) | LbdError::Shape { .. } | LbdError::PayloadType(_) => 2,
        LbdError::PatternMismatch { .. } | LbdError::Format(_) | LbdError::Json(_) => 3,
        LbdError::Io(_) | LbdError::Image(_) => 4,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lbd: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

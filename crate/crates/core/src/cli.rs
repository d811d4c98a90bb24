//! The `coarsenrank` command line.
//!
//! Standard output is line-oriented `key=value`; diagnostics go to standard
//! error. Exit status: 0 success, 1 usage error, 2 parse error, 3 numerical
//! or domain error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::em::{fit, pl_em, Calibration, CoarsenConfig};
use crate::error::Error;
use crate::gibbs::{diagnose, GibbsConfig};
use crate::io::{
    format_number, parse_preferences, parse_scores, parse_truth, write_dic_curve,
    write_preferences, write_scores, write_truth,
};
use crate::ranking::{kendall_tau, PreferenceDataset};
use crate::synth::{generate, SynthSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ExitCode {
    Success = 0,
    Usage = 1,
    Parse = 2,
    Numerical = 3,
}

impl From<ExitCode> for std::process::ExitCode {
    fn from(code: ExitCode) -> Self {
        std::process::ExitCode::from(code as u8)
    }
}

#[derive(Debug)]
struct Failure {
    code: ExitCode,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: ExitCode::Usage,
            message: message.into(),
        }
    }

    fn parse(message: impl Into<String>) -> Self {
        Failure {
            code: ExitCode::Parse,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err.root() {
            Error::InvalidArgument(_) => ExitCode::Usage,
            Error::Parse(_) => ExitCode::Parse,
            _ => ExitCode::Numerical,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `inf` or a positive real.
pub fn parse_alpha(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let alpha = if s.eq_ignore_ascii_case("inf") {
        f64::INFINITY
    } else {
        s.parse::<f64>()
            .map_err(|_| format!("invalid alpha {s:?}"))?
    };
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(format!("alpha must be positive or inf, got {s:?}"));
    }
    Ok(alpha)
}

/// Comma-separated, strictly ascending α values.
pub fn parse_alpha_grid(s: &str) -> Result<Vec<f64>, String> {
    let grid = s
        .split(',')
        .map(parse_alpha)
        .collect::<Result<Vec<_>, _>>()?;
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err("alpha grid must be strictly ascending".into());
    }
    Ok(grid)
}

fn parse_calibration(s: &str) -> Result<Calibration, String> {
    if s == "auto" {
        return Ok(Calibration::Auto);
    }
    match s.parse::<f64>() {
        Ok(c) if c > 0.0 && c.is_finite() => Ok(Calibration::Fixed(c)),
        _ => Err(format!(
            "calibration must be a positive number or 'auto', got {s:?}"
        )),
    }
}

#[derive(Debug, Clone)]
struct AlphaGrid(Vec<f64>);

#[derive(Debug, Parser)]
#[command(
    name = "coarsenrank",
    version,
    about = "Robust rank aggregation under a coarsened Plackett-Luce posterior"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit item scores with the coarsened EM solver.
    Aggregate {
        #[arg(long)]
        input: PathBuf,
        /// Robustness rate, or `inf` for standard PL-EM.
        #[arg(long, value_parser = parse_alpha)]
        alpha: f64,
        #[arg(long, default_value_t = 15)]
        iters: usize,
        /// Calibration constant, or `auto` for N/2.
        #[arg(long, default_value = "auto", value_parser = parse_calibration)]
        c: Calibration,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute the DIC curve over a grid of α values.
    Diagnose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "alpha-grid", value_parser = |s: &str| parse_alpha_grid(s).map(AlphaGrid))]
        alpha_grid: AlphaGrid,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Kendall tau between a scores file and a ground-truth order.
    Evaluate {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Write a synthetic dataset with optional order noise.
    Generate {
        #[arg(long)]
        items: usize,
        #[arg(long)]
        prefs: usize,
        #[arg(long)]
        len: usize,
        #[arg(long)]
        noise: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long = "out-prefix")]
        out_prefix: PathBuf,
    },
    /// Time the coarsened solver against PL-EM.
    Bench {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 15)]
        iters: usize,
        #[arg(long, default_value_t = 50)]
        repeats: usize,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{rendered}");
                    ExitCode::Success
                }
                _ => {
                    let _ = write!(err, "{rendered}");
                    ExitCode::Usage
                }
            };
        }
    };

    let result = match cli.command {
        Command::Aggregate {
            input,
            alpha,
            iters,
            c,
            out: path,
        } => cmd_aggregate(&input, alpha, iters, c, &path, out),
        Command::Diagnose {
            input,
            alpha_grid,
            samples,
            seed,
            out: path,
        } => cmd_diagnose(&input, &alpha_grid.0, samples, seed, &path, out),
        Command::Evaluate { scores, truth } => cmd_evaluate(&scores, &truth, out),
        Command::Generate {
            items,
            prefs,
            len,
            noise,
            seed,
            out_prefix,
        } => cmd_generate(items, prefs, len, noise, seed, &out_prefix, out),
        Command::Bench {
            input,
            iters,
            repeats,
        } => cmd_bench(&input, iters, repeats, out),
    };

    match result {
        Ok(()) => ExitCode::Success,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// A missing file is a usage error; a file that exists but cannot be read
/// as text is a parse error.
fn read_input(path: &Path) -> Result<String, Failure> {
    if !path.exists() {
        return Err(Failure::usage(format!("{}: no such file", path.display())));
    }
    fs::read_to_string(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn load_dataset(path: &Path) -> Result<PreferenceDataset, Failure> {
    let text = read_input(path)?;
    parse_preferences(&text).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn write_output(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key}={value}");
}

fn cmd_aggregate(
    input: &Path,
    alpha: f64,
    iters: usize,
    calibration: Calibration,
    path: &Path,
    out: &mut dyn Write,
) -> CmdResult {
    let ds = load_dataset(input)?;
    let config = CoarsenConfig {
        alpha,
        iterations: iters,
        calibration,
        ..Default::default()
    };
    let result = fit(&ds, &config)?;
    write_output(path, &write_scores(&result.theta, ds.items()))?;
    emit(out, "n", ds.len());
    emit(out, "m", ds.num_items());
    emit(out, "alpha", format_number(alpha));
    emit(out, "tau", format_number(result.tau_n));
    emit(out, "c", format_number(calibration.resolve(ds.len())));
    emit(out, "iterations", result.iterations_run);
    emit(out, "objective", format_number(result.final_objective()));
    Ok(())
}

fn cmd_diagnose(
    input: &Path,
    grid: &[f64],
    samples: usize,
    seed: u64,
    path: &Path,
    out: &mut dyn Write,
) -> CmdResult {
    let ds = load_dataset(input)?;
    let gc = GibbsConfig {
        samples,
        seed,
        ..Default::default()
    };
    let diagnosis = diagnose(&ds, grid, &Default::default(), &gc)?;
    write_output(path, &write_dic_curve(&diagnosis.curve))?;
    emit(out, "points", diagnosis.curve.len());
    emit(
        out,
        "selected_alpha",
        format_number(diagnosis.selected_alpha),
    );
    Ok(())
}

fn cmd_evaluate(scores: &Path, truth: &Path, out: &mut dyn Write) -> CmdResult {
    let table = parse_scores(&read_input(scores)?)
        .map_err(|e| Failure::parse(format!("{}: {e}", scores.display())))?;
    let truth_order = parse_truth(&read_input(truth)?, &table.items)
        .map_err(|e| Failure::parse(format!("{}: {e}", truth.display())))?;
    let tau =
        kendall_tau(&table.ranking, &truth_order).map_err(|e| Failure::parse(e.to_string()))?;
    emit(out, "kendall_tau", format!("{tau:.4}"));
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_generate(
    items: usize,
    prefs: usize,
    len: usize,
    noise: f64,
    seed: u64,
    prefix: &Path,
    out: &mut dyn Write,
) -> CmdResult {
    if len > items {
        return Err(Failure::usage(format!(
            "--len {len} exceeds --items {items}"
        )));
    }
    let spec = SynthSpec {
        noise_fraction: noise,
        ..SynthSpec::new(items, prefs, len, seed)
    };
    let data = generate(&spec)?;
    let ids = data.dataset.items();
    write_output(
        &with_suffix(prefix, ".prefs"),
        &write_preferences(&data.dataset),
    )?;
    write_output(
        &with_suffix(prefix, ".truth"),
        &write_truth(&data.ground_truth, ids),
    )?;
    write_output(
        &with_suffix(prefix, ".theta"),
        &write_scores(&data.theta_truth, ids),
    )?;
    emit(out, "n", data.dataset.len());
    emit(out, "m", data.dataset.num_items());
    emit(out, "replaced", data.replaced.len());
    Ok(())
}

/// Wall-clock statistics of repeated fits, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub mean: f64,
    pub std: f64,
}

impl Timing {
    /// Sample standard deviation; zero for a single run.
    fn from_runs(runs: &[f64]) -> Self {
        let n = runs.len() as f64;
        let mean = runs.iter().sum::<f64>() / n;
        let std = if runs.len() < 2 {
            0.0
        } else {
            (runs.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Timing { mean, std }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchReport {
    /// Coarsened solver at `α = N` (likelihood weight ½).
    pub coarsen: Timing,
    pub pl_em: Timing,
}

/// Times both solvers at equal iteration counts, alternating runs.
pub fn bench(ds: &PreferenceDataset, iters: usize, repeats: usize) -> crate::Result<BenchReport> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be >= 1".into()));
    }
    let coarsen_cfg = CoarsenConfig {
        alpha: ds.len() as f64,
        iterations: iters,
        ..Default::default()
    };
    let plem_cfg = CoarsenConfig {
        alpha: f64::INFINITY,
        iterations: iters,
        ..Default::default()
    };
    let mut coarsen = Vec::with_capacity(repeats);
    let mut plain = Vec::with_capacity(repeats);
    for _ in 0..repeats {
        let start = Instant::now();
        std::hint::black_box(fit(ds, &coarsen_cfg)?);
        coarsen.push(start.elapsed().as_secs_f64());

        let start = Instant::now();
        std::hint::black_box(pl_em(ds, &plem_cfg)?);
        plain.push(start.elapsed().as_secs_f64());
    }
    Ok(BenchReport {
        coarsen: Timing::from_runs(&coarsen),
        pl_em: Timing::from_runs(&plain),
    })
}

fn cmd_bench(input: &Path, iters: usize, repeats: usize, out: &mut dyn Write) -> CmdResult {
    let ds = load_dataset(input)?;
    let report = bench(&ds, iters, repeats)?;
    emit(out, "iterations", iters);
    emit(out, "repeats", repeats);
    emit(
        out,
        "coarsenrank_mean_s",
        format_number(report.coarsen.mean),
    );
    emit(out, "coarsenrank_std_s", format_number(report.coarsen.std));
    emit(out, "pl_em_mean_s", format_number(report.pl_em.mean));
    emit(out, "pl_em_std_s", format_number(report.pl_em.std));
    emit(
        out,
        "ratio",
        format_number(report.coarsen.mean / report.pl_em.mean),
    );
    Ok(())
}

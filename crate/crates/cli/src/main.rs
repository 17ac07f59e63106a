//! Command-line surface for the noisecube verification toolkit.
//!
//! `noisecube <command> [flags]` runs one verification command and emits a
//! machine-readable report (JSON by default, CSV with `--format csv`) to
//! stdout or `--out`. The exit status is 0 iff every case passed.
//!
//! Flags may also come from a `--config` file of `key=value` lines;
//! explicit flags win.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, Context, Result};
use clap::Parser;

use noisecube::runner::{self, CommandKind, Format, ModeKind, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "noisecube",
    about = "Brute-force and exact verification of noise-operator norm inequalities \
             on the boolean cube, with matroid and Reed-Muller applications",
    after_help = "Commands: verify-theorem, verify-1d, certify-proof, matroid-check, \
                  rm-threshold, bsc-sim, weight-report, lambda-table"
)]
struct Cli {
    /// Command to run.
    command: String,
    /// Norm exponent(s): "2", "inf", a list "2,3,inf", or a range "2..64".
    #[arg(long)]
    q: Option<String>,
    /// Noise rate in [0, 1/2], or a comma list for per-coordinate rates.
    #[arg(long)]
    eps: Option<String>,
    /// Inclusion / crossover probability in [0, 1].
    #[arg(long)]
    p: Option<f64>,
    /// Cube dimension / number of matroid columns.
    #[arg(long)]
    n: Option<usize>,
    /// Number of generator rows (matroid-check).
    #[arg(long)]
    k: Option<usize>,
    /// Reed-Muller order r.
    #[arg(long)]
    r: Option<u32>,
    /// Reed-Muller m, or a range "3..6" for family commands.
    #[arg(long)]
    m: Option<String>,
    /// Point in [0, 1] for the two-point inequality.
    #[arg(long)]
    x: Option<f64>,
    /// Rational chain sample point "num/den" in (0, 1).
    #[arg(long)]
    y: Option<String>,
    /// Monte Carlo trials / number of random cases.
    #[arg(long)]
    trials: Option<u64>,
    /// Random seed; fixed seed means byte-identical cases.
    #[arg(long)]
    seed: Option<u64>,
    /// Inequality slack tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Evaluation mode: exact | sampled.
    #[arg(long)]
    mode: Option<String>,
    /// Output format: json | csv.
    #[arg(long)]
    format: Option<String>,
    /// Output path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cube function file (text format) for verify-theorem.
    #[arg(long)]
    function: Option<PathBuf>,
    /// Generator matrix file (text format) for matroid-check.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// key=value config file; explicit flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_config_file(path: &PathBuf) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut entries = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), lineno + 1))?;
        entries.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(entries)
}

fn build_config(cli: Cli) -> Result<RunConfig> {
    let command = CommandKind::from_str(&cli.command).map_err(|e| anyhow!(e))?;
    let file = match &cli.config {
        Some(path) => parse_config_file(path)?,
        None => BTreeMap::new(),
    };
    let from_file = |key: &str| file.get(key).cloned();
    let parse_file = |key: &str| -> Result<Option<f64>> {
        from_file(key)
            .map(|v| {
                v.parse::<f64>()
                    .with_context(|| format!("config {key}={v}"))
            })
            .transpose()
    };

    let mut config = RunConfig::new(command);
    config.q = cli.q.or_else(|| from_file("q"));
    config.eps = cli.eps.or_else(|| from_file("eps"));
    config.p = match cli.p {
        Some(p) => Some(p),
        None => parse_file("p")?,
    };
    config.n = match cli.n {
        Some(n) => Some(n),
        None => from_file("n")
            .map(|v| v.parse())
            .transpose()
            .context("config n")?,
    };
    config.k = match cli.k {
        Some(k) => Some(k),
        None => from_file("k")
            .map(|v| v.parse())
            .transpose()
            .context("config k")?,
    };
    config.r = match cli.r {
        Some(r) => Some(r),
        None => from_file("r")
            .map(|v| v.parse())
            .transpose()
            .context("config r")?,
    };
    config.m = cli.m.or_else(|| from_file("m"));
    config.x = match cli.x {
        Some(x) => Some(x),
        None => parse_file("x")?,
    };
    config.y = cli.y.or_else(|| from_file("y"));
    config.trials = match cli.trials {
        Some(t) => Some(t),
        None => from_file("trials")
            .map(|v| v.parse())
            .transpose()
            .context("config trials")?,
    };
    config.seed = match cli.seed {
        Some(s) => Some(s),
        None => from_file("seed")
            .map(|v| v.parse())
            .transpose()
            .context("config seed")?,
    };
    config.tol = match cli.tol {
        Some(t) => Some(t),
        None => parse_file("tol")?,
    };
    config.mode = cli
        .mode
        .or_else(|| from_file("mode"))
        .map(|v| ModeKind::from_str(&v).map_err(|e| anyhow!(e)))
        .transpose()?;
    config.format = cli
        .format
        .or_else(|| from_file("format"))
        .map(|v| Format::from_str(&v).map_err(|e| anyhow!(e)))
        .transpose()?
        .unwrap_or_default();
    config.out = cli
        .out
        .map(|p| p.display().to_string())
        .or_else(|| from_file("out"));
    config.function = cli
        .function
        .map(|p| p.display().to_string())
        .or_else(|| from_file("function"));
    config.matrix = cli
        .matrix
        .map(|p| p.display().to_string())
        .or_else(|| from_file("matrix"));
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(cli) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    };
    let report = match runner::run(&config) {
        Ok(report) => report,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    };
    let rendered = match config.format {
        Format::Json => match report.to_json() {
            Ok(json) => json,
            Err(err) => {
                eprintln!("error: {err}");
                return ExitCode::from(2);
            }
        },
        Format::Csv => report.to_csv(),
    };
    if let Some(path) = &config.out {
        if let Err(err) = std::fs::write(path, rendered.as_bytes()) {
            eprintln!("error: writing {path}: {err}");
            return ExitCode::from(2);
        }
        eprintln!(
            "{}: {} cases, {} failures, max violation {:.3e} ({} ms) -> {path}",
            report.command,
            report.summary.total,
            report.summary.failures,
            report.summary.max_violation,
            report.summary.runtime_ms,
        );
    } else {
        println!("{rendered}");
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

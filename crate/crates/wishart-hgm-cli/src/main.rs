//! Command-line front end for the largest-eigenvalue CDF toolkit.
//!
//! Subcommands: `hkn` (one matrix-entry integral), `cdf` (distribution values
//! at a point or over a grid), `outage` (SNR sweep of the outage
//! probability), `validate` (analytic value vs Monte-Carlo sampling), and
//! `bench` (wall-time and accuracy comparison across methods).
//!
//! Conventions: K-factors and SNRs are taken in dB on the command line and
//! converted once at this boundary — the library works in linear units.
//! Every failure prints a single machine-parseable line
//! `error: code=<kind> msg="…"` to stderr; exit codes are 0 (success),
//! 2 (usage), 3 (invalid model), 4 (numerical failure), 1 (I/O).

// `!(x > 0.0)`-style guards are deliberate: unlike the suggested rewrite,
// they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod emit;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "wishart-hgm",
    version,
    about = "CDF of the largest eigenvalue of a complex noncentral Wishart matrix, \
             and the matching MIMO maximal-ratio-combining outage probability"
)]
struct Cli {
    /// Flat key=value file pre-setting any flag of the chosen subcommand
    /// (keys are flag names without leading dashes); explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Worker threads (default: environment variable WISHART_HGM_THREADS,
    /// then available parallelism).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate one entry integral H^k_n(x, λ) with the chosen method.
    Hkn(HknArgs),
    /// CDF of the largest eigenvalue at a point or over an x-grid.
    Cdf(CdfArgs),
    /// Outage probability over an average-branch-SNR sweep.
    Outage(OutageArgs),
    /// Cross-check one analytic CDF value against Monte-Carlo sampling.
    Validate(ValidateArgs),
    /// Wall-time and accuracy comparison of the evaluation methods.
    Bench(BenchArgs),
}

#[derive(Args)]
pub struct HknArgs {
    /// Power of y in the integrand (k ≥ 0).
    #[arg(long)]
    pub k: u32,
    /// Denominator parameter of the confluent series (n ≥ 1).
    #[arg(long)]
    pub n: u32,
    /// Upper integration limit (x ≥ 0).
    #[arg(long)]
    pub x: f64,
    /// Noncentrality argument (λ ≥ 0).
    #[arg(long)]
    pub lambda: f64,
    /// series | quad | hgm | hgm-enhanced
    #[arg(long)]
    pub method: String,
    /// Accuracy knob: series/quadrature tolerance, or the relative step
    /// tolerance of the trajectory methods.
    #[arg(long, default_value_t = 1e-10)]
    pub eps: f64,
}

/// Antenna counts plus the noncentrality spectrum, shared by the cdf,
/// outage, and validate subcommands. Exactly one of --lambdas or
/// --shape + --k-db must be given; with explicit --lambdas the K-factor
/// is inferred from the trace identity Σλ = K·N_T·N_R.
#[derive(Args)]
pub struct ModelArgs {
    /// Transmit antenna count N_T.
    #[arg(long)]
    pub nt: u32,
    /// Receive antenna count N_R.
    #[arg(long)]
    pub nr: u32,
    /// Noncentrality eigenvalues, comma-separated, linear scale.
    #[arg(long, value_delimiter = ',', value_name = "λ1,λ2,…")]
    pub lambdas: Option<Vec<f64>>,
    /// Spectrum shape, comma-separated; rescaled so Σλ = K·N_T·N_R.
    #[arg(long, value_delimiter = ',', value_name = "s1,s2,…")]
    pub shape: Option<Vec<f64>>,
    /// Rician K-factor in dB (used with --shape).
    #[arg(long = "k-db", value_name = "DB")]
    pub k_db: Option<f64>,
}

#[derive(Args)]
pub struct CdfArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Single evaluation point.
    #[arg(long)]
    pub x: Option<f64>,
    /// Inclusive linear grid lo:hi:n.
    #[arg(long = "x-grid", value_name = "LO:HI:N")]
    pub x_grid: Option<String>,
    /// series | quad | hgm | hgm-enhanced
    #[arg(long, default_value = "hgm")]
    pub method: String,
    /// csv | json
    #[arg(long, default_value = "csv")]
    pub out: String,
    /// Write output here instead of stdout.
    #[arg(long = "out-file", value_name = "PATH")]
    pub out_file: Option<PathBuf>,
}

#[derive(Args)]
pub struct OutageArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Threshold SNR Γ_th in dB.
    #[arg(long = "gamma-th-db", default_value_t = 8.2, value_name = "DB")]
    pub gamma_th_db: f64,
    /// Average branch SNR sweep in dB, inclusive linear grid lo:hi:n.
    #[arg(long = "gamma-b-db-grid", value_name = "LO:HI:N")]
    pub gamma_b_db_grid: String,
    /// series | quad | hgm | hgm-enhanced
    #[arg(long, default_value = "hgm")]
    pub method: String,
    /// csv | json
    #[arg(long, default_value = "csv")]
    pub out: String,
    /// Write output here instead of stdout.
    #[arg(long = "out-file", value_name = "PATH")]
    pub out_file: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV (requires --out csv and
    /// --out-file).
    #[arg(long = "emit-plot")]
    pub emit_plot: bool,
}

#[derive(Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Evaluation point for both the analytic value and the sampler.
    #[arg(long)]
    pub x: f64,
    /// series | quad | hgm | hgm-enhanced
    #[arg(long, default_value = "hgm")]
    pub method: String,
    /// Monte-Carlo sample count (≥ 1000).
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Seed for the deterministic sampler.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args)]
pub struct BenchArgs {
    /// small | moderate | large
    #[arg(long, default_value = "small")]
    pub suite: String,
    /// Methods to time, comma-separated.
    #[arg(long, default_value = "quad,hgm", value_delimiter = ',')]
    pub methods: Vec<String>,
    /// csv | json (json includes machine metadata)
    #[arg(long, default_value = "csv")]
    pub out: String,
    /// Write output here instead of stdout.
    #[arg(long = "out-file", value_name = "PATH")]
    pub out_file: Option<PathBuf>,
}

/// CLI failure, carrying the exit code taxonomy.
pub enum Failure {
    /// Bad flags or malformed values (exit 2).
    Usage(String),
    /// Structurally valid request describing an invalid model (exit 3).
    Model(String),
    /// A numerical method failed or a validation check missed (exit 4).
    Numerical(String),
    /// Filesystem trouble (exit 1).
    Io(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Model(_) => 3,
            Failure::Numerical(_) => 4,
            Failure::Io(_) => 1,
        }
    }

    fn tag(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Model(_) => "invalid-model",
            Failure::Numerical(_) => "numerical",
            Failure::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Model(m) | Failure::Numerical(m) | Failure::Io(m) => m,
        }
    }

    /// The single machine-parseable stderr line.
    fn report(&self) -> String {
        let one_line = self.message().replace(['\n', '"'], " ");
        format!("error: code={} msg=\"{}\"", self.tag(), one_line.trim())
    }
}

impl From<wishart_hgm::Error> for Failure {
    fn from(e: wishart_hgm::Error) -> Self {
        use wishart_hgm::Error as E;
        match e {
            E::Domain(_) | E::IllConditioned(_) => Failure::Model(e.to_string()),
            E::NonConvergence { .. } | E::Ode(_) => Failure::Numerical(e.to_string()),
        }
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match inject_config(argv) {
        Ok(a) => a,
        Err(f) => {
            eprintln!("{}", f.report());
            return f.code();
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let first = e.to_string().lines().next().unwrap_or("bad arguments").to_string();
            eprintln!("{}", Failure::Usage(first).report());
            eprintln!("{e}");
            return 2;
        }
    };
    init_threads(cli.threads);
    let outcome = match &cli.cmd {
        Cmd::Hkn(a) => commands::run_hkn(a),
        Cmd::Cdf(a) => commands::run_cdf(a),
        Cmd::Outage(a) => commands::run_outage(a),
        Cmd::Validate(a) => commands::run_validate(a),
        Cmd::Bench(a) => commands::run_bench(a),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{}", f.report());
            f.code()
        }
    }
}

/// Append flags from a `--config key=value` file for every key the command
/// line does not already set, so explicit flags always win.
fn inject_config(mut argv: Vec<String>) -> Result<Vec<String>, Failure> {
    let mut path: Option<String> = None;
    for (i, tok) in argv.iter().enumerate() {
        if tok == "--config" {
            path = argv.get(i + 1).cloned();
        } else if let Some(p) = tok.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::Io(format!("cannot read config file {path}: {e}")))?;
    let present: std::collections::HashSet<String> = argv
        .iter()
        .filter_map(|t| t.strip_prefix("--"))
        .map(|t| t.split('=').next().unwrap_or(t).to_string())
        .collect();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Failure::Usage(format!(
                "config file {path} line {}: expected key=value, got '{line}'",
                idx + 1
            )));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key == "config" || present.contains(key) {
            continue;
        }
        match value {
            "true" => argv.push(format!("--{key}")),
            "false" => {}
            _ => {
                argv.push(format!("--{key}"));
                argv.push(value.to_string());
            }
        }
    }
    Ok(argv)
}

fn init_threads(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("WISHART_HGM_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n.filter(|&n| n > 0) {
        // Ignore the error if a pool already exists; the flag is best-effort.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

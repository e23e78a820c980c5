//! `confreg`: resampling confidence thresholds from the command line.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use confreg::fieldsim::ExperimentMethod;

use crate::config::{ConstantsConfig, FwerConfig, RunConfig, SimulateConfig, ThresholdConfig};
use crate::error::CliError;

const DEFAULT_SEED: u64 = 1;

#[derive(Parser)]
#[command(name = "confreg", version, about = "Resampling confidence thresholds for the mean of a correlated random vector")]
#[command(after_help = "Every CSV starts with its resolved configuration as `#` comment lines; \
`confreg replay FILE` regenerates the file from that header.\n\
Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.")]
struct Cli {
    /// Worker threads. Output does not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print the resolved configuration header and exit without computing.
    #[arg(long, global = true)]
    dry_run: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Threshold(ThresholdArgs),
    Simulate(SimulateArgs),
    Fwer(FwerArgs),
    Constants(ConstantsArgs),
    Replay(ReplayArgs),
}

/// Thresholds for one sample file.
///
/// The input has one row per coordinate and one column per observation
/// (`K` rows of `n` values). A non-numeric first row is taken as a header and
/// `#` lines are ignored.
#[derive(Args)]
#[command(after_help = "Output columns: method, direction, value, alpha, delta, alphas, guaranteed_level, n, k, \
phi, scheme, sigma_norm, sigma_plug_in, engine_draws, seed, mc_stderr, branch, rejected.\n\
`rejected` lists 1-based coordinates above the threshold (needs --mu-null). \
`sigma_plug_in = true` means sigma was estimated from the data and the level is not guaranteed.")]
struct ThresholdArgs {
    #[arg(long)]
    input: PathBuf,
    /// bonferroni, single_test, conc_gaussian, conc_bounded, compound, quantile_chain
    #[arg(long = "method", alias = "methods", value_delimiter = ',', required = true)]
    methods: Vec<String>,
    /// rademacher, efron, rho:<q>, rho:half, loo, vfold:<V>
    #[arg(long, default_value = "rademacher")]
    scheme: String,
    /// sup, supabs, pnorm:<p>, pnorm:inf
    #[arg(long, default_value = "supabs")]
    phi: String,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Split of the compound and quantile-chain constructions.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Quantile-chain levels (default 0.9·alpha).
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    /// Monte Carlo draws; 0 enumerates the support when it has at most 4096 points.
    #[arg(long, default_value_t = 0)]
    draws: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Known per-coordinate standard deviation bound; estimated from the data when absent.
    #[arg(long)]
    sigma: Option<f64>,
    /// Almost-sure bound on the p-norm of the noise (conc_bounded).
    #[arg(long = "M")]
    bound: Option<f64>,
    /// Also report lower-deviation thresholds.
    #[arg(long)]
    lower: bool,
    /// Deterministic threshold of the compound method (default: Bonferroni at alpha·(1−delta)).
    #[arg(long, allow_hyphen_values = true)]
    t_det: Option<f64>,
    /// Trailing bound f(Y) of the quantile chain (default: two-sided Bonferroni).
    #[arg(long)]
    f_value: Option<f64>,
    /// Hypothesised mean, one value or K comma-separated values.
    #[arg(long, allow_hyphen_values = true)]
    mu_null: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    /// m=16, n=100, b=0:12:2, 10 replications.
    Desk,
    /// m=128, n=1000, b=0:40:2, 50 replications.
    Paper,
}

/// Average thresholds over simulated Gaussian fields on the m×m torus.
#[derive(Args)]
#[command(after_help = "Output columns: b, method, mean, sd, engine_draws, seed, engine_stderr.\n\
Methods: bonferroni, single_test, conc, compound, quant_bonf, quant_conc, oracle_quantile.")]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "paper")]
    profile: Profile,
    /// Side of the torus (a power of two); K = m².
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// `start:stop:step` or a comma-separated list of filter widths.
    #[arg(long)]
    b_grid: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    draws: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long = "method", alias = "methods", value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long)]
    oracle_samples: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Family-wise error rates of the thresholds on simulated fields.
#[derive(Args)]
#[command(after_help = "Output columns: m, n, b, method, trials, rate, stderr, exceedance, exceedance_stderr, mean_threshold.\n\
`rate` counts trials rejecting a true null; `exceedance` counts trials with phi(mean − mu) > threshold.")]
struct FwerArgs {
    #[arg(long, default_value_t = 16)]
    m: usize,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    b: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 1000)]
    draws: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    #[arg(
        long = "method",
        alias = "methods",
        value_delimiter = ',',
        default_value = "bonferroni,conc,compound,quant_bonf,quant_conc"
    )]
    methods: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    oracle_samples: usize,
    /// one or two
    #[arg(long, default_value = "two")]
    sided: String,
    /// True mean, one value or K comma-separated values.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    mu: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Resampling constants A, B, C, D with the accuracy index C/B.
#[derive(Args)]
#[command(after_help = "Output columns: scheme, n, A, B, C, D, C_over_B, complexity, accuracy.\n\
Where only bounds are known the conservative end is shown and `accuracy` lists the interval.")]
struct ConstantsArgs {
    #[arg(long = "scheme", alias = "schemes", value_delimiter = ',', required = true)]
    schemes: Vec<String>,
    #[arg(long)]
    n: usize,
    /// Replace bounds by Monte Carlo estimates with this many draws.
    #[arg(long, default_value_t = 0)]
    mc_draws: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Re-runs the configuration stored in the header of an output file.
#[derive(Args)]
struct ReplayArgs {
    file: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| CliError::usage(format!("b-grid: not a finite number: {t:?}")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step <= 0.0 || b < a {
                return Err(CliError::usage(format!("b-grid: bad range {s:?}")));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| a + i as f64 * step).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(CliError::usage(format!("b-grid: expected start:stop:step or a list, got {s:?}"))),
    }
}

fn default_alphas(alphas: Vec<f64>, alpha: f64) -> Vec<f64> {
    if alphas.is_empty() {
        vec![0.9 * alpha]
    } else {
        alphas
    }
}

fn simulate_config(a: SimulateArgs) -> Result<SimulateConfig, CliError> {
    let (name, m, n, grid, reps) = match a.profile {
        Profile::Desk => ("desk", 16, 100, "0:12:2", 10),
        Profile::Paper => ("paper", 128, 1000, "0:40:2", 50),
    };
    let alpha = a.alpha.unwrap_or(0.05);
    Ok(SimulateConfig {
        profile: name.to_string(),
        m: a.m.unwrap_or(m),
        n: a.n.unwrap_or(n),
        b_grid: parse_grid(a.b_grid.as_deref().unwrap_or(grid))?,
        reps: a.reps.unwrap_or(reps),
        draws: a.draws.unwrap_or(1000),
        alpha,
        delta: a.delta.unwrap_or(0.1),
        alphas: default_alphas(a.alphas.unwrap_or_default(), alpha),
        methods: a
            .methods
            .unwrap_or_else(|| ExperimentMethod::ALL.iter().map(|m| m.tag().to_string()).collect()),
        oracle_samples: a.oracle_samples.unwrap_or(1000),
        seed: a.seed,
    })
}

fn path_string(p: PathBuf) -> String {
    p.to_string_lossy().into_owned()
}

fn resolve(command: Command) -> Result<(RunConfig, Option<PathBuf>), CliError> {
    Ok(match command {
        Command::Threshold(a) => (
            RunConfig::Threshold(ThresholdConfig {
                input: path_string(a.input),
                methods: a.methods,
                scheme: a.scheme,
                phi: a.phi,
                alpha: a.alpha,
                delta: a.delta,
                alphas: default_alphas(a.alphas, a.alpha),
                draws: a.draws,
                seed: a.seed,
                sigma: a.sigma,
                bound: a.bound,
                lower: a.lower,
                t_det: a.t_det,
                f_value: a.f_value,
                mu_null: a.mu_null,
            }),
            a.out,
        ),
        Command::Simulate(a) => {
            let out = a.out.clone();
            (RunConfig::Simulate(simulate_config(a)?), out)
        }
        Command::Fwer(a) => (
            RunConfig::Fwer(FwerConfig {
                m: a.m,
                n: a.n,
                b: a.b,
                trials: a.trials,
                draws: a.draws,
                alpha: a.alpha,
                delta: a.delta,
                alphas: default_alphas(a.alphas, a.alpha),
                methods: a.methods,
                oracle_samples: a.oracle_samples,
                sided: a.sided,
                mu: a.mu,
                seed: a.seed,
            }),
            a.out,
        ),
        Command::Constants(a) => (
            RunConfig::Constants(ConstantsConfig {
                schemes: a.schemes,
                n: a.n,
                mc_draws: a.mc_draws,
                seed: a.seed,
            }),
            a.out,
        ),
        Command::Replay(a) => {
            let text = std::fs::read_to_string(&a.file)
                .map_err(|e| CliError::usage(format!("{}: {e}", a.file.display())))?;
            (RunConfig::from_header(&text)?, a.out)
        }
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::usage(e.to_string()))?;
    }
    let (cfg, out) = resolve(cli.command)?;
    let csv = if cli.dry_run { cfg.header()? } else { commands::execute(&cfg)? };
    match out {
        Some(path) => std::fs::write(&path, csv).map_err(|e| CliError::usage(format!("{}: {e}", path.display()))),
        None => std::io::stdout().lock().write_all(csv.as_bytes()).map_err(CliError::from),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}

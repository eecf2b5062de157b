use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hypercross::Error;

mod commands;
mod config;

use config::{parse_real, Real, RunConfig};

const EXIT_USAGE: u8 = 2;
const EXIT_TOLERANCE: u8 = 3;
const EXIT_CAPACITY: u8 = 4;

/// Step hyperbolic cross experiments for functions with power-logarithmic
/// mixed smoothness.
#[derive(Parser)]
#[command(name = "hypercross", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// Flat JSON file with any of the flag keys; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    r: Option<f64>,
    /// Comma-separated b_j; a single value applies to every coordinate.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    b: Option<Vec<f64>>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long, value_parser = parse_real)]
    p: Option<Real>,
    #[arg(long, value_parser = parse_real)]
    q: Option<Real>,
    #[arg(long, value_parser = parse_real)]
    theta: Option<Real>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long = "N")]
    n: Option<f64>,
    #[arg(long)]
    n_min: Option<f64>,
    #[arg(long)]
    n_max: Option<f64>,
    #[arg(long)]
    n_points: Option<usize>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `csv` or `json`.
    #[arg(long)]
    out: Option<String>,
}

impl Common {
    fn flags(&self) -> RunConfig {
        RunConfig {
            d: self.d,
            r: self.r,
            b: self.b.clone(),
            l: self.l,
            p: self.p,
            q: self.q,
            theta: self.theta,
            beta: self.beta,
            n: self.n,
            n_min: self.n_min,
            n_max: self.n_max,
            n_points: self.n_points,
            family: self.family.clone(),
            samples: self.samples,
            seed: self.seed,
            out: self.out.clone(),
        }
    }

    fn resolve(&self) -> hypercross::Result<RunConfig> {
        let base = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        Ok(base.overlay(&self.flags()))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Index-set counts and the cardinality ratio of Q(N) over an N grid.
    Sets(Common),
    /// Tail sums over the complement of χ(N) against shell sums.
    Lemmas(Common),
    /// Block and band-filter Besov norms of a polynomial file.
    Norms {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
    /// Kernel coefficient self-checks, or a kernel as a polynomial file.
    Kernels {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        selfcheck: bool,
        #[arg(long, default_value_t = 1024)]
        max_n: u64,
        #[arg(long, default_value_t = 8)]
        partition_s: u32,
        #[arg(long, default_value_t = 2)]
        dims: usize,
        #[arg(long)]
        fejer: Option<u64>,
        #[arg(long)]
        vallee_poussin: Option<u64>,
    },
    /// Projection errors against theoretical rates over an N grid.
    Rates(Common),
    /// Writes a lower-bound witness polynomial and a JSON sidecar.
    Witness(Common),
    /// Runs the verification suite; exits 3 if any section fails.
    VerifyAll {
        #[command(flatten)]
        common: Common,
        /// Comma-separated criterion numbers to run.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::ToleranceNotMet { .. } => EXIT_TOLERANCE,
        _ => EXIT_USAGE,
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("HYPERCROSS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("HYPERCROSS_THREADS must be a positive integer, got `{raw}`"))?;
    if n == 0 {
        return Err("HYPERCROSS_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cli: Cli) -> hypercross::Result<(commands::Output, Option<PathBuf>)> {
    let (result, output) = match &cli.command {
        Command::Sets(c) => (commands::sets(&c.resolve()?), c.output.clone()),
        Command::Lemmas(c) => (commands::lemmas(&c.resolve()?), c.output.clone()),
        Command::Norms { common, input } => (commands::norms(&common.resolve()?, input), common.output.clone()),
        Command::Kernels { common, selfcheck, max_n, partition_s, dims, fejer, vallee_poussin } => (
            commands::kernels(&commands::KernelArgs {
                selfcheck: *selfcheck,
                max_n: *max_n,
                partition_s: *partition_s,
                dims: *dims,
                fejer: *fejer,
                vallee_poussin: *vallee_poussin,
            }),
            common.output.clone(),
        ),
        Command::Rates(c) => (commands::rates(&c.resolve()?), c.output.clone()),
        Command::Witness(c) => return Ok((commands::witness(&c.resolve()?, c.output.as_deref())?, None)),
        Command::VerifyAll { common, only } => (commands::verify_all(&common.resolve()?, only), common.output.clone()),
    };
    Ok((result?, output))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    match run(cli) {
        Ok((out, path)) => {
            let written = match &path {
                Some(p) => std::fs::write(p, &out.text).map_err(|e| format!("cannot write {}: {e}", p.display())),
                None => std::io::stdout().write_all(out.text.as_bytes()).map_err(|e| e.to_string()),
            };
            if let Err(msg) = written {
                eprintln!("error: {msg}");
                return ExitCode::from(EXIT_USAGE);
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_TOLERANCE)
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

//! Command-line harness: width bounds, certificates, phase-transition and
//! accuracy sweeps, probe training traces and lemma checks, all as CSV.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use subsep::Activation;

pub mod angles;
pub mod commands;

pub use commands::{phase_rows, sweep_rows, SweepRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] subsep::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// `2` for bad flags or flag values, `1` for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Core(subsep::Error::Domain(_) | subsep::Error::UnsupportedActivation(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "subsep",
    version,
    about = "Random-feature separability of unions of subspaces"
)]
pub struct Cli {
    /// Master seed; every output is a function of the flags and this seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write CSV here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimum width guaranteeing separability with probability 1 − δ.
    Bound(BoundArgs),
    /// Certified-separable fraction over a (d, r, D) grid, quadratic features.
    Phase(PhaseArgs),
    /// Linear-probe train/test accuracy over a (d, r, D, K, activation) grid.
    Sweep(SweepArgs),
    /// Certificate eigenvalues for one random instance, one row per class.
    Certify(CertifyArgs),
    /// Per-epoch loss and accuracy of one probe training run.
    Probe(ProbeArgs),
    /// Monte-Carlo checks of the moment lemmas and the failure bound.
    VerifyLemmas(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    /// Subspace dimension.
    #[arg(long)]
    pub r: usize,
    /// Number of subspaces; above 2 the one-vs-rest bound is used.
    #[arg(long = "K", visible_alias = "k", default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Principal angles in radians: `pi/2,pi/6`, `0.3,1.1` or `all:pi/2`.
    /// With K > 2 each class uses the same (K−1)·r angles.
    #[arg(long)]
    pub theta: String,
}

#[derive(Debug, Clone, Args)]
pub struct PhaseArgs {
    #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
    pub d: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub r: Vec<usize>,
    /// Feature widths; defaults to powers of two.
    #[arg(
        long = "D",
        value_delimiter = ',',
        default_value = "1,2,4,8,16,32,64,128,256,512,1024,2048"
    )]
    pub width: Vec<usize>,
    #[arg(long, default_value_t = 25)]
    pub trials: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "128")]
    pub d: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub r: Vec<usize>,
    #[arg(long = "D", value_delimiter = ',', default_value = "64,256,1024")]
    pub width: Vec<usize>,
    #[arg(
        long = "K",
        visible_alias = "k",
        value_delimiter = ',',
        default_value = "2"
    )]
    pub k: Vec<usize>,
    /// `quadratic`, `relu`, `leaky_relu[:slope]`, `elu[:alpha]`, `gelu`, `identity`.
    #[arg(long, value_delimiter = ',', default_value = "quadratic,relu")]
    pub activations: Vec<Activation>,
    #[arg(long, default_value_t = 5000)]
    pub n_per_class: usize,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0.1)]
    pub weight_std: f64,
    #[arg(long, default_value_t = subsep::probe::DEFAULT_EPOCHS)]
    pub epochs: usize,
    #[arg(long, default_value_t = subsep::probe::DEFAULT_LEARNING_RATE)]
    pub lr: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long = "D")]
    pub width: usize,
    #[arg(long = "K", visible_alias = "k", default_value_t = 2)]
    pub k: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ProbeArgs {
    #[arg(long, default_value_t = 128)]
    pub d: usize,
    #[arg(long, default_value_t = 4)]
    pub r: usize,
    #[arg(long = "K", visible_alias = "k", default_value_t = 2)]
    pub k: usize,
    #[arg(long = "D", default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value = "quadratic")]
    pub activation: Activation,
    #[arg(long, default_value_t = 500)]
    pub n_per_class: usize,
    #[arg(long, default_value_t = subsep::probe::DEFAULT_EPOCHS)]
    pub epochs: usize,
    #[arg(long, default_value_t = subsep::probe::DEFAULT_LEARNING_RATE)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.1)]
    pub weight_std: f64,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Any of `order`, `isotropy`, `sandwich`, `bernstein`, `acceptance`,
    /// `spectrum`, `failure`, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub which: Vec<String>,
    /// Monte-Carlo samples per statistical check.
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    /// Degrees of freedom for the order-statistics check.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
    pub m: Vec<usize>,
    /// Ambient dimension of the sampled subspace pair.
    #[arg(long, default_value_t = 12)]
    pub d: usize,
    /// Dimension of the sampled subspace pair.
    #[arg(long, default_value_t = 3)]
    pub r: usize,
    #[arg(long, default_value_t = 3)]
    pub p_max: u32,
    /// Random pairs for the spectrum check.
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Trials for the failure-probability check.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Run the failure check at `min_width / divisor`.
    #[arg(long, default_value_t = 1.0)]
    pub width_divisor: f64,
}

/// Runs `cli` and writes its CSV to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let seed = cli.seed;
    match &cli.command {
        Command::Bound(a) => commands::bound(a, out),
        Command::Phase(a) => commands::phase(a, seed, out),
        Command::Sweep(a) => commands::sweep(a, seed, out),
        Command::Certify(a) => commands::certify(a, seed, out),
        Command::Probe(a) => commands::probe(a, seed, out),
        Command::VerifyLemmas(a) => commands::verify_lemmas(a, seed, out),
    }
}

/// Parses `args` (including the program name) and returns the CSV bytes.
pub fn run_to_bytes<I, S>(args: I) -> Result<Vec<u8>, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut buf = Vec::new();
    run(&cli, &mut buf)?;
    Ok(buf)
}

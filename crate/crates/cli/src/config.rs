//! Command-line surface and the validated run configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grafield::TauKind;

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_ALPHA: f64 = 0.15;
pub const DEFAULT_CHANGEPOINT_M: usize = 15;
pub const DEFAULT_CHANGEPOINT_K: usize = 2;
/// Components reported when `--k` is absent (capped by the graph size).
pub const DEFAULT_COMPONENTS: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "grafield", version, about = "Nonparametric spectral graph analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Graph summary, spectrum, embedding and a plot of the leading coordinate.
    Analyze(Flags),
    /// Spectrum and embedding only.
    Embed(Flags),
    /// Change points in a binary event matrix (CSV).
    Changepoint(Flags),
    /// Residuals of the operator identities on one graph.
    Compare(Flags),
    /// PageRank scores.
    Pagerank(Flags),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Operator {
    Laplacian,
    Modularity,
    Diffusion,
    Type1,
    Type2,
    Pagerank,
}

impl Operator {
    pub fn name(self) -> &'static str {
        match self {
            Operator::Laplacian => "laplacian",
            Operator::Modularity => "modularity",
            Operator::Diffusion => "diffusion",
            Operator::Type1 => "type1",
            Operator::Type2 => "type2",
            Operator::Pagerank => "pagerank",
        }
    }
}

#[derive(Debug, Args)]
pub struct Flags {
    /// Edge list (TSV or MatrixMarket) or, for `changepoint`, an event CSV.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "laplacian")]
    pub operator: Operator,
    /// laplace | kt | perks | minimax | stein | <float>
    #[arg(long, value_parser = parse_tau)]
    pub tau: Option<TauKind<f64>>,
    /// PageRank teleport probability in [0, 1].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number of LP basis functions.
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of components, or clusters for `changepoint`.
    #[arg(long)]
    pub k: Option<usize>,
    /// Diffusion time.
    #[arg(long)]
    pub t: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = "grafield-out")]
    pub out: PathBuf,
}

fn parse_tau(s: &str) -> Result<TauKind<f64>, String> {
    match s.parse::<TauKind<f64>>() {
        Ok(TauKind::Fixed(t)) if t < 0.0 => Err(format!("τ must be >= 0, got {t}")),
        Ok(kind) => Ok(kind),
        Err(_) => Err(format!("expected laplace, kt, perks, minimax, stein or a number, got '{s}'")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Analyze,
    Embed,
    Changepoint,
    Compare,
    Pagerank,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Analyze => "analyze",
            CommandKind::Embed => "embed",
            CommandKind::Changepoint => "changepoint",
            CommandKind::Compare => "compare",
            CommandKind::Pagerank => "pagerank",
        }
    }
}

/// Everything one run needs, checked for range errors.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub input: PathBuf,
    pub operator: Operator,
    pub tau: Option<TauKind<f64>>,
    pub alpha: f64,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub t: u32,
    /// Recorded in every report. None of the commands draws random numbers
    /// today, so equal configurations already give identical output.
    pub seed: u64,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> CliResult<Self> {
        let (command, f) = match cli.command {
            Command::Analyze(f) => (CommandKind::Analyze, f),
            Command::Embed(f) => (CommandKind::Embed, f),
            Command::Changepoint(f) => (CommandKind::Changepoint, f),
            Command::Compare(f) => (CommandKind::Compare, f),
            Command::Pagerank(f) => (CommandKind::Pagerank, f),
        };
        let alpha = f.alpha.unwrap_or(DEFAULT_ALPHA);
        if !(0.0..=1.0).contains(&alpha) {
            return Err(CliError::Usage(format!("--alpha must lie in [0, 1], got {alpha}")));
        }
        if f.m == Some(0) {
            return Err(CliError::Usage("--m must be at least 1".into()));
        }
        match (command, f.k) {
            (_, Some(0)) => return Err(CliError::Usage("--k must be at least 1".into())),
            (CommandKind::Changepoint, Some(1)) => {
                return Err(CliError::Usage("changepoint needs --k >= 2".into()))
            }
            _ => {}
        }
        if f.m.is_some() && !matches!(command, CommandKind::Changepoint) && f.operator != Operator::Laplacian {
            return Err(CliError::Usage("--m selects the LP basis and needs --operator laplacian".into()));
        }
        Ok(Self {
            command,
            input: f.input,
            operator: f.operator,
            tau: f.tau,
            alpha,
            m: f.m,
            k: f.k,
            t: f.t.unwrap_or(1),
            seed: f.seed,
            out: f.out,
        })
    }
}

/// Parses arguments, mapping clap's own exit statuses onto ours: help and
/// version are successes, everything else is a usage error.
pub fn parse_args<I, S>(args: I) -> Result<RunConfig, (i32, String)>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| {
        let code = if e.use_stderr() { 1 } else { 0 };
        (code, e.render().to_string())
    })?;
    RunConfig::from_cli(cli).map_err(|e| (e.exit_code(), e.to_string()))
}

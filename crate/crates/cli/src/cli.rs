use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "polarsim",
    version,
    about = "Opinion exchange with biased assimilation on the unit sphere"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one trajectory and write its trace.
    Simulate(SimulateArgs),
    /// Run many seeded trajectories and summarize them.
    Ensemble(EnsembleArgs),
    /// Build (and optionally execute) a constructive schedule.
    Construct(ConstructArgs),
    /// Synthetic-process and Monte Carlo experiments.
    Lab {
        #[command(subcommand)]
        verb: LabVerb,
    },
    /// Clusters, potentials and inactivity of a configuration file.
    Analyze(AnalyzeArgs),
    /// Print the constants table for (n, d, alpha).
    Constants(ConstantsArgs),
    /// Re-run the command recorded in a manifest.
    Rerun(RerunArgs),
}

/// Seed, thread count and output directory.
#[derive(Args, Debug, Clone)]
pub struct RunFlags {
    #[arg(long, env = "POLARSIM_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, default_value = "polarsim-out")]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitFamily {
    Uniform,
    Antipodal,
    Inactive,
}

/// Flags shared by the commands that evolve configurations.
#[derive(Args, Debug, Clone)]
pub struct ProcessFlags {
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[command(flatten)]
    pub run: RunFlags,
    /// Start from this configuration JSON; overrides --n, --d and --init-kind.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Project the opinions of --init onto the sphere instead of rejecting them.
    #[arg(long)]
    pub renormalize: bool,
    #[arg(long, value_enum, default_value = "uniform")]
    pub init_kind: InitFamily,
    /// Scatter of the antipodal family.
    #[arg(long, default_value_t = 0.0)]
    pub spread: f64,
    /// Cluster sizes of the inactive family, e.g. 3,3.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Log-uniform range LO,HI for tilts and scatter of the inactive family.
    #[arg(long, value_parser = parse_range)]
    pub scale: Option<(f64, f64)>,
    /// JSON n x n matrix of pair probabilities; uniform by default.
    #[arg(long)]
    pub pair_dist: Option<PathBuf>,
    /// `linear` or `piecewise:BETA`.
    #[arg(long, default_value = "linear", value_parser = parse_rule)]
    pub rule: RuleSpec,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: u64,
    #[arg(long, default_value_t = 1000)]
    pub sample_every: u64,
    /// Polarization tolerance, or `off`.
    #[arg(long, default_value = "1e-6", value_parser = parse_tol)]
    pub stop_polarized: OptF64,
    /// `EPS,EPS1,T` or `auto` (constants table): stop at the first active check.
    #[arg(long, value_parser = parse_active)]
    pub stop_active: Option<ActiveSpec>,
}

/// A number, or its absence spelled `off` / `auto` on the command line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptF64(pub Option<f64>);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RuleSpec {
    Linear,
    Piecewise(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ActiveSpec {
    Auto,
    Explicit { eps: f64, eps1: f64, period: u64 },
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub process: ProcessFlags,
}

#[derive(Args, Debug)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub process: ProcessFlags,
    #[arg(long, default_value_t = 100)]
    pub runs: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConstructVerb {
    ToInactive,
    Consistency,
    Amplify,
    Tighten,
    Collapse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Adaptive,
    #[value(alias = "paper-worst-case")]
    WorstCase,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[arg(value_enum)]
    pub verb: ConstructVerb,
    #[command(flatten)]
    pub process: ProcessFlags,
    /// Inactivity level for to-inactive and collapse: a number or `auto` (eps_base).
    #[arg(long, default_value = "auto", value_parser = parse_auto)]
    pub eps: OptF64,
    /// Cluster index for tighten.
    #[arg(long, default_value_t = 0)]
    pub block: usize,
    /// Cluster pair A,B for consistency and amplify; the delta0 pair by default.
    #[arg(long, value_parser = parse_index_pair)]
    pub blocks: Option<(usize, usize)>,
    /// Agents I0,J0 for collapse; the delta0 pair by default.
    #[arg(long, value_parser = parse_index_pair)]
    pub pair: Option<(usize, usize)>,
    #[arg(long, value_enum, default_value = "adaptive")]
    pub mode: ModeArg,
    /// Execute the schedule and verify its post-condition.
    #[arg(long)]
    pub execute: bool,
}

#[derive(Subcommand, Debug)]
pub enum LabVerb {
    /// Escape race of the two synthetic chains.
    TwoChain(TwoChainArgs),
    /// Tail of a drift-down walk against its Azuma bound.
    Azuma(AzumaArgs),
    /// Block inequalities and drift signs along real trajectories.
    BlockCheck(BlockCheckArgs),
    /// Exact drift of the sum of squared correlations on random configurations.
    DprimeScan(DprimeScanArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum P0Arg {
    TwoPoint,
    Deterministic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum P1Arg {
    Compliant,
    AlwaysUp,
}

#[derive(Args, Debug)]
pub struct TwoChainArgs {
    #[command(flatten)]
    pub run: RunFlags,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub t_max: u64,
    /// Overrides the shipped C.
    #[arg(long = "C")]
    pub c: Option<f64>,
    #[arg(long = "C-min")]
    pub c_min: Option<f64>,
    #[arg(long = "C-tilde")]
    pub c_tilde: Option<f64>,
    #[arg(long)]
    pub p0_init: Option<f64>,
    #[arg(long)]
    pub p1_init: Option<f64>,
    #[arg(long, value_enum, default_value = "two-point")]
    pub p0_law: P0Arg,
    #[arg(long, value_enum, default_value = "compliant")]
    pub p1_law: P1Arg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AzumaKernelArg {
    TwoPoint,
    Deterministic,
}

#[derive(Args, Debug)]
pub struct AzumaArgs {
    #[command(flatten)]
    pub run: RunFlags,
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    #[arg(long, default_value_t = 0.2)]
    pub c2: f64,
    /// One or more horizons, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "500")]
    pub t: Vec<u64>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, value_enum, default_value = "two-point")]
    pub kernel: AzumaKernelArg,
}

#[derive(Args, Debug)]
pub struct BlockCheckArgs {
    #[command(flatten)]
    pub run: RunFlags,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long)]
    pub probes: Option<usize>,
    #[arg(long)]
    pub replicas: Option<u64>,
}

#[derive(Args, Debug)]
pub struct DprimeScanArgs {
    #[command(flatten)]
    pub run: RunFlags,
    #[arg(long, default_value_t = 10_000)]
    pub configs: u64,
    /// `N` or `LO-HI`.
    #[arg(long, default_value = "2-8", value_parser = parse_span)]
    pub n: (usize, usize),
    /// `D` or `LO-HI`.
    #[arg(long, default_value = "2-5", value_parser = parse_span)]
    pub d: (usize, usize),
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Configuration JSON.
    #[arg(long)]
    pub init: PathBuf,
    #[arg(long)]
    pub renormalize: bool,
    /// Inactivity thresholds; eps_base of the file's (d, alpha) by default.
    #[arg(long)]
    pub eps0: Option<f64>,
    #[arg(long)]
    pub eps1: Option<f64>,
    /// Orthogonality tolerance for the separability check.
    #[arg(long, default_value_t = 1e-12)]
    pub tol_orth: f64,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConstantsArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Emit JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    /// Output directory for the replay; the recorded one by default.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected LO,HI, got `{s}`"))?;
    let (lo, hi) = (parse_f64(a)?, parse_f64(b)?);
    if !(lo > 0.0 && hi >= lo) {
        return Err(format!("need 0 < LO <= HI, got {lo}, {hi}"));
    }
    Ok((lo, hi))
}

fn parse_rule(s: &str) -> Result<RuleSpec, String> {
    match s.split_once(':') {
        None if s == "linear" => Ok(RuleSpec::Linear),
        Some(("piecewise", beta)) => Ok(RuleSpec::Piecewise(parse_f64(beta)?)),
        _ => Err(format!("expected `linear` or `piecewise:BETA`, got `{s}`")),
    }
}

fn parse_tol(s: &str) -> Result<OptF64, String> {
    if s == "off" {
        return Ok(OptF64(None));
    }
    let t = parse_f64(s)?;
    if t > 0.0 {
        Ok(OptF64(Some(t)))
    } else {
        Err(format!("tolerance must be positive, got {t}"))
    }
}

fn parse_auto(s: &str) -> Result<OptF64, String> {
    if s == "auto" {
        Ok(OptF64(None))
    } else {
        parse_f64(s).map(|x| OptF64(Some(x)))
    }
}

fn parse_active(s: &str) -> Result<ActiveSpec, String> {
    if s == "auto" {
        return Ok(ActiveSpec::Auto);
    }
    let parts: Vec<&str> = s.split(',').collect();
    let [eps, eps1, t] = parts[..] else {
        return Err(format!("expected EPS,EPS1,T or auto, got `{s}`"));
    };
    Ok(ActiveSpec::Explicit {
        eps: parse_f64(eps)?,
        eps1: parse_f64(eps1)?,
        period: t.trim().parse().map_err(|e| format!("`{t}`: {e}"))?,
    })
}

fn parse_index_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected A,B, got `{s}`"))?;
    let p = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    Ok((p(a)?, p(b)?))
}

fn parse_span(s: &str) -> Result<(usize, usize), String> {
    let p = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    match s.split_once('-') {
        Some((a, b)) => Ok((p(a)?, p(b)?)),
        None => {
            let v = p(s)?;
            Ok((v, v))
        }
    }
}

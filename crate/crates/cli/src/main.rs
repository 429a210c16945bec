//! `qwalk`: run, sweep and analyze the decohering Hadamard walk.
//!
//! Exit codes: 0 success, 1 I/O or numerical failure, 2 usage or
//! validation error, 3 first-order regime violation.

mod output;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qwalk::analysis::{self, MomentsRecord};
use qwalk::trajectories::{estimate_distribution, TrajectoryConfig};
use qwalk::{ChannelKind, CoinLabel, CoinState, Distribution, WalkConfig, WalkError};
use serde_json::{json, Value};
use thiserror::Error;

use output::Format;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Regime(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Regime(_) => 3,
        }
    }
}

impl From<WalkError> for CliError {
    fn from(e: WalkError) -> Self {
        match e {
            WalkError::InvalidArgument(_) => CliError::Usage(e.to_string()),
            WalkError::RegimeViolation(_) => CliError::Regime(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qwalk",
    version,
    about = "Coined quantum walk on the line under dephasing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact noiseless evolution.
    Walk(WalkArgs),
    /// Density-matrix evolution under a dephasing channel.
    Master(MasterArgs),
    /// Monte-Carlo trajectory estimate of the master-equation distribution.
    Traj(TrajArgs),
    /// Moments over a (channel, T, p) grid.
    Sweep(sweep::SweepArgs),
    /// Small-p slope or p-coefficient fit, emitted as JSON.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoinInit {
    /// |+1⟩
    Plus,
    /// |-1⟩
    Minus,
    /// (|-1⟩ + i|+1⟩)/√2
    Symmetric,
}

impl CoinInit {
    pub fn state(self) -> CoinState {
        match self {
            CoinInit::Plus => CoinLabel::Plus.into(),
            CoinInit::Minus => CoinLabel::Minus.into(),
            CoinInit::Symmetric => CoinState::symmetric(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CoinInit::Plus => "plus",
            CoinInit::Minus => "minus",
            CoinInit::Symmetric => "symmetric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum ChannelArg {
    Coin,
    Position,
    Both,
}

impl From<ChannelArg> for ChannelKind {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Coin => ChannelKind::CoinOnly,
            ChannelArg::Position => ChannelKind::PositionOnly,
            ChannelArg::Both => ChannelKind::Both,
        }
    }
}

#[derive(Debug, Args)]
struct WalkArgs {
    /// Number of steps.
    #[arg(long = "T")]
    steps: usize,
    #[arg(long, value_enum, default_value = "symmetric")]
    coin_init: CoinInit,
    /// Output directory; receives distribution.<fmt> and moments.<fmt>.
    /// Without it the moments are printed to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Args)]
struct MasterArgs {
    #[command(flatten)]
    walk: WalkArgs,
    /// Decoherence probability per step, in [0, 1].
    #[arg(long)]
    p: f64,
    #[arg(long, value_enum, default_value = "both")]
    channel: ChannelArg,
}

#[derive(Debug, Args)]
struct TrajArgs {
    #[command(flatten)]
    master: MasterArgs,
    #[arg(long, default_value_t = 10_000)]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AnalysisKind {
    /// Scaled small-p slope -(dσ/dp)/T² at one T.
    Slope,
    /// Joint fit of σ(T,p)/σ(T,0) ≈ 1 - c1·pT + c2·p.
    Coefficient,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long, value_enum)]
    analysis: AnalysisKind,
    /// Steps for the slope analysis.
    #[arg(long = "T", default_value_t = 200)]
    steps: usize,
    /// p grid for the slope analysis; defaults to {0, 0.05/T, 0.1/T}.
    #[arg(long, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    /// T values for the coefficient fit.
    #[arg(long = "T-list", value_delimiter = ',', default_value = "100,200,300")]
    steps_list: Vec<usize>,
    #[arg(long, value_enum, default_value = "both")]
    channel: ChannelArg,
    #[arg(long, value_enum, default_value = "symmetric")]
    coin_init: CoinInit,
    /// Fit synthetic data generated from the bound's bracket instead of
    /// simulating (self-test of the fit).
    #[arg(long)]
    synthetic_bound: bool,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Output JSON file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn validate_p(p: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--p must lie in [0, 1], got {p}")))
    }
}

pub fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Failed(format!("cannot start worker pool: {e}")))
}

fn emit_run(
    args: &WalkArgs,
    metadata: Value,
    dist: &Distribution,
    standard_errors: Option<&[f64]>,
    record: MomentsRecord,
) -> Result<(), CliError> {
    let records = [record];
    let moments = match args.format {
        Format::Csv => output::moments_csv(&records),
        Format::Json => {
            output::json_document(metadata.clone(), "moments", output::moments_rows(&records))
        }
    };
    let Some(dir) = &args.out else {
        print!("{moments}");
        return Ok(());
    };
    let ext = args.format.extension();
    let distribution = match args.format {
        Format::Csv => output::distribution_csv(dist),
        Format::Json => output::json_document(
            metadata,
            "distribution",
            output::distribution_rows(dist, standard_errors),
        ),
    };
    output::write_file(&dir.join(format!("distribution.{ext}")), &distribution)?;
    output::write_file(&dir.join(format!("moments.{ext}")), &moments)
}

fn cmd_walk(args: &WalkArgs) -> Result<(), CliError> {
    let cfg = WalkConfig::new(args.steps, 0.0)?.with_init(args.coin_init.state());
    let dist = qwalk::distribution(&qwalk::evolve_pure(&cfg)?);
    let record = MomentsRecord::new(args.steps, 0.0, None, analysis::moments(&dist)?);
    let metadata = json!({
        "command": "walk", "T": args.steps, "p": 0.0, "coin_init": args.coin_init.name(),
    });
    emit_run(args, metadata, &dist, None, record)
}

fn master_config(args: &MasterArgs) -> Result<WalkConfig, CliError> {
    validate_p(args.p)?;
    Ok(WalkConfig::new(args.walk.steps, args.p)?
        .with_channel(args.channel.into())
        .with_init(args.walk.coin_init.state()))
}

fn cmd_master(args: &MasterArgs) -> Result<(), CliError> {
    let cfg = master_config(args)?;
    let dist = qwalk::diagonal_distribution(&qwalk::evolve_master(&cfg)?)?;
    let record = MomentsRecord::new(
        cfg.steps,
        cfg.p,
        Some(cfg.channel),
        analysis::moments(&dist)?,
    );
    let metadata = json!({
        "command": "master", "T": cfg.steps, "p": cfg.p, "channel": cfg.channel.name(),
        "coin_init": args.walk.coin_init.name(),
    });
    emit_run(&args.walk, metadata, &dist, None, record)
}

fn cmd_traj(args: &TrajArgs) -> Result<(), CliError> {
    let cfg = master_config(&args.master)?;
    let tcfg = TrajectoryConfig::new(cfg, args.runs, args.seed)?;
    let est = thread_pool(args.jobs)?.install(|| estimate_distribution(&tcfg))?;
    let record = MomentsRecord::new(
        cfg.steps,
        cfg.p,
        Some(cfg.channel),
        analysis::moments(&est.probs)?,
    );
    let metadata = json!({
        "command": "traj", "T": cfg.steps, "p": cfg.p, "channel": cfg.channel.name(),
        "coin_init": args.master.walk.coin_init.name(), "runs": args.runs, "seed": args.seed,
    });
    emit_run(
        &args.master.walk,
        metadata,
        &est.probs,
        Some(&est.standard_errors),
        record,
    )
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let channel: ChannelKind = args.channel.into();
    let init = args.coin_init.state();
    let (inputs, result) = match args.analysis {
        AnalysisKind::Slope => {
            let t = args.steps as f64;
            let grid = args
                .p_grid
                .clone()
                .unwrap_or_else(|| vec![0.0, 0.05 / t, 0.1 / t]);
            analysis::validate_small_p_grid(args.steps, &grid)?;
            let est = thread_pool(args.jobs)?
                .install(|| analysis::scaled_small_p_slope(args.steps, channel, &grid, init))?;
            let inputs = json!({
                "analysis": "slope", "T": args.steps, "p_grid": grid, "channel": channel.name(),
                "coin_init": args.coin_init.name(),
            });
            (
                inputs,
                serde_json::to_value(est).expect("slope estimate serializes"),
            )
        }
        AnalysisKind::Coefficient => {
            let fit = if args.synthetic_bound {
                analysis::fit_p_coefficients(&analysis::bound_bracket_samples(&args.steps_list))?
            } else {
                thread_pool(args.jobs)?
                    .install(|| analysis::p_coefficient_fit(&args.steps_list, channel, init))?
            };
            let inputs = json!({
                "analysis": "coefficient", "T_list": args.steps_list, "channel": channel.name(),
                "coin_init": args.coin_init.name(), "synthetic_bound": args.synthetic_bound,
                "pT_grid": analysis::COEFFICIENT_PT_GRID,
            });
            (inputs, serde_json::to_value(fit).expect("fit serializes"))
        }
    };
    let doc = output::json_document(json!({ "inputs": inputs }), "result", result);
    match &args.out {
        Some(path) => output::write_file(path, &doc),
        None => {
            print!("{doc}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Walk(args) => cmd_walk(&args),
        Command::Master(args) => cmd_master(&args),
        Command::Traj(args) => cmd_traj(&args),
        Command::Sweep(args) => sweep::cmd_sweep(&args),
        Command::Analyze(args) => cmd_analyze(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qwalk: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

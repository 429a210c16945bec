//! Grid sweeps over (channel, T, p).
//!
//! Grid points run concurrently on a pool of `--jobs` threads. Rows are
//! sorted by (channel, T, p) after collection, so the output does not
//! depend on scheduling. The trajectory engine reuses `--seed` as the
//! master seed of every grid point.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use qwalk::analysis::{self, MomentsRecord};
use qwalk::trajectories::{estimate_distribution, TrajectoryConfig};
use qwalk::{ChannelKind, WalkConfig};
use rayon::prelude::*;
use serde_json::json;

use crate::output::{self, Format};
use crate::{validate_p, ChannelArg, CliError, CoinInit};

/// Fig. 1 style reproduction grid.
pub const FIG1_STEPS: [usize; 6] = [20, 50, 100, 200, 300, 500];
pub const FIG1_P_GRID: &str = "log:1e-4:1:25";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Master,
    Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// T ∈ {20,50,100,200,300,500}, 25 log-spaced p in [1e-4, 1], both.
    Fig1,
}

/// `log:lo:hi:n` or `lin:lo:hi:n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    log: bool,
    lo: f64,
    hi: f64,
    n: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let last = (self.n - 1) as f64;
        (0..self.n)
            .map(|k| {
                if k + 1 == self.n {
                    return self.hi;
                }
                let f = k as f64 / last;
                if self.log {
                    (self.lo.ln() + f * (self.hi.ln() - self.lo.ln())).exp()
                } else {
                    self.lo + f * (self.hi - self.lo)
                }
            })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [kind, lo, hi, n] = parts.as_slice() else {
            return Err(format!(
                "grid spec '{s}' must look like log:lo:hi:n or lin:lo:hi:n"
            ));
        };
        let log = match *kind {
            "log" => true,
            "lin" => false,
            other => return Err(format!("unknown grid kind '{other}'")),
        };
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|e| format!("bad grid bound '{v}': {e}"))
        };
        let (lo, hi) = (num(lo)?, num(hi)?);
        let n: usize = n.parse().map_err(|e| format!("bad grid size '{n}': {e}"))?;
        if n == 0 || lo.is_nan() || hi.is_nan() || lo > hi || (log && lo <= 0.0) {
            return Err(format!("degenerate grid '{s}'"));
        }
        Ok(GridSpec { log, lo, hi, n })
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated step counts.
    #[arg(long = "T", value_delimiter = ',')]
    steps: Vec<usize>,
    /// Comma-separated p values.
    #[arg(long, value_delimiter = ',', conflicts_with = "p_grid")]
    p: Vec<f64>,
    /// Generated p grid, e.g. log:1e-4:1:25 or lin:0:1:11.
    #[arg(long)]
    p_grid: Option<GridSpec>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "both")]
    channel: Vec<ChannelArg>,
    #[arg(long, value_enum, default_value = "symmetric")]
    coin_init: CoinInit,
    #[arg(long, value_enum, default_value = "master")]
    engine: Engine,
    /// Trajectories per grid point (trajectory engine only).
    #[arg(long, default_value_t = 10_000)]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Fill T, p and channel from a named grid when they are not given.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub steps: Vec<usize>,
    pub ps: Vec<f64>,
    pub channels: Vec<ChannelKind>,
}

impl SweepSpec {
    fn from_args(args: &SweepArgs) -> Result<Self, CliError> {
        let mut steps = args.steps.clone();
        let mut ps = match &args.p_grid {
            Some(g) => g.values(),
            None => args.p.clone(),
        };
        if args.preset == Some(Preset::Fig1) {
            if steps.is_empty() {
                steps = FIG1_STEPS.to_vec();
            }
            if ps.is_empty() {
                ps = FIG1_P_GRID
                    .parse::<GridSpec>()
                    .expect("preset grid parses")
                    .values();
            }
        }
        if steps.is_empty() || ps.is_empty() {
            return Err(CliError::Usage(
                "sweep needs non-empty --T and --p (or --p-grid / --preset)".into(),
            ));
        }
        for &p in &ps {
            validate_p(p)?;
        }
        let mut channels: Vec<ChannelKind> = args.channel.iter().map(|&c| c.into()).collect();
        channels.sort();
        channels.dedup();
        steps.sort_unstable();
        steps.dedup();
        ps.sort_by(f64::total_cmp);
        ps.dedup();
        Ok(SweepSpec {
            steps,
            ps,
            channels,
        })
    }

    fn points(&self) -> Vec<(ChannelKind, usize, f64)> {
        let mut pts = Vec::new();
        for &c in &self.channels {
            for &t in &self.steps {
                for &p in &self.ps {
                    pts.push((c, t, p));
                }
            }
        }
        pts
    }
}

fn run_point(
    args: &SweepArgs,
    (channel, steps, p): (ChannelKind, usize, f64),
) -> Result<MomentsRecord, CliError> {
    let cfg = WalkConfig::new(steps, p)?
        .with_channel(channel)
        .with_init(args.coin_init.state());
    match args.engine {
        Engine::Master => Ok(analysis::master_moments(&cfg)?),
        Engine::Trajectory => {
            let est = estimate_distribution(&TrajectoryConfig::new(cfg, args.runs, args.seed)?)?;
            Ok(MomentsRecord::new(
                steps,
                p,
                Some(channel),
                analysis::moments(&est.probs)?,
            ))
        }
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let spec = SweepSpec::from_args(args)?;
    let points = spec.points();
    let mut rows: Vec<MomentsRecord> = crate::thread_pool(args.jobs)?.install(|| {
        points
            .par_iter()
            .map(|&pt| run_point(args, pt))
            .collect::<Result<_, _>>()
    })?;
    rows.sort_by(|a, b| {
        (a.channel, a.steps)
            .cmp(&(b.channel, b.steps))
            .then(a.p.total_cmp(&b.p))
    });

    let text = match args.format {
        Format::Csv => output::moments_csv(&rows),
        Format::Json => {
            let engine = match args.engine {
                Engine::Master => "master",
                Engine::Trajectory => "trajectory",
            };
            let metadata = json!({
                "command": "sweep",
                "engine": engine,
                "seed": args.seed,
                "runs": if args.engine == Engine::Trajectory { Some(args.runs) } else { None },
                "coin_init": args.coin_init.name(),
                "grid": {
                    "T": spec.steps,
                    "p": spec.ps,
                    "channel": spec.channels.iter().map(|c| c.name()).collect::<Vec<_>>(),
                },
            });
            output::json_document(metadata, "moments", output::moments_rows(&rows))
        }
    };
    match &args.out {
        Some(path) => output::write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs() {
        let g: GridSpec = "log:1e-4:1:25".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 25);
        assert_eq!(v[24], 1.0);
        assert!((v[0] - 1e-4).abs() < 1e-18);
        assert!((v[6] - 1e-3).abs() < 1e-15);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(
            "lin:0:1:5".parse::<GridSpec>().unwrap().values(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert!("log:0:1:5".parse::<GridSpec>().is_err());
        assert!("lin:1:0:5".parse::<GridSpec>().is_err());
        assert!("cubic:0:1:5".parse::<GridSpec>().is_err());
        assert!("lin:0:1".parse::<GridSpec>().is_err());
    }
}

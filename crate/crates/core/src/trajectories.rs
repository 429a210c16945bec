//! Monte-Carlo unravelling of the dephasing master equation.
//!
//! A trajectory evolves a pure state. After every unitary step a
//! decoherence event fires with probability `p`; the state is then measured
//! in the channel basis (Born rule) and renormalized. Averaging the final
//! joint-basis samples over many trajectories reproduces the diagonal of the
//! master-equation density matrix.
//!
//! # Seeding
//!
//! Run `k` under master seed `s` draws from `ChaCha8Rng::seed_from_u64(s)`
//! switched to stream `k`, so any run can be replayed on its own and the
//! aggregate does not depend on how runs are spread over threads.
//! [`run_trajectory`] with seed `s` is run `0` of that family. When `p = 0`
//! no event draw is made at all, so noiseless trajectories consume only the
//! final sampling draw.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channels::{ChannelKind, WalkConfig};
use crate::error::{invalid, Result};
use crate::kernel;
use crate::lattice::{CoinLabel, Distribution, PureState};
use crate::C64;

const BATCH: u64 = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub walk: WalkConfig,
    pub n_runs: u64,
    pub seed: u64,
}

impl TrajectoryConfig {
    pub fn new(walk: WalkConfig, n_runs: u64, seed: u64) -> Result<Self> {
        if n_runs == 0 {
            return Err(invalid("n_runs must be at least 1"));
        }
        walk.validate()?;
        Ok(Self { walk, n_runs, seed })
    }
}

/// Empirical joint distribution with per-cell binomial standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedDistribution {
    pub probs: Distribution,
    pub standard_errors: Vec<f64>,
    pub n_runs: u64,
    /// Raw outcome counts, flat-indexed like `probs`.
    pub counts: Vec<u64>,
}

impl EstimatedDistribution {
    /// `Σ` of the per-cell standard errors.
    pub fn aggregate_standard_error(&self) -> f64 {
        self.standard_errors.iter().sum()
    }
}

/// The generator for run `run` under `master_seed`.
pub fn run_rng(master_seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(run);
    rng
}

/// Draws a flat index with probability `weights[i] / Σ weights` among
/// `range`.
fn sample_index<R: Rng + ?Sized>(
    rng: &mut R,
    range: std::ops::Range<usize>,
    weight: impl Fn(usize) -> f64,
) -> usize {
    let total: f64 = range.clone().map(&weight).sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = range.start;
    for i in range {
        let w = weight(i);
        if w > 0.0 {
            acc += w;
            last = i;
            if target < acc {
                return i;
            }
        }
    }
    last
}

/// Non-selective measurement in the channel basis, realized by sampling one
/// outcome and projecting onto it.
pub fn collapse<R: Rng + ?Sized>(state: &mut PureState, channel: ChannelKind, rng: &mut R) {
    let range = kernel::active_range(state.horizon(), state.time());
    let amps = state.amplitudes_mut();
    let zero = C64::new(0.0, 0.0);
    match channel {
        ChannelKind::Both => {
            let i = sample_index(rng, range.clone(), |i| amps[i].norm_sqr());
            amps[range].fill(zero);
            amps[i] = C64::new(1.0, 0.0);
        }
        ChannelKind::CoinOnly => {
            let weight = |c: usize| -> f64 {
                range
                    .clone()
                    .filter(|i| i % 2 == c)
                    .map(|i| amps[i].norm_sqr())
                    .sum()
            };
            let (w0, w1) = (weight(0), weight(1));
            let keep = if rng.random::<f64>() * (w0 + w1) < w0 {
                0
            } else {
                1
            };
            let scale = 1.0 / if keep == 0 { w0 } else { w1 }.sqrt();
            for i in range {
                if i % 2 == keep {
                    amps[i] *= scale;
                } else {
                    amps[i] = zero;
                }
            }
        }
        ChannelKind::PositionOnly => {
            let site_start = range.start / 2;
            let sites = site_start..range.end / 2;
            let s = sample_index(rng, sites, |s| {
                amps[2 * s].norm_sqr() + amps[2 * s + 1].norm_sqr()
            });
            let scale = 1.0 / (amps[2 * s].norm_sqr() + amps[2 * s + 1].norm_sqr()).sqrt();
            let (a, b) = (amps[2 * s] * scale, amps[2 * s + 1] * scale);
            amps[range].fill(zero);
            amps[2 * s] = a;
            amps[2 * s + 1] = b;
        }
    }
}

/// Evolves one trajectory for `walk.steps` steps and returns the final
/// (unmeasured) pure state.
pub fn evolve_trajectory<R: Rng + ?Sized>(walk: &WalkConfig, rng: &mut R) -> Result<PureState> {
    walk.validate()?;
    let mut state = PureState::at_origin(walk.init, walk.steps);
    for _ in 0..walk.steps {
        state.step(&walk.coin)?;
        if walk.p > 0.0 && rng.random::<f64>() < walk.p {
            collapse(&mut state, walk.channel, rng);
        }
    }
    Ok(state)
}

fn sample_final<R: Rng + ?Sized>(walk: &WalkConfig, rng: &mut R) -> Result<usize> {
    let state = evolve_trajectory(walk, rng)?;
    let range = kernel::active_range(state.horizon(), state.time());
    let amps = state.amplitudes();
    Ok(sample_index(rng, range, |i| amps[i].norm_sqr()))
}

/// One trajectory followed by a joint-basis measurement; deterministic in
/// `seed`.
pub fn run_trajectory(walk: &WalkConfig, seed: u64) -> Result<(i64, CoinLabel)> {
    let mut rng = run_rng(seed, 0);
    let i = sample_final(walk, &mut rng)?;
    Ok((kernel::site_of(walk.steps, i), CoinLabel::from_index(i % 2)))
}

/// Empirical frequencies over `n_runs` trajectories. Runs execute on the
/// current rayon pool; the result is bit-identical for any pool size.
pub fn estimate_distribution(config: &TrajectoryConfig) -> Result<EstimatedDistribution> {
    if config.n_runs == 0 {
        return Err(invalid("n_runs must be at least 1"));
    }
    let walk = config.walk;
    walk.validate()?;
    let dim = 2 * (2 * walk.steps + 1);
    let n_batches = config.n_runs.div_ceil(BATCH);

    let counts = (0..n_batches)
        .into_par_iter()
        .map(|b| -> Result<Vec<u64>> {
            let mut counts = vec![0u64; dim];
            let end = ((b + 1) * BATCH).min(config.n_runs);
            for run in b * BATCH..end {
                let mut rng = run_rng(config.seed, run);
                counts[sample_final(&walk, &mut rng)?] += 1;
            }
            Ok(counts)
        })
        .try_reduce(
            || vec![0u64; dim],
            |mut acc, c| {
                acc.iter_mut().zip(c).for_each(|(a, c)| *a += c);
                Ok(acc)
            },
        )?;

    let n = config.n_runs as f64;
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let standard_errors = probs.iter().map(|&p| (p * (1.0 - p) / n).sqrt()).collect();
    Ok(EstimatedDistribution {
        probs: Distribution::from_probs(walk.steps, walk.steps, probs)?,
        standard_errors,
        n_runs: config.n_runs,
        counts,
    })
}

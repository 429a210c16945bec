//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every exported function returns a flat `Float64Array`. The `*_data`
//! functions hold the logic and are usable natively.

use qwalk::analysis::{master_moments, moments};
use qwalk::theory::sigma_bound;
use qwalk::{
    diagonal_distribution, distribution as pure_distribution, estimate_distribution, evolve_master,
    evolve_pure, ChannelKind, CoinLabel, CoinState, Distribution, TrajectoryConfig, WalkConfig,
};
use wasm_bindgen::prelude::*;

/// Largest T the page may request; density matrices grow as T².
pub const MAX_STEPS: usize = 200;
pub const MAX_RUNS: u64 = 200_000;

fn parse_channel(name: &str) -> Result<ChannelKind, String> {
    name.parse::<ChannelKind>().map_err(|e| e.to_string())
}

fn parse_init(name: &str) -> Result<CoinState, String> {
    match name {
        "plus" => Ok(CoinLabel::Plus.into()),
        "minus" => Ok(CoinLabel::Minus.into()),
        "symmetric" => Ok(CoinState::symmetric()),
        other => Err(format!("unknown coin start '{other}'")),
    }
}

fn config(steps: usize, p: f64, channel: &str, init: &str) -> Result<WalkConfig, String> {
    if steps > MAX_STEPS {
        return Err(format!("T is limited to {MAX_STEPS} in the browser"));
    }
    Ok(WalkConfig::new(steps, p)
        .map_err(|e| e.to_string())?
        .with_channel(parse_channel(channel)?)
        .with_init(parse_init(init)?))
}

fn marginals(dist: &Distribution) -> Vec<f64> {
    let t = dist.time() as i64;
    (-t..=t).map(|x| dist.marginal(x)).collect()
}

/// Position marginals `P(x)` for `x = -T..=T`, followed by mean and σ.
pub fn distribution_data(
    steps: usize,
    p: f64,
    channel: &str,
    init: &str,
) -> Result<Vec<f64>, String> {
    let cfg = config(steps, p, channel, init)?;
    let dist = if p == 0.0 {
        pure_distribution(&evolve_pure(&cfg).map_err(|e| e.to_string())?)
    } else {
        diagonal_distribution(&evolve_master(&cfg).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
    };
    let m = moments(&dist).map_err(|e| e.to_string())?;
    let mut out = marginals(&dist);
    out.extend([m.mean, m.sigma]);
    Ok(out)
}

/// `points` log-spaced p in `[p_min, 1]`, flattened as `(p, σ, bound)`.
/// The bound is `NaN` where pT exceeds its regime.
pub fn sigma_curve_data(
    steps: usize,
    channel: &str,
    init: &str,
    p_min: f64,
    points: usize,
) -> Result<Vec<f64>, String> {
    if !(p_min > 0.0 && p_min < 1.0) || points < 2 {
        return Err("need 0 < p_min < 1 and at least two points".into());
    }
    let mut out = Vec::with_capacity(3 * points);
    for k in 0..points {
        let p = (p_min.ln() * (1.0 - k as f64 / (points - 1) as f64)).exp();
        let sigma = master_moments(&config(steps, p, channel, init)?)
            .map_err(|e| e.to_string())?
            .sigma;
        let bound = sigma_bound(steps, p).map_err(|e| e.to_string())?;
        out.extend([
            p,
            sigma,
            if bound.in_regime {
                bound.value
            } else {
                f64::NAN
            },
        ]);
    }
    Ok(out)
}

/// Trajectory histogram over `x = -T..=T` with per-site standard errors
/// appended, i.e. `2(2T+1)` values.
pub fn trajectory_data(
    steps: usize,
    p: f64,
    channel: &str,
    init: &str,
    runs: u32,
    seed: u32,
) -> Result<Vec<f64>, String> {
    if runs as u64 > MAX_RUNS {
        return Err(format!("runs are limited to {MAX_RUNS} in the browser"));
    }
    let cfg = config(steps, p, channel, init)?;
    let est = estimate_distribution(
        &TrajectoryConfig::new(cfg, runs as u64, seed as u64).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let probs = marginals(&est.probs);
    let n = runs as f64;
    let errs: Vec<f64> = probs.iter().map(|&q| (q * (1.0 - q) / n).sqrt()).collect();
    Ok(probs.into_iter().chain(errs).collect())
}

#[wasm_bindgen]
pub fn distribution(steps: usize, p: f64, channel: &str, init: &str) -> Result<Vec<f64>, JsError> {
    distribution_data(steps, p, channel, init).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sigmaCurve)]
pub fn sigma_curve(
    steps: usize,
    channel: &str,
    init: &str,
    p_min: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    sigma_curve_data(steps, channel, init, p_min, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn trajectories(
    steps: usize,
    p: f64,
    channel: &str,
    init: &str,
    runs: u32,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    trajectory_data(steps, p, channel, init, runs, seed).map_err(|e| JsError::new(&e))
}

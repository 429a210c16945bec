//! Moments of position distributions, small-p slopes of σ(T,p) and the
//! joint fit of the first-order p coefficients.
//!
//! σ is always measured from the origin, `σ = √⟨x²⟩`, not about the mean.

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{diagonal_distribution, evolve_master, ChannelKind, WalkConfig};
use crate::error::{invalid, Result, WalkError};
use crate::lattice::{CoinState, Distribution};
use crate::theory::FIRST_ORDER_PT_LIMIT;

const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub second_moment: f64,
    /// `√second_moment`.
    pub sigma: f64,
}

impl Moments {
    /// `⟨x²⟩ - ⟨x⟩²`.
    pub fn centered_variance(&self) -> f64 {
        self.second_moment - self.mean * self.mean
    }
}

pub fn moments(dist: &Distribution) -> Result<Moments> {
    let total = dist.total();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(invalid(format!(
            "distribution is not normalized: total = {total}"
        )));
    }
    let (mut mean, mut m2) = (0.0, 0.0);
    for (x, _, p) in dist.cells() {
        let x = x as f64;
        mean += x * p;
        m2 += x * x * p;
    }
    Ok(Moments {
        mean,
        second_moment: m2,
        sigma: m2.sqrt(),
    })
}

/// Moments tagged with the run that produced them. `channel` is `None` for
/// noiseless runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentsRecord {
    #[serde(rename = "T")]
    pub steps: usize,
    pub p: f64,
    pub channel: Option<ChannelKind>,
    pub mean: f64,
    pub second_moment: f64,
    pub sigma: f64,
}

impl MomentsRecord {
    pub fn new(steps: usize, p: f64, channel: Option<ChannelKind>, m: Moments) -> Self {
        Self {
            steps,
            p,
            channel,
            mean: m.mean,
            second_moment: m.second_moment,
            sigma: m.sigma,
        }
    }
}

/// Master-equation moments for one configuration.
pub fn master_moments(config: &WalkConfig) -> Result<MomentsRecord> {
    let rho = evolve_master(config)?;
    let m = moments(&diagonal_distribution(&rho)?)?;
    Ok(MomentsRecord::new(
        config.steps,
        config.p,
        Some(config.channel),
        m,
    ))
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn fit_affine(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(WalkError::FitFailure(
            "affine fit needs at least two paired points".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= f64::EPSILON * mx.abs().max(1.0) {
        return Err(WalkError::FitFailure("abscissae are degenerate".into()));
    }
    let slope = sxy / sxx;
    Ok((my - slope * mx, slope))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeEstimate {
    #[serde(rename = "T")]
    pub steps: usize,
    /// `-(dσ/dp)/T²` from the affine fit.
    pub scaled_slope: f64,
    pub p_grid: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub method: &'static str,
}

/// Checks a small-p grid: at least two points, starts at `p = 0`, strictly
/// increasing and with every `pT ≤ 0.2`.
pub fn validate_small_p_grid(steps: usize, p_grid: &[f64]) -> Result<()> {
    if p_grid.len() < 2 {
        return Err(invalid("small-p grid needs at least two points"));
    }
    if p_grid[0] != 0.0 {
        return Err(invalid("small-p grid must start at p = 0"));
    }
    if p_grid.windows(2).any(|w| w[1].is_nan() || w[1] <= w[0]) {
        return Err(invalid("small-p grid must be strictly increasing"));
    }
    let worst = p_grid.iter().copied().fold(0.0, f64::max) * steps as f64;
    if worst > FIRST_ORDER_PT_LIMIT {
        return Err(WalkError::RegimeViolation(format!(
            "pT = {worst} exceeds {FIRST_ORDER_PT_LIMIT} at T = {steps}"
        )));
    }
    Ok(())
}

/// Scaled slope from already computed `σ(T, p)` samples.
pub fn scaled_slope_from_samples(
    steps: usize,
    p_grid: &[f64],
    sigmas: &[f64],
) -> Result<SlopeEstimate> {
    validate_small_p_grid(steps, p_grid)?;
    let (_, slope) = fit_affine(p_grid, sigmas)?;
    let t = steps as f64;
    Ok(SlopeEstimate {
        steps,
        scaled_slope: -slope / (t * t),
        p_grid: p_grid.to_vec(),
        sigmas: sigmas.to_vec(),
        method: "least-squares-affine",
    })
}

/// σ(T, p) at every grid point; grid points are evaluated in parallel.
pub fn sigma_curve(
    steps: usize,
    channel: ChannelKind,
    p_grid: &[f64],
    init: CoinState,
) -> Result<Vec<f64>> {
    p_grid
        .par_iter()
        .map(|&p| {
            let cfg = WalkConfig::new(steps, p)?
                .with_channel(channel)
                .with_init(init);
            Ok(master_moments(&cfg)?.sigma)
        })
        .collect()
}

/// Runs the master equation over `p_grid` and returns `-(dσ/dp)/T²`.
pub fn scaled_small_p_slope(
    steps: usize,
    channel: ChannelKind,
    p_grid: &[f64],
    init: CoinState,
) -> Result<SlopeEstimate> {
    validate_small_p_grid(steps, p_grid)?;
    let sigmas = sigma_curve(steps, channel, p_grid, init)?;
    scaled_slope_from_samples(steps, p_grid, &sigmas)
}

/// One observation `σ(T,p)/σ(T,0)` for the coefficient fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioSample {
    #[serde(rename = "T")]
    pub steps: usize,
    pub p: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientFit {
    /// Coefficient of `-pT`.
    pub c1: f64,
    /// Coefficient of `+p`.
    pub c2: f64,
    pub samples: Vec<RatioSample>,
}

/// Least-squares fit of `ratio ≈ 1 - c1·pT + c2·p` over all samples.
pub fn fit_p_coefficients(samples: &[RatioSample]) -> Result<CoefficientFit> {
    // normal equations for features u = -pT, v = p against r - 1
    let (mut suu, mut suv, mut svv, mut sur, mut svr) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for s in samples {
        let u = -s.p * s.steps as f64;
        let v = s.p;
        let r = s.ratio - 1.0;
        suu += u * u;
        suv += u * v;
        svv += v * v;
        sur += u * r;
        svr += v * r;
    }
    let det = suu * svv - suv * suv;
    if det.is_nan() || det.abs() <= 1e-12 * suu * svv || suu == 0.0 {
        return Err(WalkError::FitFailure(
            "design matrix is singular; need p > 0 samples at several distinct T".into(),
        ));
    }
    Ok(CoefficientFit {
        c1: (sur * svv - svr * suv) / det,
        c2: (svr * suu - sur * suv) / det,
        samples: samples.to_vec(),
    })
}

/// `pT` values sampled for each `T` by [`p_coefficient_fit`].
pub const COEFFICIENT_PT_GRID: [f64; 4] = [0.0025, 0.005, 0.0075, 0.01];

/// The p grid used for a given `T`: `p = pT/T` over [`COEFFICIENT_PT_GRID`].
pub fn coefficient_p_grid(steps: usize) -> Vec<f64> {
    COEFFICIENT_PT_GRID
        .iter()
        .map(|pt| pt / steps as f64)
        .collect()
}

/// Runs the master equation over `T_list × coefficient_p_grid(T)` and fits
/// `σ(T,p)/σ(T,0) ≈ 1 - c1·pT + c2·p`.
pub fn p_coefficient_fit(
    steps_list: &[usize],
    channel: ChannelKind,
    init: CoinState,
) -> Result<CoefficientFit> {
    let mut distinct = steps_list.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(invalid(
            "coefficient fit needs at least three distinct T values",
        ));
    }
    if distinct[0] == 0 {
        return Err(invalid("coefficient fit needs T >= 1"));
    }
    let jobs: Vec<(usize, f64)> = distinct
        .iter()
        .flat_map(|&t| {
            std::iter::once(0.0)
                .chain(coefficient_p_grid(t))
                .map(move |p| (t, p))
        })
        .collect();
    let sigmas: Vec<f64> = jobs
        .par_iter()
        .map(|&(t, p)| {
            let cfg = WalkConfig::new(t, p)?.with_channel(channel).with_init(init);
            Ok(master_moments(&cfg)?.sigma)
        })
        .collect::<Result<_>>()?;

    let mut samples = Vec::new();
    let mut base = f64::NAN;
    for (&(t, p), &sigma) in jobs.iter().zip(&sigmas) {
        if p == 0.0 {
            base = sigma;
        } else {
            samples.push(RatioSample {
                steps: t,
                p,
                ratio: sigma / base,
            });
        }
    }
    fit_p_coefficients(&samples)
}

/// Samples generated exactly from the bound's bracket
/// `1 - pT/(6√2) + (p/√2)(1 - 1/√2)`, for checking the fit.
pub fn bound_bracket_samples(steps_list: &[usize]) -> Vec<RatioSample> {
    let c1 = crate::theory::bound_pt_coefficient();
    let c2 = crate::theory::bound_p_coefficient();
    steps_list
        .iter()
        .flat_map(|&t| {
            coefficient_p_grid(t).into_iter().map(move |p| RatioSample {
                steps: t,
                p,
                ratio: 1.0 - c1 * p * t as f64 + c2 * p,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::CoinLabel;
    use crate::theory;
    use approx::assert_abs_diff_eq;

    fn dist(cells: &[(i64, f64)]) -> Distribution {
        Distribution::from_cells(2, 2, cells.iter().map(|&(x, p)| (x, CoinLabel::Plus, p))).unwrap()
    }

    #[test]
    fn moments_of_simple_distributions() {
        let m = moments(&dist(&[(-1, 0.5), (1, 0.5)])).unwrap();
        assert_eq!((m.mean, m.second_moment, m.sigma), (0.0, 1.0, 1.0));
        let m = moments(&dist(&[(-2, 0.25), (0, 0.5), (2, 0.25)])).unwrap();
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.second_moment, 2.0);
        assert_abs_diff_eq!(m.sigma, 2f64.sqrt(), epsilon = 1e-15);
        let m = moments(&dist(&[(2, 1.0)])).unwrap();
        assert_eq!(m.centered_variance(), 0.0);
        assert_eq!(m.sigma, 2.0);
    }

    #[test]
    fn moments_rejects_unnormalized() {
        assert!(matches!(
            moments(&dist(&[(0, 0.9)])),
            Err(WalkError::InvalidArgument(_))
        ));
        assert!(moments(&dist(&[(0, 1.0 + 1e-9)])).is_ok());
    }

    #[test]
    fn affine_fit_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        let (a, b) = fit_affine(&xs, &ys).unwrap();
        assert_abs_diff_eq!(a, 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b, -0.5, epsilon = 1e-14);
        assert!(fit_affine(&[1.0, 1.0], &[0.0, 1.0]).is_err());
        assert!(fit_affine(&[1.0], &[0.0]).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(validate_small_p_grid(100, &[0.0, 1e-3, 2e-3]).is_ok());
        assert!(matches!(
            validate_small_p_grid(100, &[0.0, 3e-3]),
            Err(WalkError::RegimeViolation(_))
        ));
        assert!(validate_small_p_grid(100, &[0.0]).is_err());
        assert!(validate_small_p_grid(100, &[1e-4, 2e-4]).is_err());
        assert!(validate_small_p_grid(100, &[0.0, 2e-4, 1e-4]).is_err());
    }

    #[test]
    fn slope_of_bound_without_p_term() {
        for t in [100usize, 1000] {
            let grid = [0.0, 0.05 / t as f64, 0.1 / t as f64];
            let s0 = theory::asymptotic_sigma(t).unwrap();
            let sig: Vec<f64> = grid
                .iter()
                .map(|p| s0 * (1.0 - theory::bound_pt_coefficient() * p * t as f64))
                .collect();
            let est = scaled_slope_from_samples(t, &grid, &sig).unwrap();
            let tf = t as f64;
            let expected =
                theory::spread_coefficient().sqrt() / (6.0 * 2f64.sqrt()) * (1.0 - 1.0 / (tf * tf));
            assert_abs_diff_eq!(est.scaled_slope, expected, epsilon = 1e-10);
        }
        let t = 100_000;
        let grid = [0.0, 0.1 / t as f64];
        let s0 = theory::asymptotic_sigma(t).unwrap();
        let sig = [s0, s0 * (1.0 - theory::bound_pt_coefficient() * 0.1)];
        let est = scaled_slope_from_samples(t, &grid, &sig).unwrap();
        assert_abs_diff_eq!(est.scaled_slope, 0.06378, epsilon = 5e-6);
    }

    #[test]
    fn classical_sigma_has_zero_slope() {
        let sig = [10.0; 3];
        let est = scaled_slope_from_samples(100, &[0.0, 5e-4, 1e-3], &sig).unwrap();
        assert_eq!(est.scaled_slope, 0.0);
    }

    #[test]
    fn coefficient_fit_round_trip() {
        let fit = fit_p_coefficients(&bound_bracket_samples(&[100, 200, 300])).unwrap();
        assert_abs_diff_eq!(fit.c2, 0.2071068, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.c1, theory::bound_pt_coefficient(), epsilon = 1e-9);
    }

    #[test]
    fn coefficient_fit_needs_distinct_t() {
        let samples = bound_bracket_samples(&[100]);
        assert!(matches!(
            fit_p_coefficients(&samples),
            Err(WalkError::FitFailure(_))
        ));
        assert!(fit_p_coefficients(&[]).is_err());
        assert!(
            p_coefficient_fit(&[10, 10, 20], ChannelKind::Both, CoinState::symmetric()).is_err()
        );
    }
}

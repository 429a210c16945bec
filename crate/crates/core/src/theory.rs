//! Closed-form predictions for the Hadamard walk and a numeric evaluation
//! of the one-noise-event expansion of σ²(T,p) under joint-basis dephasing.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::lattice::{hadamard, CoinLabel, CoinOp, CoinState, PureState};

/// Largest `T` accepted by [`first_order_sigma2`].
pub const FIRST_ORDER_MAX_STEPS: usize = 200;

/// Beyond this `pT` the first-order bound is flagged as out of regime.
pub const FIRST_ORDER_PT_LIMIT: f64 = 0.2;

/// `1 - 1/√2`, the asymptotic `⟨x²⟩/T²` of the Hadamard walk.
pub fn spread_coefficient() -> f64 {
    1.0 - std::f64::consts::FRAC_1_SQRT_2
}

/// Coefficient of `pT` in the σ(T,p) bound: `1/(6√2)`.
pub fn bound_pt_coefficient() -> f64 {
    1.0 / (6.0 * std::f64::consts::SQRT_2)
}

/// Coefficient of `p` in the σ(T,p) bound: `(1/√2)(1 - 1/√2)`.
pub fn bound_p_coefficient() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 * spread_coefficient()
}

/// `√(1-1/√2)·(T - 1/T)`, the pure-walk σ with its leading finite-T
/// correction.
pub fn asymptotic_sigma(steps: usize) -> Result<f64> {
    if steps == 0 {
        return Err(invalid("asymptotic sigma needs T >= 1"));
    }
    let t = steps as f64;
    Ok(spread_coefficient().sqrt() * (t - 1.0 / t))
}

/// `a·(1-1/√2)·T`.
pub fn asymptotic_mean(steps: usize, a: CoinLabel) -> f64 {
    a.value() as f64 * spread_coefficient() * steps as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaBound {
    pub value: f64,
    /// False once `pT` exceeds [`FIRST_ORDER_PT_LIMIT`].
    pub in_regime: bool,
}

/// Upper bound `σ(T)·[1 - pT/(6√2) + (p/√2)(1 - 1/√2)]`.
pub fn sigma_bound(steps: usize, p: f64) -> Result<SigmaBound> {
    if p.is_nan() || p < 0.0 {
        return Err(invalid(format!("p must be non-negative, got {p}")));
    }
    let t = steps as f64;
    let bracket = 1.0 - bound_pt_coefficient() * p * t + bound_p_coefficient() * p;
    Ok(SigmaBound {
        value: asymptotic_sigma(steps)? * bracket,
        in_regime: p * t <= FIRST_ORDER_PT_LIMIT,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryPrediction {
    pub steps: usize,
    pub p: f64,
    pub sigma_upper: f64,
    pub mean_a: f64,
    pub sigma_ideal: f64,
}

pub fn predict(steps: usize, p: f64, a: CoinLabel) -> Result<TheoryPrediction> {
    Ok(TheoryPrediction {
        steps,
        p,
        sigma_upper: sigma_bound(steps, p)?.value,
        mean_a: asymptotic_mean(steps, a),
        sigma_ideal: asymptotic_sigma(steps)?,
    })
}

/// `(⟨x⟩, ⟨x²⟩)` of a pure walk from `|0,b⟩` after `s` steps, for every
/// `s ≤ steps`.
fn basis_moments(steps: usize, coin: &CoinOp, b: CoinLabel) -> Result<Vec<(f64, f64)>> {
    let mut state = PureState::at_origin(CoinState::basis(b), steps);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(pure_moments(&state));
    for _ in 0..steps {
        state.step(coin)?;
        out.push(pure_moments(&state));
    }
    Ok(out)
}

fn pure_moments(state: &PureState) -> (f64, f64) {
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for x in state.sites() {
        let w: f64 = CoinLabel::ALL
            .iter()
            .map(|&a| state.amplitude(x, a).norm_sqr())
            .sum();
        m1 += x as f64 * w;
        m2 += (x * x) as f64 * w;
    }
    (m1, m2)
}

/// Both terms of the one-noise-event expansion, `σ²₁(T,p) = A + p·B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstOrderTerms {
    /// Pure-walk second moment `σ²(T)`.
    pub ideal_sigma2: f64,
    /// Coefficient of `p`.
    pub slope: f64,
}

impl FirstOrderTerms {
    pub fn sigma2(&self, p: f64) -> f64 {
        self.ideal_sigma2 + p * self.slope
    }
}

/// Evaluates the terms of
///
/// ```text
/// σ²(T,p) ≈ (1-pT)·σ²(T) + p·Σ_{t=1..T} Σ_{y,b} P(y,b,t)·Σ_{x,a} (x+y)²·P_0b(x,a,T-t)
/// ```
///
/// exactly, for joint-basis dephasing. The inner sum collapses via the
/// translation identity to `σ²_0b(T-t) + 2y⟨x⟩_0b(T-t) + y²`, so a single
/// forward pass per start state suffices.
pub fn first_order_terms(steps: usize, init: CoinState, coin: &CoinOp) -> Result<FirstOrderTerms> {
    if steps > FIRST_ORDER_MAX_STEPS {
        return Err(invalid(format!(
            "first-order expansion is limited to T <= {FIRST_ORDER_MAX_STEPS}, got {steps}"
        )));
    }
    let from_basis = [
        basis_moments(steps, coin, CoinLabel::Minus)?,
        basis_moments(steps, coin, CoinLabel::Plus)?,
    ];

    let mut state = PureState::at_origin(init, steps);
    let mut one_event = 0.0;
    for t in 1..=steps {
        state.step(coin)?;
        let rest = steps - t;
        for y in state.sites() {
            let yf = y as f64;
            for b in CoinLabel::ALL {
                let w = state.amplitude(y, b).norm_sqr();
                if w == 0.0 {
                    continue;
                }
                let (m1, m2) = from_basis[b.index()][rest];
                one_event += w * (m2 + 2.0 * yf * m1 + yf * yf);
            }
        }
    }
    let ideal = pure_moments(&state).1;
    Ok(FirstOrderTerms {
        ideal_sigma2: ideal,
        slope: one_event - steps as f64 * ideal,
    })
}

/// Numeric one-noise-event σ²(T,p) for the Hadamard coin.
pub fn first_order_sigma2(steps: usize, p: f64, init: CoinState) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(first_order_terms(steps, init, &hadamard())?.sigma2(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn asymptotic_sigma_values() {
        assert_abs_diff_eq!(asymptotic_sigma(100).unwrap(), 54.11420, epsilon = 5e-5);
        assert_eq!(asymptotic_sigma(1).unwrap(), 0.0);
        assert!(asymptotic_sigma(0).is_err());
        let big = 1_000_000;
        let ratio = asymptotic_sigma(big).unwrap() / (spread_coefficient().sqrt() * big as f64);
        assert_abs_diff_eq!(ratio, 1.0, epsilon = 1e-11);
    }

    #[test]
    fn asymptotic_mean_values() {
        assert_abs_diff_eq!(
            asymptotic_mean(100, CoinLabel::Plus),
            29.28932,
            epsilon = 5e-6
        );
        assert_abs_diff_eq!(
            asymptotic_mean(100, CoinLabel::Minus),
            -29.28932,
            epsilon = 5e-6
        );
        assert_eq!(asymptotic_mean(0, CoinLabel::Plus), 0.0);
    }

    #[test]
    fn bound_coefficients() {
        assert_abs_diff_eq!(bound_pt_coefficient(), 0.1178511, epsilon = 1e-7);
        assert_abs_diff_eq!(bound_p_coefficient(), 0.20711, epsilon = 5e-6);
        assert_abs_diff_eq!(bound_p_coefficient(), 0.2071068, epsilon = 1e-7);
    }

    #[test]
    fn sigma_bound_values() {
        let b = sigma_bound(100, 0.001).unwrap();
        let bracket = 1.0 - 0.1178511 * 0.1 + 0.2071068 * 0.001;
        assert_abs_diff_eq!(bracket, 0.9884220, epsilon = 1e-7);
        assert_abs_diff_eq!(b.value, 54.11420 * 0.9884220, epsilon = 1e-4);
        assert!(b.in_regime);
        assert_eq!(
            sigma_bound(37, 0.0).unwrap().value,
            asymptotic_sigma(37).unwrap()
        );
        assert!(!sigma_bound(100, 0.01).unwrap().in_regime);
        assert!(sigma_bound(100, -0.01).is_err());
    }

    #[test]
    fn first_order_at_zero_p_is_pure_second_moment() {
        let cfg = crate::WalkConfig::new(30, 0.0).unwrap();
        let d = crate::distribution(&crate::evolve_pure(&cfg).unwrap());
        let m2: f64 = d.cells().map(|(x, _, p)| (x * x) as f64 * p).sum();
        assert_abs_diff_eq!(
            first_order_sigma2(30, 0.0, cfg.init).unwrap(),
            m2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn first_order_is_affine_in_p() {
        let init = CoinState::symmetric();
        let f = |p| first_order_sigma2(40, p, init).unwrap();
        let (a, b, c) = (f(0.0), f(0.002), f(0.005));
        let predicted = a + (b - a) * (0.005 / 0.002);
        assert!(
            (predicted - c).abs() < 1e-12 * c.abs().max(1.0),
            "{predicted} vs {c}"
        );
    }

    #[test]
    fn first_order_rejects_large_t() {
        assert!(first_order_sigma2(201, 0.0, CoinState::symmetric()).is_err());
        assert!(first_order_sigma2(10, 2.0, CoinState::symmetric()).is_err());
    }

    #[test]
    fn predict_collects_fields() {
        let pr = predict(100, 0.001, CoinLabel::Plus).unwrap();
        assert_eq!(pr.sigma_ideal, asymptotic_sigma(100).unwrap());
        assert!(pr.sigma_upper < pr.sigma_ideal);
        assert!(pr.mean_a > 0.0);
    }
}

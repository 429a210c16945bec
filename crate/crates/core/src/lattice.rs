//! Basis conventions, pure states and exact unitary evolution.
//!
//! Coin order is `(-1, +1)`, mapped to coin index `0` and `1`. The joint
//! basis is flattened as `i = 2(x + horizon) + coin_index`, so each site
//! owns two adjacent slots.

use serde::{Deserialize, Serialize};

use crate::channels::WalkConfig;
use crate::error::{invalid, Result, WalkError};
use crate::kernel::{self, Coin2};
use crate::C64;

const UNITARY_TOL: f64 = 1e-12;

/// The coin register value `a ∈ {-1, +1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoinLabel {
    Minus,
    Plus,
}

impl CoinLabel {
    pub const ALL: [CoinLabel; 2] = [CoinLabel::Minus, CoinLabel::Plus];

    /// The step direction, `-1` or `+1`.
    pub fn value(self) -> i64 {
        match self {
            CoinLabel::Minus => -1,
            CoinLabel::Plus => 1,
        }
    }

    pub fn index(self) -> usize {
        match self {
            CoinLabel::Minus => 0,
            CoinLabel::Plus => 1,
        }
    }

    pub fn from_index(index: usize) -> Self {
        if index == 0 {
            CoinLabel::Minus
        } else {
            CoinLabel::Plus
        }
    }

    pub fn from_value(value: i64) -> Result<Self> {
        match value {
            -1 => Ok(CoinLabel::Minus),
            1 => Ok(CoinLabel::Plus),
            v => Err(invalid(format!("coin label must be -1 or +1, got {v}"))),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            CoinLabel::Minus => CoinLabel::Plus,
            CoinLabel::Plus => CoinLabel::Minus,
        }
    }
}

/// A 2×2 unitary acting on the coin, rows and columns in coin order `(-1, +1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinOp {
    entries: Coin2,
}

impl CoinOp {
    /// Checks `C·C† = I` entrywise to 1e-12.
    pub fn new(entries: [[C64; 2]; 2]) -> Result<Self> {
        for i in 0..2 {
            for j in 0..2 {
                let dot: C64 = (0..2).map(|k| entries[i][k] * entries[j][k].conj()).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot - target).norm() > UNITARY_TOL {
                    return Err(invalid(format!(
                        "coin operator is not unitary: (C·C†)[{i}][{j}] = {dot}"
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[[C64; 2]; 2] {
        &self.entries
    }

    pub fn get(&self, row: CoinLabel, col: CoinLabel) -> C64 {
        self.entries[row.index()][col.index()]
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &CoinOp) -> CoinOp {
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..2).map(|k| self.entries[i][k] * rhs.entries[k][j]).sum();
            }
        }
        CoinOp { entries: out }
    }
}

impl Default for CoinOp {
    fn default() -> Self {
        hadamard()
    }
}

/// `(1/√2)·[[1, 1], [1, -1]]` in coin order `(-1, +1)`.
pub fn hadamard() -> CoinOp {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    CoinOp {
        entries: [[h, h], [h, -h]],
    }
}

/// Initial coin amplitudes `(α₋, α₊)` of a walk started at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinState {
    amps: [C64; 2],
}

impl CoinState {
    pub fn new(minus: C64, plus: C64) -> Result<Self> {
        let norm = minus.norm_sqr() + plus.norm_sqr();
        if (norm - 1.0).abs() > UNITARY_TOL {
            return Err(invalid(format!(
                "coin state must be unit norm, got |α|² = {norm}"
            )));
        }
        Ok(Self {
            amps: [minus, plus],
        })
    }

    pub fn basis(label: CoinLabel) -> Self {
        let mut amps = [C64::new(0.0, 0.0); 2];
        amps[label.index()] = C64::new(1.0, 0.0);
        Self { amps }
    }

    /// `(|-1⟩ + i|+1⟩)/√2`, whose Hadamard walk is mirror symmetric.
    pub fn symmetric() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            amps: [C64::new(s, 0.0), C64::new(0.0, s)],
        }
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        self.amps
    }

    pub fn amplitude(&self, a: CoinLabel) -> C64 {
        self.amps[a.index()]
    }
}

impl From<CoinLabel> for CoinState {
    fn from(label: CoinLabel) -> Self {
        CoinState::basis(label)
    }
}

/// A pure walker state on `[-horizon, horizon] × {-1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    horizon: usize,
    time: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// Walker at the origin with the given coin amplitudes.
    pub fn at_origin(coin: CoinState, horizon: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 2 * (2 * horizon + 1)];
        for a in CoinLabel::ALL {
            amps[kernel::flat(horizon, 0, a.index())] = coin.amplitude(a);
        }
        Self {
            horizon,
            time: 0,
            amps,
        }
    }

    /// Builds a state from raw flat-indexed amplitudes. Checks the length,
    /// the norm and that nothing lies outside the lightcone `|x| <= time`.
    pub fn from_amplitudes(horizon: usize, time: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 2 * (2 * horizon + 1) {
            return Err(invalid(format!(
                "expected {} amplitudes for horizon {horizon}, got {}",
                2 * (2 * horizon + 1),
                amps.len()
            )));
        }
        if time > horizon {
            return Err(invalid(format!("time {time} exceeds horizon {horizon}")));
        }
        let cone = kernel::active_range(horizon, time);
        if amps
            .iter()
            .enumerate()
            .any(|(i, z)| !cone.contains(&i) && z.norm_sqr() != 0.0)
        {
            return Err(invalid(format!(
                "amplitude outside the lightcone |x| <= {time}"
            )));
        }
        let state = Self {
            horizon,
            time,
            amps,
        };
        if (state.norm_sqr() - 1.0).abs() > 1e-10 {
            return Err(invalid(format!(
                "state is not normalized: {}",
                state.norm_sqr()
            )));
        }
        Ok(state)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn amplitude(&self, x: i64, a: CoinLabel) -> C64 {
        if x.unsigned_abs() as usize > self.horizon {
            return C64::new(0.0, 0.0);
        }
        self.amps[kernel::flat(self.horizon, x, a.index())]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// In-place `U = S·(C⊗I)`.
    pub fn step(&mut self, coin: &CoinOp) -> Result<()> {
        if self.time >= self.horizon {
            return Err(WalkError::CapacityExceeded {
                time: self.time,
                horizon: self.horizon,
            });
        }
        kernel::step_vector(&mut self.amps, self.horizon, self.time, coin.entries());
        self.time += 1;
        Ok(())
    }

    /// Sites that can hold amplitude at the current time.
    pub fn sites(&self) -> std::ops::RangeInclusive<i64> {
        let t = self.time.min(self.horizon) as i64;
        -t..=t
    }
}

/// Walker at the origin in coin basis state `a0`.
pub fn initial_state(a0: CoinLabel, horizon: usize) -> PureState {
    PureState::at_origin(CoinState::basis(a0), horizon)
}

pub fn step_pure(mut state: PureState, coin: &CoinOp) -> Result<PureState> {
    state.step(coin)?;
    Ok(state)
}

/// Exact noiseless evolution for `config.steps` steps; the horizon equals
/// the step count.
pub fn evolve_pure(config: &WalkConfig) -> Result<PureState> {
    if config.p != 0.0 {
        return Err(invalid(format!(
            "pure evolution requires p = 0, got p = {}; use the master equation",
            config.p
        )));
    }
    let mut state = PureState::at_origin(config.init, config.steps);
    for _ in 0..config.steps {
        state.step(&config.coin)?;
    }
    Ok(state)
}

/// Probability table `P(x, a)` at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    horizon: usize,
    time: usize,
    probs: Vec<f64>,
}

impl Distribution {
    /// Flat-indexed probabilities; entries must be finite and non-negative.
    pub fn from_probs(horizon: usize, time: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 2 * (2 * horizon + 1) {
            return Err(invalid(format!(
                "expected {} cells for horizon {horizon}, got {}",
                2 * (2 * horizon + 1),
                probs.len()
            )));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(invalid(format!(
                "probabilities must be finite and non-negative, got {bad}"
            )));
        }
        Ok(Self {
            horizon,
            time,
            probs,
        })
    }

    /// Builds a table from `(x, a, P)` triples.
    pub fn from_cells(
        horizon: usize,
        time: usize,
        cells: impl IntoIterator<Item = (i64, CoinLabel, f64)>,
    ) -> Result<Self> {
        let mut probs = vec![0.0; 2 * (2 * horizon + 1)];
        for (x, a, p) in cells {
            if x.unsigned_abs() as usize > horizon {
                return Err(invalid(format!("site {x} outside horizon {horizon}")));
            }
            probs[kernel::flat(horizon, x, a.index())] += p;
        }
        Self::from_probs(horizon, time, probs)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, x: i64, a: CoinLabel) -> f64 {
        if x.unsigned_abs() as usize > self.horizon {
            return 0.0;
        }
        self.probs[kernel::flat(self.horizon, x, a.index())]
    }

    /// Position marginal `Σ_a P(x, a)`.
    pub fn marginal(&self, x: i64) -> f64 {
        CoinLabel::ALL.iter().map(|&a| self.prob(x, a)).sum()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `(x, a, P)` over every stored cell, in flat-index order.
    pub fn cells(&self) -> impl Iterator<Item = (i64, CoinLabel, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(i, &p)| {
            (
                kernel::site_of(self.horizon, i),
                CoinLabel::from_index(i % 2),
                p,
            )
        })
    }

    /// Cells restricted to the lightcone `|x| ≤ time`.
    pub fn lightcone_cells(&self) -> impl Iterator<Item = (i64, CoinLabel, f64)> + '_ {
        let t = self.time.min(self.horizon) as i64;
        self.cells().filter(move |(x, _, _)| x.abs() <= t)
    }

    /// Mirror image under `x ↦ -x, a ↦ -a`.
    pub fn reflected(&self) -> Distribution {
        let mut probs = vec![0.0; self.probs.len()];
        for (x, a, p) in self.cells() {
            probs[kernel::flat(self.horizon, -x, a.flipped().index())] = p;
        }
        Distribution {
            horizon: self.horizon,
            time: self.time,
            probs,
        }
    }

    /// `½ Σ |P - Q|` over the common cells.
    pub fn total_variation(&self, other: &Distribution) -> Result<f64> {
        if self.horizon != other.horizon {
            return Err(invalid("distributions have different horizons"));
        }
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(p, q)| (p - q).abs())
                .sum::<f64>())
    }
}

/// Born-rule readout `P(x, a) = |ψ(x, a)|²`.
pub fn distribution(state: &PureState) -> Distribution {
    Distribution {
        horizon: state.horizon,
        time: state.time,
        probs: state.amps.iter().map(|z| z.norm_sqr()).collect(),
    }
}

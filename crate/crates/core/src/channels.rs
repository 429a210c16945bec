//! Discrete master-equation evolution under projective dephasing.
//!
//! Each step applies the walk unitary and then mixes in the dephased state:
//! `ρ' = (1-p)·UρU† + p·Σᵢ Pᵢ UρU† Pᵢ`. Because the projectors are diagonal
//! in the joint basis, the dephasing term only ever zeroes entries, so the
//! whole mixture reduces to scaling the affected off-diagonal entries by
//! `1-p`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, WalkError};
use crate::kernel;
use crate::lattice::{hadamard, CoinLabel, CoinOp, CoinState, Distribution, PureState};
use crate::C64;

/// Which register the dephasing projectors act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    /// Projectors `I ⊗ |a⟩⟨a|`.
    #[serde(rename = "coin")]
    CoinOnly,
    /// Projectors `|x⟩⟨x| ⊗ I`.
    #[serde(rename = "position")]
    PositionOnly,
    /// Projectors `|x,a⟩⟨x,a|`.
    Both,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] = [
        ChannelKind::CoinOnly,
        ChannelKind::PositionOnly,
        ChannelKind::Both,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::CoinOnly => "coin",
            ChannelKind::PositionOnly => "position",
            ChannelKind::Both => "both",
        }
    }

    /// True when the channel's projectors separate flat indices `i` and `j`,
    /// i.e. the entry `ρ[i][j]` is removed by a full dephasing event.
    #[inline]
    pub(crate) fn separates(self, i: usize, j: usize) -> bool {
        match self {
            ChannelKind::CoinOnly => i % 2 != j % 2,
            ChannelKind::PositionOnly => i / 2 != j / 2,
            ChannelKind::Both => i != j,
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = WalkError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coin" => Ok(ChannelKind::CoinOnly),
            "position" => Ok(ChannelKind::PositionOnly),
            "both" => Ok(ChannelKind::Both),
            other => Err(invalid(format!(
                "unknown channel '{other}', expected coin, position or both"
            ))),
        }
    }
}

/// Parameters of one walk run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    /// Number of steps `T`; also the lattice horizon.
    pub steps: usize,
    /// Decoherence probability per step.
    pub p: f64,
    pub channel: ChannelKind,
    pub coin: CoinOp,
    pub init: CoinState,
}

impl WalkConfig {
    /// Hadamard coin, joint-basis dephasing, symmetric initial coin.
    pub fn new(steps: usize, p: f64) -> Result<Self> {
        let cfg = Self {
            steps,
            p,
            channel: ChannelKind::Both,
            coin: hadamard(),
            init: CoinState::symmetric(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_channel(mut self, channel: ChannelKind) -> Self {
        self.channel = channel;
        self
    }

    pub fn with_coin(mut self, coin: CoinOp) -> Self {
        self.coin = coin;
        self
    }

    pub fn with_init(mut self, init: CoinState) -> Self {
        self.init = init;
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(invalid(format!("p must lie in [0, 1], got {}", self.p)));
        }
        Ok(())
    }
}

/// Row-major density matrix over the flat joint basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    horizon: usize,
    time: usize,
    dim: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(state: &PureState) -> Self {
        let psi = state.amplitudes();
        let dim = psi.len();
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for (i, a) in psi.iter().enumerate() {
            if *a == C64::new(0.0, 0.0) {
                continue;
            }
            for (j, b) in psi.iter().enumerate() {
                data[i * dim + j] = a * b.conj();
            }
        }
        Self {
            horizon: state.horizon(),
            time: state.time(),
            dim,
            data,
        }
    }

    /// Builds a matrix from raw row-major entries, checking shape, lightcone
    /// support, Hermiticity (1e-12) and unit trace (1e-10).
    pub fn from_entries(horizon: usize, time: usize, data: Vec<C64>) -> Result<Self> {
        let dim = 2 * (2 * horizon + 1);
        if data.len() != dim * dim {
            return Err(invalid(format!(
                "expected {} entries, got {}",
                dim * dim,
                data.len()
            )));
        }
        if time > horizon {
            return Err(invalid(format!("time {time} exceeds horizon {horizon}")));
        }
        let cone = kernel::active_range(horizon, time);
        for i in 0..dim {
            for j in 0..dim {
                if (!cone.contains(&i) || !cone.contains(&j)) && data[i * dim + j].norm_sqr() != 0.0
                {
                    return Err(invalid(format!(
                        "entry outside the lightcone |x| <= {time}"
                    )));
                }
            }
        }
        let rho = Self {
            horizon,
            time,
            dim,
            data,
        };
        if rho.hermiticity_error() > 1e-12 {
            return Err(invalid("density matrix is not Hermitian"));
        }
        if (rho.trace() - 1.0).norm() > 1e-10 {
            return Err(invalid(format!("density matrix trace is {}", rho.trace())));
        }
        Ok(rho)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    /// `⟨x,a|ρ|y,b⟩`.
    pub fn element(&self, x: i64, a: CoinLabel, y: i64, b: CoinLabel) -> C64 {
        let h = self.horizon;
        if x.unsigned_abs() as usize > h || y.unsigned_abs() as usize > h {
            return C64::new(0.0, 0.0);
        }
        self.get(kernel::flat(h, x, a.index()), kernel::flat(h, y, b.index()))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `max |ρᵢⱼ - conj(ρⱼᵢ)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn min_diagonal(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.get(i, i).re)
            .fold(f64::INFINITY, f64::min)
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// In-place `ρ ↦ UρU†`.
    pub fn apply_unitary(&mut self, coin: &CoinOp) -> Result<()> {
        if self.time >= self.horizon {
            return Err(WalkError::CapacityExceeded {
                time: self.time,
                horizon: self.horizon,
            });
        }
        let (h, t, dim) = (self.horizon, self.time, self.dim);
        kernel::step_rows(
            &mut self.data,
            dim,
            h,
            t,
            coin.entries(),
            kernel::active_range(h, t),
        );
        kernel::step_cols(
            &mut self.data,
            dim,
            h,
            t,
            coin.entries(),
            kernel::active_range(h, t + 1),
        );
        self.time += 1;
        Ok(())
    }

    /// In-place `ρ ↦ (1-p)ρ + p·Σᵢ PᵢρPᵢ`.
    pub fn apply_dephasing(&mut self, channel: ChannelKind, p: f64) {
        if p == 0.0 {
            return;
        }
        let keep = 1.0 - p;
        let range = kernel::active_range(self.horizon, self.time);
        for i in range.clone() {
            let row = &mut self.data[i * self.dim..(i + 1) * self.dim];
            for j in range.clone() {
                if channel.separates(i, j) {
                    row[j] *= keep;
                }
            }
        }
    }

    /// One step of the master equation, in place.
    pub fn step(&mut self, config: &WalkConfig) -> Result<()> {
        config.validate()?;
        self.apply_unitary(&config.coin)?;
        self.apply_dephasing(config.channel, config.p);
        Ok(())
    }
}

/// `Σᵢ PᵢρPᵢ` for the channel's projector set.
pub fn dephase(rho: &DensityMatrix, channel: ChannelKind) -> DensityMatrix {
    let mut out = rho.clone();
    for i in 0..out.dim {
        for j in 0..out.dim {
            if channel.separates(i, j) {
                out.data[i * out.dim + j] = C64::new(0.0, 0.0);
            }
        }
    }
    out
}

pub fn step_master(mut rho: DensityMatrix, config: &WalkConfig) -> Result<DensityMatrix> {
    rho.step(config)?;
    Ok(rho)
}

/// `config.steps` master-equation steps from the pure initial state at the
/// origin, on a lattice whose horizon equals the step count.
pub fn evolve_master(config: &WalkConfig) -> Result<DensityMatrix> {
    config.validate()?;
    let mut rho = DensityMatrix::from_pure(&PureState::at_origin(config.init, config.steps));
    for _ in 0..config.steps {
        rho.step(config)?;
    }
    Ok(rho)
}

/// Diagonal readout `P(x, a) = ⟨x,a|ρ|x,a⟩`.
///
/// Small negative roundoff (down to -1e-9) is clamped to zero; anything
/// below that is reported as corruption. No renormalization is applied.
pub fn diagonal_distribution(rho: &DensityMatrix) -> Result<Distribution> {
    let mut probs = Vec::with_capacity(rho.dim);
    for i in 0..rho.dim {
        let v = rho.get(i, i).re;
        if v < -1e-9 || !v.is_finite() {
            return Err(WalkError::NumericalCorruption {
                x: kernel::site_of(rho.horizon, i),
                a: CoinLabel::from_index(i % 2).value(),
                value: v,
            });
        }
        probs.push(v.max(0.0));
    }
    Distribution::from_probs(rho.horizon, rho.time, probs)
}

//! Discrete-time coined quantum walk on the line under projective dephasing.
//!
//! The walker lives on `x ∈ [-horizon, horizon]` with a two-level coin
//! `a ∈ {-1, +1}`. One step is `U = S·(C⊗I)` with the conditional shift
//! `S|x,a⟩ = |x+a,a⟩`. Noise enters through the discrete master equation
//!
//! ```text
//! ρ(t+1) = (1-p)·UρU† + p·Σᵢ Pᵢ UρU† Pᵢ
//! ```
//!
//! with projectors on the coin, the position, or the joint basis.
//!
//! * [`lattice`]: basis conventions, pure states and exact unitary evolution.
//! * [`channels`]: density matrices and the dephasing master equation.
//! * [`trajectories`]: Monte-Carlo unravelling of the master equation.
//! * [`theory`]: closed-form moments, the σ(T,p) upper bound and a numeric
//!   first-order (one noise event) expansion.
//! * [`analysis`]: moments, small-p slopes and the p-coefficient fit.

pub mod analysis;
pub mod channels;
mod error;
mod kernel;
pub mod lattice;
pub mod theory;
pub mod trajectories;

pub use num_complex::Complex64 as C64;

pub use analysis::{moments, Moments, MomentsRecord, SlopeEstimate};
pub use channels::{
    dephase, diagonal_distribution, evolve_master, step_master, ChannelKind, DensityMatrix,
    WalkConfig,
};
pub use error::{Result, WalkError};
pub use lattice::{
    distribution, evolve_pure, hadamard, initial_state, step_pure, CoinLabel, CoinOp, CoinState,
    Distribution, PureState,
};
pub use trajectories::{
    estimate_distribution, run_trajectory, EstimatedDistribution, TrajectoryConfig,
};

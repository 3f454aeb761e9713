//! Event-driven simulation and matrix analysis for structure-based
//! self-triggered consensus in multi-agent networks.
//!
//! Agents hold piecewise-constant controls and pick their next update time
//! from their coupling structure alone, so the continuous dynamics advance
//! exactly — slope times interval, no ODE solver. Runs reduce to delayed
//! discrete-time recursions whose coefficient matrices can be checked against
//! the stochastic-matrix convergence machinery (row-spread contraction,
//! scrambling, SIA classification, spanning-tree windows).
//!
//! Module map:
//! - [`matrix`]: dense square matrices with JSON array-of-arrays encoding.
//! - [`graph`]: weight matrices, Laplacians, delta-graphs, spanning trees.
//! - [`stochastic`]: coefficient analysis and augmented-block constructions.
//! - [`delayed`]: direct iteration of the delayed discrete-time recursion.
//! - [`sim`]: the continuous-time engines (centralized, distributed, and the
//!   switching variants) with exact event logs and trajectories.
//! - [`reduction`]: event logs back to delayed coefficients, with replay
//!   verification and the structural bounds.
//! - [`harness`]: scenario configs, seeded Monte Carlo runs, reports.

pub mod delayed;
pub mod error;
pub mod graph;
pub mod harness;
pub mod matrix;
pub mod reduction;
pub mod rng;
pub mod sim;
pub mod stochastic;

pub use error::{Error, Result};
pub use graph::{Laplacian, WeightMatrix};
pub use matrix::SquareMat;
pub use sim::{EventLog, Trajectory, UpdateEvent};
pub use stochastic::StochasticMatrix;

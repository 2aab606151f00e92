//! Planner and simulator for distributed activation of edge compute servers
//! via a minority game.
//!
//! The library has four layers:
//!
//! - [`stats`] — numeric kernels: error-function family, truncated-normal
//!   moments and sampling, offloading-delay moments, and the central-limit
//!   tail probability of a deadline miss.
//! - [`planner`] — closed-form derivation of the per-server job bounds
//!   (`k_min`, `k_max`), the activation cut-off `c_th`, and the service
//!   price, plus tabulation over a grid of QoE levels.
//! - [`game`] — the minority-game engine: strategy tables over a shared
//!   winning-bit history, score reinforcement, and per-round records.
//! - [`sim`] — the multi-run experiment harness with centralized-optimal
//!   and random baselines and cross-run aggregation.
//!
//! Everything is deterministic given the seed in [`sim::SystemParams`];
//! with the default `parallel` feature runs execute on a rayon pool and
//! produce bit-identical results to the sequential path.

pub mod config;
pub mod game;
pub mod output;
pub mod planner;
pub mod sim;
pub mod stats;

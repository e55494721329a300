//! Sequential Monte Carlo filtering with intermittent compression.
//!
//! This crate implements a bootstrap particle filter whose particle cloud
//! is occasionally compressed for transmission — either by subsampling to
//! a smaller cloud or by fitting a greedy maximum-likelihood Gaussian
//! mixture — together with:
//!
//! * a leader-node sensor-network tracking simulator (binary proximity
//!   sensors on a random geometric network, mutual-information leader
//!   selection, randomized hand-off checks),
//! * closed-form evaluation of the time-uniform error bounds and
//!   exponential inequalities that price the compression, and
//! * empirical verification harnesses for the underlying concentration
//!   results.
//!
//! Start with the `examples/` directory: each major capability has a
//! runnable example. The `fkpf` binary exposes the Monte Carlo harness
//! (`run`), the bound calculator (`bounds`), and the concentration
//! verification suites (`verify`).

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod filter;
pub mod gml;
pub mod leader;
pub mod models;
pub mod particle;
pub mod rng;
pub mod subsample;

pub use error::{Error, Result};
pub use particle::{Particle, ParticleSet, StateVec, TestFunction};
pub use rng::RngStream;

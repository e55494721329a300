//! Intermittent non-parametric compression: collapse an `N`-particle set to
//! `N_b` particles for transmission, then rebuild an `N`-particle set on the
//! receiving side.
//!
//! When `N = χ·N_b` the rebuild replicates each particle `χ` times, which
//! adds no weak-sense error; otherwise the rebuild draws `N` fresh samples
//! from the transmitted set and pays an extra sampling-error term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{multinomial_resample, residual_resample};
use crate::particle::ParticleSet;
use crate::rng::RngStream;

/// Particle counts for the subsampling hand-off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsampleConfig {
    /// Regular particle count.
    pub n: usize,
    /// Transmitted particle count.
    pub n_b: usize,
    /// Set exactly when `n` is an integer multiple of `n_b`.
    pub chi: Option<usize>,
}

impl SubsampleConfig {
    /// Builds a config, deriving `chi` when `n` is a multiple of `n_b`.
    pub fn new(n: usize, n_b: usize) -> Result<Self> {
        if n_b == 0 || n_b > n {
            return Err(Error::invalid_argument(
                "subsample size must satisfy 1 <= N_b <= N",
            ));
        }
        let chi = if n.is_multiple_of(n_b) { Some(n / n_b) } else { None };
        Ok(SubsampleConfig { n, n_b, chi })
    }

    /// True when the hand-off rebuilds by replication.
    pub fn replicates(&self) -> bool {
        self.chi.is_some()
    }
}

/// Compresses a normalized set to `n_b` particles by residual resampling.
pub fn subsample(set: &ParticleSet, n_b: usize, rng: &mut RngStream) -> Result<ParticleSet> {
    if n_b > set.len() {
        return Err(Error::invalid_argument(format!(
            "subsample size {} exceeds particle count {}",
            n_b,
            set.len()
        )));
    }
    residual_resample(set, n_b, rng)
}

/// Rebuilds a `chi·N_b` set by copying each particle exactly `chi` times.
/// The empirical measure is unchanged, so this path adds no error.
pub fn replicate_upsample(set: &ParticleSet, chi: usize) -> Result<ParticleSet> {
    if chi == 0 {
        return Err(Error::invalid_argument("chi must be at least 1"));
    }
    let mut states = Vec::with_capacity(set.len() * chi);
    for s in set.states() {
        for _ in 0..chi {
            states.push(s);
        }
    }
    ParticleSet::uniform_from_states(states)
}

/// Rebuilds an `n`-particle set by `n` i.i.d. draws from the transmitted
/// set. Used when `n` is not a multiple of the transmitted count.
pub fn resample_upsample(set: &ParticleSet, n: usize, rng: &mut RngStream) -> Result<ParticleSet> {
    if n < set.len() {
        return Err(Error::invalid_argument(
            "upsample target must be at least the transmitted count",
        ));
    }
    multinomial_resample(set, n, rng)
}

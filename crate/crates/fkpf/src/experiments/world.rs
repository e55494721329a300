//! Per-trial world simulation: network geometry, target trajectory, and
//! the full sensor-field observation record.
//!
//! The world for trial `k` is a pure function of `(seed, k)`. Every filter
//! variant replays the same world, so estimator comparisons are paired.

use crate::error::Result;
use crate::models::{
    generate_network, simulate_all_observations, BinarySensorModel, Boundary, DynamicsModel,
    NetworkTopology,
};
use crate::particle::StateVec;
use crate::rng::RngStream;

use super::ExperimentConfig;

/// Stream ids are keyed by `(trial, step, purpose)`. The world owns one
/// purpose; filters consume fresh streams per step and purpose, and every
/// filter variant reuses the same ids. Two consequences the harness relies
/// on: filter runs with identical configurations are bit-identical, and
/// runs that differ only in their hand-off compression stay on common
/// random numbers for every shared draw (paired-noise variance reduction).
#[derive(Debug, Clone, Copy)]
pub(crate) enum StreamPurpose {
    World = 0,
    FilterInit = 1,
    Predict = 2,
    Resample = 3,
    Handoff = 4,
}

pub(crate) fn keyed_stream(seed: u64, trial: u64, t: usize, purpose: StreamPurpose) -> RngStream {
    RngStream::new(seed, (trial << 20) | ((t as u64) << 4) | purpose as u64)
}

pub(crate) fn world_stream(seed: u64, trial: u64) -> RngStream {
    keyed_stream(seed, trial, 0, StreamPurpose::World)
}

/// One simulated trial environment.
#[derive(Debug, Clone)]
pub struct World {
    pub topology: NetworkTopology,
    pub dynamics: DynamicsModel,
    pub sensor_model: BinarySensorModel,
    /// True target positions, `t = 0..=T`.
    pub trajectory: Vec<StateVec>,
    /// `observations[t - 1][sat_id]` is the bit recorded by `sat_id` at
    /// step `t` (observations start at `t = 1`).
    pub observations: Vec<Vec<bool>>,
}

impl World {
    /// Simulates the world for one trial from the config's world stream.
    pub fn simulate(config: &ExperimentConfig, trial: u64) -> Result<World> {
        let mut rng = world_stream(config.seed, trial);
        let topology = generate_network(config.k_l, config.k_s, &mut rng)?;
        let dynamics = DynamicsModel::new(config.r0, config.noise_amp, Boundary::Reflect)?;
        let sensor_model = BinarySensorModel::new(config.resolved_r_d(), config.p_d, config.p_f)?;

        // Start in the central half-square to avoid immediate reflections.
        let x0 = StateVec::new(
            0.25 + 0.5 * rand::Rng::random::<f64>(&mut rng),
            0.25 + 0.5 * rand::Rng::random::<f64>(&mut rng),
        );
        let mut trajectory = Vec::with_capacity(config.t_steps + 1);
        trajectory.push(x0);
        let mut observations = Vec::with_capacity(config.t_steps);
        for t in 1..=config.t_steps {
            let next = dynamics.propagate(trajectory[t - 1], &mut rng);
            observations.push(simulate_all_observations(
                &topology,
                &sensor_model,
                next,
                &mut rng,
            ));
            trajectory.push(next);
        }
        Ok(World {
            topology,
            dynamics,
            sensor_model,
            trajectory,
            observations,
        })
    }
}

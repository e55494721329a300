//! The particle recursion: mutation, likelihood reweighting, and
//! resampling. One `filter_step` maps a normalized particle set at time
//! `t − 1` to a uniform-weight set at time `t`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::models::DynamicsModel;
use crate::particle::{Particle, ParticleSet, StateVec};
use crate::rng::RngStream;

/// Propagates every particle through the dynamics kernel independently.
/// Weights are carried over unchanged.
pub fn predict(set: &ParticleSet, model: &DynamicsModel, rng: &mut RngStream) -> ParticleSet {
    let particles = set
        .particles()
        .iter()
        .map(|p| Particle {
            state: model.propagate(p.state, rng),
            weight: p.weight,
        })
        .collect();
    ParticleSet::from_particles(particles).expect("propagation preserves validity")
}

/// Boltzmann-Gibbs reweighting: multiplies each weight by the potential at
/// the particle state and renormalizes. The potential must be strictly
/// positive on the particle support; if every product underflows to zero
/// the update fails with [`Error::DegenerateWeights`].
pub fn update<G>(set: &ParticleSet, potential: G) -> Result<ParticleSet>
where
    G: Fn(StateVec) -> f64,
{
    let reweighted: Vec<Particle> = set
        .particles()
        .iter()
        .map(|p| Particle {
            state: p.state,
            weight: p.weight * potential(p.state),
        })
        .collect();
    let sum: f64 = reweighted.iter().map(|p| p.weight).sum();
    if !sum.is_finite() || sum <= 0.0 {
        return Err(Error::DegenerateWeights);
    }
    ParticleSet::from_particles(
        reweighted
            .into_iter()
            .map(|p| Particle {
                state: p.state,
                weight: p.weight / sum,
            })
            .collect(),
    )
}

fn check_resample_args(set: &ParticleSet, n_out: usize) -> Result<()> {
    if n_out == 0 {
        return Err(Error::invalid_argument("n_out must be at least 1"));
    }
    if !set.is_normalized() {
        return Err(Error::invalid_state(
            "resampling requires a normalized particle set",
        ));
    }
    Ok(())
}

/// Canonical state order. Resampled sets are emitted in this order so that
/// two runs sharing per-step random streams apply the same draws to nearly
/// the same particles; the empirical measure is order-invariant, so this
/// changes no distribution, only the coupling between paired runs.
pub(crate) fn sort_states_canonical(states: &mut [StateVec]) {
    states.sort_unstable_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
}

/// Draws `n` indices from the categorical distribution given by `weights`.
fn categorical_draws(weights: &[f64], n: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for &w in weights {
        acc += w;
        cumulative.push(acc);
    }
    let total = acc;
    (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            cumulative.partition_point(|&c| c <= u).min(weights.len() - 1)
        })
        .collect()
}

/// Residual resampling: particle `k` is copied `floor(n_out · w_k)` times
/// deterministically, and the remaining slots are filled by multinomial
/// draws over the fractional residuals. Output weights are uniform.
pub fn residual_resample(
    set: &ParticleSet,
    n_out: usize,
    rng: &mut RngStream,
) -> Result<ParticleSet> {
    check_resample_args(set, n_out)?;
    let n_f = n_out as f64;
    let mut states = Vec::with_capacity(n_out);
    let mut residuals = Vec::with_capacity(set.len());
    for p in set.particles() {
        let expected = n_f * p.weight;
        let copies = expected.floor() as usize;
        for _ in 0..copies {
            states.push(p.state);
        }
        residuals.push(expected - expected.floor());
    }
    let remaining = n_out - states.len();
    if remaining > 0 {
        let residual_sum: f64 = residuals.iter().sum();
        if residual_sum > 0.0 {
            let all_states: Vec<StateVec> = set.states().collect();
            for idx in categorical_draws(&residuals, remaining, rng) {
                states.push(all_states[idx]);
            }
        } else {
            // Rounding left slots open but no residual mass; fall back to
            // the original weights for the missing draws.
            let weights: Vec<f64> = set.weights().collect();
            let all_states: Vec<StateVec> = set.states().collect();
            for idx in categorical_draws(&weights, remaining, rng) {
                states.push(all_states[idx]);
            }
        }
    }
    sort_states_canonical(&mut states);
    ParticleSet::uniform_from_states(states)
}

/// Multinomial resampling: `n_out` i.i.d. categorical draws by weight.
/// Output weights are uniform.
pub fn multinomial_resample(
    set: &ParticleSet,
    n_out: usize,
    rng: &mut RngStream,
) -> Result<ParticleSet> {
    check_resample_args(set, n_out)?;
    let weights: Vec<f64> = set.weights().collect();
    let all_states: Vec<StateVec> = set.states().collect();
    let mut states: Vec<StateVec> = categorical_draws(&weights, n_out, rng)
        .into_iter()
        .map(|idx| all_states[idx])
        .collect();
    sort_states_canonical(&mut states);
    ParticleSet::uniform_from_states(states)
}

/// One full recursion step: predict, reweight by the potential, then
/// residual-resample down (or up) to `n` uniform-weight particles.
pub fn filter_step<G>(
    set: &ParticleSet,
    dynamics: &DynamicsModel,
    potential: G,
    n: usize,
    rng: &mut RngStream,
) -> Result<ParticleSet>
where
    G: Fn(StateVec) -> f64,
{
    let predicted = predict(set, dynamics, rng);
    let updated = update(&predicted, potential)?;
    residual_resample(&updated, n, rng)
}

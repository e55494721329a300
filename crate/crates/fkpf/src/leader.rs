//! Leader-node hand-off protocol: the λ-coin check, mutual-information
//! leader selection, and the compress/rebuild paths used when the leader
//! changes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gml::{gml_fit, sample_mixture, GmlConfig};
use crate::models::{BinarySensorModel, NetworkTopology};
use crate::particle::ParticleSet;
use crate::rng::RngStream;
use crate::subsample::{replicate_upsample, resample_upsample, subsample, SubsampleConfig};

/// What gets transmitted when the leader changes.
#[derive(Debug, Clone)]
pub enum HandoffMode {
    /// Transmit an `N_b`-particle subsample, rebuild to `N`.
    Subsample(SubsampleConfig),
    /// Transmit a fitted mixture, rebuild by sampling `N` particles.
    Parametric(GmlConfig),
    /// Transmit the particle set as-is (no approximation).
    None,
}

/// Hand-off policy: check probability and compression mode.
#[derive(Debug, Clone)]
pub struct HandoffPolicy {
    /// Probability that a step runs the leader-selection check.
    pub lambda: f64,
    pub mode: HandoffMode,
    /// Use exact joint-observation mutual information instead of the
    /// per-sensor sum (only feasible for small satellite sets).
    pub mi_exact: bool,
}

impl HandoffPolicy {
    pub fn new(lambda: f64, mode: HandoffMode) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::invalid_argument("lambda must lie in [0, 1]"));
        }
        Ok(HandoffPolicy {
            lambda,
            mode,
            mi_exact: false,
        })
    }
}

/// Outcome of one hand-off step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandoffRecord {
    pub t: usize,
    /// The λ-coin came up heads and leader selection ran.
    pub checked: bool,
    /// The leader changed and the set was compressed and rebuilt.
    pub delta: bool,
    pub from: usize,
    pub to: usize,
    /// `N_b` for a subsample hand-off, `5·N_p` for a parametric one,
    /// zero otherwise.
    pub values_transmitted: usize,
}

fn binary_entropy_bits(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Mutual information (in bits) between the target state, as represented
/// by the particle cloud, and the observations of a leader's satellites,
/// computed as the sum of per-sensor terms
/// `I_j = H_b(Σ_k w_k π_j(ξ_k)) − Σ_k w_k H_b(π_j(ξ_k))`.
///
/// The sum is exact for a single sensor; for several sensors it is a
/// tractable surrogate for the joint quantity (see [`mi_score_exact`]).
/// The set must be normalized.
pub fn mi_score(
    leader: usize,
    topology: &NetworkTopology,
    sensor_model: &BinarySensorModel,
    set: &ParticleSet,
) -> Result<f64> {
    debug_assert!(set.is_normalized());
    let h_pd = binary_entropy_bits(sensor_model.p_d);
    let h_pf = binary_entropy_bits(sensor_model.p_f);
    let mut total = 0.0;
    for &sat_id in topology.assigned_satellites(leader)? {
        let pos = topology.satellite(sat_id)?.position;
        let r2 = sensor_model.r_d * sensor_model.r_d;
        // Weighted particle mass inside the detection disk.
        let q_in: f64 = set
            .particles()
            .iter()
            .filter(|p| p.state.dist_sq(pos) <= r2)
            .map(|p| p.weight)
            .sum();
        let p_bar = q_in * sensor_model.p_d + (1.0 - q_in) * sensor_model.p_f;
        let mi = binary_entropy_bits(p_bar) - q_in * h_pd - (1.0 - q_in) * h_pf;
        total += mi.max(0.0);
    }
    Ok(total)
}

/// Exact joint mutual information `I(X; Y_{S_ℓ})` by enumerating all
/// observation vectors. Only feasible for small satellite sets; errors
/// when the leader has more than `max_sensors` satellites.
pub fn mi_score_exact(
    leader: usize,
    topology: &NetworkTopology,
    sensor_model: &BinarySensorModel,
    set: &ParticleSet,
    max_sensors: usize,
) -> Result<f64> {
    let sats = topology.assigned_satellites(leader)?;
    let s = sats.len();
    if s > max_sensors {
        return Err(Error::invalid_argument(format!(
            "joint enumeration over {s} sensors exceeds the cap of {max_sensors}"
        )));
    }
    if s == 0 {
        return Ok(0.0);
    }
    // Per-particle detection probabilities.
    let probs: Vec<Vec<f64>> = set
        .particles()
        .iter()
        .map(|p| {
            sats.iter()
                .map(|&sid| {
                    sensor_model
                        .detect_prob(topology.satellite(sid).unwrap().position, p.state)
                })
                .collect()
        })
        .collect();
    let mut h_y = 0.0;
    for bits in 0..(1u64 << s) {
        let mut p_y = 0.0;
        for (k, particle) in set.particles().iter().enumerate() {
            let mut p = particle.weight;
            for (j, &pi) in probs[k].iter().enumerate() {
                p *= if bits & (1 << j) != 0 { pi } else { 1.0 - pi };
            }
            p_y += p;
        }
        if p_y > 0.0 {
            h_y -= p_y * p_y.log2();
        }
    }
    let h_y_given_x: f64 = set
        .particles()
        .iter()
        .enumerate()
        .map(|(k, particle)| {
            particle.weight
                * probs[k]
                    .iter()
                    .map(|&pi| binary_entropy_bits(pi))
                    .sum::<f64>()
        })
        .sum();
    Ok((h_y - h_y_given_x).max(0.0))
}

/// Argmax of [`mi_score`] over the candidates; ties break to the lowest id.
pub fn select_leader(
    candidates: &[usize],
    topology: &NetworkTopology,
    sensor_model: &BinarySensorModel,
    set: &ParticleSet,
) -> Result<usize> {
    select_leader_with(candidates, topology, sensor_model, set, false)
}

fn select_leader_with(
    candidates: &[usize],
    topology: &NetworkTopology,
    sensor_model: &BinarySensorModel,
    set: &ParticleSet,
    mi_exact: bool,
) -> Result<usize> {
    if candidates.is_empty() {
        return Err(Error::invalid_argument("candidate list must be non-empty"));
    }
    let mut ordered = candidates.to_vec();
    ordered.sort_unstable();
    let mut best_id = ordered[0];
    let mut best_score = f64::NEG_INFINITY;
    for &id in &ordered {
        let score = if mi_exact {
            mi_score_exact(id, topology, sensor_model, set, 10)?
        } else {
            mi_score(id, topology, sensor_model, set)?
        };
        if score > best_score {
            best_score = score;
            best_id = id;
        }
    }
    Ok(best_id)
}

/// Runs one hand-off opportunity after a filter step.
///
/// With probability `λ` the leader-selection check runs over all leaders.
/// If the winner differs from the current leader, the set is compressed
/// and rebuilt according to the policy mode (for [`HandoffMode::None`]
/// the set passes through bit-identical) and leadership transfers. The
/// returned record is fully populated.
pub fn handoff_step(
    current_leader: usize,
    set: &ParticleSet,
    policy: &HandoffPolicy,
    topology: &NetworkTopology,
    sensor_model: &BinarySensorModel,
    rng: &mut RngStream,
    t: usize,
) -> Result<(usize, ParticleSet, HandoffRecord)> {
    let mut record = HandoffRecord {
        t,
        checked: false,
        delta: false,
        from: current_leader,
        to: current_leader,
        values_transmitted: 0,
    };
    let coin: f64 = rng.random();
    if coin >= policy.lambda {
        return Ok((current_leader, set.clone(), record));
    }
    record.checked = true;
    let winner = select_leader_with(
        &topology.leader_ids(),
        topology,
        sensor_model,
        set,
        policy.mi_exact,
    )?;
    if winner == current_leader {
        return Ok((current_leader, set.clone(), record));
    }
    record.to = winner;
    let new_set = match &policy.mode {
        HandoffMode::None => set.clone(),
        HandoffMode::Subsample(cfg) => {
            if cfg.n != set.len() {
                return Err(Error::invalid_argument(format!(
                    "subsample config N = {} does not match particle count {}",
                    cfg.n,
                    set.len()
                )));
            }
            record.delta = true;
            record.values_transmitted = cfg.n_b;
            let transmitted = subsample(set, cfg.n_b, rng)?;
            match cfg.chi {
                Some(chi) => replicate_upsample(&transmitted, chi)?,
                None => resample_upsample(&transmitted, cfg.n, rng)?,
            }
        }
        HandoffMode::Parametric(cfg) => {
            record.delta = true;
            record.values_transmitted = 5 * cfg.n_components;
            let states: Vec<_> = set.states().collect();
            let model = gml_fit(&states, cfg)?;
            sample_mixture(&model, set.len(), rng)?
        }
    };
    Ok((winner, new_set, record))
}

/// Empirical approximation frequency `q̂`: the mean of `δ_t` over records.
pub fn empirical_q(records: &[HandoffRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::invalid_argument("no hand-off records"));
    }
    Ok(records.iter().filter(|r| r.delta).count() as f64 / records.len() as f64)
}

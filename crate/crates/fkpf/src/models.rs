//! Target dynamics, binary proximity sensors, and random geometric
//! sensor-network generation.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::particle::StateVec;
use crate::rng::RngStream;

/// Behaviour at the walls of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Specular reflection keeps the target inside the sensing field.
    Reflect,
    /// No boundary handling; the state may leave the unit square.
    None,
}

/// Random-walk target dynamics: a fixed-length step in a uniformly random
/// direction plus a small additive perturbation.
///
/// The perturbation is a 2-vector of i.i.d. `noise_amp · U[−1, 1]`
/// components; `noise_amp = 0` gives a pure circle step of radius `r0`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DynamicsModel {
    pub r0: f64,
    pub noise_amp: f64,
    pub boundary: Boundary,
}

impl DynamicsModel {
    pub fn new(r0: f64, noise_amp: f64, boundary: Boundary) -> Result<Self> {
        if !r0.is_finite() || r0 <= 0.0 {
            return Err(Error::invalid_argument("r0 must be strictly positive"));
        }
        if !noise_amp.is_finite() || noise_amp < 0.0 {
            return Err(Error::invalid_argument("noise_amp must be non-negative"));
        }
        Ok(DynamicsModel {
            r0,
            noise_amp,
            boundary,
        })
    }

    /// Applies one step with explicit heading and perturbation, then the
    /// boundary policy. Exposed so tests can force the heading.
    pub fn displace(&self, state: StateVec, phi: f64, u: [f64; 2]) -> StateVec {
        let raw = StateVec::new(
            state.x + self.r0 * phi.cos() + u[0],
            state.y + self.r0 * phi.sin() + u[1],
        );
        match self.boundary {
            Boundary::Reflect => StateVec::new(reflect_unit(raw.x), reflect_unit(raw.y)),
            Boundary::None => raw,
        }
    }

    /// Draws `φ ~ U[−π, π]` and the perturbation, then steps.
    pub fn propagate(&self, state: StateVec, rng: &mut RngStream) -> StateVec {
        let phi = rng.random_range(-PI..PI);
        let u = [
            self.noise_amp * rng.random_range(-1.0..1.0),
            self.noise_amp * rng.random_range(-1.0..1.0),
        ];
        self.displace(state, phi, u)
    }
}

/// Folds a coordinate back into `[0, 1]` by specular reflection.
fn reflect_unit(mut v: f64) -> f64 {
    // Each pass handles one wall crossing; loop in case the step overshoots
    // both walls (only possible for extreme parameter choices).
    for _ in 0..64 {
        if v < 0.0 {
            v = -v;
        } else if v > 1.0 {
            v = 2.0 - v;
        } else {
            return v;
        }
    }
    v.clamp(0.0, 1.0)
}

/// Binary proximity detector: fires with probability `p_d` when the target
/// is within `r_d` of the sensor and with false-alarm probability `p_f`
/// otherwise.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BinarySensorModel {
    pub r_d: f64,
    pub p_d: f64,
    pub p_f: f64,
}

impl BinarySensorModel {
    pub fn new(r_d: f64, p_d: f64, p_f: f64) -> Result<Self> {
        if !r_d.is_finite() || r_d <= 0.0 {
            return Err(Error::invalid_argument("r_d must be strictly positive"));
        }
        if p_d <= 0.0 || p_d >= 1.0 || p_f <= 0.0 || p_f >= 1.0 || !p_d.is_finite() || !p_f.is_finite() {
            return Err(Error::invalid_argument("p_d and p_f must lie in (0, 1)"));
        }
        if p_f >= p_d {
            return Err(Error::invalid_argument("p_f must be smaller than p_d"));
        }
        Ok(BinarySensorModel { r_d, p_d, p_f })
    }

    /// Detection probability as a function of the target state.
    pub fn detect_prob(&self, sensor_pos: StateVec, state: StateVec) -> f64 {
        if state.dist_sq(sensor_pos) <= self.r_d * self.r_d {
            self.p_d
        } else {
            self.p_f
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Leader,
    Satellite,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SensorNode {
    pub id: usize,
    pub position: StateVec,
    pub kind: NodeKind,
}

/// Leader and satellite node positions with the connectivity-radius
/// assignment. A satellite is assigned to every leader within Euclidean
/// distance `r_c`, so assignments may overlap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkTopology {
    pub leaders: Vec<SensorNode>,
    pub satellites: Vec<SensorNode>,
    pub r_c: f64,
    /// Leader id → sorted satellite ids within `r_c`.
    pub assignment: BTreeMap<usize, Vec<usize>>,
    /// Non-fatal conditions noticed at generation time.
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Versioned serialization wrapper for [`NetworkTopology`].
#[derive(Debug, Serialize, Deserialize)]
struct TopologyDocument {
    version: u32,
    topology: NetworkTopology,
}

const TOPOLOGY_FORMAT_VERSION: u32 = 1;

impl NetworkTopology {
    pub fn leader_ids(&self) -> Vec<usize> {
        self.leaders.iter().map(|l| l.id).collect()
    }

    pub fn leader(&self, id: usize) -> Result<&SensorNode> {
        self.leaders
            .iter()
            .find(|l| l.id == id)
            .ok_or_else(|| Error::invalid_argument(format!("unknown leader id {id}")))
    }

    pub fn satellite(&self, id: usize) -> Result<&SensorNode> {
        self.satellites
            .get(id)
            .filter(|s| s.id == id)
            .or_else(|| self.satellites.iter().find(|s| s.id == id))
            .ok_or_else(|| Error::invalid_argument(format!("unknown satellite id {id}")))
    }

    /// Satellite ids assigned to `leader`, in ascending order.
    pub fn assigned_satellites(&self, leader: usize) -> Result<&[usize]> {
        self.assignment
            .get(&leader)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::invalid_argument(format!("unknown leader id {leader}")))
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = TopologyDocument {
            version: TOPOLOGY_FORMAT_VERSION,
            topology: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TopologyDocument = serde_json::from_str(text)?;
        if doc.version != TOPOLOGY_FORMAT_VERSION {
            return Err(Error::invalid_argument(format!(
                "unsupported topology document version {}",
                doc.version
            )));
        }
        Ok(doc.topology)
    }
}

/// Connectivity radius `sqrt(2·ln(K_s)/K_s)` for `K_s` satellites.
pub fn connectivity_radius(k_s: usize) -> f64 {
    (2.0 * (k_s as f64).ln() / k_s as f64).sqrt()
}

/// Scatters `k_l` leaders and `k_s` satellites uniformly over the unit
/// square and assigns satellites to every leader within the connectivity
/// radius.
pub fn generate_network(k_l: usize, k_s: usize, rng: &mut RngStream) -> Result<NetworkTopology> {
    if k_l == 0 || k_s == 0 {
        return Err(Error::invalid_argument(
            "need at least one leader and one satellite",
        ));
    }
    let mut warnings = Vec::new();
    let r_c = connectivity_radius(k_s);
    if r_c == 0.0 {
        warnings.push("connectivity radius is zero (K_s = 1); no satellite is reachable".into());
    }
    let leaders: Vec<SensorNode> = (0..k_l)
        .map(|id| SensorNode {
            id,
            position: StateVec::new(rng.random::<f64>(), rng.random::<f64>()),
            kind: NodeKind::Leader,
        })
        .collect();
    let satellites: Vec<SensorNode> = (0..k_s)
        .map(|id| SensorNode {
            id,
            position: StateVec::new(rng.random::<f64>(), rng.random::<f64>()),
            kind: NodeKind::Satellite,
        })
        .collect();
    let mut assignment = BTreeMap::new();
    for leader in &leaders {
        let mut ids: Vec<usize> = satellites
            .iter()
            .filter(|s| s.position.dist(leader.position) <= r_c)
            .map(|s| s.id)
            .collect();
        ids.sort_unstable();
        assignment.insert(leader.id, ids);
    }
    Ok(NetworkTopology {
        leaders,
        satellites,
        r_c,
        assignment,
        warnings,
    })
}

/// Likelihood of observing bit `y` at `sensor` given the target `state`.
pub fn likelihood(
    sensor: &SensorNode,
    model: &BinarySensorModel,
    y: bool,
    state: StateVec,
) -> f64 {
    let p = model.detect_prob(sensor.position, state);
    if y {
        p
    } else {
        1.0 - p
    }
}

/// Joint likelihood of a leader's satellite observations given `state`,
/// assuming conditional independence. Observations must be keyed exactly
/// by the leader's assigned satellites.
pub fn joint_potential(
    leader: usize,
    topology: &NetworkTopology,
    model: &BinarySensorModel,
    observations: &BTreeMap<usize, bool>,
    state: StateVec,
) -> Result<f64> {
    let mut g = 1.0;
    for &sat_id in topology.assigned_satellites(leader)? {
        let y = *observations.get(&sat_id).ok_or_else(|| {
            Error::invalid_argument(format!("missing observation for satellite {sat_id}"))
        })?;
        g *= likelihood(topology.satellite(sat_id)?, model, y, state);
    }
    Ok(g)
}

/// Draws one Bernoulli observation per satellite assigned to `leader`.
pub fn simulate_observations(
    leader: usize,
    topology: &NetworkTopology,
    model: &BinarySensorModel,
    true_state: StateVec,
    rng: &mut RngStream,
) -> Result<BTreeMap<usize, bool>> {
    let mut obs = BTreeMap::new();
    for &sat_id in topology.assigned_satellites(leader)? {
        let p = model.detect_prob(topology.satellite(sat_id)?.position, true_state);
        obs.insert(sat_id, rng.random::<f64>() < p);
    }
    Ok(obs)
}

/// Draws one Bernoulli observation per satellite in the network, in
/// satellite-id order. The Monte Carlo harness simulates the whole sensor
/// field once per step so that every filter sees the same world.
pub fn simulate_all_observations(
    topology: &NetworkTopology,
    model: &BinarySensorModel,
    true_state: StateVec,
    rng: &mut RngStream,
) -> Vec<bool> {
    topology
        .satellites
        .iter()
        .map(|s| rng.random::<f64>() < model.detect_prob(s.position, true_state))
        .collect()
}

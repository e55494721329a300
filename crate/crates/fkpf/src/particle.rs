//! Weighted-particle representation of probability measures.
//!
//! A [`ParticleSet`] is the empirical measure `(1/N) Σ_k w_k δ_{ξ_k}` that
//! the filter recursion manipulates. It is a plain value type: cloning is
//! cheap relative to the arithmetic performed on it, there is no shared
//! mutation, and sets can be moved freely between threads.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Tolerance used when checking that weights sum to one.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A point in the unit square (two-dimensional target state).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVec {
    pub x: f64,
    pub y: f64,
}

impl StateVec {
    pub fn new(x: f64, y: f64) -> Self {
        StateVec { x, y }
    }

    pub fn dist_sq(self, other: StateVec) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: StateVec) -> f64 {
        self.dist_sq(other).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// A single weighted sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub state: StateVec,
    pub weight: f64,
}

/// An ordered collection of weighted particles.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    particles: Vec<Particle>,
}

impl ParticleSet {
    /// Builds a set from explicit particles. Weights must be finite and
    /// non-negative; states must be finite.
    pub fn from_particles(particles: Vec<Particle>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::invalid_argument("particle set must be non-empty"));
        }
        for p in &particles {
            if !p.state.is_finite() {
                return Err(Error::invalid_argument("particle state must be finite"));
            }
            if !p.weight.is_finite() || p.weight < 0.0 {
                return Err(Error::invalid_argument(
                    "particle weight must be finite and non-negative",
                ));
            }
        }
        Ok(ParticleSet { particles })
    }

    /// Builds a uniformly weighted set over the given states.
    pub fn uniform_from_states(states: Vec<StateVec>) -> Result<Self> {
        let n = states.len();
        if n == 0 {
            return Err(Error::invalid_argument("particle set must be non-empty"));
        }
        let w = 1.0 / n as f64;
        Self::from_particles(
            states
                .into_iter()
                .map(|state| Particle { state, weight: w })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn states(&self) -> impl Iterator<Item = StateVec> + '_ {
        self.particles.iter().map(|p| p.state)
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.particles.iter().map(|p| p.weight)
    }

    pub fn weight_sum(&self) -> f64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    /// True when weights sum to one within [`NORMALIZATION_TOL`].
    pub fn is_normalized(&self) -> bool {
        (self.weight_sum() - 1.0).abs() <= NORMALIZATION_TOL
    }

    /// Weighted mean of the particle states.
    pub fn mean(&self) -> StateVec {
        let sum_w = self.weight_sum();
        let mut mx = 0.0;
        let mut my = 0.0;
        for p in &self.particles {
            mx += p.weight * p.state.x;
            my += p.weight * p.state.y;
        }
        StateVec::new(mx / sum_w, my / sum_w)
    }
}

/// A bounded-oscillation test function `h` together with an upper bound on
/// `osc(h) = sup |h(a) − h(b)|`. When a single function is reused across
/// draws, `σ(h) = osc_bound`.
pub struct TestFunction {
    f: Box<dyn Fn(StateVec) -> f64 + Send + Sync>,
    osc_bound: f64,
}

impl TestFunction {
    pub fn new(
        osc_bound: f64,
        f: impl Fn(StateVec) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !osc_bound.is_finite() || osc_bound <= 0.0 {
            return Err(Error::invalid_argument(
                "osc_bound must be strictly positive and finite",
            ));
        }
        Ok(TestFunction {
            f: Box::new(f),
            osc_bound,
        })
    }

    pub fn eval(&self, x: StateVec) -> f64 {
        (self.f)(x)
    }

    pub fn osc_bound(&self) -> f64 {
        self.osc_bound
    }

    /// `h(x, y) = x`, with oscillation 1 on the unit square.
    pub fn coord_x() -> Self {
        TestFunction::new(1.0, |s: StateVec| s.x).expect("static bound")
    }

    /// `h(x, y) = y`, with oscillation 1 on the unit square.
    pub fn coord_y() -> Self {
        TestFunction::new(1.0, |s: StateVec| s.y).expect("static bound")
    }
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction")
            .field("osc_bound", &self.osc_bound)
            .finish()
    }
}

/// Draws `n` i.i.d. samples from `source` and returns them as an equally
/// weighted particle set (the sampling operator applied to `source`).
pub fn sample_empirical<F>(mut source: F, n: usize, rng: &mut RngStream) -> Result<ParticleSet>
where
    F: FnMut(&mut RngStream) -> StateVec,
{
    if n == 0 {
        return Err(Error::invalid_argument("sample count must be at least 1"));
    }
    let states: Vec<StateVec> = (0..n).map(|_| source(rng)).collect();
    ParticleSet::uniform_from_states(states)
}

/// Integrates `h` against the empirical measure: `Σ_k w_k h(ξ_k)`.
/// The set must be normalized.
pub fn apply_measure(set: &ParticleSet, h: &TestFunction) -> Result<f64> {
    if !set.is_normalized() {
        return Err(Error::invalid_state(format!(
            "particle set is not normalized (weight sum {})",
            set.weight_sum()
        )));
    }
    Ok(set
        .particles()
        .iter()
        .map(|p| p.weight * h.eval(p.state))
        .sum())
}

/// Rescales weights to sum to one while preserving their proportions.
/// Fails with [`Error::DegenerateWeights`] when every weight is zero.
pub fn normalize_weights(set: &ParticleSet) -> Result<ParticleSet> {
    let sum = set.weight_sum();
    if sum <= 0.0 {
        return Err(Error::DegenerateWeights);
    }
    let particles = set
        .particles()
        .iter()
        .map(|p| Particle {
            state: p.state,
            weight: p.weight / sum,
        })
        .collect();
    ParticleSet::from_particles(particles)
}

/// Uniform sampler over the unit square.
pub fn uniform_unit_square(rng: &mut RngStream) -> StateVec {
    StateVec::new(rng.random::<f64>(), rng.random::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn point_mass(x: f64, y: f64) -> impl FnMut(&mut RngStream) -> StateVec {
        move |_| StateVec::new(x, y)
    }

    #[test]
    fn sample_empirical_point_mass() {
        let mut rng = RngStream::new(0, 0);
        let set = sample_empirical(point_mass(0.5, 0.5), 3, &mut rng).unwrap();
        assert_eq!(set.len(), 3);
        for p in set.particles() {
            assert_eq!(p.state, StateVec::new(0.5, 0.5));
            assert_abs_diff_eq!(p.weight, 1.0 / 3.0);
        }
    }

    #[test]
    fn sample_empirical_uniform_mean_near_center() {
        // CLT: 3σ = 3·(1/√12)/√1000 ≈ 0.027, rounded up to 0.05.
        let mut rng = RngStream::new(42, 0);
        let set = sample_empirical(uniform_unit_square, 1000, &mut rng).unwrap();
        let m = set.mean();
        assert!((m.x - 0.5).abs() < 0.05, "mean x {}", m.x);
        assert!((m.y - 0.5).abs() < 0.05, "mean y {}", m.y);
    }

    #[test]
    fn sample_empirical_is_deterministic() {
        let mut a = RngStream::new(9, 4);
        let mut b = RngStream::new(9, 4);
        let sa = sample_empirical(uniform_unit_square, 50, &mut a).unwrap();
        let sb = sample_empirical(uniform_unit_square, 50, &mut b).unwrap();
        assert_eq!(sa, sb);
    }

    #[test]
    fn sample_empirical_rejects_zero() {
        let mut rng = RngStream::new(0, 0);
        assert!(matches!(
            sample_empirical(uniform_unit_square, 0, &mut rng),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sample_empirical_weights_exactly_uniform() {
        let mut rng = RngStream::new(1, 1);
        let set = sample_empirical(uniform_unit_square, 7, &mut rng).unwrap();
        for p in set.particles() {
            assert_eq!(p.weight, 1.0 / 7.0);
        }
    }

    #[test]
    fn apply_measure_constant_is_one() {
        let set = ParticleSet::uniform_from_states(vec![
            StateVec::new(0.1, 0.2),
            StateVec::new(0.9, 0.4),
        ])
        .unwrap();
        let h = TestFunction::new(1.0, |_| 1.0).unwrap();
        assert_abs_diff_eq!(apply_measure(&set, &h).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn apply_measure_equal_weight_mean() {
        let set = ParticleSet::uniform_from_states(vec![
            StateVec::new(0.0, 0.0),
            StateVec::new(1.0, 0.0),
        ])
        .unwrap();
        let h = TestFunction::coord_x();
        assert_abs_diff_eq!(apply_measure(&set, &h).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn apply_measure_weighted_mean() {
        let set = ParticleSet::from_particles(vec![
            Particle {
                state: StateVec::new(0.0, 0.0),
                weight: 0.9,
            },
            Particle {
                state: StateVec::new(1.0, 0.0),
                weight: 0.1,
            },
        ])
        .unwrap();
        let h = TestFunction::coord_x();
        assert_abs_diff_eq!(apply_measure(&set, &h).unwrap(), 0.1, epsilon = 1e-15);
    }

    #[test]
    fn apply_measure_rejects_unnormalized() {
        let set = ParticleSet::from_particles(vec![Particle {
            state: StateVec::new(0.0, 0.0),
            weight: 2.0,
        }])
        .unwrap();
        assert!(matches!(
            apply_measure(&set, &TestFunction::coord_x()),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn apply_measure_stays_within_range() {
        let mut rng = RngStream::new(3, 0);
        let set = sample_empirical(uniform_unit_square, 64, &mut rng).unwrap();
        let h = TestFunction::coord_x();
        let v = apply_measure(&set, &h).unwrap();
        let lo = set.states().map(|s| s.x).fold(f64::INFINITY, f64::min);
        let hi = set.states().map(|s| s.x).fold(f64::NEG_INFINITY, f64::max);
        assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }

    #[test]
    fn normalize_rescales_proportionally() {
        let set = ParticleSet::from_particles(vec![
            Particle {
                state: StateVec::new(0.0, 0.0),
                weight: 2.0,
            },
            Particle {
                state: StateVec::new(1.0, 0.0),
                weight: 2.0,
            },
        ])
        .unwrap();
        let out = normalize_weights(&set).unwrap();
        assert_eq!(out.particles()[0].weight, 0.5);
        assert_eq!(out.particles()[1].weight, 0.5);
    }

    #[test]
    fn normalize_keeps_point_mass() {
        let set = ParticleSet::from_particles(vec![
            Particle {
                state: StateVec::new(0.0, 0.0),
                weight: 1.0,
            },
            Particle {
                state: StateVec::new(1.0, 0.0),
                weight: 0.0,
            },
        ])
        .unwrap();
        let out = normalize_weights(&set).unwrap();
        assert_eq!(out.particles()[0].weight, 1.0);
        assert_eq!(out.particles()[1].weight, 0.0);
    }

    #[test]
    fn normalize_all_zero_is_degenerate() {
        let set = ParticleSet::from_particles(vec![
            Particle {
                state: StateVec::new(0.0, 0.0),
                weight: 0.0,
            },
            Particle {
                state: StateVec::new(1.0, 0.0),
                weight: 0.0,
            },
        ])
        .unwrap();
        assert!(matches!(
            normalize_weights(&set),
            Err(Error::DegenerateWeights)
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn weight_vec() -> impl Strategy<Value = Vec<f64>> {
            proptest::collection::vec(0.0f64..10.0, 1..20)
                .prop_filter("needs positive mass", |ws| ws.iter().sum::<f64>() > 1e-6)
        }

        proptest! {
            #[test]
            fn normalize_preserves_proportions(weights in weight_vec()) {
                let set = ParticleSet::from_particles(
                    weights
                        .iter()
                        .enumerate()
                        .map(|(i, &w)| Particle {
                            state: StateVec::new(i as f64 * 1e-3, 0.0),
                            weight: w,
                        })
                        .collect(),
                )
                .unwrap();
                let out = normalize_weights(&set).unwrap();
                prop_assert!(out.is_normalized());
                let total: f64 = weights.iter().sum();
                for (p, &w) in out.particles().iter().zip(&weights) {
                    prop_assert!((p.weight - w / total).abs() < 1e-12);
                }
            }

            #[test]
            fn measure_application_stays_in_hull(
                states in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..40),
            ) {
                let set = ParticleSet::uniform_from_states(
                    states.iter().map(|&(x, y)| StateVec::new(x, y)).collect(),
                )
                .unwrap();
                let h = TestFunction::coord_x();
                let v = apply_measure(&set, &h).unwrap();
                let lo = states.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
                let hi = states.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn empirical_variance_scales_as_one_over_n() {
        // Slope of log-variance against log-n should be close to −1.
        let h = TestFunction::coord_x();
        let mut slopes = Vec::new();
        let ns = [100usize, 1000, 10_000];
        let mut vars = Vec::new();
        for (i, &n) in ns.iter().enumerate() {
            let reps = 400;
            let mut acc = 0.0;
            let mut acc2 = 0.0;
            for r in 0..reps {
                let mut rng = RngStream::new(1234, (i * reps + r) as u64);
                let set = sample_empirical(uniform_unit_square, n, &mut rng).unwrap();
                let v = apply_measure(&set, &h).unwrap();
                acc += v;
                acc2 += v * v;
            }
            let mean = acc / reps as f64;
            vars.push(acc2 / reps as f64 - mean * mean);
        }
        for i in 1..ns.len() {
            let slope = (vars[i].ln() - vars[i - 1].ln())
                / ((ns[i] as f64).ln() - (ns[i - 1] as f64).ln());
            slopes.push(slope);
        }
        for s in slopes {
            assert!((s + 1.0).abs() < 0.15, "slope {}", s);
        }
    }
}

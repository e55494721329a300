//! Core particle-filter loop on a hand-built scene: predict, reweight,
//! resample, estimate.
//!
//! A target walks through the unit square; four binary proximity sensors
//! watch it. The filter tracks with 500 particles and prints the true
//! state, the posterior mean, and the error every few steps.

use fkpf::filter::{filter_step, multinomial_resample, predict, residual_resample, update};
use fkpf::models::{Boundary, DynamicsModel, SensorNode};
use fkpf::models::{BinarySensorModel, NodeKind};
use fkpf::particle::{sample_empirical, uniform_unit_square, StateVec};
use fkpf::rng::RngStream;
use rand::Rng;

fn main() -> fkpf::Result<()> {
    let dynamics = DynamicsModel::new(0.02, 0.005, Boundary::Reflect)?;
    let sensor_model = BinarySensorModel::new(0.25, 0.95, 0.02)?;
    let sensors: Vec<SensorNode> = [(0.3, 0.3), (0.7, 0.3), (0.3, 0.7), (0.7, 0.7)]
        .iter()
        .enumerate()
        .map(|(id, &(x, y))| SensorNode {
            id,
            position: StateVec::new(x, y),
            kind: NodeKind::Satellite,
        })
        .collect();

    let mut world_rng = RngStream::new(7, 0);
    let mut filter_rng = RngStream::new(7, 1);

    let mut truth = StateVec::new(0.5, 0.5);
    let mut set = sample_empirical(uniform_unit_square, 500, &mut filter_rng)?;

    println!("{:>4}  {:>16}  {:>16}  {:>8}", "t", "truth", "estimate", "error");
    for t in 1..=60 {
        truth = dynamics.propagate(truth, &mut world_rng);
        let observations: Vec<bool> = sensors
            .iter()
            .map(|s| world_rng.random::<f64>() < sensor_model.detect_prob(s.position, truth))
            .collect();

        let sensors_ref = &sensors;
        let model = sensor_model;
        let obs = observations.clone();
        set = filter_step(
            &set,
            &dynamics,
            move |state| {
                sensors_ref
                    .iter()
                    .zip(&obs)
                    .map(|(s, &y)| {
                        let p = model.detect_prob(s.position, state);
                        if y {
                            p
                        } else {
                            1.0 - p
                        }
                    })
                    .product()
            },
            500,
            &mut filter_rng,
        )?;

        if t % 10 == 0 {
            let est = set.mean();
            println!(
                "{:>4}  ({:.3}, {:.3})  ({:.3}, {:.3})  {:>8.4}",
                t,
                truth.x,
                truth.y,
                est.x,
                est.y,
                est.dist(truth)
            );
        }
    }

    // The three phases also compose manually, which is occasionally handy
    // (for instance to inspect weights between update and resample).
    let predicted = predict(&set, &dynamics, &mut filter_rng);
    let updated = update(&predicted, |s| 0.1 + s.x)?;
    let max_w = updated.weights().fold(0.0f64, f64::max);
    println!("\nafter a manual update, largest weight = {max_w:.5}");
    let _ = residual_resample(&updated, 500, &mut filter_rng)?;
    let _ = multinomial_resample(&updated, 500, &mut filter_rng)?;
    Ok(())
}

//! Random geometric sensor network: generation, connectivity statistics,
//! mutual-information leader scoring, and the versioned JSON document.

use fkpf::leader::{mi_score, mi_score_exact, select_leader};
use fkpf::models::{generate_network, BinarySensorModel, NetworkTopology};
use fkpf::particle::{sample_empirical, uniform_unit_square};
use fkpf::rng::RngStream;

fn main() -> fkpf::Result<()> {
    let mut rng = RngStream::new(2024, 0);
    let topology = generate_network(20, 200, &mut rng)?;
    println!(
        "20 leaders, 200 satellites, connectivity radius r_c = {:.4}",
        topology.r_c
    );
    let sizes: Vec<usize> = topology.assignment.values().map(|v| v.len()).collect();
    println!(
        "satellites per leader: min {} / mean {:.1} / max {}",
        sizes.iter().min().unwrap(),
        sizes.iter().sum::<usize>() as f64 / sizes.len() as f64,
        sizes.iter().max().unwrap()
    );

    // Score every leader against a particle cloud and pick the best.
    let sensor_model = BinarySensorModel::new(topology.r_c / 2.0, 0.95, 0.02)?;
    let cloud = sample_empirical(uniform_unit_square, 400, &mut rng)?;
    let best = select_leader(&topology.leader_ids(), &topology, &sensor_model, &cloud)?;
    let best_score = mi_score(best, &topology, &sensor_model, &cloud)?;
    println!("most informative leader: {best} ({best_score:.3} bits, per-sensor sum)");

    // The exact joint score is available for small satellite sets.
    if let Some((&leader, sats)) = topology.assignment.iter().find(|(_, v)| v.len() <= 10) {
        let exact = mi_score_exact(leader, &topology, &sensor_model, &cloud, 10)?;
        let summed = mi_score(leader, &topology, &sensor_model, &cloud)?;
        println!(
            "leader {leader} ({} satellites): joint MI {exact:.4} bits vs per-sensor sum {summed:.4}",
            sats.len()
        );
    }

    // Round-trip through the versioned JSON document.
    let text = topology.to_json()?;
    let restored = NetworkTopology::from_json(&text)?;
    println!(
        "serialized to {} bytes of JSON; round-trip assignment identical: {}",
        text.len(),
        restored.assignment == topology.assignment
    );
    Ok(())
}

//! Empirical verification of the concentration results: the sampling-error
//! moment bound and the moment-generating-function bounds.

use fkpf::experiments::{rademacher_dist, standard_test_distributions, verify_lemma1, verify_mgf};
use fkpf::rng::RngStream;

fn main() -> fkpf::Result<()> {
    println!("moment bound, 2000 repetitions per cell:");
    println!(
        "{:<20} {:>5} {:>3} {:>12} {:>12} {:>6}",
        "distribution", "N", "p", "empirical", "bound", "pass"
    );
    let mut stream = 0;
    for dist in &standard_test_distributions() {
        for &n in &[25usize, 400] {
            for &p in &[1.0, 2.0, 4.0] {
                let mut rng = RngStream::new(1, stream);
                stream += 1;
                let row = verify_lemma1(dist, n, p, 2000, &mut rng)?;
                println!(
                    "{:<20} {:>5} {:>3} {:>12.5} {:>12.5} {:>6}",
                    row.dist, row.n, row.p, row.empirical_moment, row.bound, row.pass
                );
            }
        }
    }

    println!("\nMGF bound, sign distribution, N = 50, 20000 repetitions:");
    println!(
        "{:>5} {:>12} {:>12} {:>12} {:>6}",
        "eps", "empirical", "exact", "simple", "pass"
    );
    let dist = rademacher_dist();
    let grid: Vec<f64> = (1..=8).map(|i| 0.25 * i as f64).collect();
    let mut rng = RngStream::new(2, 0);
    for row in verify_mgf(&dist, 50, &grid, 20_000, &mut rng)? {
        println!(
            "{:>5.2} {:>12.4} {:>12.4} {:>12.4} {:>6}",
            row.epsilon, row.empirical_mgf, row.exact_bound, row.simple_bound, row.pass
        );
    }
    Ok(())
}

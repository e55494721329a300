//! End-to-end leader-node tracking experiment at a reduced scale:
//! configure, run the Monte Carlo harness, and write the CSV outputs.
//!
//! The full desk-scale configuration (200 trials, N = 300, reference
//! N = 3000) is what `fkpf run` uses by default; this example trims the
//! trial count so it finishes in seconds.

use fkpf::experiments::{emit_results, run_monte_carlo, ExperimentConfig, Mode};

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn main() -> fkpf::Result<()> {
    let config = ExperimentConfig {
        mode: Mode::Subsample,
        n_b: Some(30),
        trials: 20,
        reference_n: 1000,
        seed: 42,
        ..ExperimentConfig::default()
    };

    let metrics = run_monte_carlo(&config)?;
    println!(
        "subsample hand-off, N = {}, N_b = {}, compression factor {}",
        config.n,
        config.n_b.unwrap(),
        metrics.compression_factor.unwrap()
    );
    println!(
        "{} trials ({} degenerate), empirical approximation frequency q = {:.3}",
        metrics.trials_included, metrics.trials_degenerate, metrics.empirical_q
    );
    println!(
        "mean RMSE {:.4}, mean RMSAE {:.4}",
        mean(&metrics.rmse),
        mean(&metrics.rmsae)
    );
    if let Some(stats) = metrics.quantiles {
        println!(
            "deterioration ratio: q25 {:.3} / median {:.3} / q75 {:.3}, whiskers [{:.3}, {:.3}]",
            stats.q25, stats.median, stats.q75, stats.whisker_lo, stats.whisker_hi
        );
    }

    let out = std::env::temp_dir().join("fkpf-example-run");
    emit_results(&metrics, &config, &out)?;
    println!("\nCSV outputs written to {}", out.display());
    for name in [
        "rmse.csv",
        "rmsae.csv",
        "handoffs.csv",
        "deterioration.csv",
        "bound_overlay.csv",
        "resolved_config.json",
    ] {
        println!("  {name}");
    }
    Ok(())
}

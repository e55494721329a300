//! The non-parametric hand-off: compress a particle cloud to `N_b`
//! particles, rebuild to `N`, and account for what was transmitted.
//!
//! Replication (`N = χ·N_b`) preserves the empirical measure exactly;
//! rebuilding by resampling pays an extra sampling-error term.

use fkpf::particle::{apply_measure, sample_empirical, uniform_unit_square, TestFunction};
use fkpf::rng::RngStream;
use fkpf::subsample::{replicate_upsample, resample_upsample, subsample, SubsampleConfig};

fn main() -> fkpf::Result<()> {
    let mut rng = RngStream::new(11, 0);
    let set = sample_empirical(uniform_unit_square, 300, &mut rng)?;
    let h = TestFunction::coord_x();
    let before = apply_measure(&set, &h)?;

    let config = SubsampleConfig::new(300, 30)?;
    println!(
        "N = {}, N_b = {}, chi = {:?} (compression factor {})",
        config.n,
        config.n_b,
        config.chi,
        config.n / config.n_b
    );

    let transmitted = subsample(&set, config.n_b, &mut rng)?;
    println!("transmitted {} particle values", transmitted.len());

    // Replication path: zero additional weak-sense error.
    let rebuilt = replicate_upsample(&transmitted, config.chi.unwrap())?;
    let after = apply_measure(&rebuilt, &h)?;
    println!(
        "replicate rebuild:  (out - transmitted)(h) = {:+.2e}",
        after - apply_measure(&transmitted, &h)?
    );

    // Resampling path, for when N is not a multiple of N_b.
    let resampled = resample_upsample(&transmitted, 299, &mut rng)?;
    println!(
        "resample rebuild:   (out - transmitted)(h) = {:+.2e}",
        apply_measure(&resampled, &h)? - apply_measure(&transmitted, &h)?
    );

    // The compression itself is unbiased but not error-free.
    let mut acc = 0.0;
    let reps = 2000;
    for i in 0..reps {
        let mut r = RngStream::new(12, i);
        let small = subsample(&set, 30, &mut r)?;
        acc += apply_measure(&small, &h)?;
    }
    println!(
        "E[(subsampled)(h)] over {reps} draws = {:.5} vs (input)(h) = {:.5}",
        acc / reps as f64,
        before
    );
    Ok(())
}

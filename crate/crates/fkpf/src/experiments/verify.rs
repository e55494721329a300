//! Empirical verification of the sampling-error moment bound and the
//! moment-generating-function bounds.
//!
//! Each suite draws repeated empirical measures from a distribution whose
//! relevant integrals are known exactly, measures the moment of interest,
//! and checks it against the closed-form bound with a Monte Carlo slack
//! factor.

use rand::Rng;

use crate::bounds::{c_of_p, mgf_bound, MgfForm};
use crate::error::{Error, Result};
use crate::particle::{StateVec, TestFunction};
use crate::rng::RngStream;

/// A sampling distribution paired with a test function whose true mean
/// under the distribution is known exactly.
pub struct KnownDist {
    pub name: &'static str,
    pub sample: Box<dyn Fn(&mut RngStream) -> StateVec + Send + Sync>,
    pub h: TestFunction,
    /// Exact value of `P(h)`.
    pub mean_h: f64,
}

/// The three scalar test distributions used by the verification suites,
/// embedded on the x axis: uniform, two-point, and truncated Gaussian.
pub fn standard_test_distributions() -> Vec<KnownDist> {
    vec![
        KnownDist {
            name: "uniform",
            sample: Box::new(|rng: &mut RngStream| StateVec::new(rng.random::<f64>(), 0.0)),
            h: TestFunction::coord_x(),
            mean_h: 0.5,
        },
        KnownDist {
            name: "two-point",
            sample: Box::new(|rng: &mut RngStream| {
                StateVec::new(if rng.random::<f64>() < 0.5 { 0.0 } else { 1.0 }, 0.0)
            }),
            h: TestFunction::coord_x(),
            mean_h: 0.5,
        },
        KnownDist {
            name: "truncated-gaussian",
            // N(0.5, 0.15²) restricted to [0, 1] by rejection; symmetric
            // about 0.5, so the mean of h(x) = x is exactly 0.5.
            sample: Box::new(|rng: &mut RngStream| loop {
                let z: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
                let x = 0.5 + 0.15 * z;
                if (0.0..=1.0).contains(&x) {
                    return StateVec::new(x, 0.0);
                }
            }),
            h: TestFunction::coord_x(),
            mean_h: 0.5,
        },
    ]
}

/// Symmetric ±1 distribution (oscillation 2, mean 0) for the MGF suite.
pub fn rademacher_dist() -> KnownDist {
    KnownDist {
        name: "rademacher",
        sample: Box::new(|rng: &mut RngStream| {
            StateVec::new(if rng.random::<f64>() < 0.5 { -1.0 } else { 1.0 }, 0.0)
        }),
        h: TestFunction::new(2.0, |s: StateVec| s.x).expect("static bound"),
        mean_h: 0.0,
    }
}

/// One row of the moment-bound verification table.
#[derive(Debug, Clone)]
pub struct Lemma1Row {
    pub dist: &'static str,
    pub n: usize,
    pub p: f64,
    pub reps: usize,
    pub empirical_moment: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Estimates `E{|[P − S^N(P)](h)|^p}^{1/p}` over `reps` independent
/// empirical measures of size `n` and compares it against
/// `c(p)^{1/p}·σ(h)/√N`. Passes when the empirical moment does not exceed
/// the bound inflated by the Monte Carlo slack `1 + 3/√reps`.
pub fn verify_lemma1(
    dist: &KnownDist,
    n: usize,
    p: f64,
    reps: usize,
    rng: &mut RngStream,
) -> Result<Lemma1Row> {
    if reps < 100 {
        return Err(Error::invalid_argument("need at least 100 repetitions"));
    }
    if n == 0 {
        return Err(Error::invalid_argument("n must be at least 1"));
    }
    let mut acc = 0.0;
    for _ in 0..reps {
        let mut sum = 0.0;
        for _ in 0..n {
            sum += dist.h.eval((dist.sample)(rng));
        }
        let dev = (dist.mean_h - sum / n as f64).abs();
        acc += dev.powf(p);
    }
    let empirical_moment = (acc / reps as f64).powf(1.0 / p);
    let bound = c_of_p(p)?.powf(1.0 / p) * dist.h.osc_bound() / (n as f64).sqrt();
    let pass = empirical_moment <= bound * (1.0 + 3.0 / (reps as f64).sqrt());
    Ok(Lemma1Row {
        dist: dist.name,
        n,
        p,
        reps,
        empirical_moment,
        bound,
        pass,
    })
}

/// One row of the MGF verification table.
#[derive(Debug, Clone)]
pub struct MgfRow {
    pub dist: &'static str,
    pub n: usize,
    pub epsilon: f64,
    pub reps: usize,
    pub empirical_mgf: f64,
    pub exact_bound: f64,
    pub simple_bound: f64,
    pub pass: bool,
}

/// Estimates `E[e^{ε√N·|m(X)(h̄)|}]` for the centered function
/// `h̄ = h − P(h)` at every ε in the grid and compares against both bound
/// forms. A row passes when the empirical value does not exceed the exact
/// bound inflated by `1 + 5/√reps`.
pub fn verify_mgf(
    dist: &KnownDist,
    n: usize,
    epsilon_grid: &[f64],
    reps: usize,
    rng: &mut RngStream,
) -> Result<Vec<MgfRow>> {
    if reps == 0 || n == 0 || epsilon_grid.is_empty() {
        return Err(Error::invalid_argument(
            "need positive reps, n, and a non-empty epsilon grid",
        ));
    }
    let sqrt_n = (n as f64).sqrt();
    // One deviation sample per rep serves the whole ε grid.
    let mut deviations = Vec::with_capacity(reps);
    for _ in 0..reps {
        let mut sum = 0.0;
        for _ in 0..n {
            sum += dist.h.eval((dist.sample)(rng)) - dist.mean_h;
        }
        deviations.push((sum / n as f64).abs());
    }
    let sigma = dist.h.osc_bound();
    let slack = 1.0 + 5.0 / (reps as f64).sqrt();
    epsilon_grid
        .iter()
        .map(|&epsilon| {
            let empirical_mgf = deviations
                .iter()
                .map(|&d| (epsilon * sqrt_n * d).exp())
                .sum::<f64>()
                / reps as f64;
            let exact_bound = mgf_bound(epsilon, sigma, MgfForm::Exact)?;
            let simple_bound = mgf_bound(epsilon, sigma, MgfForm::Simple)?;
            Ok(MgfRow {
                dist: dist.name,
                n,
                epsilon,
                reps,
                empirical_mgf,
                exact_bound,
                simple_bound,
                pass: empirical_mgf <= exact_bound * slack,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma1_uniform_matches_known_moments() {
        let dists = standard_test_distributions();
        let uniform = &dists[0];
        let mut rng = RngStream::new(60, 0);
        let row = verify_lemma1(uniform, 100, 2.0, 2000, &mut rng).unwrap();
        // Exact second moment of the mean of 100 uniforms: 1/1200.
        assert!((row.empirical_moment - (1.0f64 / 1200.0).sqrt()).abs() < 0.002);
        assert!((row.bound - 0.1).abs() < 1e-12);
        assert!(row.pass);

        let row = verify_lemma1(uniform, 100, 1.0, 2000, &mut rng).unwrap();
        // Folded-normal first absolute moment ≈ σ·sqrt(2/π) ≈ 0.0230.
        assert!((row.empirical_moment - 0.023).abs() < 0.002);
        assert!((row.bound - 0.1).abs() < 1e-12);
        assert!(row.pass);
    }

    #[test]
    fn lemma1_point_mass_trivially_passes() {
        let dist = KnownDist {
            name: "point",
            sample: Box::new(|_| StateVec::new(0.4, 0.0)),
            h: TestFunction::coord_x(),
            mean_h: 0.4,
        };
        let mut rng = RngStream::new(61, 0);
        let row = verify_lemma1(&dist, 50, 3.0, 200, &mut rng).unwrap();
        // Summation dust only; the deviation is zero up to rounding.
        assert!(row.empirical_moment < 1e-12);
        assert!(row.pass);
    }

    #[test]
    fn mgf_grid_passes_for_rademacher() {
        let dist = rademacher_dist();
        let mut rng = RngStream::new(62, 0);
        let grid = [0.0, 0.5, 1.0];
        let rows = verify_mgf(&dist, 50, &grid, 20_000, &mut rng).unwrap();
        assert_eq!(rows[0].empirical_mgf, 1.0);
        assert_eq!(rows[0].exact_bound, 1.0);
        for row in &rows {
            assert!(row.pass, "failed at ε={}", row.epsilon);
            assert!(row.exact_bound <= row.simple_bound + 1e-12);
        }
    }

    #[test]
    fn truncated_gaussian_stays_in_unit_interval() {
        let dists = standard_test_distributions();
        let tg = &dists[2];
        let mut rng = RngStream::new(63, 0);
        for _ in 0..1000 {
            let s = (tg.sample)(&mut rng);
            assert!((0.0..=1.0).contains(&s.x));
        }
    }
}

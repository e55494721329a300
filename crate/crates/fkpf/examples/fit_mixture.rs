//! The parametric hand-off: fit a Gaussian mixture to a particle cloud by
//! greedy maximum likelihood, inspect it, serialize the payload, and
//! sample it back.

use fkpf::gml::{gml_fit, kl_divergence_mc, mixture_logpdf, sample_mixture, GmlConfig, MixtureModel};
use fkpf::particle::StateVec;
use fkpf::rng::RngStream;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Draws from a two-cluster synthetic target.
fn draw_target(rng: &mut RngStream) -> StateVec {
    let (cx, cy, std) = if rng.random::<f64>() < 0.6 {
        (0.3, 0.35, 0.05)
    } else {
        (0.75, 0.7, 0.08)
    };
    let zx: f64 = StandardNormal.sample(rng);
    let zy: f64 = StandardNormal.sample(rng);
    StateVec::new(cx + std * zx, cy + std * zy)
}

fn target_logpdf(x: StateVec) -> f64 {
    let comp = |cx: f64, cy: f64, var: f64| -> f64 {
        let d2 = (x.x - cx).powi(2) + (x.y - cy).powi(2);
        (-d2 / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var)
    };
    (0.6 * comp(0.3, 0.35, 0.0025) + 0.4 * comp(0.75, 0.7, 0.0064)).ln()
}

fn main() -> fkpf::Result<()> {
    let mut rng = RngStream::new(3, 0);
    let samples: Vec<StateVec> = (0..2000).map(|_| draw_target(&mut rng)).collect();

    for n_p in [1usize, 2, 4, 8] {
        let model = gml_fit(&samples, &GmlConfig::new(n_p))?;
        let loglik: f64 = samples.iter().map(|&x| mixture_logpdf(&model, x)).sum();
        let kl = kl_divergence_mc(target_logpdf, draw_target, &model, 20_000, &mut rng)?;
        println!(
            "N_p = {n_p}: sample loglik {loglik:9.1}, KL(f||g) = {:.4} ± {:.4}",
            kl.mean, kl.std_error
        );
    }

    let model = gml_fit(&samples, &GmlConfig::new(2))?;
    println!("\ntwo-component fit:");
    for (w, c) in model.components() {
        println!(
            "  weight {:.3} at ({:.3}, {:.3}), var ({:.4}, {:.4})",
            w, c.mean.x, c.mean.y, c.var[0], c.var[1]
        );
    }

    // The hand-off payload: 5 values per component.
    let payload = model.to_json()?;
    println!("\npayload ({} bytes): {payload}", payload.len());
    let restored = MixtureModel::from_json(&payload)?;

    // The receiving leader rebuilds its cloud by sampling the mixture.
    let rebuilt = sample_mixture(&restored, 300, &mut rng)?;
    let mean = rebuilt.mean();
    println!(
        "\nrebuilt 300 particles, cloud mean ({:.3}, {:.3})",
        mean.x, mean.y
    );
    Ok(())
}

//! Command-line entry point: Monte Carlo runs, bound evaluation, and the
//! concentration verification suites.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use fkpf::bounds::{
    c_of_p, deterioration_factor, dobrushin_bound, epsilon_um, exp_inequality, lp_bound_general,
    lp_bound_parametric, lp_bound_subsample, lp_bound_tight, mgf_bound, BoundQuery, MgfForm,
    ParametricBoundInputs, RegularityParams,
};
use fkpf::experiments::{
    emit_results, format_float, rademacher_dist, run_monte_carlo, standard_test_distributions,
    verify_lemma1, verify_mgf, ExperimentConfig,
};
use fkpf::rng::RngStream;

#[derive(Parser)]
#[command(name = "fkpf", about = "Particle filtering with intermittent compression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo tracking experiment and write CSV outputs.
    Run {
        /// JSON experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the CSV files.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the closed-form bounds for a JSON parameter file.
    Bounds {
        /// JSON bound parameters.
        #[arg(long)]
        params: PathBuf,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a concentration verification suite and write its table.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Lemma1,
    Mgf,
}

/// Parameter file for `fkpf bounds`.
#[derive(Debug, Deserialize)]
struct BoundParams {
    #[serde(rename = "eps_M")]
    eps_m: f64,
    #[serde(rename = "eps_G")]
    eps_g: f64,
    m: u32,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "N_b")]
    n_b: usize,
    q_u: f64,
    p: f64,
    #[serde(default)]
    horizon: Option<u32>,
    #[serde(default)]
    epsilon: Option<f64>,
    #[serde(default)]
    sigma_h: Option<f64>,
    #[serde(default)]
    a_u: Option<f64>,
    #[serde(default)]
    b_u: Option<f64>,
    #[serde(rename = "N_p", default)]
    n_p: Option<usize>,
    #[serde(default)]
    entropy_integral: Option<f64>,
    #[serde(rename = "universal_C", default)]
    universal_c: Option<f64>,
}

fn run_bounds(params: &BoundParams, out: &PathBuf) -> fkpf::Result<()> {
    let reg = RegularityParams::new(params.eps_m, params.eps_g, params.m)?;
    let query = BoundQuery::new(params.n, params.n_b, params.q_u, params.p)?;
    let eps_um = epsilon_um(&reg);
    let horizon = params.horizon.unwrap_or(10);

    let mut csv = String::from("bound,inputs,value,hypothesis_satisfied\n");
    let mut push = |name: &str, inputs: String, value: Option<f64>, ok: bool| {
        csv.push_str(&format!(
            "{},\"{}\",{},{}\n",
            name,
            inputs,
            value.map(format_float).unwrap_or_default(),
            if ok { "yes" } else { "no" }
        ));
    };

    push(
        "c_of_p",
        format!("p={}", params.p),
        Some(c_of_p(params.p)?),
        true,
    );
    push(
        "dobrushin_bound",
        format!(
            "eps_M={}; eps_G={}; m={}; horizon={}",
            params.eps_m, params.eps_g, params.m, horizon
        ),
        Some(dobrushin_bound(&reg, horizon)),
        true,
    );
    push(
        "epsilon_um",
        format!(
            "eps_M={}; eps_G={}; m={}",
            params.eps_m, params.eps_g, params.m
        ),
        Some(eps_um),
        true,
    );

    let sub_inputs = format!(
        "N={}; N_b={}; chi={:?}; q_u={}; p={}; eps_um={}",
        params.n, params.n_b, query.chi, params.q_u, params.p, eps_um
    );
    match lp_bound_subsample(&query, eps_um) {
        Ok(v) => push("lp_bound_subsample", sub_inputs, Some(v), true),
        Err(_) => push("lp_bound_subsample", sub_inputs, None, false),
    }
    push(
        "lp_bound_general",
        format!(
            "N={}; N_b={}; q_u={}; p={}; eps_um={}",
            params.n, params.n_b, params.q_u, params.p, eps_um
        ),
        Some(lp_bound_general(&query, eps_um)?),
        params.q_u <= 2.0 / 3.0,
    );
    let tight_inputs = format!(
        "N={}; N_b={}; chi={:?}; q_u={}; p={}; eps_um={}",
        params.n, params.n_b, query.chi, params.q_u, params.p, eps_um
    );
    match lp_bound_tight(&query, eps_um) {
        Ok(v) => push("lp_bound_tight", tight_inputs, Some(v), params.q_u <= 2.0 / 3.0),
        Err(_) => push("lp_bound_tight", tight_inputs, None, false),
    }
    if let Some(chi) = query.chi {
        if params.p.fract() == 0.0 {
            push(
                "deterioration_factor",
                format!("q_u={}; chi={}; p={}", params.q_u, chi, params.p),
                Some(deterioration_factor(params.q_u, chi, params.p as u32)?),
                true,
            );
        }
    }
    if let Some(eps) = params.epsilon {
        let v = exp_inequality(eps, &query, eps_um)?;
        push(
            "exp_inequality",
            format!(
                "epsilon={}; N={}; N_b={}; q_u={}; eps_um={}; raw={}",
                eps,
                params.n,
                params.n_b,
                params.q_u,
                eps_um,
                format_float(v.raw)
            ),
            Some(v.clipped),
            true,
        );
        if let Some(sigma) = params.sigma_h {
            push(
                "mgf_bound_exact",
                format!("epsilon={eps}; sigma_h={sigma}"),
                Some(mgf_bound(eps, sigma, MgfForm::Exact)?),
                true,
            );
            push(
                "mgf_bound_simple",
                format!("epsilon={eps}; sigma_h={sigma}"),
                Some(mgf_bound(eps, sigma, MgfForm::Simple)?),
                true,
            );
        }
    }
    if let (Some(a_u), Some(b_u), Some(n_p)) = (params.a_u, params.b_u, params.n_p) {
        let mut inputs = ParametricBoundInputs::new(a_u, b_u, n_p)?;
        let mut tags = Vec::new();
        match params.entropy_integral {
            Some(v) => inputs.entropy_integral = v,
            None => tags.push("entropy_integral=1.0[default,not-from-paper]".to_string()),
        }
        match params.universal_c {
            Some(v) => inputs.universal_c = v,
            None => tags.push("universal_C=1.0[default,not-from-paper]".to_string()),
        }
        let mut desc = format!(
            "a_u={}; b_u={}; N_p={}; N={}; q_u={}; p={}; eps_G={}",
            a_u, b_u, n_p, params.n, params.q_u, params.p, params.eps_g
        );
        for tag in tags {
            desc.push_str("; ");
            desc.push_str(&tag);
        }
        push(
            "lp_bound_parametric",
            desc,
            Some(lp_bound_parametric(&query, &inputs, params.eps_g)?),
            true,
        );
    }

    fs::write(out, csv)?;
    Ok(())
}

fn run_verify(suite: Suite, out: &PathBuf, seed: u64) -> fkpf::Result<()> {
    let mut csv = String::new();
    match suite {
        Suite::Lemma1 => {
            csv.push_str("dist,N,p,reps,empirical_moment,bound,pass\n");
            let dists = standard_test_distributions();
            let mut stream = 0u64;
            for dist in &dists {
                for &n in &[25usize, 100, 400] {
                    for &p in &[1.0, 2.0, 3.0, 4.0] {
                        let mut rng = RngStream::new(seed, stream);
                        stream += 1;
                        let row = verify_lemma1(dist, n, p, 10_000, &mut rng)?;
                        csv.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            row.dist,
                            row.n,
                            row.p,
                            row.reps,
                            format_float(row.empirical_moment),
                            format_float(row.bound),
                            row.pass
                        ));
                    }
                }
            }
        }
        Suite::Mgf => {
            csv.push_str("dist,N,epsilon,reps,empirical_mgf,exact_bound,simple_bound,pass\n");
            let grid: Vec<f64> = (1..=20).map(|i| i as f64 * 0.1).collect();
            let mut dists = standard_test_distributions();
            dists.push(rademacher_dist());
            for (i, dist) in dists.iter().enumerate() {
                let mut rng = RngStream::new(seed, 1000 + i as u64);
                for row in verify_mgf(dist, 50, &grid, 100_000, &mut rng)? {
                    csv.push_str(&format!(
                        "{},{},{},{},{},{},{},{}\n",
                        row.dist,
                        row.n,
                        row.epsilon,
                        row.reps,
                        format_float(row.empirical_mgf),
                        format_float(row.exact_bound),
                        format_float(row.simple_bound),
                        row.pass
                    ));
                }
            }
        }
    }
    fs::write(out, csv)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => (|| -> fkpf::Result<()> {
            let text = fs::read_to_string(&config)?;
            let config = ExperimentConfig::from_json(&text)?;
            let metrics = run_monte_carlo(&config)?;
            emit_results(&metrics, &config, &out)?;
            println!(
                "wrote {} ({} trials, {} degenerate, empirical q = {:.4})",
                out.display(),
                metrics.trials_included,
                metrics.trials_degenerate,
                metrics.empirical_q
            );
            Ok(())
        })(),
        Command::Bounds { params, out } => (|| -> fkpf::Result<()> {
            let text = fs::read_to_string(&params)?;
            let params: BoundParams = serde_json::from_str(&text)?;
            run_bounds(&params, &out)?;
            println!("wrote {}", out.display());
            Ok(())
        })(),
        Command::Verify { suite, out, seed } => (|| -> fkpf::Result<()> {
            run_verify(suite, &out, seed)?;
            println!("wrote {}", out.display());
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

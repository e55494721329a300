//! Closed-form error bounds: the constants, the time-uniform `L_p` bounds
//! for both compression styles, the exponential inequality, and the
//! deterioration factor that prices compression.

use fkpf::bounds::{
    binary_sensor_eps_g, c_of_p, deterioration_factor, dobrushin_bound, epsilon_um,
    exp_inequality, lp_bound_general, lp_bound_parametric, lp_bound_subsample, lp_bound_tight,
    mgf_bound, BoundQuery, MgfForm, ParametricBoundInputs, RegularityParams,
};
use fkpf::models::BinarySensorModel;

fn main() -> fkpf::Result<()> {
    println!("moment constants: c(1)={}  c(2)={}  c(3)={:.4}  c(4)={}",
        c_of_p(1.0)?, c_of_p(2.0)?, c_of_p(3.0)?, c_of_p(4.0)?);

    let params = RegularityParams::new(0.5, 0.8, 1)?;
    let eps_um = epsilon_um(&params);
    println!(
        "mixing: Dobrushin estimate at horizon 4 = {:.4}, stability constant eps_um = {}",
        dobrushin_bound(&params, 4),
        eps_um
    );

    // Subsampling filter, replication path (N a multiple of N_b).
    let query = BoundQuery::new(400, 100, 0.25, 1.0)?;
    println!(
        "\nL_1 bound, N=400 N_b=100 q_u=0.25: replication path {:.4}, general path {:.4}",
        lp_bound_subsample(&query, eps_um)?,
        lp_bound_general(&query, eps_um)?
    );
    let query2 = BoundQuery::new(400, 40, 0.1, 2.0)?;
    println!(
        "tighter integer-p form at p=2, chi=10, q_u=0.1: {:.4}",
        lp_bound_tight(&query2, eps_um)?
    );
    println!(
        "deterioration factor (q_u=0.1, chi=10, p=2): {:.4}  — the ~40% example",
        deterioration_factor(0.1, 10, 2)?
    );

    // Large deviations.
    let tail = exp_inequality(1.0, &BoundQuery::new(100, 25, 0.5, 2.0)?, 1.0)?;
    println!("\nexponential inequality at eps=1: raw {:.3e}, clipped {:.3e}", tail.raw, tail.clipped);

    // Moment-generating-function bounds.
    println!(
        "MGF bounds at eps=1, sigma=1: exact {:.4} <= simple {:.4}",
        mgf_bound(1.0, 1.0, MgfForm::Exact)?,
        mgf_bound(1.0, 1.0, MgfForm::Simple)?
    );

    // Parametric filter. The packing-entropy integral and the universal
    // chaining constant are not computable from the class alone; they are
    // explicit inputs defaulting to 1.0.
    let inputs = ParametricBoundInputs::new(0.5, 2.0, 8)?;
    let pq = BoundQuery::new(400, 400, 0.25, 2.0)?;
    println!(
        "\nparametric bound (a=0.5, b=2, N_p=8, q_u=0.25, placeholder entropy inputs): {:.1}",
        lp_bound_parametric(&pq, &inputs, 0.8)?
    );

    // Potential-ratio constant for the binary-sensor likelihood.
    let sensor = BinarySensorModel::new(0.25, 0.95, 0.02)?;
    println!(
        "binary-sensor eps_G over at most 30 satellites: {:.3e}",
        binary_sensor_eps_g(&sensor, 30)
    );
    Ok(())
}

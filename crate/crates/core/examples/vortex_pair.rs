//! Two co-rotating point vortices compared with their closed-form rigid
//! rotation.
//!
//!     cargo run --release --example vortex_pair

use vprk::diagnostics::{even_step_counts, run_convergence, Reference};
use vprk::linalg;
use vprk::models::{vortex_exact, vortex_system, VortexParams};
use vprk::{consistent_init, integrate, tableau_by_id, SolverConfig};

fn main() -> vprk::Result<()> {
    let params = VortexParams::default();
    let sys = vortex_system(params.clone())?;
    let d = 1.0;
    let q0 = params.pair_initial(d)?;
    println!(
        "angular velocity of the pair: {}",
        params.pair_angular_velocity(d)?
    );

    let cfg = SolverConfig::default();
    let tableau = tableau_by_id("gauss2")?;
    let x0 = consistent_init(&sys, &q0);
    let mut worst: f64 = 0.0;
    integrate(&sys, &tableau, &x0, 0.1, 7.0, &cfg, |x, _| {
        let exact = vortex_exact(&params, d, x.t).expect("valid pair");
        worst = worst.max(linalg::norm_inf(&linalg::sub(&x.q, &exact)));
    })
    .map_err(|f| f.error)?;
    println!("gauss2, h = 0.1: max deviation from the exact rotation over [0, 7] = {worst:.2e}");

    let exact = |t: f64| vortex_exact(&params, d, t).expect("valid pair");
    let hs: Vec<f64> = even_step_counts(20, 400, 6)
        .into_iter()
        .map(|n| 7.0 / n as f64)
        .collect();
    for id in [
        "gauss1",
        "gauss2",
        "gauss3",
        "radau_iia3",
        "lobatto3",
        "lobatto4",
    ] {
        let r = run_convergence(&sys, id, &q0, 7.0, &hs, Reference::ClosedForm(&exact), &cfg)?;
        println!(
            "{id:<11} fitted order {:.2}",
            r.fitted_order.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

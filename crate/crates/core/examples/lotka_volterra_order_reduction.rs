//! Lotka-Volterra written as a Lagrangian with nonlinear α: the Gauss
//! methods lose order (s + 1 for odd s, s for even s) and the discrete
//! trajectory leaves the constraint p = α(q).
//!
//!     cargo run --release --example lotka_volterra_order_reduction

use vprk::diagnostics::{even_step_counts, run_convergence, run_drift, Reference};
use vprk::models::{lotka_volterra_system, LotkaVolterraParams};
use vprk::reference::reference_solution;
use vprk::SolverConfig;

fn main() -> vprk::Result<()> {
    let sys = lotka_volterra_system(LotkaVolterraParams::default());
    let q0 = [1.0, 1.0];
    let cfg = SolverConfig::default();

    let reference = reference_solution(&sys, &q0, 5.0, 1e-5, 1)?;
    let hs: Vec<f64> = even_step_counts(20, 1000, 7)
        .into_iter()
        .map(|n| 5.0 / n as f64)
        .collect();
    for (id, classical) in [
        ("gauss1", 2),
        ("gauss2", 4),
        ("gauss3", 6),
        ("radau_iia3", 5),
    ] {
        let r = run_convergence(
            &sys,
            id,
            &q0,
            5.0,
            &hs,
            Reference::Trajectory(&reference),
            &cfg,
        )?;
        println!(
            "{id:<11} classical order {classical}, observed {:.2}",
            r.fitted_order.unwrap_or(f64::NAN)
        );
    }

    for id in ["gauss2", "radau_iia3"] {
        let d = run_drift(&sys, id, &q0, 0.1, 10.0, 100, &cfg)?;
        println!(
            "{id:<11} max |p - alpha(q)| over 100 steps: {:.2e}",
            d.max_constraint_residual()
        );
    }
    Ok(())
}

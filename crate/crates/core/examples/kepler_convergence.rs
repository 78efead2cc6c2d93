//! Convergence study on the planar Kepler problem: endpoint error at T = 7
//! against a high-accuracy explicit reference, for every shipped method.
//!
//!     cargo run --release --example kepler_convergence

use vprk::diagnostics::{even_step_counts, run_convergence, Reference};
use vprk::models::{kepler_system, KeplerParams};
use vprk::reference::reference_solution;
use vprk::{SolverConfig, METHOD_IDS};

fn main() -> vprk::Result<()> {
    let params = KeplerParams::default();
    let sys = kepler_system(params)?;
    let q0 = params.pericenter();
    let t_final = 7.0;

    // h_ref = 1e-5 keeps this quick; the CLI default of 1e-6 pushes the
    // reference error further below the finest step sizes
    let reference = reference_solution(&sys, &q0, t_final, 1e-5, 1)?;
    let hs: Vec<f64> = even_step_counts(20, 2000, 8)
        .into_iter()
        .map(|n| t_final / n as f64)
        .collect();

    println!(
        "{:<11} {:>8}  errors (h = {:.4} ... {:.4})",
        "method",
        "order",
        hs[0],
        hs[hs.len() - 1]
    );
    for id in METHOD_IDS {
        let r = run_convergence(
            &sys,
            id,
            &q0,
            t_final,
            &hs,
            Reference::Trajectory(&reference),
            &SolverConfig::default(),
        )?;
        let order = r
            .fitted_order
            .map_or("-".to_string(), |p| format!("{p:.2}"));
        let errs: Vec<String> = r
            .errors
            .iter()
            .map(|e| e.map_or("fail".into(), |e| format!("{e:.1e}")))
            .collect();
        println!("{id:<11} {order:>8}  {}", errs.join(" "));
    }
    Ok(())
}

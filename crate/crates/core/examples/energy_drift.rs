//! Long-time energy behaviour on Kepler with h = 0.1: the variational Gauss
//! methods keep |H| in a bounded band, Radau IIA slowly dissipates.
//!
//!     cargo run --release --example energy_drift [t_final]

use vprk::diagnostics::run_drift;
use vprk::models::{kepler_system, KeplerParams};
use vprk::SolverConfig;

fn main() -> vprk::Result<()> {
    let t_final: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(2000.0);
    let params = KeplerParams::default();
    let sys = kepler_system(params)?;
    let steps = (t_final / 0.1).round() as usize;

    println!(
        "{:<11} {:>12} {:>14} {:>14} {:>12}",
        "method", "max |H|", "1st period", "drift rate", "max |p-α(q)|"
    );
    for id in ["gauss1", "gauss2", "gauss3", "radau_iia3"] {
        let r = run_drift(
            &sys,
            id,
            &params.pericenter(),
            0.1,
            t_final,
            steps,
            &SolverConfig::default(),
        )?;
        println!(
            "{id:<11} {:>12.3e} {:>14.3e} {:>14.3e} {:>12.1e}",
            r.max_abs_hamiltonian(),
            r.envelope_until(params.period()),
            r.linear_drift_rate,
            r.max_constraint_residual()
        );
    }
    Ok(())
}

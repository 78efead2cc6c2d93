//! The explicit sixth-order reference integrator on the Euler-Lagrange
//! field: one Kepler period returns to the start.
//!
//!     cargo run --release --example reference_solution

use vprk::linalg;
use vprk::models::{kepler_system, KeplerParams};
use vprk::reference::reference_solution;

fn main() -> vprk::Result<()> {
    let params = KeplerParams::default();
    let sys = kepler_system(params)?;
    let q0 = params.pericenter();
    for h in [1e-2, 1e-3, 1e-4] {
        let tr = reference_solution(&sys, &q0, params.period(), h, 4)?;
        let end = tr.last();
        println!(
            "h = {h:.0e}: |q(T) - q(0)| = {:.2e}, |p - alpha(q)| = {:.1e}",
            linalg::norm_inf(&linalg::sub(&end.q, &q0)),
            end.constraint_residual(&sys)
        );
    }
    Ok(())
}

//! Poisson-map test for linear α: the Jacobian J of one step satisfies
//! J Λ⁻¹ Jᵀ = Λ⁻¹ for symplectic tableaus only.
//!
//!     cargo run --release --example poisson_map

use vprk::diagnostics::poisson_map_check;
use vprk::models::{kepler_system, vortex_system, KeplerParams, VortexParams};
use vprk::{SolverConfig, VelocityLinearSystem};

fn main() -> vprk::Result<()> {
    let params = KeplerParams::default();
    let kepler = kepler_system(params)?;
    let vortices = vortex_system(VortexParams::default())?;
    let cases: [(&str, &dyn VelocityLinearSystem, Vec<f64>); 2] = [
        ("kepler", &kepler, params.pericenter()),
        ("vortex2", &vortices, vec![0.1, -0.2, 0.9, 0.3]),
    ];
    let cfg = SolverConfig::default();
    for (name, sys, q) in &cases {
        for h in [0.05, 0.1, 0.2] {
            let row: Vec<String> = ["gauss1", "gauss2", "gauss3", "radau_iia2", "radau_iia3"]
                .iter()
                .map(|id| {
                    let d = poisson_map_check(*sys, id, h, q, &cfg).expect("linear alpha");
                    format!("{id} {d:.1e}")
                })
                .collect();
            println!("{name:<8} h = {h:<5} {}", row.join("  "));
        }
    }
    Ok(())
}

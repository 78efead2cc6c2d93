//! Inspecting the stage solver: iteration counts for exact and simplified
//! Jacobians, and the condition of the W-matrix that governs solvability.
//!
//!     cargo run --release --example newton_diagnostics

use vprk::models::{kepler_system, KeplerParams};
use vprk::prk::{w_matrix, InitialGuess};
use vprk::{consistent_init, solve_stages, tableau_by_id, JacobianMode, SolverConfig, METHOD_IDS};

fn main() -> vprk::Result<()> {
    let params = KeplerParams::default();
    let sys = kepler_system(params)?;
    let x = consistent_init(&sys, &params.pericenter());
    let h = 0.1;

    println!(
        "{:<11} {:>6} {:>11} {:>11} {:>12}",
        "method", "exact", "simplified", "zero guess", "cond(W)"
    );
    for id in METHOD_IDS {
        let t = tableau_by_id(id)?;
        let run = |mode, guess| {
            let cfg = SolverConfig {
                jacobian_mode: mode,
                initial_guess: guess,
                max_newton_iters: 200,
                record_w_condition: true,
                ..SolverConfig::default()
            };
            solve_stages(&sys, &t, h, &x, &cfg)
        };
        let fmt = |r: &vprk::Result<vprk::prk::StageSolution>| match r {
            Ok(s) => s.report.iterations.to_string(),
            Err(_) => "fail".into(),
        };
        let exact = run(JacobianMode::Exact, InitialGuess::ElField);
        let simple = run(JacobianMode::Simplified, InitialGuess::ElField);
        let zero = run(JacobianMode::Exact, InitialGuess::Zero);
        let qs = vec![x.q.clone(); t.stages()];
        let cond = vprk::linalg::condition_estimate(&w_matrix(&sys, &t, &qs));
        println!(
            "{id:<11} {:>6} {:>11} {:>11} {:>12.3e}",
            fmt(&exact),
            fmt(&simple),
            fmt(&zero),
            cond
        );
    }
    Ok(())
}

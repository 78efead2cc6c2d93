//! L = ½(y ẋ − x ẏ) with H = 0: the exact flow is the identity and so is
//! every method, to the last bit.
//!
//!     cargo run --example toy_identity

use vprk::models::toy_system;
use vprk::{consistent_init, prk_step, tableau_by_id, SolverConfig, METHOD_IDS};

fn main() -> vprk::Result<()> {
    let sys = toy_system();
    let x0 = consistent_init(&sys, &[1.0, 2.0]);
    println!("start: q = {:?}, p = {:?}", x0.q, x0.p);
    for id in METHOD_IDS {
        let t = tableau_by_id(id)?;
        let mut x = x0.clone();
        let mut iters = 0;
        for _ in 0..1000 {
            let (next, rep) = prk_step(&sys, &t, 1.0, &x, &SolverConfig::default())?;
            iters += rep.iterations;
            x = next;
        }
        println!(
            "{id:<11} after 1000 steps of h = 1: q = {:?}, p = {:?}, Newton updates {iters}",
            x.q, x.p
        );
    }
    Ok(())
}

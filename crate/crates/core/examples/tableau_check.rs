//! Prints every shipped tableau with its symplecticity and simplifying
//! assumption residuals, and rebuilds Lobatto IIIB from IIIA.
//!
//!     cargo run --example tableau_check

use vprk::cli::tableau_report;
use vprk::tableau::{conjugate_tableau, lobatto_iiia_iiib};
use vprk::METHOD_IDS;

fn main() -> vprk::Result<()> {
    for id in METHOD_IDS {
        println!("{}", tableau_report(id)?);
    }
    for s in 2..=4 {
        let t = lobatto_iiia_iiib(s)?;
        let rebuilt = conjugate_tableau(&t.a, &t.b)?;
        println!(
            "lobatto{s}: |conjugate(IIIA) - IIIB| = {:e}",
            rebuilt.sub(&t.a_bar).max_abs()
        );
    }
    Ok(())
}

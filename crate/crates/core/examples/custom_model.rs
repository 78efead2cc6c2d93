//! Plugging in a new system: a charged particle's guiding centre in a
//! uniform magnetic field and a quadratic potential,
//! L = ½B(x ẏ − y ẋ) − ½k(x² + y²), which is linear in the velocities.
//!
//!     cargo run --example custom_model

use vprk::linalg::Matrix;
use vprk::system::el_vector_field;
use vprk::{consistent_init, integrate, tableau_by_id, SolverConfig, VelocityLinearSystem};

struct GuidingCentre {
    b: f64,
    k: f64,
}

impl VelocityLinearSystem for GuidingCentre {
    fn dim(&self) -> usize {
        2
    }
    fn name(&self) -> &str {
        "guiding_centre"
    }
    fn alpha(&self, q: &[f64]) -> Vec<f64> {
        vec![-0.5 * self.b * q[1], 0.5 * self.b * q[0]]
    }
    fn d_alpha(&self, _q: &[f64]) -> Matrix {
        Matrix::from_rows(&[[0.0, -0.5 * self.b], [0.5 * self.b, 0.0]])
    }
    fn d2_alpha_vp(&self, _q: &[f64], _v: &[f64]) -> Matrix {
        Matrix::zeros(2, 2)
    }
    fn hamiltonian(&self, q: &[f64]) -> f64 {
        0.5 * self.k * (q[0] * q[0] + q[1] * q[1])
    }
    fn dh(&self, q: &[f64]) -> Vec<f64> {
        vec![self.k * q[0], self.k * q[1]]
    }
    fn d2h(&self, _q: &[f64]) -> Matrix {
        Matrix::from_diagonal(&[self.k, self.k])
    }
    fn linear_alpha(&self) -> Option<Matrix> {
        Some(Matrix::from_rows(&[[0.0, self.b], [-self.b, 0.0]]))
    }
}

fn main() -> vprk::Result<()> {
    let sys = GuidingCentre { b: 2.0, k: 1.0 };
    let q0 = [1.0, 0.0];
    println!("drift velocity at q0: {:?}", el_vector_field(&sys, &q0)?);

    // exact motion is a circle traversed at angular rate k/B
    let x0 = consistent_init(&sys, &q0);
    let end = integrate(
        &sys,
        &tableau_by_id("gauss2")?,
        &x0,
        0.1,
        10.0,
        &SolverConfig::default(),
        |_, _| {},
    )
    .map_err(|f| f.error)?;
    let angle = 10.0 * sys.k / sys.b;
    println!("numerical q(10) = {:?}", end.q);
    println!("exact     q(10) = {:?}", [angle.cos(), angle.sin()]);
    println!(
        "energy change   = {:.1e}",
        sys.hamiltonian(&end.q) - sys.hamiltonian(&q0)
    );
    Ok(())
}

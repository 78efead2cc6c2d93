//! Degenerate Lagrangians `L(q, q̇) = α(q)·q̇ − H(q)` and the continuous-time
//! objects derived from them.
//!
//! The Legendre transform of such a Lagrangian is `p = α(q)`, so the motion
//! lives on the graph of `α` (the primary constraint) and obeys the index-1
//! DAE
//!
//! ```text
//! p = α(q)
//! ṗ = Dα(q)ᵀ q̇ − DH(q)
//! ```
//!
//! Differentiating the constraint once gives the first-order Euler-Lagrange
//! equations `M(q) q̇ = DH(q)` with the antisymmetric mass matrix
//! `M = Dαᵀ − Dα`.

use crate::error::{Error, Result};
use crate::linalg::{self, Lu, Matrix};

/// Default tolerance (max-norm) for `‖p − α(q)‖` on a consistent point.
pub const TOL_CONSISTENCY: f64 = 1e-10;

/// A Lagrangian system linear in velocities, with analytic derivatives.
///
/// `d_alpha(q)[(μ, ν)] = ∂α_μ/∂q^ν`. The second derivative of `α` is only
/// needed contracted with a vector, see [`VelocityLinearSystem::d2_alpha_vp`].
pub trait VelocityLinearSystem: Send + Sync {
    /// Phase dimension `n = dim Q` (even).
    fn dim(&self) -> usize;

    fn name(&self) -> &str;

    fn alpha(&self, q: &[f64]) -> Vec<f64>;

    fn d_alpha(&self, q: &[f64]) -> Matrix;

    /// `D(Dαᵀ v)(q)`: entry `(μ, ν)` is `Σ_β ∂²α_β/∂q^μ∂q^ν · v^β`.
    fn d2_alpha_vp(&self, q: &[f64], v: &[f64]) -> Matrix;

    fn hamiltonian(&self, q: &[f64]) -> f64;

    fn dh(&self, q: &[f64]) -> Vec<f64>;

    fn d2h(&self, q: &[f64]) -> Matrix;

    /// `Some(Λ)` iff `α(q) = −½Λq` exactly, with `Λ` constant, antisymmetric
    /// and invertible.
    fn linear_alpha(&self) -> Option<Matrix> {
        None
    }

    /// Rejects points where the model is undefined (log or Coulomb
    /// singularities). Evaluators above may return non-finite values there.
    fn check_domain(&self, _q: &[f64]) -> Result<()> {
        Ok(())
    }
}

impl<S: VelocityLinearSystem + ?Sized> VelocityLinearSystem for Box<S> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn alpha(&self, q: &[f64]) -> Vec<f64> {
        (**self).alpha(q)
    }
    fn d_alpha(&self, q: &[f64]) -> Matrix {
        (**self).d_alpha(q)
    }
    fn d2_alpha_vp(&self, q: &[f64], v: &[f64]) -> Matrix {
        (**self).d2_alpha_vp(q, v)
    }
    fn hamiltonian(&self, q: &[f64]) -> f64 {
        (**self).hamiltonian(q)
    }
    fn dh(&self, q: &[f64]) -> Vec<f64> {
        (**self).dh(q)
    }
    fn d2h(&self, q: &[f64]) -> Matrix {
        (**self).d2h(q)
    }
    fn linear_alpha(&self) -> Option<Matrix> {
        (**self).linear_alpha()
    }
    fn check_domain(&self, q: &[f64]) -> Result<()> {
        (**self).check_domain(q)
    }
}

/// A point `(t, q, p)` of phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub t: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(t: f64, q: Vec<f64>, p: Vec<f64>) -> Self {
        PhasePoint { t, q, p }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.q.iter().chain(&self.p).all(|v| v.is_finite())
    }

    /// `‖p − α(q)‖_∞`, the distance from the primary constraint.
    pub fn constraint_residual<S: VelocityLinearSystem + ?Sized>(&self, sys: &S) -> f64 {
        linalg::norm_inf(&linalg::sub(&self.p, &sys.alpha(&self.q)))
    }

    pub fn is_consistent<S: VelocityLinearSystem + ?Sized>(&self, sys: &S, tol: f64) -> bool {
        self.constraint_residual(sys) <= tol
    }
}

/// Time-ordered samples plus the per-step solver reports that produced them.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    samples: Vec<PhasePoint>,
    reports: Vec<crate::prk::StageSolveReport>,
}

impl Trajectory {
    pub fn new(start: PhasePoint) -> Self {
        Trajectory {
            samples: vec![start],
            reports: Vec::new(),
        }
    }

    /// Appends a sample; time must increase strictly.
    pub fn push(&mut self, x: PhasePoint) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if !(x.t > last.t) {
                return Err(Error::InvalidParameter(format!(
                    "trajectory time must increase: {} after {}",
                    x.t, last.t
                )));
            }
        }
        self.samples.push(x);
        Ok(())
    }

    pub fn push_step(&mut self, x: PhasePoint, report: crate::prk::StageSolveReport) -> Result<()> {
        self.push(x)?;
        self.reports.push(report);
        Ok(())
    }

    pub fn samples(&self) -> &[PhasePoint] {
        &self.samples
    }

    pub fn reports(&self) -> &[crate::prk::StageSolveReport] {
        &self.reports
    }

    pub fn first(&self) -> &PhasePoint {
        &self.samples[0]
    }

    pub fn last(&self) -> &PhasePoint {
        self.samples.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// `M(q) = Dα(q)ᵀ − Dα(q)`.
pub fn mass_matrix<S: VelocityLinearSystem + ?Sized>(sys: &S, q: &[f64]) -> Matrix {
    let da = sys.d_alpha(q);
    da.transpose().sub(&da)
}

/// Solves `M(q) q̇ = DH(q)` for the Euler-Lagrange velocity.
pub fn el_vector_field<S: VelocityLinearSystem + ?Sized>(sys: &S, q: &[f64]) -> Result<Vec<f64>> {
    sys.check_domain(q)?;
    let m = mass_matrix(sys, q);
    let lu = Lu::factor(&m).map_err(|_| Error::SingularMassMatrix { q: q.to_vec() })?;
    Ok(lu.solve(&sys.dh(q)))
}

/// Residuals of the constraint and momentum equations:
/// `(p − α(q), ṗ − Dα(q)ᵀq̇ + DH(q))`.
pub fn dae_residual<S: VelocityLinearSystem + ?Sized>(
    sys: &S,
    x: &PhasePoint,
    qdot: &[f64],
    pdot: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let constraint = linalg::sub(&x.p, &sys.alpha(&x.q));
    let da = sys.d_alpha(&x.q);
    let dh = sys.dh(&x.q);
    let flow = da.tr_mul_vec(qdot);
    let momentum = pdot
        .iter()
        .zip(flow.iter().zip(&dh))
        .map(|(pd, (f, g))| pd - f + g)
        .collect();
    (constraint, momentum)
}

/// Places `q0` on the primary constraint at `t = 0`.
pub fn consistent_init<S: VelocityLinearSystem + ?Sized>(sys: &S, q0: &[f64]) -> PhasePoint {
    PhasePoint::new(0.0, q0.to_vec(), sys.alpha(q0))
}

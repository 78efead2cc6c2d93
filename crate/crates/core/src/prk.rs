//! Variational partitioned Runge-Kutta steps for the degenerate DAE.
//!
//! With internal stages `Q_i = q + h Σ_j a_ij Q̇_j` and
//! `Ṗ_i = Dα(Q_i)ᵀ Q̇_i − DH(Q_i)`, the stage momenta are eliminated by the
//! constraint `P_i = α(Q_i)`, which leaves `s·n` equations in the stage
//! velocities alone:
//!
//! ```text
//! R_i(Q̇) = α(Q_i) − p − h Σ_j ā_ij (Dα(Q_j)ᵀ Q̇_j − DH(Q_j)) = 0
//! ```
//!
//! These are solved by Newton's method. The step itself is
//! `q̄ = q + h Σ b_j Q̇_j`, `p̄ = p + h Σ b_j Ṗ_j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Lu, Matrix};
use crate::system::{el_vector_field, PhasePoint, VelocityLinearSystem};
use crate::tableau::PartitionedTableau;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    /// Full derivative, including the second-derivative terms of `α` and `H`.
    Exact,
    /// Drops the second-derivative terms; the Jacobian becomes `−h W`.
    Simplified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    /// Every stage velocity starts at the Euler-Lagrange velocity at `q`.
    ElField,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Convergence threshold; the stage residual must satisfy
    /// `‖R‖_∞ ≤ newton_tol·|h|`.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub jacobian_mode: JacobianMode,
    pub initial_guess: InitialGuess,
    /// Also record the condition estimate of `W` at the converged stages.
    pub record_w_condition: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newton_tol: 1e-12,
            max_newton_iters: 50,
            jacobian_mode: JacobianMode::Exact,
            initial_guess: InitialGuess::ElField,
            record_w_condition: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0 && self.newton_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            )));
        }
        if self.max_newton_iters == 0 {
            return Err(Error::InvalidParameter(
                "max_newton_iters must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Newton record for one step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StageSolveReport {
    /// Number of Newton updates applied.
    pub iterations: usize,
    /// `‖R‖_∞` at the returned stage velocities.
    pub final_residual: f64,
    pub w_condition: Option<f64>,
    pub converged: bool,
}

/// Converged stage velocities and momenta rates, `s` rows of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSolution {
    pub qdots: Vec<Vec<f64>>,
    pub pdots: Vec<Vec<f64>>,
    pub report: StageSolveReport,
}

fn stage_positions(t: &PartitionedTableau, h: f64, q: &[f64], qdots: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let s = t.stages();
    (0..s)
        .map(|i| {
            let mut qi = q.to_vec();
            for j in 0..s {
                linalg::axpy(h * t.a[(i, j)], &qdots[j], &mut qi);
            }
            qi
        })
        .collect()
}

/// `Dα(Q)ᵀ Q̇ − DH(Q)`.
fn momentum_rate<S: VelocityLinearSystem + ?Sized>(sys: &S, qi: &[f64], qdot: &[f64]) -> Vec<f64> {
    linalg::sub(&sys.d_alpha(qi).tr_mul_vec(qdot), &sys.dh(qi))
}

/// The stage equations `R_i` evaluated at the given stage velocities.
///
/// Outside a model's domain the entries may be non-finite; no error is raised
/// here so that the Newton driver can report the failure uniformly.
pub fn stage_residual<S: VelocityLinearSystem + ?Sized>(
    sys: &S,
    t: &PartitionedTableau,
    h: f64,
    x: &PhasePoint,
    qdots: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let s = t.stages();
    let qs = stage_positions(t, h, &x.q, qdots);
    let rates: Vec<Vec<f64>> = (0..s)
        .map(|j| momentum_rate(sys, &qs[j], &qdots[j]))
        .collect();
    (0..s)
        .map(|i| {
            let mut r = linalg::sub(&sys.alpha(&qs[i]), &x.p);
            for j in 0..s {
                linalg::axpy(-h * t.a_bar[(i, j)], &rates[j], &mut r);
            }
            r
        })
        .collect()
}

fn jacobian_at<S: VelocityLinearSystem + ?Sized>(
    sys: &S,
    t: &PartitionedTableau,
    h: f64,
    qs: &[Vec<f64>],
    qdots: &[Vec<f64>],
    mode: JacobianMode,
) -> Matrix {
    let s = t.stages();
    let n = sys.dim();
    let da: Vec<Matrix> = qs.iter().map(|qi| sys.d_alpha(qi)).collect();
    let da_t: Vec<Matrix> = da.iter().map(Matrix::transpose).collect();
    let mut jac = Matrix::zeros(s * n, s * n);
    for i in 0..s {
        for m in 0..s {
            jac.add_block_scaled(i * n, m * n, &da[i], h * t.a[(i, m)]);
            jac.add_block_scaled(i * n, m * n, &da_t[m], -h * t.a_bar[(i, m)]);
        }
    }
    if mode == JacobianMode::Exact {
        for j in 0..s {
            let bj = sys.d2_alpha_vp(&qs[j], &qdots[j]).sub(&sys.d2h(&qs[j]));
            for i in 0..s {
                for m in 0..s {
                    let w = t.a_bar[(i, j)] * t.a[(j, m)];
                    if w != 0.0 {
                        jac.add_block_scaled(i * n, m * n, &bj, -h * h * w);
                    }
                }
            }
        }
    }
    jac
}

/// Jacobian of [`stage_residual`] with respect to the stacked stage
/// velocities; block `(i, m)` is `∂R_i/∂Q̇_m`.
pub fn stage_jacobian<S: VelocityLinearSystem + ?Sized>(
    sys: &S,
    t: &PartitionedTableau,
    h: f64,
    x: &PhasePoint,
    qdots: &[Vec<f64>],
    mode: JacobianMode,
) -> Matrix {
    let qs = stage_positions(t, h, &x.q, qdots);
    jacobian_at(sys, t, h, &qs, qdots, mode)
}

/// `W = (Ā⊗I){Dαᵀ} − {Dα}(A⊗I)` at the stage positions `ξ_i`: block `(i, j)`
/// is `ā_ij Dα(ξ_j)ᵀ − a_ij Dα(ξ_i)`. Its bounded invertibility is what makes
/// the stage equations solvable for small `h`; for linear `α` the simplified
/// Newton matrix is exactly `−h W`.
pub fn w_matrix<S: VelocityLinearSystem + ?Sized>(
    sys: &S,
    t: &PartitionedTableau,
    q_stages: &[Vec<f64>],
) -> Matrix {
    let s = t.stages();
    let n = sys.dim();
    let da: Vec<Matrix> = q_stages.iter().map(|qi| sys.d_alpha(qi)).collect();
    let mut w = Matrix::zeros(s * n, s * n);
    for i in 0..s {
        for j in 0..s {
            w.add_block_scaled(i * n, j * n, &da[j].transpose(), t.a_bar[(i, j)]);
            w.add_block_scaled(i * n, j * n, &da[i], -t.a[(i, j)]);
        }
    }
    w
}

/// Max-norm over all rows; NaN if any entry is NaN.
fn max_norm(rows: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for v in rows.iter().flatten() {
        if v.is_nan() {
            return f64::NAN;
        }
        worst = worst.max(v.abs());
    }
    worst
}

fn consistency_bound(h: f64, q: &[f64]) -> f64 {
    10.0 * h.abs() * (1.0 + linalg::norm_inf(q))
}

/// Solves the stage equations by Newton's method.
///
/// Convergence means `‖R‖_∞ ≤ newton_tol·|h|`. When `|h|` is so small that
/// this lies below what floating point can resolve, the iteration is also
/// accepted once `‖R‖_∞ ≤ newton_tol` and the Newton update has shrunk to
/// rounding level.
pub fn solve_stages<S: VelocityLinearSystem + ?Sized>(
    sys: &S,
    t: &PartitionedTableau,
    h: f64,
    x: &PhasePoint,
    cfg: &SolverConfig,
) -> Result<StageSolution> {
    cfg.validate()?;
    let n = sys.dim();
    if x.q.len() != n || x.p.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.q.len().max(x.p.len()),
        });
    }
    if !(h.is_finite() && h != 0.0) {
        return Err(Error::InvalidStep(h));
    }
    let violation = x.constraint_residual(sys);
    let bound = consistency_bound(h, &x.q);
    if !(violation <= bound) {
        return Err(Error::InconsistentState { violation, bound });
    }

    let s = t.stages();
    let guess = match cfg.initial_guess {
        InitialGuess::ElField => el_vector_field(sys, &x.q)?,
        InitialGuess::Zero => vec![0.0; n],
    };
    let mut qdots = vec![guess; s];
    let tol = cfg.newton_tol * h.abs();

    let diverged = |iterations: usize, residual: f64, qdots: &[Vec<f64>]| {
        let w_condition = if qdots.iter().flatten().all(|v| v.is_finite()) {
            Some(linalg::condition_estimate(&w_matrix(
                sys,
                t,
                &stage_positions(t, h, &x.q, qdots),
            )))
        } else {
            None
        };
        Error::NewtonDivergence {
            iterations,
            residual,
            w_condition,
        }
    };

    let mut iterations = 0;
    let mut last_step = f64::INFINITY;
    loop {
        let res = stage_residual(sys, t, h, x, &qdots);
        let norm = max_norm(&res);
        if !norm.is_finite() {
            return Err(diverged(iterations, norm, &qdots));
        }
        let scale = 1.0 + max_norm(&qdots);
        let stalled = norm <= cfg.newton_tol && last_step <= 8.0 * f64::EPSILON * scale;
        if norm <= tol || stalled {
            let qs = stage_positions(t, h, &x.q, &qdots);
            let pdots = (0..s)
                .map(|i| momentum_rate(sys, &qs[i], &qdots[i]))
                .collect();
            let w_condition = cfg
                .record_w_condition
                .then(|| linalg::condition_estimate(&w_matrix(sys, t, &qs)));
            return Ok(StageSolution {
                qdots,
                pdots,
                report: StageSolveReport {
                    iterations,
                    final_residual: norm,
                    w_condition,
                    converged: true,
                },
            });
        }
        if iterations == cfg.max_newton_iters {
            return Err(diverged(iterations, norm, &qdots));
        }

        let jac = stage_jacobian(sys, t, h, x, &qdots, cfg.jacobian_mode);
        let lu = Lu::factor(&jac).map_err(|_| Error::SingularStageJacobian {
            iteration: iterations,
        })?;
        let rhs: Vec<f64> = res.iter().flatten().map(|v| -v).collect();
        let delta = lu.solve(&rhs);
        for (i, qd) in qdots.iter_mut().enumerate() {
            linalg::axpy(1.0, &delta[i * n..(i + 1) * n], qd);
        }
        last_step = linalg::norm_inf(&delta);
        iterations += 1;
    }
}

/// One step `(t, q, p) ↦ (t + h, q̄, p̄)`. Negative `h` steps backwards.
pub fn prk_step<S: VelocityLinearSystem + ?Sized>(
    sys: &S,
    t: &PartitionedTableau,
    h: f64,
    x: &PhasePoint,
    cfg: &SolverConfig,
) -> Result<(PhasePoint, StageSolveReport)> {
    let sol = solve_stages(sys, t, h, x, cfg)?;
    let mut q = x.q.clone();
    let mut p = x.p.clone();
    for j in 0..t.stages() {
        linalg::axpy(h * t.b[j], &sol.qdots[j], &mut q);
        linalg::axpy(h * t.b[j], &sol.pdots[j], &mut p);
    }
    Ok((PhasePoint::new(x.t + h, q, p), sol.report))
}

/// Number of steps of nominal size `h` needed to cover `span`. A ratio within
/// rounding of an integer is not padded with a sliver step.
pub fn step_count(span: f64, h: f64) -> usize {
    let ratio = span / h;
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest.max(1.0) as usize
    } else {
        ratio.ceil() as usize
    }
}

/// A run that stopped before reaching its final time.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationFailure {
    pub error: Error,
    /// Last successfully computed state.
    pub last: PhasePoint,
    pub steps_completed: usize,
}

/// Integrates from `x0` to `t_final` with fixed step `h`, calling `observe`
/// after every step. Step times are computed as `t0 + k·h` rather than
/// accumulated; the last step is shortened (or stretched by rounding) so the
/// run ends exactly at `t_final`.
pub fn integrate<S, F>(
    sys: &S,
    t: &PartitionedTableau,
    x0: &PhasePoint,
    h: f64,
    t_final: f64,
    cfg: &SolverConfig,
    mut observe: F,
) -> std::result::Result<PhasePoint, IntegrationFailure>
where
    S: VelocityLinearSystem + ?Sized,
    F: FnMut(&PhasePoint, &StageSolveReport),
{
    let fail = |error, last: &PhasePoint, steps_completed| IntegrationFailure {
        error,
        last: last.clone(),
        steps_completed,
    };
    if !(h > 0.0 && h.is_finite()) {
        return Err(fail(Error::InvalidStep(h), x0, 0));
    }
    if !(t_final > x0.t) {
        return Err(fail(
            Error::InvalidParameter(format!(
                "t_final {} must exceed start time {}",
                t_final, x0.t
            )),
            x0,
            0,
        ));
    }
    let steps = step_count(t_final - x0.t, h);
    let mut x = x0.clone();
    for k in 0..steps {
        let t_next = if k + 1 == steps {
            t_final
        } else {
            x0.t + (k + 1) as f64 * h
        };
        match prk_step(sys, t, t_next - x.t, &x, cfg) {
            Ok((mut next, report)) => {
                next.t = t_next;
                observe(&next, &report);
                x = next;
            }
            Err(e) => return Err(fail(e, &x, k)),
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        kepler_system, lotka_volterra_system, toy_system, KeplerParams, LotkaVolterraParams,
    };
    use crate::system::consistent_init;
    use crate::tableau::{gauss, lobatto_iiia_iiib, radau_iia, tableau_by_id, METHOD_IDS};

    fn kepler_start() -> (crate::models::Kepler, PhasePoint) {
        let p = KeplerParams::default();
        let sys = kepler_system(p).unwrap();
        let x = consistent_init(&sys, &p.pericenter());
        (sys, x)
    }

    #[test]
    fn toy_residual_vanishes_at_rest() {
        let sys = toy_system();
        let x = consistent_init(&sys, &[1.0, 2.0]);
        for id in METHOD_IDS {
            let t = tableau_by_id(id).unwrap();
            let r = stage_residual(&sys, &t, 0.3, &x, &vec![vec![0.0; 2]; t.stages()]);
            assert_eq!(max_norm(&r), 0.0, "{id}");
        }
    }

    #[test]
    fn lotka_volterra_equilibrium_residual_is_zero() {
        let sys = lotka_volterra_system(LotkaVolterraParams::default());
        let x = consistent_init(&sys, &[1.0, 2.0]);
        let t = gauss(2).unwrap();
        let r = stage_residual(&sys, &t, 0.1, &x, &vec![vec![0.0; 2]; 2]);
        assert_eq!(max_norm(&r), 0.0);
    }

    #[test]
    fn midpoint_residual_at_field_guess_is_second_order() {
        let (sys, x) = kepler_start();
        let t = gauss(1).unwrap();
        let f = el_vector_field(&sys, &x.q).unwrap();
        let r1 = max_norm(&stage_residual(&sys, &t, 0.1, &x, std::slice::from_ref(&f)));
        let r2 = max_norm(&stage_residual(&sys, &t, 0.05, &x, &[f]));
        assert!(r1 > 0.0);
        let slope = (r1 / r2).log2();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope}");
    }

    #[test]
    fn jacobian_vanishes_with_h() {
        let sys = lotka_volterra_system(LotkaVolterraParams::default());
        let x = consistent_init(&sys, &[1.3, 0.7]);
        let t = gauss(2).unwrap();
        let qd = vec![vec![0.4, -0.2]; 2];
        let j = stage_jacobian(&sys, &t, 1e-9, &x, &qd, JacobianMode::Exact);
        assert!(j.max_abs() < 1e-8);
    }

    #[test]
    fn simplified_jacobian_is_minus_h_w_for_linear_alpha() {
        let (sys, x) = kepler_start();
        let t = gauss(3).unwrap();
        let qd = vec![vec![0.1, 0.2, -0.3, 0.05]; 3];
        let h = 0.1;
        let j = stage_jacobian(&sys, &t, h, &x, &qd, JacobianMode::Simplified);
        let qs = stage_positions(&t, h, &x.q, &qd);
        let w = w_matrix(&sys, &t, &qs);
        assert!(j.sub(&w.scale(-h)).max_abs() < 1e-15);
    }

    #[test]
    fn w_matrix_of_midpoint_on_toy() {
        let sys = toy_system();
        let t = gauss(1).unwrap();
        let w = w_matrix(&sys, &t, &[vec![0.7, -0.1]]);
        assert_eq!(w, Matrix::from_rows(&[[0.0, -0.5], [0.5, 0.0]]));
        assert!((linalg::condition_estimate(&w) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn w_matrix_has_kronecker_structure_for_equal_stages() {
        let (sys, x) = kepler_start();
        let t = radau_iia(3).unwrap();
        let w = w_matrix(&sys, &t, &vec![x.q.clone(); 3]);
        let m = crate::system::mass_matrix(&sys, &x.q);
        assert!(w.sub(&t.a.kron(&m)).max_abs() < 1e-15);
    }

    #[test]
    fn toy_step_is_identity() {
        let sys = toy_system();
        let x = consistent_init(&sys, &[1.0, 2.0]);
        for id in METHOD_IDS {
            let t = tableau_by_id(id).unwrap();
            let (y, rep) = prk_step(&sys, &t, 0.5, &x, &SolverConfig::default()).unwrap();
            assert_eq!(
                (y.q.clone(), y.p.clone()),
                (x.q.clone(), x.p.clone()),
                "{id}"
            );
            assert_eq!(y.t, 0.5);
            assert!(rep.converged && rep.iterations <= 2);
        }
    }

    #[test]
    fn kepler_midpoint_converges_fast_and_keeps_constraint() {
        let (sys, x) = kepler_start();
        let t = gauss(1).unwrap();
        let (y, rep) = prk_step(&sys, &t, 0.1, &x, &SolverConfig::default()).unwrap();
        assert!(rep.converged && rep.iterations <= 10, "{rep:?}");
        assert!(rep.final_residual <= 1e-13);
        assert!(y.constraint_residual(&sys) <= 1e-13);
    }

    #[test]
    fn simplified_newton_reaches_same_step() {
        let sys = lotka_volterra_system(LotkaVolterraParams::default());
        let x = consistent_init(&sys, &[1.0, 1.0]);
        let t = gauss(2).unwrap();
        let exact = prk_step(&sys, &t, 0.05, &x, &SolverConfig::default()).unwrap();
        let cfg = SolverConfig {
            jacobian_mode: JacobianMode::Simplified,
            initial_guess: InitialGuess::Zero,
            ..SolverConfig::default()
        };
        let simple = prk_step(&sys, &t, 0.05, &x, &cfg).unwrap();
        assert!(simple.1.iterations >= exact.1.iterations);
        assert!(linalg::norm_inf(&linalg::sub(&exact.0.q, &simple.0.q)) < 1e-13);
    }

    #[test]
    fn lotka_volterra_leaves_constraint() {
        let sys = lotka_volterra_system(LotkaVolterraParams::default());
        let x = consistent_init(&sys, &[1.0, 1.0]);
        let t = gauss(2).unwrap();
        let (y, _) = prk_step(&sys, &t, 0.1, &x, &SolverConfig::default()).unwrap();
        assert!(y.constraint_residual(&sys) > 1e-8);
    }

    #[test]
    fn radau_stays_on_constraint() {
        let sys = lotka_volterra_system(LotkaVolterraParams::default());
        let mut x = consistent_init(&sys, &[1.0, 1.0]);
        let t = radau_iia(3).unwrap();
        let cfg = SolverConfig::default();
        for _ in 0..50 {
            x = prk_step(&sys, &t, 0.1, &x, &cfg).unwrap().0;
            assert!(x.constraint_residual(&sys) <= 10.0 * cfg.newton_tol);
        }
    }

    #[test]
    fn gauss_is_reversible() {
        let (sys, x) = kepler_start();
        let cfg = SolverConfig::default();
        for s in 1..=3 {
            let t = gauss(s).unwrap();
            let (y, _) = prk_step(&sys, &t, 0.1, &x, &cfg).unwrap();
            let (z, _) = prk_step(&sys, &t, -0.1, &y, &cfg).unwrap();
            let dq = linalg::norm_inf(&linalg::sub(&z.q, &x.q));
            let dp = linalg::norm_inf(&linalg::sub(&z.p, &x.p));
            assert!(dq.max(dp) <= 100.0 * cfg.newton_tol, "gauss{s}: {dq} {dp}");
        }
    }

    #[test]
    fn lobatto2_is_solvable_but_inconsistent() {
        let (sys, x) = kepler_start();
        let t = lobatto_iiia_iiib(2).unwrap();
        let cfg = SolverConfig {
            record_w_condition: true,
            ..SolverConfig::default()
        };
        let (y, rep) = prk_step(&sys, &t, 0.1, &x, &cfg).unwrap();
        // Positions do not move at all; the momentum absorbs −h·DH.
        assert!(linalg::norm_inf(&linalg::sub(&y.q, &x.q)) < 1e-12);
        let expect = linalg::sub(
            &x.p,
            &sys.dh(&x.q).iter().map(|v| 0.1 * v).collect::<Vec<_>>(),
        );
        assert!(linalg::norm_inf(&linalg::sub(&y.p, &expect)) < 1e-12);
        assert!(rep.w_condition.unwrap().is_finite());
    }

    #[test]
    fn inconsistent_input_rejected() {
        let (sys, mut x) = kepler_start();
        x.p[0] += 1.0;
        let t = gauss(1).unwrap();
        assert!(matches!(
            solve_stages(&sys, &t, 0.01, &x, &SolverConfig::default()),
            Err(Error::InconsistentState { .. })
        ));
    }

    #[test]
    fn bad_config_and_step_rejected() {
        let (sys, x) = kepler_start();
        let t = gauss(1).unwrap();
        let cfg = SolverConfig {
            max_newton_iters: 0,
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve_stages(&sys, &t, 0.1, &x, &cfg),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            solve_stages(&sys, &t, 0.0, &x, &SolverConfig::default()),
            Err(Error::InvalidStep(_))
        ));
    }

    #[test]
    fn iteration_cap_reports_divergence() {
        let (sys, x) = kepler_start();
        let t = gauss(3).unwrap();
        let cfg = SolverConfig {
            max_newton_iters: 1,
            initial_guess: InitialGuess::Zero,
            ..SolverConfig::default()
        };
        match solve_stages(&sys, &t, 0.3, &x, &cfg) {
            Err(Error::NewtonDivergence {
                iterations,
                w_condition,
                ..
            }) => {
                assert_eq!(iterations, 1);
                assert!(w_condition.is_some());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn step_count_handles_rounding() {
        assert_eq!(step_count(7.0, 7.0 / 2000.0), 2000);
        assert_eq!(step_count(1.0, 0.1), 10);
        assert_eq!(step_count(1.0, 0.3), 4);
        assert_eq!(step_count(1e4, 0.1), 100_000);
    }

    #[test]
    fn integrate_lands_on_final_time() {
        let (sys, x) = kepler_start();
        let t = gauss(2).unwrap();
        let mut times = Vec::new();
        let end = integrate(&sys, &t, &x, 0.3, 1.0, &SolverConfig::default(), |y, _| {
            times.push(y.t)
        })
        .unwrap();
        assert_eq!(end.t, 1.0);
        assert_eq!(times.len(), 4);
        assert!((times[2] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn integrate_reports_partial_progress() {
        let sys = lotka_volterra_system(LotkaVolterraParams::default());
        let x = consistent_init(&sys, &[1.0, 1.0]);
        let t = gauss(1).unwrap();
        let cfg = SolverConfig {
            max_newton_iters: 1,
            ..SolverConfig::default()
        };
        let err = integrate(&sys, &t, &x, 0.5, 5.0, &cfg, |_, _| {}).unwrap_err();
        assert!(matches!(err.error, Error::NewtonDivergence { .. }));
        assert_eq!(err.last.t, 0.5 * err.steps_completed as f64);
    }
}

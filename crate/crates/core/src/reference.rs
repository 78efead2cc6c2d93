//! Explicit Runge-Kutta integration of the Euler-Lagrange ODE
//! `q̇ = M(q)⁻¹ DH(q)`, used to produce reference trajectories.

use crate::error::{Error, Result};
use crate::linalg::{self, Lu, Matrix};
use crate::prk::step_count;
use crate::system::{el_vector_field, PhasePoint, Trajectory, VelocityLinearSystem};

/// An explicit tableau (strictly lower-triangular `a`).
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitTableau {
    pub name: &'static str,
    pub a: Matrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub order: u32,
}

impl ExplicitTableau {
    pub fn new(
        name: &'static str,
        a: Matrix,
        b: Vec<f64>,
        c: Vec<f64>,
        order: u32,
    ) -> Result<Self> {
        let s = b.len();
        if a.rows() != s || a.cols() != s || c.len() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                got: a.rows(),
            });
        }
        for i in 0..s {
            for j in i..s {
                if a[(i, j)] != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "{name}: a[{i}][{j}] = {} makes the tableau implicit",
                        a[(i, j)]
                    )));
                }
            }
        }
        Ok(ExplicitTableau {
            name,
            a,
            b,
            c,
            order,
        })
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }
}

/// The classical 4-stage, order-4 method.
pub fn rk4() -> ExplicitTableau {
    let a = Matrix::from_rows(&[
        [0.0, 0.0, 0.0, 0.0],
        [0.5, 0.0, 0.0, 0.0],
        [0.0, 0.5, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
    ]);
    ExplicitTableau::new(
        "rk4",
        a,
        vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
        vec![0.0, 0.5, 0.5, 1.0],
        4,
    )
    .expect("rk4 tableau is explicit")
}

/// Verner's "most efficient" RKV6(5) pair, propagating (order 6) weights
/// only. The ninth stage of the FSAL pair only feeds the embedded error
/// estimate and is omitted.
pub fn verner6() -> ExplicitTableau {
    let mut a = Matrix::zeros(8, 8);
    let rows: [&[f64]; 8] = [
        &[],
        &[0.06],
        &[1.923_996_296_296_296_2e-2, 7.669_337_037_037_037e-2],
        &[0.035975, 0.0, 0.107925],
        &[
            1.318_683_415_233_148_4,
            0.0,
            -5.042_058_063_628_562,
            4.220_674_648_395_414,
        ],
        &[
            -41.872_591_664_327_516,
            0.0,
            159.432_562_163_137_5,
            -122.119_213_565_010_03,
            5.531_743_066_200_054,
        ],
        &[
            -54.430_156_935_316_504,
            0.0,
            207.067_251_365_018_48,
            -158.610_813_784_59,
            6.991_816_585_950_242,
            -1.859_723_106_220_323_4e-2,
        ],
        &[
            -54.663_741_787_281_98,
            0.0,
            207.952_806_255_389_36,
            -159.288_957_474_499_5,
            7.018_743_740_796_944,
            -1.833_878_590_504_572_2e-2,
            -5.119_484_997_882_099e-4,
        ],
    ];
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            a[(i, j)] = *v;
        }
    }
    let b = vec![
        3.438_957_868_357_036e-2,
        0.0,
        0.0,
        0.258_262_455_563_350_3,
        0.420_937_118_967_353_7,
        4.405_396_469_669_31,
        -176.483_119_024_298_65,
        172.364_133_401_415_07,
    ];
    let c = vec![
        0.0,
        0.06,
        9.593_333_333_333_333e-2,
        0.1439,
        0.4973,
        0.9725,
        0.9995,
        1.0,
    ];
    ExplicitTableau::new("verner6", a, b, c, 6).expect("verner tableau is explicit")
}

/// Evaluates `q̇ = M(q)⁻¹ DH(q)`, reusing a single factorization when `α`
/// is linear and `M = Λ` is constant.
struct ElField<'a, S: ?Sized> {
    sys: &'a S,
    lambda_inv: Option<Matrix>,
}

impl<'a, S: VelocityLinearSystem + ?Sized> ElField<'a, S> {
    fn new(sys: &'a S) -> Result<Self> {
        let lambda_inv = match sys.linear_alpha() {
            Some(l) => Some(Lu::factor(&l)?.inverse()),
            None => None,
        };
        Ok(ElField { sys, lambda_inv })
    }

    fn eval(&self, q: &[f64]) -> Result<Vec<f64>> {
        match &self.lambda_inv {
            Some(inv) => {
                self.sys.check_domain(q)?;
                Ok(inv.mul_vec(&self.sys.dh(q)))
            }
            None => el_vector_field(self.sys, q),
        }
    }
}

/// Increment `h Σ b_i k_i` of one explicit step from `q`.
fn erk_increment<S: VelocityLinearSystem + ?Sized>(
    field: &ElField<'_, S>,
    tab: &ExplicitTableau,
    h: f64,
    q: &[f64],
) -> Result<Vec<f64>> {
    let s = tab.stages();
    let mut ks: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut stage = vec![0.0; q.len()];
    for i in 0..s {
        stage.copy_from_slice(q);
        for (j, kj) in ks.iter().enumerate() {
            let aij = tab.a[(i, j)];
            if aij != 0.0 {
                linalg::axpy(h * aij, kj, &mut stage);
            }
        }
        ks.push(field.eval(&stage)?);
    }
    let mut inc = vec![0.0; q.len()];
    for (bi, ki) in tab.b.iter().zip(&ks) {
        if *bi != 0.0 {
            linalg::axpy(h * bi, ki, &mut inc);
        }
    }
    Ok(inc)
}

/// One explicit step of the Euler-Lagrange ODE. The system is autonomous,
/// so `t` only documents where the step starts.
pub fn erk_step<S: VelocityLinearSystem + ?Sized>(
    sys: &S,
    tab: &ExplicitTableau,
    h: f64,
    _t: f64,
    q: &[f64],
) -> Result<Vec<f64>> {
    let field = ElField::new(sys)?;
    let mut out = q.to_vec();
    linalg::axpy(1.0, &erk_increment(&field, tab, h, q)?, &mut out);
    Ok(out)
}

/// Integrates `q0` to `t_final` with [`verner6`] and fixed step `h_ref`.
///
/// The returned trajectory keeps at most `max_samples + 1` uniformly thinned
/// samples (always including both endpoints); momenta are filled in as
/// `p = α(q)`. Positions are accumulated with compensated summation so that
/// millions of tiny steps do not pile up rounding error.
pub fn reference_solution<S: VelocityLinearSystem + ?Sized>(
    sys: &S,
    q0: &[f64],
    t_final: f64,
    h_ref: f64,
    max_samples: usize,
) -> Result<Trajectory> {
    integrate_explicit(sys, &verner6(), q0, t_final, h_ref, max_samples)
}

/// Same as [`reference_solution`] for an arbitrary explicit tableau.
pub fn integrate_explicit<S: VelocityLinearSystem + ?Sized>(
    sys: &S,
    tab: &ExplicitTableau,
    q0: &[f64],
    t_final: f64,
    h: f64,
    max_samples: usize,
) -> Result<Trajectory> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidStep(h));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "t_final must be positive, got {t_final}"
        )));
    }
    if q0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            got: q0.len(),
        });
    }
    sys.check_domain(q0)?;
    let field = ElField::new(sys)?;
    let steps = step_count(t_final, h);
    let stride = steps.div_ceil(max_samples.max(1));

    let mut traj = Trajectory::new(PhasePoint::new(0.0, q0.to_vec(), sys.alpha(q0)));
    let mut q = q0.to_vec();
    let mut carry = vec![0.0; q.len()];
    for k in 0..steps {
        let t = k as f64 * h;
        let t_next = if k + 1 == steps {
            t_final
        } else {
            (k + 1) as f64 * h
        };
        let inc = erk_increment(&field, tab, t_next - t, &q)?;
        for ((qi, ci), di) in q.iter_mut().zip(carry.iter_mut()).zip(&inc) {
            let y = di - *ci;
            let sum = *qi + y;
            *ci = (sum - *qi) - y;
            *qi = sum;
        }
        if (k + 1) % stride == 0 || k + 1 == steps {
            traj.push(PhasePoint::new(t_next, q.clone(), sys.alpha(&q)))?;
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        kepler_system, lotka_volterra_system, toy_system, KeplerParams, LotkaVolterraParams,
    };

    /// Rooted trees as lists of subtrees.
    #[derive(Clone, Debug)]
    struct Tree(Vec<Tree>);

    impl Tree {
        fn order(&self) -> usize {
            1 + self.0.iter().map(Tree::order).sum::<usize>()
        }

        fn density(&self) -> f64 {
            self.order() as f64 * self.0.iter().map(Tree::density).product::<f64>()
        }

        /// Internal weights `Ψ_i`, one per stage.
        fn stage_weights(&self, a: &Matrix) -> Vec<f64> {
            let s = a.rows();
            let mut out = vec![1.0; s];
            for child in &self.0 {
                let w = a.mul_vec(&child.stage_weights(a));
                for (o, v) in out.iter_mut().zip(w) {
                    *o *= v;
                }
            }
            out
        }
    }

    /// All rooted trees with at most `max_order` vertices, grouped by order.
    fn trees_up_to(max_order: usize) -> Vec<Vec<Tree>> {
        // Children are chosen as non-decreasing indices into `all`, which
        // enumerates every unordered multiset exactly once.
        fn extend(
            all: &[(usize, Tree)],
            remaining: usize,
            start: usize,
            children: &mut Vec<Tree>,
            out: &mut Vec<Tree>,
        ) {
            if remaining == 0 {
                out.push(Tree(children.clone()));
                return;
            }
            for idx in start..all.len() {
                let (ord, t) = &all[idx];
                if *ord <= remaining {
                    children.push(t.clone());
                    extend(all, remaining - ord, idx, children, out);
                    children.pop();
                }
            }
        }
        let mut by_order: Vec<Vec<Tree>> = vec![Vec::new(), vec![Tree(Vec::new())]];
        for n in 2..=max_order {
            let all: Vec<(usize, Tree)> = by_order
                .iter()
                .enumerate()
                .flat_map(|(o, ts)| ts.iter().map(move |t| (o, t.clone())))
                .collect();
            let mut out = Vec::new();
            extend(&all, n - 1, 0, &mut Vec::new(), &mut out);
            by_order.push(out);
        }
        by_order
    }

    /// Largest order-condition residual over trees up to `order`, each
    /// divided by the same sum taken over absolute values so that
    /// cancellation among the large Verner coefficients is not mistaken for
    /// a violated condition.
    fn worst_order_residual(tab: &ExplicitTableau, order: usize) -> f64 {
        let abs_a = Matrix::from_row_major(
            tab.a.rows(),
            tab.a.cols(),
            tab.a.as_slice().iter().map(|v| v.abs()).collect(),
        )
        .unwrap();
        let abs_b: Vec<f64> = tab.b.iter().map(|v| v.abs()).collect();
        trees_up_to(order)
            .iter()
            .flatten()
            .map(|t| {
                let phi = linalg::dot(&tab.b, &t.stage_weights(&tab.a));
                let scale = linalg::dot(&abs_b, &t.stage_weights(&abs_a));
                (phi - 1.0 / t.density()).abs() / scale.max(1.0)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn tree_counts() {
        let counts: Vec<usize> = trees_up_to(7).iter().map(Vec::len).collect();
        assert_eq!(counts, vec![0, 1, 1, 2, 4, 9, 20, 48]);
    }

    #[test]
    fn rk4_has_order_four_only() {
        let t = rk4();
        assert!(worst_order_residual(&t, 4) < 1e-15);
        assert!(worst_order_residual(&t, 5) > 1e-3);
    }

    #[test]
    fn verner_satisfies_order_six_conditions() {
        let t = verner6();
        for i in 0..t.stages() {
            let row: f64 = t.a.row(i).iter().sum();
            assert!((row - t.c[i]).abs() < 1e-13, "row {i}");
        }
        let r6 = worst_order_residual(&t, 6);
        let r7 = worst_order_residual(&t, 7);
        assert!(r6 < 1e-14 && r7 > 1e-9, "{r6:e} {r7:e}");
    }

    #[test]
    fn implicit_tableau_rejected() {
        let a = Matrix::from_rows(&[[0.5]]);
        assert!(ExplicitTableau::new("mid", a, vec![1.0], vec![0.5], 2).is_err());
    }

    #[test]
    fn toy_and_equilibrium_are_fixed_points() {
        let toy = toy_system();
        assert_eq!(
            erk_step(&toy, &verner6(), 0.7, 0.0, &[1.0, 2.0]).unwrap(),
            vec![1.0, 2.0]
        );
        let lv = lotka_volterra_system(LotkaVolterraParams::default());
        assert_eq!(
            erk_step(&lv, &rk4(), 0.1, 0.0, &[1.0, 2.0]).unwrap(),
            vec![1.0, 2.0]
        );
    }

    #[test]
    fn kepler_period_with_verner() {
        let p = KeplerParams::default();
        let sys = kepler_system(p).unwrap();
        let q0 = p.pericenter();
        let tr = integrate_explicit(&sys, &verner6(), &q0, 2.0 * std::f64::consts::PI, 1e-4, 10)
            .unwrap();
        assert!(tr.len() <= 11);
        let end = tr.last();
        assert_eq!(end.t, 2.0 * std::f64::consts::PI);
        assert!(linalg::norm_inf(&linalg::sub(&end.q, &q0)) < 1e-8);
        assert_eq!(end.constraint_residual(&sys), 0.0);
    }

    #[test]
    fn verner_and_rk4_agree() {
        let sys = lotka_volterra_system(LotkaVolterraParams::default());
        let a = integrate_explicit(&sys, &verner6(), &[1.0, 1.0], 1.0, 1e-3, 1).unwrap();
        let b = integrate_explicit(&sys, &rk4(), &[1.0, 1.0], 1.0, 1e-3, 1).unwrap();
        let d = linalg::norm_inf(&linalg::sub(&a.last().q, &b.last().q));
        assert!(d < 1e-10, "{d}");
    }

    #[test]
    fn domain_errors_propagate() {
        let sys = lotka_volterra_system(LotkaVolterraParams::default());
        assert!(matches!(
            integrate_explicit(&sys, &rk4(), &[-1.0, 1.0], 1.0, 0.1, 10),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            integrate_explicit(&sys, &rk4(), &[1.0, 1.0], 1.0, 0.0, 10),
            Err(Error::InvalidStep(_))
        ));
    }
}

use proptest::prelude::*;

use vprk::linalg::{self, Matrix};
use vprk::models::{
    kepler_system, lotka_volterra_system, model_by_id, toy_system, vortex_exact, vortex_system,
    KeplerParams, LotkaVolterraParams, ModelOverrides, VortexParams, MODEL_IDS,
};
use vprk::reference::reference_solution;
use vprk::system::{el_vector_field, mass_matrix};
use vprk::VelocityLinearSystem;

fn fd(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> Matrix {
    linalg::fd_jacobian(f, x, 1e-5 * (1.0 + linalg::norm_inf(x)))
}

fn assert_close(a: &Matrix, b: &Matrix, what: &str) {
    let gap = a.sub(b).max_abs() / a.max_abs().max(1.0);
    assert!(gap < 1e-6, "{what}: relative gap {gap:e}");
}

fn check_derivatives(sys: &dyn VelocityLinearSystem, q: &[f64], v: &[f64]) {
    assert_close(&sys.d_alpha(q), &fd(|y| sys.alpha(y), q), "d_alpha");
    assert_close(
        &sys.d2_alpha_vp(q, v),
        &fd(|y| sys.d_alpha(y).tr_mul_vec(v), q),
        "d2_alpha_vp",
    );
    let grad = Matrix::from_rows(&[sys.dh(q)]);
    assert_close(&grad, &fd(|y| vec![sys.hamiltonian(y)], q), "dh");
    assert_close(&sys.d2h(q), &fd(|y| sys.dh(y), q), "d2h");
    let m = mass_matrix(sys, q);
    assert!(
        m.sub(&m.transpose().scale(-1.0)).max_abs() == 0.0,
        "mass matrix not antisymmetric"
    );
}

proptest! {
    #[test]
    fn kepler_derivatives(r in 0.3f64..2.0, th in 0.0f64..std::f64::consts::TAU, vx in -2.0f64..2.0, vy in -2.0f64..2.0,
                          w in prop::array::uniform4(-1.0f64..1.0)) {
        let sys = kepler_system(KeplerParams::default()).unwrap();
        check_derivatives(&sys, &[r * th.cos(), r * th.sin(), vx, vy], &w);
    }

    #[test]
    fn vortex_derivatives(q in prop::array::uniform6(-2.0f64..2.0), w in prop::array::uniform6(-1.0f64..1.0)) {
        let sys = vortex_system(VortexParams { gammas: vec![4.0, 2.0, -1.0], h0: 0.0 }).unwrap();
        let d = |i: usize, j: usize| ((q[2 * i] - q[2 * j]).powi(2) + (q[2 * i + 1] - q[2 * j + 1]).powi(2)).sqrt();
        prop_assume!(d(0, 1) > 0.2 && d(0, 2) > 0.2 && d(1, 2) > 0.2);
        check_derivatives(&sys, &q, &w);
    }

    #[test]
    fn lotka_volterra_derivatives(u in 0.2f64..3.0, v in 0.2f64..3.0, w in prop::array::uniform2(-1.0f64..1.0)) {
        let sys = lotka_volterra_system(LotkaVolterraParams::default());
        check_derivatives(&sys, &[u, v], &w);
    }

    #[test]
    fn lotka_volterra_field_is_the_population_model(u in 0.2f64..3.0, v in 0.2f64..3.0) {
        let sys = lotka_volterra_system(LotkaVolterraParams::default());
        let f = el_vector_field(&sys, &[u, v]).unwrap();
        prop_assert!((f[0] - u * (v - 2.0)).abs() < 1e-12 * (1.0 + u * v));
        prop_assert!((f[1] - v * (1.0 - u)).abs() < 1e-12 * (1.0 + u * v));
    }

    #[test]
    fn toy_has_no_dynamics(x in -5.0f64..5.0, y in -5.0f64..5.0) {
        let sys = toy_system();
        prop_assert_eq!(el_vector_field(&sys, &[x, y]).unwrap(), vec![0.0, 0.0]);
        prop_assert_eq!(sys.alpha(&[x, y]), vec![0.5 * y, -0.5 * x]);
    }
}

#[test]
fn every_registered_model_builds_and_starts_in_domain() {
    for id in MODEL_IDS {
        let setup = model_by_id(id, &ModelOverrides::default()).unwrap();
        assert_eq!(setup.id, id);
        assert_eq!(setup.q0.len(), setup.system.dim());
        setup.system.check_domain(&setup.q0).unwrap();
        assert!(setup.t_final > 0.0);
    }
    assert!(model_by_id("pendulum", &ModelOverrides::default()).is_err());
    let bad = ModelOverrides {
        e: Some(1.2),
        ..Default::default()
    };
    assert!(model_by_id("kepler", &bad).is_err());
}

#[test]
fn vortex_closed_form_solves_the_equations_of_motion() {
    let params = VortexParams::default();
    let sys = vortex_system(params.clone()).unwrap();
    for t in [0.0, 0.7, 3.1, 6.9] {
        let dt = 1e-5;
        let q = vortex_exact(&params, 1.0, t).unwrap();
        let qp = vortex_exact(&params, 1.0, t + dt).unwrap();
        let qm = vortex_exact(&params, 1.0, t - dt).unwrap();
        let rate: Vec<f64> = qp
            .iter()
            .zip(&qm)
            .map(|(a, b)| (a - b) / (2.0 * dt))
            .collect();
        let f = el_vector_field(&sys, &q).unwrap();
        assert!(linalg::norm_inf(&linalg::sub(&rate, &f)) < 1e-8, "t = {t}");
    }
}

#[test]
fn reference_matches_the_vortex_closed_form() {
    let params = VortexParams::default();
    let sys = vortex_system(params.clone()).unwrap();
    let q0 = params.pair_initial(1.0).unwrap();
    let tr = reference_solution(&sys, &q0, 7.0, 1e-3, 7).unwrap();
    for x in tr.samples() {
        let exact = vortex_exact(&params, 1.0, x.t).unwrap();
        assert!(
            linalg::norm_inf(&linalg::sub(&x.q, &exact)) < 1e-11,
            "t = {}",
            x.t
        );
    }
}

#[test]
fn reference_conserves_energy_on_kepler_and_lotka_volterra() {
    let p = KeplerParams::default();
    let kep = kepler_system(p).unwrap();
    let tr = reference_solution(&kep, &p.pericenter(), 7.0, 1e-4, 70).unwrap();
    let drift = tr
        .samples()
        .iter()
        .map(|x| kep.hamiltonian(&x.q).abs())
        .fold(0.0, f64::max);
    assert!(drift < 1e-12, "{drift:e}");

    let lv = lotka_volterra_system(LotkaVolterraParams::default());
    let tr = reference_solution(&lv, &[1.0, 1.0], 5.0, 1e-4, 50).unwrap();
    let h0 = lv.hamiltonian(&[1.0, 1.0]);
    let drift = tr
        .samples()
        .iter()
        .map(|x| (lv.hamiltonian(&x.q) - h0).abs())
        .fold(0.0, f64::max);
    assert!(drift < 1e-12, "{drift:e}");
}

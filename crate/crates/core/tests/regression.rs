//! Pinned behaviours that were easy to get wrong.

use vprk::diagnostics::{fit_order, poisson_map_check, run_convergence, Reference};
use vprk::models::{kepler_system, vortex_exact, vortex_system, KeplerParams, VortexParams};
use vprk::{consistent_init, integrate, tableau_by_id, SolverConfig};

/// Lobatto IIIA-IIIB-3 carries a step-to-step sign flip on the vortex pair:
/// odd and even step counts sit on two different `C·h²` error curves.
#[test]
fn lobatto3_vortex_error_depends_on_step_parity() {
    let params = VortexParams::default();
    let sys = vortex_system(params.clone()).unwrap();
    let q0 = params.pair_initial(1.0).unwrap();
    let exact = move |t: f64| vortex_exact(&params, 1.0, t).unwrap();
    let counts = [200usize, 201, 400, 401];
    let hs: Vec<f64> = counts.iter().map(|n| 7.0 / *n as f64).collect();
    let r = run_convergence(
        &sys,
        "lobatto3",
        &q0,
        7.0,
        &hs,
        Reference::ClosedForm(&exact),
        &SolverConfig::default(),
    )
    .unwrap();
    let c: Vec<f64> = r
        .errors
        .iter()
        .zip(&hs)
        .map(|(e, h)| e.unwrap() / (h * h))
        .collect();
    // even counts: small constant; odd counts: much larger one
    assert!(c[1] > 20.0 * c[0] && c[3] > 20.0 * c[2], "{c:?}");
    assert!(
        (c[0] / c[2] - 1.0).abs() < 0.2 && (c[1] / c[3] - 1.0).abs() < 0.2,
        "{c:?}"
    );
}

/// One Radau IIA-3 step is symplectic only up to `O(h⁶)`.
#[test]
fn radau_poisson_defect_scales_like_h6() {
    let p = KeplerParams::default();
    let sys = kepler_system(p).unwrap();
    let q = p.pericenter();
    let hs = [0.2, 0.1, 0.05];
    let d: Vec<f64> = hs
        .iter()
        .map(|h| poisson_map_check(&sys, "radau_iia3", *h, &q, &SolverConfig::default()).unwrap())
        .collect();
    let order = fit_order(&hs, &d).unwrap();
    assert!((order - 6.0).abs() < 0.5, "{order} {d:?}");
}

#[test]
fn lobatto2_positions_stay_put() {
    let p = KeplerParams::default();
    let sys = kepler_system(p).unwrap();
    let x0 = consistent_init(&sys, &p.pericenter());
    let t = tableau_by_id("lobatto2").unwrap();
    let mut steps = 0;
    let fail = integrate(
        &sys,
        &t,
        &x0,
        0.01,
        7.0,
        &SolverConfig::default(),
        |x, _| {
            assert!(vprk::linalg::norm_inf(&vprk::linalg::sub(&x.q, &x0.q)) < 1e-15);
            steps += 1;
        },
    )
    .unwrap_err();
    assert!(
        matches!(fail.error, vprk::Error::InconsistentState { .. }),
        "{:?}",
        fail.error
    );
    assert_eq!(fail.steps_completed, steps);
}

#[test]
fn gauss1_large_step_failure_is_recorded_per_step_size() {
    let p = KeplerParams::default();
    let sys = kepler_system(p).unwrap();
    let q0 = p.pericenter();
    let exact_end = |_t: f64| q0.clone();
    let r = run_convergence(
        &sys,
        "gauss1",
        &q0,
        7.0,
        &[0.35, 0.07],
        Reference::ClosedForm(&exact_end),
        &SolverConfig::default(),
    )
    .unwrap();
    assert!(
        r.errors[0].is_none()
            && r.failures[0]
                .as_deref()
                .is_some_and(|f| f.contains("Newton"))
    );
    assert!(r.errors[1].is_some());
}

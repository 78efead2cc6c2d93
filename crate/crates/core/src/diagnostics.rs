//! Experiment drivers: convergence-order studies, long-time energy and
//! constraint drift, and the Poisson-map test for linear `α`.

use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Lu, Matrix};
use crate::prk::{integrate, prk_step, SolverConfig};
use crate::system::{consistent_init, PhasePoint, Trajectory, VelocityLinearSystem};
use crate::tableau::tableau_by_id;

/// Errors at or below this level are treated as the reference accuracy floor
/// and excluded from order fits.
pub const ERROR_FLOOR: f64 = 1e-12;

/// What a convergence study compares against at `t_final`.
#[derive(Clone, Copy)]
pub enum Reference<'a> {
    /// A precomputed trajectory whose last sample sits at `t_final`.
    Trajectory(&'a Trajectory),
    /// Exact positions as a function of time.
    ClosedForm(&'a (dyn Fn(f64) -> Vec<f64> + Sync)),
}

impl std::fmt::Debug for Reference<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Reference::Trajectory(t) => write!(f, "Reference::Trajectory({} samples)", t.len()),
            Reference::ClosedForm(_) => f.write_str("Reference::ClosedForm"),
        }
    }
}

impl Reference<'_> {
    fn endpoint<S: VelocityLinearSystem + ?Sized>(
        &self,
        sys: &S,
        t_final: f64,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            Reference::Trajectory(tr) => {
                let end = tr.last();
                if (end.t - t_final).abs() > 1e-9 * t_final.abs().max(1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "reference ends at t = {}, expected {}",
                        end.t, t_final
                    )));
                }
                Ok((end.q.clone(), end.p.clone()))
            }
            Reference::ClosedForm(f) => {
                let q = f(t_final);
                let p = sys.alpha(&q);
                Ok((q, p))
            }
        }
    }
}

/// Outcome of a convergence study for one method. Entries are aligned with
/// `step_sizes`; a `None` error marks a run that failed (its message is in
/// `failures`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub method_id: String,
    pub model_id: String,
    pub t_final: f64,
    pub step_sizes: Vec<f64>,
    /// `‖q_num(T) − q_ref(T)‖_∞`.
    pub errors: Vec<Option<f64>>,
    /// `‖p_num(T) − p_ref(T)‖_∞`.
    pub errors_p: Vec<Option<f64>>,
    pub failures: Vec<Option<String>>,
    pub fitted_order: Option<f64>,
    pub fit_range: Option<Range<usize>>,
}

/// Integrates from `consistent_init(q0)` to `t_final` once per step size
/// (concurrently) and fits the observed order.
///
/// `step_sizes` must be strictly decreasing. A step size that does not
/// divide `t_final` gets a shortened last step.
pub fn run_convergence<S: VelocityLinearSystem + ?Sized>(
    sys: &S,
    method_id: &str,
    q0: &[f64],
    t_final: f64,
    step_sizes: &[f64],
    reference: Reference<'_>,
    cfg: &SolverConfig,
) -> Result<ConvergenceReport> {
    let tableau = tableau_by_id(method_id)?;
    if step_sizes.windows(2).any(|w| !(w[1] < w[0])) || step_sizes.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::InvalidParameter(
            "step sizes must be positive and strictly decreasing".into(),
        ));
    }
    let (q_ref, p_ref) = reference.endpoint(sys, t_final)?;
    let x0 = consistent_init(sys, q0);

    let runs: Vec<std::result::Result<(f64, f64), String>> = step_sizes
        .par_iter()
        .map(|&h| {
            integrate(sys, &tableau, &x0, h, t_final, cfg, |_, _| {})
                .map(|end| {
                    (
                        linalg::norm_inf(&linalg::sub(&end.q, &q_ref)),
                        linalg::norm_inf(&linalg::sub(&end.p, &p_ref)),
                    )
                })
                .map_err(|f| {
                    format!(
                        "{} (after {} steps, t = {})",
                        f.error, f.steps_completed, f.last.t
                    )
                })
                .and_then(|(eq, ep)| {
                    if eq.is_finite() && ep.is_finite() {
                        Ok((eq, ep))
                    } else {
                        Err("non-finite endpoint".to_string())
                    }
                })
        })
        .collect();

    let errors: Vec<Option<f64>> = runs.iter().map(|r| r.as_ref().ok().map(|e| e.0)).collect();
    let errors_p = runs.iter().map(|r| r.as_ref().ok().map(|e| e.1)).collect();
    let failures = runs.iter().map(|r| r.as_ref().err().cloned()).collect();
    let fit_range = select_fit_range(&errors, ERROR_FLOOR);
    let fitted_order = match &fit_range {
        Some(r) => {
            let errs: Vec<f64> = errors[r.clone()]
                .iter()
                .map(|e| e.expect("in range"))
                .collect();
            Some(fit_order(&step_sizes[r.clone()], &errs)?)
        }
        None => None,
    };
    Ok(ConvergenceReport {
        method_id: method_id.to_string(),
        model_id: sys.name().to_string(),
        t_final,
        step_sizes: step_sizes.to_vec(),
        errors,
        errors_p,
        failures,
        fitted_order,
        fit_range,
    })
}

/// `count` step counts log-spaced between `n_min` and `n_max`, rounded to
/// even integers and deduplicated, in increasing order.
///
/// Even counts matter for methods with a parasitic step-to-step sign
/// alternation (the partitioned Lobatto pairs): their endpoint error differs
/// between odd and even step counts, and mixing both on one grid hides the
/// convergence order.
pub fn even_step_counts(n_min: usize, n_max: usize, count: usize) -> Vec<usize> {
    let (lo, hi) = ((n_min.max(2)) as f64, (n_max.max(n_min).max(2)) as f64);
    let mut out: Vec<usize> = (0..count.max(1))
        .map(|k| {
            let frac = if count > 1 {
                k as f64 / (count - 1) as f64
            } else {
                0.0
            };
            let n = (lo.ln() + frac * (hi.ln() - lo.ln())).exp();
            2 * ((n / 2.0).round() as usize).max(1)
        })
        .collect();
    out.dedup();
    out
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn fit_order(step_sizes: &[f64], errors: &[f64]) -> Result<f64> {
    if step_sizes.len() != errors.len() {
        return Err(Error::DimensionMismatch {
            expected: step_sizes.len(),
            got: errors.len(),
        });
    }
    if step_sizes.len() < 2 {
        return Err(Error::FewerThanTwoPoints(step_sizes.len()));
    }
    if step_sizes
        .iter()
        .chain(errors)
        .any(|v| !(*v > 0.0 && v.is_finite()))
    {
        return Err(Error::InvalidParameter(
            "order fit needs positive finite step sizes and errors".into(),
        ));
    }
    let xs: Vec<f64> = step_sizes.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("step sizes are all equal".into()));
    }
    Ok(sxy / sxx)
}

/// Longest run of consecutive entries (ordered by decreasing step size) that
/// are present, above `floor`, and strictly decreasing. Ties go to the run
/// with larger step sizes. Runs shorter than two points are rejected.
pub fn select_fit_range(errors: &[Option<f64>], floor: f64) -> Option<Range<usize>> {
    let usable = |i: usize| matches!(errors[i], Some(e) if e > floor && e.is_finite());
    let mut best: Option<Range<usize>> = None;
    let mut start = 0;
    while start < errors.len() {
        if !usable(start) {
            start += 1;
            continue;
        }
        let mut end = start + 1;
        while end < errors.len() && usable(end) && errors[end] < errors[end - 1] {
            end += 1;
        }
        if end - start >= 2 && best.as_ref().is_none_or(|b| end - start > b.len()) {
            best = Some(start..end);
        }
        start = end;
    }
    best
}

/// Long-run record of the Hamiltonian and the constraint residual.
///
/// The sample arrays are thinned to at most `max_samples + 1` entries. Each
/// sample also carries the largest `|H|` and constraint residual seen over
/// the steps since the previous sample, so peaks between samples are not
/// lost. `linear_drift_rate` is a least-squares fit over every step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub method_id: String,
    pub model_id: String,
    pub h: f64,
    pub t_final: f64,
    pub sample_times: Vec<f64>,
    pub hamiltonian_values: Vec<f64>,
    pub constraint_residuals: Vec<f64>,
    pub hamiltonian_envelope: Vec<f64>,
    pub constraint_envelope: Vec<f64>,
    pub linear_drift_rate: f64,
    /// Time of the last completed step (`t_final` unless the run failed).
    pub reached_time: f64,
    pub failure: Option<String>,
}

impl DriftReport {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }

    /// Largest `|H|` over every step.
    pub fn max_abs_hamiltonian(&self) -> f64 {
        self.hamiltonian_envelope.iter().fold(0.0, |m, v| m.max(*v))
    }

    /// Largest constraint residual over every step.
    pub fn max_constraint_residual(&self) -> f64 {
        self.constraint_envelope.iter().fold(0.0, |m, v| m.max(*v))
    }

    /// Largest `|H|` over the steps up to time `t` (resolved to sample
    /// boundaries: buckets ending after `t` are excluded).
    pub fn envelope_until(&self, t: f64) -> f64 {
        self.sample_times
            .iter()
            .zip(&self.hamiltonian_envelope)
            .take_while(|(ts, _)| **ts <= t)
            .fold(0.0, |m, (_, v)| m.max(*v))
    }
}

/// Online least-squares slope of `y` against `t`.
#[derive(Debug, Default, Clone, Copy)]
struct SlopeAccumulator {
    n: f64,
    mean_t: f64,
    mean_y: f64,
    c_ty: f64,
    m_tt: f64,
}

impl SlopeAccumulator {
    fn push(&mut self, t: f64, y: f64) {
        self.n += 1.0;
        let dt = t - self.mean_t;
        self.mean_t += dt / self.n;
        self.mean_y += (y - self.mean_y) / self.n;
        self.c_ty += dt * (y - self.mean_y);
        self.m_tt += dt * (t - self.mean_t);
    }

    fn slope(&self) -> f64 {
        if self.m_tt > 0.0 {
            self.c_ty / self.m_tt
        } else {
            0.0
        }
    }
}

/// Integrates with fixed step `h` up to `t_final`, recording `H(q_k)` and
/// `‖p_k − α(q_k)‖_∞`. A solver failure ends the run early and is recorded
/// in the report rather than returned as an error.
pub fn run_drift<S: VelocityLinearSystem + ?Sized>(
    sys: &S,
    method_id: &str,
    q0: &[f64],
    h: f64,
    t_final: f64,
    max_samples: usize,
    cfg: &SolverConfig,
) -> Result<DriftReport> {
    let tableau = tableau_by_id(method_id)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidStep(h));
    }
    let x0 = consistent_init(sys, q0);
    let steps = crate::prk::step_count(t_final, h);
    let stride = steps.div_ceil(max_samples.max(1));

    let h0 = sys.hamiltonian(&x0.q);
    let mut report = DriftReport {
        method_id: method_id.to_string(),
        model_id: sys.name().to_string(),
        h,
        t_final,
        sample_times: vec![0.0],
        hamiltonian_values: vec![h0],
        constraint_residuals: vec![x0.constraint_residual(sys)],
        hamiltonian_envelope: vec![h0.abs()],
        constraint_envelope: vec![x0.constraint_residual(sys)],
        linear_drift_rate: 0.0,
        reached_time: 0.0,
        failure: None,
    };
    let mut slope = SlopeAccumulator::default();
    slope.push(0.0, h0);
    let (mut bucket_h, mut bucket_c) = (0.0f64, 0.0f64);
    let mut k = 0usize;
    let mut last = x0.clone();

    let outcome = integrate(sys, &tableau, &x0, h, t_final, cfg, |x: &PhasePoint, _| {
        k += 1;
        let hv = sys.hamiltonian(&x.q);
        let cv = x.constraint_residual(sys);
        slope.push(x.t, hv);
        bucket_h = bucket_h.max(hv.abs());
        bucket_c = bucket_c.max(cv);
        if k.is_multiple_of(stride) || k == steps {
            report.sample_times.push(x.t);
            report.hamiltonian_values.push(hv);
            report.constraint_residuals.push(cv);
            report.hamiltonian_envelope.push(bucket_h);
            report.constraint_envelope.push(bucket_c);
            bucket_h = 0.0;
            bucket_c = 0.0;
        }
        last = x.clone();
    });
    if let Err(fail) = outcome {
        report.failure = Some(fail.error.to_string());
        if !k.is_multiple_of(stride) {
            // keep the partial bucket so envelopes cover every completed step
            report.sample_times.push(last.t);
            report.hamiltonian_values.push(sys.hamiltonian(&last.q));
            report
                .constraint_residuals
                .push(last.constraint_residual(sys));
            report.hamiltonian_envelope.push(bucket_h);
            report.constraint_envelope.push(bucket_c);
        }
    }
    report.reached_time = last.t;
    report.linear_drift_rate = slope.slope();
    Ok(report)
}

/// `‖J Λ⁻¹ Jᵀ − Λ⁻¹‖_∞` for the position step map `q ↦ q̄` of one step from
/// the consistent point `(q, α(q))`, with `J` from central differences.
/// Vanishes (up to difference error) exactly when the step is a Poisson map
/// for the structure matrix `Λ⁻¹`.
pub fn poisson_map_check<S: VelocityLinearSystem + ?Sized>(
    sys: &S,
    method_id: &str,
    h: f64,
    q: &[f64],
    cfg: &SolverConfig,
) -> Result<f64> {
    let lambda = sys
        .linear_alpha()
        .ok_or_else(|| Error::UnsupportedSystem(format!("{} has nonlinear alpha", sys.name())))?;
    let tableau = tableau_by_id(method_id)?;
    let step_map = |y: &[f64]| -> Result<Vec<f64>> {
        let x = PhasePoint::new(0.0, y.to_vec(), sys.alpha(y));
        Ok(prk_step(sys, &tableau, h, &x, cfg)?.0.q)
    };
    let eps = 1e-5 * (1.0 + linalg::norm_inf(q));
    let j = linalg::try_fd_jacobian(step_map, q, eps)?;
    let inv = Lu::factor(&lambda)?.inverse();
    let lhs = j.matmul(&inv).matmul(&j.transpose());
    Ok(lhs.sub(&inv).norm_inf())
}

/// Λ⁻¹, exposed for callers that want to build their own structure checks.
pub fn structure_matrix<S: VelocityLinearSystem + ?Sized>(sys: &S) -> Result<Matrix> {
    let lambda = sys
        .linear_alpha()
        .ok_or_else(|| Error::UnsupportedSystem(format!("{} has nonlinear alpha", sys.name())))?;
    Ok(Lu::factor(&lambda)?.inverse())
}

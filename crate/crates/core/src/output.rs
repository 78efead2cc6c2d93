//! CSV and JSON manifest writers.
//!
//! Numbers are written in the shortest decimal form that parses back to the
//! same `f64`, so identical runs produce byte-identical files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::diagnostics::{ConvergenceReport, DriftReport};
use crate::prk::SolverConfig;
use crate::system::PhasePoint;

/// Shortest round-trip representation, switching to exponent notation for
/// very small or very large magnitudes.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

/// Streams `t,q1..qn,p1..pn,constraint_residual,newton_iters` rows.
pub struct TrajectoryWriter<W: Write> {
    out: W,
    n: usize,
}

impl TrajectoryWriter<BufWriter<File>> {
    pub fn create(path: &Path, n: usize) -> io::Result<Self> {
        Self::new(BufWriter::new(File::create(path)?), n)
    }
}

impl<W: Write> TrajectoryWriter<W> {
    pub fn new(mut out: W, n: usize) -> io::Result<Self> {
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("q{i}")));
        header.extend((1..=n).map(|i| format!("p{i}")));
        header.push("constraint_residual".into());
        header.push("newton_iters".into());
        writeln!(out, "{}", header.join(","))?;
        Ok(TrajectoryWriter { out, n })
    }

    pub fn row(
        &mut self,
        x: &PhasePoint,
        constraint_residual: f64,
        newton_iters: usize,
    ) -> io::Result<()> {
        debug_assert_eq!(x.q.len(), self.n);
        let mut fields = Vec::with_capacity(2 * self.n + 3);
        fields.push(format_f64(x.t));
        fields.extend(x.q.iter().chain(&x.p).map(|v| format_f64(*v)));
        fields.push(format_f64(constraint_residual));
        fields.push(newton_iters.to_string());
        writeln!(self.out, "{}", fields.join(","))
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// `method,h,err_q,err_p,fitted_order`: one row per step size with an empty
/// order, then a summary row per method with only the order filled in.
/// Failed runs leave their error columns empty.
pub fn write_convergence_csv<W: Write>(
    mut out: W,
    reports: &[ConvergenceReport],
) -> io::Result<()> {
    writeln!(out, "method,h,err_q,err_p,fitted_order")?;
    for r in reports {
        for ((h, eq), ep) in r.step_sizes.iter().zip(&r.errors).zip(&r.errors_p) {
            writeln!(
                out,
                "{},{},{},{},",
                r.method_id,
                format_f64(*h),
                format_opt(*eq),
                format_opt(*ep)
            )?;
        }
        writeln!(out, "{},,,,{}", r.method_id, format_opt(r.fitted_order))?;
    }
    out.flush()
}

/// `t,H,constraint_residual` at the thinned samples.
pub fn write_drift_csv<W: Write>(mut out: W, report: &DriftReport) -> io::Result<()> {
    writeln!(out, "t,H,constraint_residual")?;
    for ((t, hv), c) in report
        .sample_times
        .iter()
        .zip(&report.hamiltonian_values)
        .zip(&report.constraint_residuals)
    {
        writeln!(
            out,
            "{},{},{}",
            format_f64(*t),
            format_f64(*hv),
            format_f64(*c)
        )?;
    }
    out.flush()
}

/// Per-method summary stored in a convergence manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub fitted_order: Option<f64>,
    pub fit_range: Option<[usize; 2]>,
    pub failures: Vec<Option<String>>,
}

impl From<&ConvergenceReport> for MethodSummary {
    fn from(r: &ConvergenceReport) -> Self {
        MethodSummary {
            method: r.method_id.clone(),
            fitted_order: r.fitted_order,
            fit_range: r.fit_range.as_ref().map(|x| [x.start, x.end]),
            failures: r.failures.clone(),
        }
    }
}

/// Run metadata written next to every CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub model: String,
    pub methods: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_sizes: Option<Vec<f64>>,
    pub t_final: f64,
    pub q0: Vec<f64>,
    pub tolerances: SolverConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_ref: Option<f64>,
    pub truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reached_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linear_drift_rate: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub convergence: Vec<MethodSummary>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(
        command: &str,
        model: &str,
        t_final: f64,
        q0: Vec<f64>,
        tolerances: SolverConfig,
    ) -> Self {
        Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            model: model.to_string(),
            methods: Vec::new(),
            h: None,
            step_sizes: None,
            t_final,
            q0,
            tolerances,
            h_ref: None,
            truncated: false,
            reached_time: None,
            failure: None,
            linear_drift_rate: None,
            convergence: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, self).map_err(io::Error::other)?;
        writeln!(out)?;
        out.flush()
    }
}

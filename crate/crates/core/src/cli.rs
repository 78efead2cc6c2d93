//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 solver
//! failure (partial output is kept and the manifest is marked truncated).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::diagnostics::{
    even_step_counts, run_convergence, run_drift, ConvergenceReport, Reference,
};
use crate::error::{Error, Result};
use crate::models::{model_by_id, ModelSetup};
use crate::output::{
    write_convergence_csv, write_drift_csv, Manifest, MethodSummary, TrajectoryWriter,
};
use crate::prk::integrate;
use crate::reference::reference_solution;
use crate::system::consistent_init;
use crate::tableau::{check_order_conditions, check_symplecticity, tableau_by_id, METHOD_IDS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

/// Environment variable consulted when `--out-dir` is not given.
pub const OUT_DIR_ENV: &str = "VPRK_OUT_DIR";

const DEFAULT_H_REF: f64 = 1e-6;
const DEFAULT_DRIFT_T_FINAL: f64 = 1e4;
const DEFAULT_MAX_SAMPLES: usize = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "vprk",
    version,
    about = "Variational partitioned Runge-Kutta integrators for Lagrangians linear in velocities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one trajectory and write trajectory.csv.
    Run(CommonArgs),
    /// Endpoint errors over a range of step sizes; writes convergence.csv.
    Convergence(CommonArgs),
    /// Long-time Hamiltonian and constraint record; writes drift.csv.
    Drift(CommonArgs),
    /// Print symplecticity and order-condition residuals of the tableaus.
    TableauCheck(TableauArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// kepler, vortex2, lotka_volterra or toy.
    #[arg(long)]
    pub model: Option<String>,
    /// Method id; `convergence` also accepts a comma-separated list.
    #[arg(long)]
    pub method: Option<String>,
    /// Step size.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long = "t-final")]
    pub t_final: Option<f64>,
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Default)]
pub struct TableauArgs {
    /// Restrict to one method (default: all shipped tableaus).
    #[arg(long)]
    pub method: Option<String>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Convergence(a) => cmd_convergence(&a),
        Command::Drift(a) => cmd_drift(&a),
        Command::TableauCheck(a) => cmd_tableau_check(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("vprk: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::NewtonDivergence { .. }
        | Error::SingularStageJacobian { .. }
        | Error::InconsistentState { .. }
        | Error::SingularMatrix { .. }
        | Error::SingularMassMatrix { .. }
        | Error::Domain { .. } => EXIT_DIVERGED,
        _ => EXIT_CONFIG,
    }
}

/// Configuration after merging the file with command-line flags.
struct Resolved {
    cfg: RunConfig,
    setup: ModelSetup,
    q0: Vec<f64>,
    out_dir: PathBuf,
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Io(msg) => Error::Io(msg),
        Error::Config(msg) => Error::Config(msg),
        other => Error::Config(other.to_string()),
    }
}

fn resolve(args: &CommonArgs) -> Result<Resolved> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = &args.model {
        cfg.model = Some(m.clone());
    }
    if let Some(m) = &args.method {
        cfg.method = Some(m.clone());
    }
    if args.h.is_some() {
        cfg.h = args.h;
    }
    if args.t_final.is_some() {
        cfg.t_final = args.t_final;
    }
    let model_id = cfg
        .model
        .clone()
        .ok_or_else(|| Error::Config("no model given (use --model or the config file)".into()))?;
    let setup = model_by_id(&model_id, &cfg.params).map_err(config_err)?;
    let q0 = cfg.q0.clone().unwrap_or_else(|| setup.q0.clone());
    if q0.len() != setup.system.dim() {
        return Err(Error::Config(format!(
            "q0 has {} entries, model {} needs {}",
            q0.len(),
            model_id,
            setup.system.dim()
        )));
    }
    setup.system.check_domain(&q0).map_err(config_err)?;
    if let Some(h) = cfg.h {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Config(format!("h must be positive, got {h}")));
        }
    }
    if let Some(t) = cfg.t_final {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Config(format!("t_final must be positive, got {t}")));
        }
    }
    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out_dir)?;
    Ok(Resolved {
        cfg,
        setup,
        q0,
        out_dir,
    })
}

fn single_method(cfg: &RunConfig) -> Result<String> {
    let id = cfg
        .method
        .clone()
        .ok_or_else(|| Error::Config("no method given (use --method or the config file)".into()))?;
    tableau_by_id(&id).map_err(config_err)?;
    Ok(id)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Integrates one trajectory, streaming every step to `trajectory.csv`.
pub fn cmd_run(args: &CommonArgs) -> Result<i32> {
    let r = resolve(args)?;
    let method = single_method(&r.cfg)?;
    let tableau = tableau_by_id(&method)?;
    let h = r.cfg.h.unwrap_or(0.1);
    let t_final = r.cfg.t_final.unwrap_or(r.setup.t_final);
    let solver = r.cfg.solver;
    let sys = &r.setup.system;

    let csv_path = r.out_dir.join("trajectory.csv");
    let mut writer = TrajectoryWriter::create(&csv_path, sys.dim())?;
    let x0 = consistent_init(sys, &r.q0);
    writer.row(&x0, x0.constraint_residual(sys), 0)?;
    let mut io_error = None;
    let outcome = integrate(sys, &tableau, &x0, h, t_final, &solver, |x, rep| {
        if io_error.is_none() {
            if let Err(e) = writer.row(x, x.constraint_residual(sys), rep.iterations) {
                io_error = Some(e);
            }
        }
    });
    writer.finish()?;
    if let Some(e) = io_error {
        return Err(e.into());
    }

    let mut manifest = Manifest::new("run", &r.setup.id, t_final, r.q0.clone(), solver);
    manifest.methods = vec![method];
    manifest.h = Some(h);
    manifest.outputs = vec![file_name(&csv_path)];
    let code = match &outcome {
        Ok(end) => {
            manifest.reached_time = Some(end.t);
            EXIT_OK
        }
        Err(fail) => {
            eprintln!("vprk: run stopped at t = {}: {}", fail.last.t, fail.error);
            manifest.truncated = true;
            manifest.reached_time = Some(fail.last.t);
            manifest.failure = Some(fail.error.to_string());
            EXIT_DIVERGED
        }
    };
    manifest.write(&r.out_dir.join("manifest.json"))?;
    Ok(code)
}

/// Endpoint errors of each method over a grid of step sizes.
///
/// Per-step-size solver failures are data (recorded as empty error columns
/// and listed in the manifest), not command failures.
pub fn cmd_convergence(args: &CommonArgs) -> Result<i32> {
    let r = resolve(args)?;
    let methods: Vec<String> = match (&args.method, &r.cfg.methods, &r.cfg.method) {
        (Some(list), _, _) => list.split(',').map(|s| s.trim().to_string()).collect(),
        (None, Some(list), _) => list.clone(),
        (None, None, Some(m)) => vec![m.clone()],
        (None, None, None) => METHOD_IDS.iter().map(|s| s.to_string()).collect(),
    };
    for m in &methods {
        tableau_by_id(m).map_err(config_err)?;
    }
    let t_final = r.cfg.t_final.unwrap_or(r.setup.t_final);
    let step_sizes: Vec<f64> = match (&r.cfg.step_sizes, &r.cfg.step_counts, r.cfg.h) {
        (Some(hs), _, _) => hs.clone(),
        (None, Some(ns), _) => ns.iter().map(|n| t_final / *n as f64).collect(),
        (None, None, Some(h)) => vec![h, h / 2.0, h / 4.0, h / 8.0],
        (None, None, None) => even_step_counts(20, 2000, 10)
            .into_iter()
            .map(|n| t_final / n as f64)
            .collect(),
    };
    if step_sizes.windows(2).any(|w| !(w[1] < w[0])) || step_sizes.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::Config(
            "step sizes must be positive and strictly decreasing".into(),
        ));
    }
    let solver = r.cfg.solver;
    let sys = &r.setup.system;

    let h_ref = r.cfg.h_ref.unwrap_or(DEFAULT_H_REF);
    let use_exact = r.setup.exact.is_some() && r.cfg.q0.is_none();
    let reference_traj = if use_exact {
        None
    } else {
        Some(reference_solution(sys, &r.q0, t_final, h_ref, 1)?)
    };
    let reference = match (&reference_traj, &r.setup.exact) {
        (Some(tr), _) => Reference::Trajectory(tr),
        (None, Some(f)) => Reference::ClosedForm(f.as_ref()),
        (None, None) => unreachable!("reference chosen above"),
    };

    let reports: Vec<ConvergenceReport> = methods
        .par_iter()
        .map(|m| run_convergence(sys, m, &r.q0, t_final, &step_sizes, reference, &solver))
        .collect::<Result<_>>()?;

    let csv_path = r.out_dir.join("convergence.csv");
    write_convergence_csv(
        std::io::BufWriter::new(fs::File::create(&csv_path)?),
        &reports,
    )?;

    let mut manifest = Manifest::new("convergence", &r.setup.id, t_final, r.q0.clone(), solver);
    manifest.methods = methods;
    manifest.step_sizes = Some(step_sizes);
    manifest.h_ref = reference_traj.as_ref().map(|_| h_ref);
    manifest.convergence = reports.iter().map(MethodSummary::from).collect();
    manifest.outputs = vec![file_name(&csv_path)];
    manifest.write(&r.out_dir.join("manifest.json"))?;
    Ok(EXIT_OK)
}

/// Long-time Hamiltonian record at thinned samples.
pub fn cmd_drift(args: &CommonArgs) -> Result<i32> {
    let r = resolve(args)?;
    let method = single_method(&r.cfg)?;
    let h = r.cfg.h.unwrap_or(0.1);
    let t_final = r.cfg.t_final.unwrap_or(DEFAULT_DRIFT_T_FINAL);
    let max_samples = r.cfg.max_samples.unwrap_or(DEFAULT_MAX_SAMPLES);
    let solver = r.cfg.solver;
    let report = run_drift(
        &r.setup.system,
        &method,
        &r.q0,
        h,
        t_final,
        max_samples,
        &solver,
    )?;

    let csv_path = r.out_dir.join("drift.csv");
    write_drift_csv(
        std::io::BufWriter::new(fs::File::create(&csv_path)?),
        &report,
    )?;

    let mut manifest = Manifest::new("drift", &r.setup.id, t_final, r.q0.clone(), solver);
    manifest.methods = vec![method];
    manifest.h = Some(h);
    manifest.truncated = !report.completed();
    manifest.reached_time = Some(report.reached_time);
    manifest.failure = report.failure.clone();
    manifest.linear_drift_rate = Some(report.linear_drift_rate);
    manifest.outputs = vec![file_name(&csv_path)];
    manifest.write(&r.out_dir.join("manifest.json"))?;
    if let Some(f) = &report.failure {
        eprintln!(
            "vprk: drift run stopped at t = {}: {f}",
            report.reached_time
        );
        return Ok(EXIT_DIVERGED);
    }
    Ok(EXIT_OK)
}

/// Text report of the tableau checks, one block per method.
pub fn tableau_report(id: &str) -> Result<String> {
    use std::fmt::Write;
    let t = tableau_by_id(id)?;
    let mut out = String::new();
    let _ = write!(out, "{t}");
    let _ = writeln!(
        out,
        "  symplecticity residual: {:e}",
        check_symplecticity(&t)
    );
    let _ = writeln!(
        out,
        "  stage consistency:      {:e}",
        t.stage_consistency_residual()
    );
    let conds = check_order_conditions(&t, t.classical_order.max(t.stages() as u32));
    let s = t.stages();
    let shown = conds.iter().filter(|(k, _)| match k.split_at(1) {
        ("B", n) => n.parse::<u32>().is_ok_and(|n| n <= t.classical_order),
        ("C", n) => n.parse::<usize>().is_ok_and(|n| n <= s),
        _ => false,
    });
    for (k, v) in shown {
        let _ = writeln!(out, "  {k:<4} {v:e}");
    }
    Ok(out)
}

pub fn cmd_tableau_check(args: &TableauArgs) -> Result<i32> {
    let ids: Vec<String> = match &args.method {
        Some(m) => vec![m.clone()],
        None => METHOD_IDS.iter().map(|s| s.to_string()).collect(),
    };
    for id in ids {
        println!("{}", tableau_report(&id)?);
    }
    Ok(EXIT_OK)
}

//! JSON run configuration shared by the CLI subcommands.
//!
//! Every key is optional; command-line flags take precedence over the file.
//!
//! ```json
//! {
//!   "model": "kepler",
//!   "method": "gauss2",
//!   "methods": ["gauss1", "gauss2"],
//!   "h": 0.1,
//!   "t_final": 7.0,
//!   "step_counts": [20, 40, 80],
//!   "step_sizes": [0.35, 0.175],
//!   "h_ref": 1e-6,
//!   "max_samples": 10000,
//!   "q0": [0.5, 0.0, 0.0, 1.7320508075688772],
//!   "params": { "e": 0.5, "a_axis": 1.0, "h0": -0.5, "gammas": [4, 2], "separation": 1.0 },
//!   "solver": { "newton_tol": 1e-12, "max_newton_iters": 50,
//!               "jacobian_mode": "exact", "initial_guess": "el_field",
//!               "record_w_condition": false }
//! }
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::models::ModelOverrides;
use crate::prk::SolverConfig;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<String>,
    pub method: Option<String>,
    /// Methods compared by a convergence study.
    pub methods: Option<Vec<String>>,
    pub h: Option<f64>,
    pub t_final: Option<f64>,
    /// Convergence study grid as step counts `N`, giving `h = t_final / N`.
    pub step_counts: Option<Vec<usize>>,
    /// Convergence study grid as explicit step sizes; wins over `step_counts`.
    pub step_sizes: Option<Vec<f64>>,
    /// Step of the explicit reference integration.
    pub h_ref: Option<f64>,
    pub max_samples: Option<usize>,
    pub q0: Option<Vec<f64>>,
    pub params: ModelOverrides,
    pub solver: SolverConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.solver
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

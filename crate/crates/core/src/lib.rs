#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod models;
pub mod output;
pub mod prk;
pub mod reference;
pub mod system;
pub mod tableau;

pub use error::{Error, Result};
pub use prk::{integrate, prk_step, solve_stages, JacobianMode, SolverConfig, StageSolveReport};
pub use system::{consistent_init, PhasePoint, Trajectory, VelocityLinearSystem};
pub use tableau::{tableau_by_id, PartitionedTableau, METHOD_IDS};

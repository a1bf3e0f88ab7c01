//! Deterministic oracles: an implicit L1 solver for Caputo systems with
//! per-row orders, finite-difference sensitivities through it, and the
//! matrix exponential for the classical case.

mod expm;
mod fd;
mod l1;

use thiserror::Error;

pub use expm::{expm_oracle, taylor_propagate};
pub use fd::{fd_sensitivities, fd_sensitivities_scaled, fd_step, FdTable, FdTargets};
pub use l1::{l1_solve, l1_weights, L1Config, Trajectory};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReferenceError {
    #[error("L1 step matrix C - A is singular")]
    Singular,
    #[error("row {row}: L1 needs an order in (0, 1), got {value}")]
    AlphaDomain { row: usize, value: f64 },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("L1 solution is not finite")]
    NonFinite,
}

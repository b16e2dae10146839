//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::solver::MonitorStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field `{0}` contains non-finite values")]
    NonFinite(String),

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("time derivative of order {needed} requested, only {available} available")]
    MissingTimeDerivative { needed: usize, available: usize },

    #[error("density floor violated: min rho = {min_rho:.6} < 0.1")]
    DensityFloor { min_rho: f64 },

    #[error("magnetic floor violated: min(h + 1) = {min:.6} < {floor:.6}")]
    MagneticFloor { min: f64, floor: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("monitor breach at t = {time:.6}: {status}")]
    MonitorBreach { time: f64, status: Box<MonitorStatus> },

    #[error("solver diverged at t = {time:.6}")]
    Diverged { time: f64 },

    #[error("incompatible manufactured solution: {0}")]
    IncompatibleManufactured(String),
}

//! Error type shared across the crate.

use thiserror::Error;

/// Errors reported by fields, solvers, and experiment drivers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field resolutions differ: {left} vs {right} cells")]
    ResolutionMismatch { left: usize, right: usize },

    #[error("shift {h} is not a multiple of the cell width {dx}")]
    NonAlignedShift { h: f64, dx: f64 },

    #[error("mollifier support {theta} is under-resolved on a grid with dx = {dx}")]
    UnderResolvedMollifier { theta: f64, dx: f64 },

    #[error("non-finite value in field data")]
    NonFiniteField,

    #[error("unknown builtin problem `{0}`")]
    UnknownProblem(String),

    #[error("quadrature failed to converge: error estimate {achieved:e} exceeds {required:e}")]
    QuadratureNonConvergence { achieved: f64, required: f64 },

    #[error("CFL violation: dt = {dt:e} exceeds stable dt = {dt_max:e}")]
    CflViolation { dt: f64, dt_max: f64 },

    #[error("solution blow-up at t = {t}: max |u| = {max_abs} left the monitored box")]
    BlowUp { t: f64, max_abs: f64 },

    #[error("fixed-point iteration is not contracting: residual ratio {ratio}")]
    NonContraction { ratio: f64 },

    #[error("fixed-point iteration exceeded {iters} iterations (residual {residual:e})")]
    MaxItersExceeded { iters: usize, residual: f64 },

    #[error("kinetic variable box [{lo}, {hi}] does not cover the required range")]
    XiBoxTooSmall { lo: f64, hi: f64 },

    #[error("csv parse error at line {line}: {message}")]
    CsvParse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

//! Numerical laboratory for stochastic degenerate parabolic-hyperbolic
//! conservation laws on the 1-D unit torus.
//!
//! The crate provides:
//!
//! - [`field`]: periodic cell-averaged fields, discrete L^p / BV / Nikolskii
//!   (semi-)norms, mollification;
//! - [`problem`]: coefficient families (heterogeneous flux, degenerate
//!   diffusion with Kirchhoff transforms, multiplicative noise) and
//!   coefficient distances;
//! - [`noise`]: counter-based Brownian paths with exact bridge refinement;
//! - [`fv`]: the conservative finite-volume / Euler-Maruyama solver;
//! - [`duhamel`]: a spectral fixed-point solver for the uniformly parabolic
//!   regularisation, used as an independent oracle;
//! - [`kinetic`]: the kinetic-formulation toolbox (regularised positive
//!   parts, kinetic functions, defect estimators, weak-form residual);
//! - [`experiments`]: Monte Carlo drivers that turn the stability, fractional
//!   BV, continuous-dependence, vanishing-viscosity, and temporal-regularity
//!   estimates into falsifiable desk-scale experiments;
//! - [`report`]: verdicts and CSV rendering for the drivers.
//!
//! All numerics are generic over the scalar type through [`scalar::Real`];
//! `f64` aliases are exported at the crate root.

// Validation deliberately spells `!(x > 0)` instead of `x <= 0`: the negated
// form also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bump;
pub mod duhamel;
pub mod error;
pub mod experiments;
pub mod field;
pub mod fv;
pub mod kinetic;
pub mod noise;
pub mod problem;
pub mod quad;
pub mod report;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` instantiations of the core types.
pub type Field = field::TorusField<f64>;
pub type Mollifier = field::Mollifier<f64>;
pub type Problem = problem::ProblemSpec<f64>;
pub type Path = noise::NoisePath<f64>;
pub type Solver = fv::SolverConfig<f64>;
pub type Traj = fv::Trajectory<f64>;
pub type Fit = stats::RateFit<f64>;

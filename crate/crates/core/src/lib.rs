//! Forward simulation and Bayesian reconstruction of subsonic moving point
//! sources of the scalar wave equation in three dimensions.
//!
//! The crate is organised in four layers:
//!
//! - [`wavefield`]: exact retarded-potential field of moving point sources,
//!   the interpolating forward map onto sensor arrays and the relative noise
//!   model used for synthetic measurements.
//! - [`gp`]: squared-exponential Gaussian-process priors on an emission-time
//!   grid, whitened sampling through a square-root factor of the Gram matrix,
//!   and conditioning on point values and linear functionals.
//! - [`inference`]: pre-conditioned Crank-Nicolson MCMC in whitened
//!   coordinates, posterior summaries and convergence diagnostics.
//! - [`scenarios`]: sensor layouts, the four benchmark source configurations
//!   and the reconstruction error metrics.

pub mod error;
pub mod gp;
pub mod inference;
pub mod rng;
pub mod scenarios;
pub mod wavefield;

pub use error::{Error, Result};

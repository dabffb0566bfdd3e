//! Gaussian-process priors on emission-time grids.

mod functional;
mod kernel;
mod prior;

pub use functional::{FunctionalEvaluation, GridFunctional};
pub use kernel::{se_kernel, SeKernel};
pub use prior::{GaussianProcessPrior, JITTER_MAX, JITTER_START};

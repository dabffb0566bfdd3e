//! Function-space MCMC for the latent trajectories and intensities.

mod diagnostics;
mod likelihood;
mod pcn;
mod state;
mod summary;

pub use diagnostics::{chain_ess, effective_sample_size, potential_scale_reduction};
pub use likelihood::{gaussian_log_likelihood, FlatLikelihood, GaussianLikelihood, LogLikelihood};
pub use pcn::{
    extend_chain, pcn_proposal, pcn_step, probe_indices, run_chain, ChainRecord, ChainSettings,
    Snapshot, CHAIN_FORMAT_VERSION, MAX_INITIAL_DRAWS,
};
pub use state::{LatentState, ModelPrior, SourcePrior};
pub use summary::{averaged_mode, posterior_mean, posterior_mode, ModeEstimate};

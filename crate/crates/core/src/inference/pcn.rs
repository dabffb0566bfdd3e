//! Pre-conditioned Crank-Nicolson MCMC in whitened coordinates.
//!
//! With priors realized as `f = m + L s`, a prior draw is `m + L z` with
//! `z ~ N(0, I)`, and the pCN proposal `sqrt(1 - 2 delta) f + sqrt(2 delta) psi`
//! becomes `s* = sqrt(1 - 2 delta) s + sqrt(2 delta) z` on the whitened
//! vector. Proposals are accepted with probability
//! `min(1, exp(L(f*) - L(f)))` where `L` is the log-likelihood alone.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{chain_stream, stream_rng};

use super::likelihood::LogLikelihood;
use super::state::{LatentState, ModelPrior};

pub const CHAIN_FORMAT_VERSION: u32 = 1;

/// Number of prior draws tried for an admissible (finite-likelihood)
/// starting point.
pub const MAX_INITIAL_DRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSettings {
    pub delta: f64,
    pub seed: u64,
    pub chain_index: u64,
    /// Keep a whitened snapshot every `thinning` steps.
    pub thinning: usize,
    /// First step counted by posterior summaries.
    pub burn_in: usize,
}

impl ChainSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 0.5) {
            return Err(Error::InvalidArgument(format!(
                "pCN parameter must lie in (0, 1/2], got {}",
                self.delta
            )));
        }
        if self.thinning == 0 {
            return Err(Error::InvalidArgument("thinning must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub whitened: Vec<f64>,
    pub log_likelihood: f64,
}

impl Snapshot {
    /// Log posterior up to a constant: log-likelihood minus `|s|^2 / 2`.
    pub fn log_posterior(&self) -> f64 {
        self.log_likelihood - 0.5 * self.whitened.iter().map(|s| s * s).sum::<f64>()
    }
}

/// Full history of one chain.
///
/// Scalar traces (log-likelihood, acceptance flags, probe values) cover
/// every step; whitened snapshots are thinned. Step 0 is the initial prior
/// draw and has no acceptance flag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRecord {
    pub format_version: u32,
    pub settings: ChainSettings,
    /// Likelihood precision, carried as metadata.
    pub beta: f64,
    pub log_likelihood: Vec<f64>,
    pub accepted: Vec<bool>,
    /// Flat latent indices traced at every step.
    pub probe_indices: Vec<usize>,
    /// `probes[p][step]` is the realized latent value at `probe_indices[p]`.
    pub probes: Vec<Vec<f64>>,
    pub snapshots: Vec<Snapshot>,
    /// Whitened coordinates of the last state.
    pub current: Vec<f64>,
}

impl ChainRecord {
    pub fn len(&self) -> usize {
        self.log_likelihood.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_likelihood.is_empty()
    }

    pub fn acceptance_ratio(&self) -> f64 {
        if self.accepted.is_empty() {
            return 0.0;
        }
        self.accepted.iter().filter(|&&a| a).count() as f64 / self.accepted.len() as f64
    }

    /// Snapshots at or after the burn-in step.
    pub fn retained(&self, burn_in: usize) -> impl Iterator<Item = &Snapshot> {
        self.snapshots.iter().filter(move |s| s.step >= burn_in)
    }
}

/// Latent values at the grid quartiles of every latent block.
pub fn probe_indices(priors: &ModelPrior) -> Vec<usize> {
    let m = priors.grid_len();
    let mut local: Vec<usize> = [m / 4, m / 2, (3 * m) / 4]
        .iter()
        .map(|&i| i.min(m - 1))
        .collect();
    local.dedup();
    (0..3 * priors.n_sources())
        .flat_map(|b| local.iter().map(move |&i| b * m + i))
        .collect()
}

fn probe_values(state: &LatentState, indices: &[usize], m: usize) -> Vec<f64> {
    indices
        .iter()
        .map(|&idx| {
            let (block, i) = (idx / m, idx % m);
            let src = &state.model.sources()[block / 3];
            match block % 3 {
                0 => src.x().values()[i],
                1 => src.y().values()[i],
                _ => src.q().values()[i],
            }
        })
        .collect()
}

/// `sqrt(1 - 2 delta) s + sqrt(2 delta) z`.
pub fn pcn_proposal(current: &[f64], innovation: &[f64], delta: f64) -> Vec<f64> {
    let keep = (1.0 - 2.0 * delta).max(0.0).sqrt();
    let mix = (2.0 * delta).sqrt();
    current
        .iter()
        .zip(innovation)
        .map(|(s, z)| keep * s + mix * z)
        .collect()
}

fn standard_normal_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// One pCN transition. Returns the next state and whether the proposal was
/// accepted; on rejection the input state is returned unchanged.
pub fn pcn_step<R: Rng + ?Sized>(
    state: LatentState,
    delta: f64,
    priors: &ModelPrior,
    likelihood: &(impl LogLikelihood + ?Sized),
    rng: &mut R,
) -> Result<(LatentState, bool)> {
    let z = standard_normal_vec(priors.dim(), rng);
    let u: f64 = rng.random();
    let proposal = pcn_proposal(&state.whitened, &z, delta);
    let candidate = LatentState::new(proposal, priors, likelihood)?;
    let accept = if candidate.log_likelihood == f64::NEG_INFINITY {
        false
    } else if candidate.log_likelihood >= state.log_likelihood {
        true
    } else {
        u.ln() < candidate.log_likelihood - state.log_likelihood
    };
    Ok(if accept {
        (candidate, true)
    } else {
        (state, false)
    })
}

fn initial_state(
    settings: &ChainSettings,
    priors: &ModelPrior,
    likelihood: &(impl LogLikelihood + ?Sized),
) -> Result<LatentState> {
    let mut rng = stream_rng(settings.seed, chain_stream(settings.chain_index), 0);
    for _ in 0..MAX_INITIAL_DRAWS {
        let s = standard_normal_vec(priors.dim(), &mut rng);
        let state = LatentState::new(s, priors, likelihood)?;
        if state.log_likelihood.is_finite() {
            return Ok(state);
        }
    }
    Err(Error::InvalidArgument(format!(
        "no prior draw with finite likelihood in {MAX_INITIAL_DRAWS} attempts"
    )))
}

fn record_sample(record: &mut ChainRecord, state: &LatentState, step: usize, m: usize) {
    record.log_likelihood.push(state.log_likelihood);
    for (trace, v) in record
        .probes
        .iter_mut()
        .zip(probe_values(state, &record.probe_indices, m))
    {
        trace.push(v);
    }
    if step % record.settings.thinning == 0 {
        record.snapshots.push(Snapshot {
            step,
            whitened: state.whitened.clone(),
            log_likelihood: state.log_likelihood,
        });
    }
}

/// Runs a chain of `n_samples` states (the initial prior draw included).
///
/// Step `k` draws from the counter-based stream
/// `(seed, chain_stream(chain_index), k)`, so the record is a pure
/// function of the inputs.
pub fn run_chain(
    likelihood: &(impl LogLikelihood + ?Sized),
    priors: &ModelPrior,
    n_samples: usize,
    settings: ChainSettings,
    beta: f64,
) -> Result<ChainRecord> {
    settings.validate()?;
    if n_samples == 0 {
        return Err(Error::InvalidArgument("a chain needs at least one sample".into()));
    }
    let state = initial_state(&settings, priors, likelihood)?;
    let probe_indices = probe_indices(priors);
    let mut record = ChainRecord {
        format_version: CHAIN_FORMAT_VERSION,
        settings,
        beta,
        log_likelihood: Vec::with_capacity(n_samples),
        accepted: Vec::with_capacity(n_samples.saturating_sub(1)),
        probes: vec![Vec::with_capacity(n_samples); probe_indices.len()],
        probe_indices,
        snapshots: Vec::new(),
        current: Vec::new(),
    };
    record_sample(&mut record, &state, 0, priors.grid_len());
    record.current = state.whitened.clone();
    extend_from(record, state, likelihood, priors, n_samples)
}

/// Continues a chain until it holds `n_total` samples. The result is
/// identical to a single uninterrupted run of `n_total` samples.
pub fn extend_chain(
    record: ChainRecord,
    likelihood: &(impl LogLikelihood + ?Sized),
    priors: &ModelPrior,
    n_total: usize,
) -> Result<ChainRecord> {
    if record.format_version != CHAIN_FORMAT_VERSION {
        return Err(Error::InvalidArgument(format!(
            "chain format version {} not supported (expected {CHAIN_FORMAT_VERSION})",
            record.format_version
        )));
    }
    if record.is_empty() {
        return Err(Error::InvalidArgument("cannot extend an empty chain".into()));
    }
    let last = record.log_likelihood[record.len() - 1];
    let state = LatentState::with_log_likelihood(record.current.clone(), priors, last)?;
    extend_from(record, state, likelihood, priors, n_total)
}

fn extend_from(
    mut record: ChainRecord,
    mut state: LatentState,
    likelihood: &(impl LogLikelihood + ?Sized),
    priors: &ModelPrior,
    n_total: usize,
) -> Result<ChainRecord> {
    let settings = record.settings;
    let stream = chain_stream(settings.chain_index);
    let m = priors.grid_len();
    for step in record.len()..n_total {
        let mut rng = stream_rng(settings.seed, stream, step as u64);
        let (next, accepted) = pcn_step(state, settings.delta, priors, likelihood, &mut rng)?;
        state = next;
        record.accepted.push(accepted);
        record_sample(&mut record, &state, step, m);
    }
    record.current = state.whitened;
    Ok(record)
}

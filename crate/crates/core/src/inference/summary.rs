use crate::error::{Error, Result};
use crate::wavefield::SourceModel;

use super::pcn::{ChainRecord, Snapshot};
use super::state::ModelPrior;

/// Pointwise average of the realized latent functions over all retained
/// snapshots of all `chains`.
pub fn posterior_mean(chains: &[ChainRecord], burn_in: usize, priors: &ModelPrior) -> Result<SourceModel> {
    let mut sum = vec![0.0; priors.dim()];
    let mut count = 0usize;
    for snap in chains.iter().flat_map(|c| c.retained(burn_in)) {
        let values = priors.realize_values(&snap.whitened)?;
        for (acc, v) in sum.iter_mut().zip(values) {
            *acc += v;
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptySampleSet);
    }
    let n = count as f64;
    sum.iter_mut().for_each(|v| *v /= n);
    priors.model_from_values(&sum)
}

/// Highest-posterior retained snapshot together with its chain index.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeEstimate {
    pub model: SourceModel,
    pub snapshot: Snapshot,
    pub chain: usize,
}

/// Retained snapshot maximizing `log-likelihood - |s|^2 / 2` over all chains.
/// Ties keep the earliest snapshot.
pub fn posterior_mode(chains: &[ChainRecord], burn_in: usize, priors: &ModelPrior) -> Result<ModeEstimate> {
    let mut best: Option<(usize, &Snapshot, f64)> = None;
    for (ci, chain) in chains.iter().enumerate() {
        for snap in chain.retained(burn_in) {
            let score = snap.log_posterior();
            if best.map_or(true, |(_, _, b)| score > b) {
                best = Some((ci, snap, score));
            }
        }
    }
    let (chain, snapshot, _) = best.ok_or(Error::EmptySampleSet)?;
    Ok(ModeEstimate {
        model: priors.realize(&snapshot.whitened)?,
        snapshot: snapshot.clone(),
        chain,
    })
}

/// Average over chains of each chain's own posterior mode.
pub fn averaged_mode(chains: &[ChainRecord], burn_in: usize, priors: &ModelPrior) -> Result<SourceModel> {
    if chains.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let mut sum = vec![0.0; priors.dim()];
    for chain in chains {
        let mode = posterior_mode(std::slice::from_ref(chain), burn_in, priors)?;
        for (acc, v) in sum.iter_mut().zip(priors.realize_values(&mode.snapshot.whitened)?) {
            *acc += v;
        }
    }
    let n = chains.len() as f64;
    sum.iter_mut().for_each(|v| *v /= n);
    priors.model_from_values(&sum)
}

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gp::GaussianProcessPrior;
use crate::wavefield::{Source, SourceModel};

use super::likelihood::LogLikelihood;

/// Independent priors on one source's `p_x`, `p_y` and `q`.
#[derive(Debug, Clone)]
pub struct SourcePrior {
    pub x: Arc<GaussianProcessPrior>,
    pub y: Arc<GaussianProcessPrior>,
    pub q: Arc<GaussianProcessPrior>,
}

impl SourcePrior {
    pub fn new(
        x: Arc<GaussianProcessPrior>,
        y: Arc<GaussianProcessPrior>,
        q: Arc<GaussianProcessPrior>,
    ) -> Result<Self> {
        if x.grid() != y.grid() || x.grid() != q.grid() {
            return Err(Error::GridMismatch("latent priors must share one grid".into()));
        }
        Ok(Self { x, y, q })
    }

    fn blocks(&self) -> [&GaussianProcessPrior; 3] {
        [&self.x, &self.y, &self.q]
    }
}

/// Priors for every source of a model.
///
/// The whitened state is one flat vector laid out per source as
/// `[s_px | s_py | s_q]`, each block of length `M`.
#[derive(Debug, Clone)]
pub struct ModelPrior {
    sources: Vec<SourcePrior>,
}

impl ModelPrior {
    pub fn new(sources: Vec<SourcePrior>) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::InvalidArgument("model prior needs at least one source".into()));
        }
        if sources.iter().any(|s| s.x.grid() != sources[0].x.grid()) {
            return Err(Error::GridMismatch("all sources must share one grid".into()));
        }
        Ok(Self { sources })
    }

    pub fn sources(&self) -> &[SourcePrior] {
        &self.sources
    }

    pub fn grid(&self) -> &[f64] {
        self.sources[0].x.grid()
    }

    pub fn grid_len(&self) -> usize {
        self.grid().len()
    }

    pub fn n_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn dim(&self) -> usize {
        3 * self.grid_len() * self.sources.len()
    }

    /// Realized latent functions as flat values, same layout as the
    /// whitened vector.
    pub fn realize_values(&self, whitened: &[f64]) -> Result<Vec<f64>> {
        if whitened.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: whitened.len(),
            });
        }
        let m = self.grid_len();
        let mut out = vec![0.0; self.dim()];
        let blocks = self.sources.iter().flat_map(|s| s.blocks());
        for ((prior, s), o) in blocks
            .zip(whitened.chunks_exact(m))
            .zip(out.chunks_exact_mut(m))
        {
            prior.realize_into(s, o)?;
        }
        Ok(out)
    }

    pub fn realize(&self, whitened: &[f64]) -> Result<SourceModel> {
        self.model_from_values(&self.realize_values(whitened)?)
    }

    /// Assembles a model from flat realized values.
    pub fn model_from_values(&self, values: &[f64]) -> Result<SourceModel> {
        if values.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: values.len(),
            });
        }
        let m = self.grid_len();
        let sources = values
            .chunks_exact(3 * m)
            .map(|v| {
                Source::from_values(
                    self.grid().to_vec(),
                    v[..m].to_vec(),
                    v[m..2 * m].to_vec(),
                    v[2 * m..].to_vec(),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        SourceModel::new(sources)
    }
}

/// Current point of a chain: whitened coordinates together with the
/// realized model and its log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentState {
    pub whitened: Vec<f64>,
    pub model: SourceModel,
    pub log_likelihood: f64,
}

impl LatentState {
    pub fn new(
        whitened: Vec<f64>,
        priors: &ModelPrior,
        likelihood: &(impl LogLikelihood + ?Sized),
    ) -> Result<Self> {
        let model = priors.realize(&whitened)?;
        let log_likelihood = likelihood.log_likelihood(&model);
        Ok(Self {
            whitened,
            model,
            log_likelihood,
        })
    }

    /// Rebuilds a state whose log-likelihood is already known.
    pub fn with_log_likelihood(
        whitened: Vec<f64>,
        priors: &ModelPrior,
        log_likelihood: f64,
    ) -> Result<Self> {
        Ok(Self {
            model: priors.realize(&whitened)?,
            whitened,
            log_likelihood,
        })
    }

    /// `-1/2 |s|^2`, the log prior density up to a constant.
    pub fn log_prior(&self) -> f64 {
        -0.5 * self.whitened.iter().map(|s| s * s).sum::<f64>()
    }
}

use crate::error::{Error, Result};
use crate::wavefield::{
    max_speed, FieldMatrix, ForwardOperator, MeasurementSet, PhysicalConfig, SourceModel,
};

pub trait LogLikelihood: Sync {
    /// Log-likelihood of the data given `model`; `-inf` for inadmissible
    /// models.
    fn log_likelihood(&self, model: &SourceModel) -> f64;
}

/// `-(beta / 2) |U - G(f)|^2` for Gaussian measurement noise of precision
/// `beta`.
///
/// Supersonic models, near-field configurations and non-monotone arrival
/// times score `-inf`.
#[derive(Debug, Clone)]
pub struct GaussianLikelihood {
    operator: ForwardOperator,
    data: FieldMatrix,
    beta: f64,
}

impl GaussianLikelihood {
    pub fn new(data: &MeasurementSet, cfg: PhysicalConfig, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("precision must be positive, got {beta}")));
        }
        let operator = ForwardOperator::new(data.sensors.clone(), data.times.clone(), cfg)?;
        Ok(Self {
            operator,
            data: data.field.clone(),
            beta,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn operator(&self) -> &ForwardOperator {
        &self.operator
    }

    pub fn squared_residual(&self, model: &SourceModel) -> Result<f64> {
        model.ensure_subsonic(self.operator.config())?;
        self.operator.squared_residual(model, &self.data)
    }
}

impl LogLikelihood for GaussianLikelihood {
    fn log_likelihood(&self, model: &SourceModel) -> f64 {
        if !max_speed(model, self.operator.config()).subsonic {
            return f64::NEG_INFINITY;
        }
        match self.operator.squared_residual(model, &self.data) {
            Ok(r2) => gaussian_log_likelihood(r2, self.beta),
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

pub fn gaussian_log_likelihood(squared_residual: f64, beta: f64) -> f64 {
    -0.5 * beta * squared_residual
}

/// Likelihood that ignores the data; the posterior is then the prior.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatLikelihood;

impl LogLikelihood for FlatLikelihood {
    fn log_likelihood(&self, _model: &SourceModel) -> f64 {
        0.0
    }
}

impl<F> LogLikelihood for F
where
    F: Fn(&SourceModel) -> f64 + Sync,
{
    fn log_likelihood(&self, model: &SourceModel) -> f64 {
        self(model)
    }
}

use nalgebra::DVector;

use super::prior::GaussianProcessPrior;
use crate::error::{Error, Result};

/// A linear functional of the grid values, `L[f] = sum_i w_i f(t_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunctional {
    weights: Vec<f64>,
}

/// A functional applied to the current moments of a prior.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalEvaluation {
    /// `L[k(., t_i)]` at every grid point.
    pub l_of_k: Vec<f64>,
    /// `L^2[k]`, the functional applied to both kernel arguments.
    pub l2_of_k: f64,
    /// `L[m]`.
    pub l_of_m: f64,
}

impl GridFunctional {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().all(|&w| w == 0.0) {
            return Err(Error::InvalidArgument("functional has no nonzero weight".into()));
        }
        Ok(Self { weights })
    }

    /// `L[f] = f(t_last) - f(t_first)`: a closed trajectory when the grid
    /// spans the whole emission interval.
    pub fn closed_curve(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("closed-curve functional needs 2+ grid points".into()));
        }
        let mut w = vec![0.0; n];
        w[0] = -1.0;
        w[n - 1] = 1.0;
        Self::new(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn apply(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn evaluate_on(&self, prior: &GaussianProcessPrior) -> Result<FunctionalEvaluation> {
        if self.weights.len() != prior.len() {
            return Err(Error::DimensionMismatch {
                expected: prior.len(),
                found: self.weights.len(),
            });
        }
        let w = DVector::from_column_slice(&self.weights);
        let kw = prior.gram() * &w;
        Ok(FunctionalEvaluation {
            l2_of_k: w.dot(&kw),
            l_of_k: kw.iter().copied().collect(),
            l_of_m: w.dot(prior.mean()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::SeKernel;
    use crate::wavefield::uniform_grid;
    use approx::assert_relative_eq;

    #[test]
    fn closed_curve_matches_kernel_formula() {
        let k = SeKernel::new(1.2, 4.0).unwrap();
        let t0 = 35.0;
        let grid = uniform_grid(0.0, t0, 71);
        let p = GaussianProcessPrior::build(grid.clone(), |_| 0.0, &k).unwrap();
        let ev = GridFunctional::closed_curve(71).unwrap().evaluate_on(&p).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            assert_relative_eq!(ev.l_of_k[i], k.eval(t0, t) - k.eval(0.0, t), epsilon = 1e-14);
        }
        let l2 = k.eval(t0, t0) - 2.0 * k.eval(0.0, t0) + k.eval(0.0, 0.0);
        assert_relative_eq!(ev.l2_of_k, l2, epsilon = 1e-14);
        // l << T0: k(0, T0) ~ 0, so L^2[k] ~ 2 kappa^2
        assert_relative_eq!(ev.l2_of_k, 2.0 * 1.44, max_relative = 1e-9);
        assert_eq!(ev.l_of_m, 0.0);
    }

    #[test]
    fn rejects_empty() {
        assert!(GridFunctional::new(vec![0.0, 0.0]).is_err());
        assert!(GridFunctional::closed_curve(1).is_err());
    }
}

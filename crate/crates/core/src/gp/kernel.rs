use crate::error::{Error, Result};

/// Squared-exponential covariance `kappa^2 exp(-(t - t')^2 / (2 l^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeKernel {
    magnitude: f64,
    length: f64,
}

impl SeKernel {
    pub fn new(magnitude: f64, length: f64) -> Result<Self> {
        if !(magnitude > 0.0 && length > 0.0 && magnitude.is_finite() && length.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "SE kernel needs kappa > 0 and l > 0, got kappa = {magnitude}, l = {length}"
            )));
        }
        Ok(Self { magnitude, length })
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn variance(&self) -> f64 {
        self.magnitude * self.magnitude
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        se_kernel(t, s, self.magnitude, self.length)
    }
}

pub fn se_kernel(t: f64, s: f64, magnitude: f64, length: f64) -> f64 {
    let d = t - s;
    magnitude * magnitude * (-d * d / (2.0 * length * length)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn diagonal_is_variance() {
        assert_eq!(se_kernel(3.0, 3.0, 1.0, 0.7), 1.0);
        assert_eq!(SeKernel::new(1.2, 4.0).unwrap().eval(1.0, 1.0), 1.2 * 1.2);
    }

    #[test]
    fn known_value() {
        assert_relative_eq!(se_kernel(0.0, 2.0, 1.0, 2.0), (-0.5f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(se_kernel(0.0, 2.0, 1.0, 2.0), 0.606_530_659_712_633_4, max_relative = 1e-14);
    }

    #[test]
    fn rejects_nonpositive_hyperparameters() {
        assert!(SeKernel::new(0.0, 1.0).is_err());
        assert!(SeKernel::new(1.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(a in -50.0f64..50.0, b in -50.0f64..50.0,
                                 kappa in 0.1f64..3.0, l in 0.1f64..20.0) {
            let k = SeKernel::new(kappa, l).unwrap();
            prop_assert_eq!(k.eval(a, b), k.eval(b, a));
            prop_assert!(k.eval(a, b) <= kappa * kappa);
            prop_assert!(k.eval(a, b) >= 0.0);
        }
    }
}

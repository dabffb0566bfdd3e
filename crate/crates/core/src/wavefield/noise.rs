use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::forward::FieldMatrix;
use super::sensors::SensorArray;
use crate::error::{Error, Result};

/// Field samples at every sensor and measurement time.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub times: Vec<f64>,
    pub sensors: SensorArray,
    pub field: FieldMatrix,
    /// Relative noise level that was applied, 0 for clean data.
    pub noise_level: f64,
}

impl MeasurementSet {
    pub fn new(times: Vec<f64>, sensors: SensorArray, field: FieldMatrix) -> Result<Self> {
        if field.rows() != sensors.len() || field.cols() != times.len() {
            return Err(Error::DimensionMismatch {
                expected: sensors.len() * times.len(),
                found: field.rows() * field.cols(),
            });
        }
        if !field.is_finite() {
            return Err(Error::InvalidArgument("field contains non-finite values".into()));
        }
        Ok(Self {
            times,
            sensors,
            field,
            noise_level: 0.0,
        })
    }

    /// Per-time noise standard deviations
    /// `sigma_l = alpha sqrt(A / N_s * sum_i u(x_i, t_l)^2)`.
    pub fn noise_sigmas(&self, alpha: f64) -> Vec<f64> {
        let n_s = self.sensors.len() as f64;
        let scale = self.sensors.area() / n_s;
        (0..self.times.len())
            .map(|l| {
                let energy: f64 = (0..self.field.rows())
                    .map(|i| self.field.get(i, l).powi(2))
                    .sum();
                alpha * (scale * energy).sqrt()
            })
            .collect()
    }
}

/// Adds time-dependent noise that is shared by all sensors: at each
/// measurement time one draw `eps_l ~ N(0, sigma_l^2)` is added to every
/// sensor's value.
pub fn add_noise<R: Rng + ?Sized>(
    measurements: &MeasurementSet,
    alpha: f64,
    rng: &mut R,
) -> Result<MeasurementSet> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise level must be >= 0, got {alpha}")));
    }
    let mut out = measurements.clone();
    out.noise_level = alpha;
    if alpha == 0.0 {
        return Ok(out);
    }
    let standard = Normal::new(0.0, 1.0).expect("unit normal");
    for (l, sigma) in measurements.noise_sigmas(alpha).into_iter().enumerate() {
        let eps = sigma * standard.sample(rng);
        for i in 0..out.field.rows() {
            let v = out.field.get(i, l);
            out.field.set(i, l, v + eps);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefield::sensors::Region;
    use crate::wavefield::source::Vec3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(field: Vec<f64>) -> MeasurementSet {
        let sensors = SensorArray::new(
            vec![Vec3::new(0.0, 0.0, 3.0), Vec3::new(3.0, 0.0, 0.0)],
            3.0,
            Region::Hemisphere,
        )
        .unwrap();
        MeasurementSet::new(
            vec![0.0, 1.0, 2.0],
            sensors,
            FieldMatrix::from_vec(2, 3, field).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_alpha_is_identity() {
        let m = set(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = add_noise(&m, 0.0, &mut rng).unwrap();
        assert_eq!(n.field, m.field);
    }

    #[test]
    fn zero_field_stays_zero() {
        let m = set(vec![0.0; 6]);
        assert!(m.noise_sigmas(0.5).iter().all(|&s| s == 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = add_noise(&m, 0.5, &mut rng).unwrap();
        assert!(n.field.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn noise_is_shared_across_sensors() {
        let m = set(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = add_noise(&m, 0.25, &mut rng).unwrap();
        for l in 0..3 {
            let e0 = n.field.get(0, l) - m.field.get(0, l);
            let e1 = n.field.get(1, l) - m.field.get(1, l);
            assert!((e0 - e1).abs() < 1e-15);
            assert!(e0 != 0.0);
        }
        assert_eq!(n.noise_level, 0.25);
    }

    #[test]
    fn sigma_uses_surface_quadrature() {
        let m = set(vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let area = 18.0 * std::f64::consts::PI;
        let s = m.noise_sigmas(0.1);
        assert!((s[0] - 0.1 * (area / 2.0 * 2.0).sqrt()).abs() < 1e-12);
        assert_eq!(s[1], 0.0);
    }

    #[test]
    fn negative_alpha_rejected() {
        let m = set(vec![0.0; 6]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(add_noise(&m, -0.1, &mut rng).is_err());
    }
}

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::wavefield::{Region, SensorArray, Vec3};

/// `(sqrt(5) - 1) / 2`.
const GOLDEN_FRACTION: f64 = 0.618_033_988_749_894_9;

/// Deterministic, approximately uniform sensors on a spherical region.
///
/// Fibonacci lattice restricted to the region: heights `z / R` are spaced
/// uniformly on `(0, 1)` (uniform in area for a spherical zone) and azimuths
/// advance by the golden fraction of the region's azimuthal range. A single
/// sensor sits at the region's pole: `(0, 0, R)` for the hemisphere and
/// `(0, R, R) / sqrt(2)` for the quarter sphere.
pub fn sphere_sensors(n: usize, radius: f64, region: Region) -> Result<SensorArray> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sensor".into()));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let span = match region {
        Region::Hemisphere => 2.0 * PI,
        Region::QuarterSphere => PI,
        Region::Custom { .. } => {
            return Err(Error::InvalidArgument(
                "sphere_sensors generates hemisphere or quarter-sphere layouts only".into(),
            ))
        }
    };
    if n == 1 {
        let p = match region {
            Region::Hemisphere => Vec3::new(0.0, 0.0, radius),
            _ => Vec3::new(0.0, radius * FRAC_1_SQRT_2, radius * FRAC_1_SQRT_2),
        };
        return SensorArray::new(vec![p], radius, region);
    }
    let positions = (0..n)
        .map(|i| {
            let z = (i as f64 + 0.5) / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = span * ((i as f64 + 0.5) * GOLDEN_FRACTION).fract();
            Vec3::new(radius * rho * phi.cos(), radius * rho * phi.sin(), radius * z)
        })
        .collect();
    SensorArray::new(positions, radius, region)
}

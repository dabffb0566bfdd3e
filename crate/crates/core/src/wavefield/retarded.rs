//! Pointwise retarded-potential evaluation.
//!
//! The emission time `tau` seen by a sensor `x` at time `t` solves
//! `c (t - tau) = |x - p(tau)|`. For subsonic sources the left side minus the
//! right side is strictly decreasing in `tau`, so the root is unique and can
//! be bracketed in `(-inf, t]`.

use std::f64::consts::PI;

use super::config::PhysicalConfig;
use super::source::{PointSource, Vec3};
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;

/// Relative distance (to the sensor norm, floored at 1) below which the
/// field is considered singular.
pub const NEAR_FIELD_REL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetardedTime {
    pub tau: f64,
    /// `|c (t - tau) - |x - p(tau)||` at the returned `tau`.
    pub residual: f64,
    pub iterations: usize,
    /// The signal emitted at `t = 0` has not reached the sensor yet
    /// (`tau < 0`); the field there is zero.
    pub pre_wavefront: bool,
}

/// Solves for the emission time of the signal reaching `sensor` at time `t`.
///
/// Starts from the fixed-point iterate `t - |x - p(t)| / c` and runs Newton
/// steps on `g(tau) = c (t - tau) - |x - p(tau)|` (whose derivative is minus
/// the Doppler factor), falling back to bisection whenever a step leaves the
/// current bracket. Converged when the update is below
/// [`PhysicalConfig::time_tolerance`].
pub fn retarded_time<S: PointSource + ?Sized>(
    sensor: &Vec3,
    t: f64,
    source: &S,
    cfg: &PhysicalConfig,
) -> Result<RetardedTime> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("observation time must be >= 0, got {t}")));
    }
    let c = cfg.wave_speed;
    let tol = cfg.time_tolerance();
    let g = |tau: f64| c * (t - tau) - (sensor - source.position(tau)).norm();

    let mut hi = t;
    let g_hi = g(hi);
    if g_hi == 0.0 {
        return Ok(RetardedTime {
            tau: t,
            residual: 0.0,
            iterations: 0,
            pre_wavefront: false,
        });
    }

    let mut tau = t - (sensor - source.position(t)).norm() / c;
    let mut lo = tau;
    let mut width = t - lo;
    let mut expansions = 0;
    while g(lo) < 0.0 {
        width *= 2.0;
        lo = t - width;
        expansions += 1;
        if expansions > 64 {
            return Err(Error::SolverFailure {
                iterations: 0,
                residual: g(lo).abs(),
            });
        }
    }

    let mut residual = f64::INFINITY;
    for iteration in 1..=MAX_ITERATIONS {
        let d = sensor - source.position(tau);
        let r = d.norm();
        let gv = c * (t - tau) - r;
        residual = gv.abs();
        if gv > 0.0 {
            lo = tau;
        } else {
            hi = tau;
        }
        let h = if r > 0.0 {
            c - d.dot(&source.velocity(tau)) / r
        } else {
            c
        };
        if gv == 0.0 {
            return Ok(RetardedTime {
                tau,
                residual: 0.0,
                iterations: iteration,
                pre_wavefront: tau < 0.0,
            });
        }
        let mut next = tau + gv / h;
        let newton = next.is_finite() && next >= lo && next <= hi;
        if !newton {
            next = 0.5 * (lo + hi);
        }
        let step = (next - tau).abs();
        tau = next;
        if (newton && step <= tol) || hi - lo <= tol {
            let residual = g(tau).abs();
            return Ok(RetardedTime {
                tau,
                residual,
                iterations: iteration,
                pre_wavefront: tau < 0.0,
            });
        }
    }
    Err(Error::SolverFailure {
        iterations: MAX_ITERATIONS,
        residual,
    })
}

pub(crate) fn near_field_threshold(sensor: &Vec3) -> f64 {
    NEAR_FIELD_REL * sensor.norm().max(1.0)
}

/// Field radiated by a single source, `(c / 4 pi) q(tau) / (|x - p(tau)| h)`,
/// or zero before the first wavefront arrives.
pub fn evaluate_source<S: PointSource + ?Sized>(
    source: &S,
    sensor: &Vec3,
    t: f64,
    cfg: &PhysicalConfig,
) -> Result<f64> {
    let c = cfg.wave_speed;
    if (sensor - source.position(0.0)).norm() >= c * t {
        return Ok(0.0);
    }
    let rt = retarded_time(sensor, t, source, cfg)?;
    if rt.pre_wavefront {
        return Ok(0.0);
    }
    let tau = rt.tau;
    let d = sensor - source.position(tau);
    let r = d.norm();
    let threshold = near_field_threshold(sensor);
    if r < threshold {
        return Err(Error::NearField {
            distance: r,
            threshold,
        });
    }
    let h = c - d.dot(&source.velocity(tau)) / r;
    Ok(c / (4.0 * PI) * source.intensity(tau) / (r * h))
}

/// Superposed field of all `sources` at `(t, sensor)`.
pub fn evaluate_field<S: PointSource>(
    sources: &[S],
    sensor: &Vec3,
    t: f64,
    cfg: &PhysicalConfig,
) -> Result<f64> {
    sources
        .iter()
        .map(|s| evaluate_source(s, sensor, t, cfg))
        .sum()
}

//! The four benchmark configurations.
//!
//! | case | trajectory | intensity | sensors | `[0, T]`, `[0, T0]` | kappa, l |
//! |------|------------|-----------|---------|---------------------|----------|
//! | 1 | straight line, speed 0.15 | 1 | 424, hemisphere | 20, 15 | 1, 15 (also 2, 4) |
//! | 2 | circular arc | quartic | 424, hemisphere | 20, 15 | 1, 5 |
//! | 3 | closed bow curve | quartic | 424 hemisphere or 213 quarter | 40, 35 | 1.2, 4 |
//! | 4 | two sources | 1, 1 | 424, hemisphere | 20, 15 | 1, 5 |

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::sensors::sphere_sensors;
use crate::error::{Error, Result};
use crate::gp::{GaussianProcessPrior, GridFunctional, SeKernel};
use crate::inference::{ModelPrior, SourcePrior};
use crate::rng::{stream_rng, NOISE_STREAM};
use crate::wavefield::{
    add_noise, forward_map, uniform_grid, MeasurementSet, PhysicalConfig, PointSource, Region,
    SensorArray, Source, SourceModel, Vec3,
};

pub const SENSOR_RADIUS: f64 = 3.0;
pub const HEMISPHERE_SENSORS: usize = 424;
pub const QUARTER_SENSORS: usize = 213;
pub const DEFAULT_LATENT_POINTS: usize = 100;
pub const DEFAULT_MEASUREMENT_POINTS: usize = 50;
/// Truth functions are sampled this many times finer than the latent grid
/// when generating data.
pub const TRUTH_REFINEMENT: usize = 4;

/// Closed-form trajectories.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trajectory {
    /// `(v_x t, v_y t, 0)`.
    Line { vx: f64, vy: f64 },
    /// `(cos(0.3 t) - 1, sin(0.3 t), 0)`.
    Arc,
    /// Closed curve with three-fold inner loop, period `T0`.
    Bow,
    /// `(16 s^3 - 24 s^2 + 5 s, 3 s (1 - s), 0)` with `s = t / T0`.
    Cubic,
    /// `(1.5 cos(0.25 t), -1.5 sin(0.25 t), 0)`.
    Circle,
}

/// Closed-form intensities on `[0, T0]`, zero afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Intensity {
    Constant(f64),
    /// `-28.44 s^4 + 56.89 s^3 - 39.11 s^2 + 10.67 s` with `s = t / T0`.
    Quartic,
}

/// A source given by formulas, active on `[0, T0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticSource {
    pub trajectory: Trajectory,
    pub intensity: Intensity,
    pub turn_off_time: f64,
}

impl AnalyticSource {
    fn position_unclamped(&self, t: f64) -> (f64, f64) {
        let t0 = self.turn_off_time;
        let s = t / t0;
        match self.trajectory {
            Trajectory::Line { vx, vy } => (vx * t, vy * t),
            Trajectory::Arc => ((0.3 * t).cos() - 1.0, (0.3 * t).sin()),
            Trajectory::Bow => {
                let a = 2.0 * PI * s + 1.5 * PI;
                let b = 6.0 * PI * s;
                (
                    1.6 * a.sin() + 16.0 / 15.0 * b.cos(),
                    1.6 * a.cos() + 16.0 / 15.0 * b.sin(),
                )
            }
            Trajectory::Cubic => (16.0 * s.powi(3) - 24.0 * s * s + 5.0 * s, 3.0 * s * (1.0 - s)),
            Trajectory::Circle => (1.5 * (0.25 * t).cos(), -1.5 * (0.25 * t).sin()),
        }
    }

    fn velocity_unclamped(&self, t: f64) -> (f64, f64) {
        let t0 = self.turn_off_time;
        let s = t / t0;
        match self.trajectory {
            Trajectory::Line { vx, vy } => (vx, vy),
            Trajectory::Arc => (-0.3 * (0.3 * t).sin(), 0.3 * (0.3 * t).cos()),
            Trajectory::Bow => {
                let a = 2.0 * PI * s + 1.5 * PI;
                let b = 6.0 * PI * s;
                let (da, db) = (2.0 * PI / t0, 6.0 * PI / t0);
                (
                    1.6 * da * a.cos() - 16.0 / 15.0 * db * b.sin(),
                    -1.6 * da * a.sin() + 16.0 / 15.0 * db * b.cos(),
                )
            }
            Trajectory::Cubic => (
                (48.0 * s * s - 48.0 * s + 5.0) / t0,
                3.0 * (1.0 - 2.0 * s) / t0,
            ),
            Trajectory::Circle => (-0.375 * (0.25 * t).sin(), -0.375 * (0.25 * t).cos()),
        }
    }
}

impl PointSource for AnalyticSource {
    fn position(&self, t: f64) -> Vec3 {
        let (x, y) = self.position_unclamped(t.clamp(0.0, self.turn_off_time));
        Vec3::new(x, y, 0.0)
    }

    fn velocity(&self, t: f64) -> Vec3 {
        if !(0.0..=self.turn_off_time).contains(&t) {
            return Vec3::zeros();
        }
        let (vx, vy) = self.velocity_unclamped(t);
        Vec3::new(vx, vy, 0.0)
    }

    fn intensity(&self, t: f64) -> f64 {
        if !(0.0..=self.turn_off_time).contains(&t) {
            return 0.0;
        }
        match self.intensity {
            Intensity::Constant(q) => q,
            Intensity::Quartic => {
                let s = t / self.turn_off_time;
                s * (10.67 + s * (-39.11 + s * (56.89 - 28.44 * s)))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub kappa_p: f64,
    pub ell_p: f64,
    pub kappa_q: f64,
    pub ell_q: f64,
    pub beta: f64,
    pub delta: f64,
}

/// Field-level adjustments to a built-in case. Unset fields keep the
/// case defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseOverrides {
    pub wave_speed: Option<f64>,
    pub final_time: Option<f64>,
    pub turn_off_time: Option<f64>,
    /// Case 1 velocity `(v_x, v_y)`.
    pub velocity: Option<[f64; 2]>,
    pub latent_points: Option<usize>,
    pub measurement_points: Option<usize>,
    pub n_sensors: Option<usize>,
    pub quarter_sphere: Option<bool>,
    /// Sets both trajectory and intensity correlation lengths.
    pub ell: Option<f64>,
    /// Sets both trajectory and intensity magnitudes.
    pub kappa: Option<f64>,
    pub ell_p: Option<f64>,
    pub kappa_p: Option<f64>,
    pub ell_q: Option<f64>,
    pub kappa_q: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub noise_level: Option<f64>,
    pub closed_curve: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub case_id: u32,
    pub cfg: PhysicalConfig,
    pub truth: Vec<AnalyticSource>,
    pub sensors: SensorArray,
    pub times: Vec<f64>,
    pub latent_grid: Vec<f64>,
    pub hyper: Hyperparameters,
    pub noise_level: f64,
    pub closed_curve: bool,
}

/// Builds a benchmark case with optional overrides.
pub fn build_case(id: u32, overrides: &CaseOverrides) -> Result<Scenario> {
    let (final_time, turn_off, kappa, ell) = match id {
        1 => (20.0, 15.0, 1.0, 15.0),
        2 | 4 => (20.0, 15.0, 1.0, 5.0),
        3 => (40.0, 35.0, 1.2, 4.0),
        _ => return Err(Error::UnknownCase(id)),
    };
    let o = overrides;
    let cfg = PhysicalConfig::new(
        o.wave_speed.unwrap_or(1.0),
        o.final_time.unwrap_or(final_time),
        o.turn_off_time.unwrap_or(turn_off),
    )?;
    let t0 = cfg.turn_off_time;
    let source = |trajectory, intensity| AnalyticSource {
        trajectory,
        intensity,
        turn_off_time: t0,
    };
    let truth = match id {
        1 => {
            let [vx, vy] = o.velocity.unwrap_or([0.15, 0.0]);
            vec![source(Trajectory::Line { vx, vy }, Intensity::Constant(1.0))]
        }
        2 => vec![source(Trajectory::Arc, Intensity::Quartic)],
        3 => vec![source(Trajectory::Bow, Intensity::Quartic)],
        _ => vec![
            source(Trajectory::Cubic, Intensity::Constant(1.0)),
            source(Trajectory::Circle, Intensity::Constant(1.0)),
        ],
    };

    let quarter = o.quarter_sphere.unwrap_or(false);
    let (region, default_sensors) = if quarter {
        (Region::QuarterSphere, QUARTER_SENSORS)
    } else {
        (Region::Hemisphere, HEMISPHERE_SENSORS)
    };
    let sensors = sphere_sensors(o.n_sensors.unwrap_or(default_sensors), SENSOR_RADIUS, region)?;

    let n_t = o.measurement_points.unwrap_or(DEFAULT_MEASUREMENT_POINTS);
    let m = o.latent_points.unwrap_or(DEFAULT_LATENT_POINTS);
    if n_t < 2 || m < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 latent and 2 measurement points".into(),
        ));
    }
    let hyper = Hyperparameters {
        kappa_p: o.kappa_p.or(o.kappa).unwrap_or(kappa),
        ell_p: o.ell_p.or(o.ell).unwrap_or(ell),
        kappa_q: o.kappa_q.or(o.kappa).unwrap_or(kappa),
        ell_q: o.ell_q.or(o.ell).unwrap_or(ell),
        beta: o.beta.unwrap_or(100.0),
        delta: o.delta.unwrap_or(0.0025),
    };
    let scenario = Scenario {
        case_id: id,
        cfg,
        truth,
        times: uniform_grid(0.0, cfg.final_time, n_t),
        latent_grid: uniform_grid(0.0, t0, m),
        sensors,
        hyper,
        noise_level: o.noise_level.unwrap_or(0.0),
        closed_curve: o.closed_curve.unwrap_or(false),
    };
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    pub fn name(&self) -> String {
        format!("case{}", self.case_id)
    }

    fn validate(&self) -> Result<()> {
        if !(self.noise_level >= 0.0) {
            return Err(Error::InvalidArgument("noise level must be >= 0".into()));
        }
        SeKernel::new(self.hyper.kappa_p, self.hyper.ell_p)?;
        SeKernel::new(self.hyper.kappa_q, self.hyper.ell_q)?;
        if !(self.hyper.beta > 0.0) {
            return Err(Error::InvalidArgument("beta must be positive".into()));
        }
        if !(self.hyper.delta > 0.0 && self.hyper.delta <= 0.5) {
            return Err(Error::InvalidArgument("delta must lie in (0, 1/2]".into()));
        }
        self.truth_on_grid(&self.latent_grid)?.ensure_subsonic(&self.cfg)?;
        let max_range = self
            .sensors
            .positions()
            .iter()
            .flat_map(|x| {
                self.latent_grid
                    .iter()
                    .flat_map(move |&t| self.truth.iter().map(move |s| (x - s.position(t)).norm()))
            })
            .fold(0.0, f64::max);
        self.cfg.check_timing(max_range);
        Ok(())
    }

    /// Truth sampled on an arbitrary emission grid.
    pub fn truth_on_grid(&self, grid: &[f64]) -> Result<SourceModel> {
        SourceModel::new(
            self.truth
                .iter()
                .map(|s| Source::sample(s, grid))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Truth on the refined data-generation grid.
    pub fn truth_model(&self) -> Result<SourceModel> {
        let m = self.latent_grid.len();
        let fine = uniform_grid(0.0, self.cfg.turn_off_time, TRUTH_REFINEMENT * (m - 1) + 1);
        self.truth_on_grid(&fine)
    }

    pub fn clean_measurements(&self) -> Result<MeasurementSet> {
        let field = forward_map(&self.truth_model()?, &self.sensors, &self.times, &self.cfg)?;
        MeasurementSet::new(self.times.clone(), self.sensors.clone(), field)
    }

    /// Clean data plus shared-per-time noise at the scenario's noise level,
    /// drawn from the noise stream of `seed`.
    pub fn measurements(&self, seed: u64) -> Result<MeasurementSet> {
        let clean = self.clean_measurements()?;
        let mut rng = stream_rng(seed, NOISE_STREAM, 0);
        add_noise(&clean, self.noise_level, &mut rng)
    }

    /// Independent zero-mean SE priors on `p_x`, `p_y`, `q` for every truth
    /// source; with `closed_curve` the trajectory priors are conditioned on
    /// `p(T0) - p(0) = 0`.
    pub fn priors(&self) -> Result<ModelPrior> {
        let h = &self.hyper;
        let kp = SeKernel::new(h.kappa_p, h.ell_p)?;
        let kq = SeKernel::new(h.kappa_q, h.ell_q)?;
        let mut p = GaussianProcessPrior::build(self.latent_grid.clone(), |_| 0.0, &kp)?;
        if self.closed_curve {
            p = p.condition_on_functional(&GridFunctional::closed_curve(self.latent_grid.len())?, 0.0)?;
        }
        let p = Arc::new(p);
        let q = Arc::new(GaussianProcessPrior::build(self.latent_grid.clone(), |_| 0.0, &kq)?);
        ModelPrior::new(
            self.truth
                .iter()
                .map(|_| SourcePrior::new(p.clone(), p.clone(), q.clone()))
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

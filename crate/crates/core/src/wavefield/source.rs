use nalgebra::Vector3;

use super::config::PhysicalConfig;
use super::sampled::{Extrapolation, SampledFunction};
use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Anything that can be queried for a position, velocity and intensity at
/// an emission time. Trajectories live in the `z = 0` plane.
pub trait PointSource {
    fn position(&self, t: f64) -> Vec3;
    fn velocity(&self, t: f64) -> Vec3;
    fn intensity(&self, t: f64) -> f64;
}

/// A moving source whose trajectory and intensity are sampled on a common
/// emission grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    x: SampledFunction,
    y: SampledFunction,
    intensity: SampledFunction,
}

impl Source {
    pub fn new(x: SampledFunction, y: SampledFunction, intensity: SampledFunction) -> Result<Self> {
        if x.grid() != y.grid() || x.grid() != intensity.grid() {
            return Err(Error::GridMismatch(
                "trajectory and intensity must share one emission grid".into(),
            ));
        }
        Ok(Self { x, y, intensity })
    }

    /// Builds a source from raw values on `grid`, using clamped
    /// extrapolation for the trajectory and zero for the intensity.
    pub fn from_values(grid: Vec<f64>, x: Vec<f64>, y: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        Self::new(
            SampledFunction::new(grid.clone(), x, Extrapolation::Clamp)?,
            SampledFunction::new(grid.clone(), y, Extrapolation::Clamp)?,
            SampledFunction::new(grid, q, Extrapolation::Zero)?,
        )
    }

    /// Samples an arbitrary source onto `grid`.
    pub fn sample<S: PointSource + ?Sized>(source: &S, grid: &[f64]) -> Result<Self> {
        let pos: Vec<Vec3> = grid.iter().map(|&t| source.position(t)).collect();
        Self::from_values(
            grid.to_vec(),
            pos.iter().map(|p| p.x).collect(),
            pos.iter().map(|p| p.y).collect(),
            grid.iter().map(|&t| source.intensity(t)).collect(),
        )
    }

    pub fn x(&self) -> &SampledFunction {
        &self.x
    }

    pub fn y(&self) -> &SampledFunction {
        &self.y
    }

    pub fn q(&self) -> &SampledFunction {
        &self.intensity
    }

    pub fn grid(&self) -> &[f64] {
        self.x.grid()
    }

    /// Largest finite-difference speed over the grid segments.
    pub fn max_speed(&self) -> f64 {
        let g = self.grid();
        let (xs, ys) = (self.x.values(), self.y.values());
        (0..g.len() - 1)
            .map(|k| {
                let dt = g[k + 1] - g[k];
                let vx = (xs[k + 1] - xs[k]) / dt;
                let vy = (ys[k + 1] - ys[k]) / dt;
                vx.hypot(vy)
            })
            .fold(0.0, f64::max)
    }
}

impl PointSource for Source {
    fn position(&self, t: f64) -> Vec3 {
        Vec3::new(self.x.eval(t), self.y.eval(t), 0.0)
    }

    fn velocity(&self, t: f64) -> Vec3 {
        Vec3::new(self.x.slope(t), self.y.slope(t), 0.0)
    }

    fn intensity(&self, t: f64) -> f64 {
        self.intensity.eval(t)
    }
}

/// One or more simultaneously radiating sources sharing an emission grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModel {
    sources: Vec<Source>,
}

impl SourceModel {
    pub fn new(sources: Vec<Source>) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::InvalidArgument("source model needs at least one source".into()));
        }
        if sources.iter().any(|s| s.grid() != sources[0].grid()) {
            return Err(Error::GridMismatch("all sources must share one emission grid".into()));
        }
        Ok(Self { sources })
    }

    pub fn single(source: Source) -> Self {
        Self {
            sources: vec![source],
        }
    }

    pub fn sources(&self) -> &[Source] {
        &self.sources
    }

    pub fn grid(&self) -> &[f64] {
        self.sources[0].grid()
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    /// Fails with [`Error::Supersonic`] unless every source is subsonic.
    pub fn ensure_subsonic(&self, cfg: &PhysicalConfig) -> Result<()> {
        let check = max_speed(self, cfg);
        if check.subsonic {
            Ok(())
        } else {
            Err(Error::Supersonic {
                speed: check.max_speed,
                wave_speed: cfg.wave_speed,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedCheck {
    pub max_speed: f64,
    pub subsonic: bool,
}

/// Maximum finite-difference speed over all sources and grid segments, and
/// whether it stays strictly below the wave speed.
pub fn max_speed(model: &SourceModel, cfg: &PhysicalConfig) -> SpeedCheck {
    let max_speed = model
        .sources()
        .iter()
        .map(Source::max_speed)
        .fold(0.0, f64::max);
    SpeedCheck {
        max_speed,
        subsonic: max_speed < cfg.wave_speed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefield::sampled::uniform_grid;
    use approx::assert_relative_eq;

    fn cfg() -> PhysicalConfig {
        PhysicalConfig::new(1.0, 20.0, 15.0).unwrap()
    }

    fn line(vx: f64, vy: f64) -> SourceModel {
        let g = uniform_grid(0.0, 15.0, 31);
        let s = Source::from_values(
            g.clone(),
            g.iter().map(|t| vx * t).collect(),
            g.iter().map(|t| vy * t).collect(),
            vec![1.0; g.len()],
        )
        .unwrap();
        SourceModel::single(s)
    }

    #[test]
    fn line_speed_is_subsonic() {
        let c = max_speed(&line(0.15, 0.0), &cfg());
        assert_relative_eq!(c.max_speed, 0.15, epsilon = 1e-12);
        assert!(c.subsonic);
    }

    #[test]
    fn stationary_has_zero_speed() {
        let c = max_speed(&line(0.0, 0.0), &cfg());
        assert_eq!(c.max_speed, 0.0);
        assert!(c.subsonic);
    }

    #[test]
    fn supersonic_flagged() {
        let model = line(2.0, 0.0);
        let c = max_speed(&model, &cfg());
        assert_relative_eq!(c.max_speed, 2.0, epsilon = 1e-12);
        assert!(!c.subsonic);
        assert!(matches!(model.ensure_subsonic(&cfg()), Err(Error::Supersonic { .. })));
    }

    #[test]
    fn diagonal_speed_uses_both_components() {
        let c = max_speed(&line(0.3, 0.4), &cfg());
        assert_relative_eq!(c.max_speed, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn model_requires_shared_grid() {
        let a = Source::from_values(vec![0.0, 1.0], vec![0.0; 2], vec![0.0; 2], vec![1.0; 2]).unwrap();
        let b = Source::from_values(vec![0.0, 2.0], vec![0.0; 2], vec![0.0; 2], vec![1.0; 2]).unwrap();
        assert!(SourceModel::new(vec![a, b]).is_err());
        assert!(SourceModel::new(vec![]).is_err());
    }
}

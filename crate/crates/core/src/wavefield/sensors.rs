use std::f64::consts::PI;

use super::source::Vec3;
use crate::error::{Error, Result};

/// Portion of the sphere of radius `R` that carries the sensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// `z > 0`.
    Hemisphere,
    /// `z > 0`, `y > 0`.
    QuarterSphere,
    /// Arbitrary layout with a user-supplied surface area.
    Custom { area: f64 },
}

impl Region {
    pub fn area(&self, radius: f64) -> f64 {
        match *self {
            Region::Hemisphere => 2.0 * PI * radius * radius,
            Region::QuarterSphere => PI * radius * radius,
            Region::Custom { area } => area,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Region::Hemisphere => "hemisphere",
            Region::QuarterSphere => "quarter-sphere",
            Region::Custom { .. } => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorArray {
    positions: Vec<Vec3>,
    radius: f64,
    region: Region,
}

impl SensorArray {
    pub fn new(positions: Vec<Vec3>, radius: f64, region: Region) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidArgument("sensor array is empty".into()));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        if !matches!(region, Region::Custom { .. }) {
            if let Some(p) = positions
                .iter()
                .find(|p| (p.norm() - radius).abs() > 1e-12 * radius)
            {
                return Err(Error::InvalidArgument(format!(
                    "sensor at distance {} from the origin, expected {radius}",
                    p.norm()
                )));
            }
        }
        Ok(Self {
            positions,
            radius,
            region,
        })
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn area(&self) -> f64 {
        self.region.area(self.radius)
    }

    /// Distance below which a sensor counts as sitting on a trajectory.
    pub fn near_field_threshold(&self) -> f64 {
        1e-6 * self.radius
    }
}

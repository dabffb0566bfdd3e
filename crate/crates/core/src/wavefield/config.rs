use crate::error::{Error, Result};

/// Wave speed and timing of a measurement campaign.
///
/// Sources radiate on `[0, turn_off_time]`; sensors record on
/// `[0, final_time]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConfig {
    pub wave_speed: f64,
    pub final_time: f64,
    pub turn_off_time: f64,
}

impl PhysicalConfig {
    pub fn new(wave_speed: f64, final_time: f64, turn_off_time: f64) -> Result<Self> {
        if !(wave_speed > 0.0 && wave_speed.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "wave speed must be positive, got {wave_speed}"
            )));
        }
        if !(turn_off_time > 0.0 && turn_off_time < final_time && final_time.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < T0 < T, got T0 = {turn_off_time}, T = {final_time}"
            )));
        }
        Ok(Self {
            wave_speed,
            final_time,
            turn_off_time,
        })
    }

    /// Tolerance on the retarded time, `1e-12 * max(1, T)`.
    pub fn time_tolerance(&self) -> f64 {
        1e-12 * self.final_time.max(1.0)
    }

    /// Whether the final time leaves room for the last emission to reach the
    /// farthest sensor, given the largest sensor-to-trajectory distance.
    ///
    /// Logs a warning when violated; the data are still usable but the
    /// late-time silence of the field is not observed.
    pub fn check_timing(&self, max_range: f64) -> bool {
        let needed = self.turn_off_time + max_range / self.wave_speed;
        let ok = self.final_time > needed;
        if !ok {
            log::warn!(
                "final time {} does not exceed T0 + max range / c = {needed}",
                self.final_time
            );
        }
        ok
    }
}

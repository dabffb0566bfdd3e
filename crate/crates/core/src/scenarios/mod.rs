//! Sensor layouts, the benchmark cases and reconstruction error metrics.

mod cases;
mod metrics;
mod sensors;

pub use cases::{
    build_case, AnalyticSource, CaseOverrides, Hyperparameters, Intensity, Scenario, Trajectory,
    DEFAULT_LATENT_POINTS, DEFAULT_MEASUREMENT_POINTS, HEMISPHERE_SENSORS, QUARTER_SENSORS,
    SENSOR_RADIUS, TRUTH_REFINEMENT,
};
pub use metrics::{
    intensity_error, model_intensity_error, model_trajectory_error, trajectory_error,
    wavefield_error,
};
pub use sensors::sphere_sensors;

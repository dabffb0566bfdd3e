//! Forward problem: the retarded-potential field of subsonic moving point
//! sources and synthetic sensor data.

mod config;
mod forward;
mod noise;
mod retarded;
mod sampled;
mod sensors;
mod source;

pub use config::PhysicalConfig;
pub use forward::{forward_map, FieldMatrix, ForwardOperator};
pub use noise::{add_noise, MeasurementSet};
pub use retarded::{
    evaluate_field, evaluate_source, retarded_time, RetardedTime, MAX_ITERATIONS, NEAR_FIELD_REL,
};
pub use sampled::{uniform_grid, Extrapolation, SampledFunction};
pub use sensors::{Region, SensorArray};
pub use source::{max_speed, PointSource, Source, SourceModel, SpeedCheck, Vec3};

pub(crate) use sampled::check_grid;

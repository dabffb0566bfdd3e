//! Forward map from a sampled source model to an `N_s x N_t` field matrix.
//!
//! Rather than solving for the retarded time at every measurement, each
//! emission node `tau_k` is pushed forward to its arrival time
//! `t_k = tau_k + |x - p(tau_k)| / c` at every sensor; the field at those
//! arrival times is exact, and values at the measurement times are obtained
//! by linear interpolation between consecutive arrivals. Before the first
//! arrival and after the last one (the turn-off emission) the field is zero.

use std::f64::consts::PI;

use super::config::PhysicalConfig;
use super::sensors::SensorArray;
use super::source::{Source, SourceModel, Vec3};
use crate::error::{Error, Result};

/// Row-major `rows x cols` matrix of field values, one row per sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FieldMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &FieldMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Per-node emission data of one source, precomputed once per model.
struct EmissionNodes {
    tau: Vec<f64>,
    pos: Vec<Vec3>,
    vel: Vec<Vec3>,
    q: Vec<f64>,
}

impl EmissionNodes {
    fn new(source: &Source) -> Self {
        let (x, y) = (source.x(), source.y());
        let (vx, vy) = (x.node_slopes(), y.node_slopes());
        Self {
            tau: source.grid().to_vec(),
            pos: x
                .values()
                .iter()
                .zip(y.values())
                .map(|(&a, &b)| Vec3::new(a, b, 0.0))
                .collect(),
            vel: vx
                .iter()
                .zip(&vy)
                .map(|(&a, &b)| Vec3::new(a, b, 0.0))
                .collect(),
            q: source.q().values().to_vec(),
        }
    }
}

/// Reusable evaluator of the forward map for a fixed sensor array and set
/// of measurement times.
#[derive(Debug, Clone)]
pub struct ForwardOperator {
    sensors: SensorArray,
    times: Vec<f64>,
    cfg: PhysicalConfig,
}

impl ForwardOperator {
    pub fn new(sensors: SensorArray, times: Vec<f64>, cfg: PhysicalConfig) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidArgument("no measurement times".into()));
        }
        if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument(
                "measurement times must be finite and sorted".into(),
            ));
        }
        Ok(Self {
            sensors,
            times,
            cfg,
        })
    }

    pub fn sensors(&self) -> &SensorArray {
        &self.sensors
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn config(&self) -> &PhysicalConfig {
        &self.cfg
    }

    /// Computes each sensor's row into a scratch buffer and hands it to `sink`.
    fn for_each_row(
        &self,
        model: &SourceModel,
        mut sink: impl FnMut(usize, &[f64]),
    ) -> Result<()> {
        let nodes: Vec<EmissionNodes> = model.sources().iter().map(EmissionNodes::new).collect();
        let m = model.grid().len();
        let c = self.cfg.wave_speed;
        let inv_c = 1.0 / c;
        let amp = c / (4.0 * PI);
        let threshold = self.sensors.near_field_threshold();
        let mut row = vec![0.0; self.times.len()];
        let mut arrival = vec![0.0; m];
        let mut value = vec![0.0; m];

        for (i, x) in self.sensors.positions().iter().enumerate() {
            row.iter_mut().for_each(|v| *v = 0.0);
            for src in &nodes {
                for k in 0..m {
                    let d = x - src.pos[k];
                    let r = d.norm();
                    if r < threshold {
                        return Err(Error::NearField {
                            distance: r,
                            threshold,
                        });
                    }
                    arrival[k] = src.tau[k] + r * inv_c;
                    let h = c - d.dot(&src.vel[k]) / r;
                    value[k] = amp * src.q[k] / (r * h);
                }
                if let Some(k) = arrival.windows(2).position(|w| w[1] <= w[0]) {
                    return Err(Error::NonMonotoneObservation { index: k + 1 });
                }
                accumulate_interpolated(&arrival, &value, &self.times, &mut row);
            }
            sink(i, &row);
        }
        Ok(())
    }

    pub fn apply(&self, model: &SourceModel) -> Result<FieldMatrix> {
        let mut out = FieldMatrix::zeros(self.sensors.len(), self.times.len());
        self.for_each_row(model, |i, row| out.row_mut(i).copy_from_slice(row))?;
        Ok(out)
    }

    /// `sum_ij (data_ij - G(model)_ij)^2` without materialising `G(model)`.
    pub fn squared_residual(&self, model: &SourceModel, data: &FieldMatrix) -> Result<f64> {
        if data.rows() != self.sensors.len() || data.cols() != self.times.len() {
            return Err(Error::DimensionMismatch {
                expected: self.sensors.len() * self.times.len(),
                found: data.rows() * data.cols(),
            });
        }
        let mut total = 0.0;
        self.for_each_row(model, |i, row| {
            total += data
                .row(i)
                .iter()
                .zip(row)
                .map(|(u, g)| (u - g) * (u - g))
                .sum::<f64>();
        })?;
        Ok(total)
    }
}

/// Adds the piecewise-linear interpolant through `(arrival, value)` at each
/// of the sorted `times` into `row`; zero outside `[arrival[0], arrival[m-1]]`.
fn accumulate_interpolated(arrival: &[f64], value: &[f64], times: &[f64], row: &mut [f64]) {
    let m = arrival.len();
    let (first, last) = (arrival[0], arrival[m - 1]);
    let start = times.partition_point(|&t| t < first);
    let mut k = 0;
    for (j, &t) in times.iter().enumerate().skip(start) {
        if t > last {
            break;
        }
        while k + 2 < m && arrival[k + 1] < t {
            k += 1;
        }
        let w = (t - arrival[k]) / (arrival[k + 1] - arrival[k]);
        row[j] += value[k] + w * (value[k + 1] - value[k]);
    }
}

/// Field of `model` at every sensor and measurement time.
pub fn forward_map(
    model: &SourceModel,
    sensors: &SensorArray,
    times: &[f64],
    cfg: &PhysicalConfig,
) -> Result<FieldMatrix> {
    ForwardOperator::new(sensors.clone(), times.to_vec(), *cfg)?.apply(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_is_zero_outside_arrivals() {
        let arrival = [1.0, 2.0, 4.0];
        let value = [1.0, 3.0, 5.0];
        let times = [0.0, 0.5, 1.0, 1.5, 3.0, 4.0, 4.5];
        let mut row = [0.0; 7];
        accumulate_interpolated(&arrival, &value, &times, &mut row);
        assert_eq!(row, [0.0, 0.0, 1.0, 2.0, 4.0, 5.0, 0.0]);
    }

    #[test]
    fn field_matrix_shape_checked() {
        assert!(FieldMatrix::from_vec(2, 3, vec![0.0; 5]).is_err());
        let mut f = FieldMatrix::zeros(2, 3);
        f.set(1, 2, -4.0);
        assert_eq!(f.get(1, 2), -4.0);
        assert_eq!(f.row(1), &[0.0, 0.0, -4.0]);
        assert_eq!(f.max_abs(), 4.0);
    }
}

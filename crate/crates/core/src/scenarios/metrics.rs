//! Reconstruction error metrics.

use crate::error::{Error, Result};
use crate::wavefield::{MeasurementSet, PhysicalConfig, Source, SourceModel, forward_map};

fn check_same_grid(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x != y) {
        return Err(Error::GridMismatch(format!(
            "estimate grid has {} points, truth grid has {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

fn rms(squares: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = squares.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 { 0.0 } else { (sum / n as f64).sqrt() }
}

/// RMS over the grid of the Euclidean distance between estimated and true
/// positions.
pub fn trajectory_error(estimate: &Source, truth: &Source) -> Result<f64> {
    check_same_grid(estimate.grid(), truth.grid())?;
    let (ex, ey) = (estimate.x().values(), estimate.y().values());
    let (tx, ty) = (truth.x().values(), truth.y().values());
    Ok(rms((0..ex.len()).map(|i| (ex[i] - tx[i]).powi(2) + (ey[i] - ty[i]).powi(2))))
}

/// RMS over the grid of the intensity difference.
pub fn intensity_error(estimate: &Source, truth: &Source) -> Result<f64> {
    check_same_grid(estimate.grid(), truth.grid())?;
    Ok(rms(
        estimate
            .q()
            .values()
            .iter()
            .zip(truth.q().values())
            .map(|(a, b)| (a - b).powi(2)),
    ))
}

fn paired(estimate: &SourceModel, truth: &SourceModel) -> Result<()> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: estimate.len(),
        });
    }
    Ok(())
}

/// Trajectory error averaged over sources paired by index.
pub fn model_trajectory_error(estimate: &SourceModel, truth: &SourceModel) -> Result<f64> {
    paired(estimate, truth)?;
    let errs = estimate
        .sources()
        .iter()
        .zip(truth.sources())
        .map(|(e, t)| trajectory_error(e, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(errs.iter().sum::<f64>() / errs.len() as f64)
}

/// Intensity error averaged over sources paired by index.
pub fn model_intensity_error(estimate: &SourceModel, truth: &SourceModel) -> Result<f64> {
    paired(estimate, truth)?;
    let errs = estimate
        .sources()
        .iter()
        .zip(truth.sources())
        .map(|(e, t)| intensity_error(e, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(errs.iter().sum::<f64>() / errs.len() as f64)
}

/// RMS over all sensor/time entries of the data minus the estimate's
/// predicted field.
pub fn wavefield_error(estimate: &SourceModel, data: &MeasurementSet, cfg: &PhysicalConfig) -> Result<f64> {
    let predicted = forward_map(estimate, &data.sensors, &data.times, cfg)?;
    Ok(rms(
        predicted
            .as_slice()
            .iter()
            .zip(data.field.as_slice())
            .map(|(p, u)| (u - p).powi(2)),
    ))
}

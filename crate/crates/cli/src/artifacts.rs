//! On-disk artifact formats.
//!
//! Tables are CSV with a one-line header; floats are written in Rust's
//! shortest round-trip form so every value reads back bit-identically.
//! Manifests, checkpoints and diagnostics are JSON.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use wavesrc::wavefield::{FieldMatrix, Region, SensorArray, Source, SourceModel, Vec3};

use crate::error::{CliError, Result};

pub const FORMAT_VERSION: u32 = 1;

pub const SENSORS_FILE: &str = "sensors.csv";
pub const TIMES_FILE: &str = "times.csv";
pub const CLEAN_FIELD_FILE: &str = "field_clean.csv";
pub const NOISY_FIELD_FILE: &str = "field_noisy.csv";
pub const TRUTH_FILE: &str = "truth.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(&tmp, e))?;
    f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::artifact(path, e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_slice(&text).map_err(|e| CliError::artifact(path, e.to_string()))
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::artifact(path, e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::artifact(path, e.to_string()))?;
    write_atomic(path, &bytes)
}

/// Reads a CSV, returning its header and rows parsed as floats.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::artifact(path, e.to_string()))?;
    let header = r
        .headers()
        .map_err(|e| CliError::artifact(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::artifact(path, e.to_string()))?;
        let row = rec
            .iter()
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| CliError::artifact(path, format!("row {}: {e}", line + 2)))?;
        if row.len() != header.len() {
            return Err(CliError::artifact(
                path,
                format!("row {} has {} columns, header has {}", line + 2, row.len(), header.len()),
            ));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

fn expect_columns(path: &Path, header: &[String], expected: &[&str]) -> Result<()> {
    if header.len() < expected.len() || header.iter().zip(expected).any(|(h, e)| h != e) {
        return Err(CliError::artifact(
            path,
            format!("missing columns: expected {expected:?}, found {header:?}"),
        ));
    }
    Ok(())
}

fn f(v: f64) -> String {
    format!("{v}")
}

pub fn write_sensors(path: &Path, sensors: &SensorArray) -> Result<()> {
    let header = ["sensor", "x", "y", "z"].map(String::from).to_vec();
    let rows = sensors
        .positions()
        .iter()
        .enumerate()
        .map(|(i, p)| vec![i.to_string(), f(p.x), f(p.y), f(p.z)])
        .collect::<Vec<_>>();
    write_csv(path, &header, &rows)
}

pub fn read_sensor_positions(path: &Path) -> Result<Vec<Vec3>> {
    let (header, rows) = read_csv(path)?;
    expect_columns(path, &header, &["sensor", "x", "y", "z"])?;
    Ok(rows.iter().map(|r| Vec3::new(r[1], r[2], r[3])).collect())
}

pub fn write_times(path: &Path, times: &[f64]) -> Result<()> {
    let header = ["index", "t"].map(String::from).to_vec();
    let rows = times
        .iter()
        .enumerate()
        .map(|(i, &t)| vec![i.to_string(), f(t)])
        .collect::<Vec<_>>();
    write_csv(path, &header, &rows)
}

pub fn read_times(path: &Path) -> Result<Vec<f64>> {
    let (header, rows) = read_csv(path)?;
    expect_columns(path, &header, &["index", "t"])?;
    Ok(rows.iter().map(|r| r[1]).collect())
}

/// One row per sensor; columns are the measurement times.
pub fn write_field(path: &Path, field: &FieldMatrix, times: &[f64]) -> Result<()> {
    let header = std::iter::once("sensor".to_string())
        .chain(times.iter().map(|t| format!("t={t}")))
        .collect::<Vec<_>>();
    let rows = (0..field.rows())
        .map(|i| {
            std::iter::once(i.to_string())
                .chain(field.row(i).iter().map(|&v| f(v)))
                .collect()
        })
        .collect::<Vec<_>>();
    write_csv(path, &header, &rows)
}

pub fn read_field(path: &Path) -> Result<FieldMatrix> {
    let (header, rows) = read_csv(path)?;
    expect_columns(path, &header, &["sensor"])?;
    let cols = header.len() - 1;
    let data = rows.iter().flat_map(|r| r[1..].to_vec()).collect::<Vec<_>>();
    Ok(FieldMatrix::from_vec(rows.len(), cols, data)?)
}

/// Grid-sampled sources: `source, t, x, y, q`.
pub fn write_model(path: &Path, model: &SourceModel) -> Result<()> {
    let header = ["source", "t", "x", "y", "q"].map(String::from).to_vec();
    let rows = model
        .sources()
        .iter()
        .enumerate()
        .flat_map(|(k, s)| {
            (0..s.grid().len()).map(move |i| {
                vec![
                    k.to_string(),
                    f(s.grid()[i]),
                    f(s.x().values()[i]),
                    f(s.y().values()[i]),
                    f(s.q().values()[i]),
                ]
            })
        })
        .collect::<Vec<_>>();
    write_csv(path, &header, &rows)
}

pub fn read_model(path: &Path) -> Result<SourceModel> {
    let (header, rows) = read_csv(path)?;
    expect_columns(path, &header, &["source", "t", "x", "y", "q"])?;
    if rows.is_empty() {
        return Err(CliError::artifact(path, "no rows"));
    }
    let n_sources = rows.iter().map(|r| r[0] as usize).max().unwrap_or(0) + 1;
    let mut sources = Vec::with_capacity(n_sources);
    for k in 0..n_sources {
        let part: Vec<&Vec<f64>> = rows.iter().filter(|r| r[0] as usize == k).collect();
        let col = |c: usize| part.iter().map(|r| r[c]).collect::<Vec<_>>();
        sources.push(Source::from_values(col(1), col(2), col(3), col(4))?);
    }
    Ok(SourceModel::new(sources)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorGeometry {
    pub region: String,
    pub radius: f64,
    pub area: f64,
}

impl SensorGeometry {
    pub fn of(sensors: &SensorArray) -> Self {
        SensorGeometry {
            region: sensors.region().name().to_string(),
            radius: sensors.radius(),
            area: sensors.area(),
        }
    }

    pub fn region(&self) -> Region {
        match self.region.as_str() {
            "hemisphere" => Region::Hemisphere,
            "quarter-sphere" => Region::QuarterSphere,
            _ => Region::Custom { area: self.area },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingConfig {
    pub wave_speed: f64,
    pub final_time: f64,
    pub turn_off_time: f64,
}

/// Describes a measurement directory written by `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementManifest {
    pub format_version: u32,
    pub kind: String,
    pub scenario: String,
    pub config_sha256: String,
    pub seed: u64,
    pub timing: TimingConfig,
    pub geometry: SensorGeometry,
    pub n_sensors: usize,
    pub n_times: usize,
    pub noise_level: f64,
    /// The field file reconstructions should use.
    pub data_file: String,
    pub files: Vec<String>,
}

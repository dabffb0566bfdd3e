//! The simulate / reconstruct / evaluate commands.

use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wavesrc::inference::{
    averaged_mode, chain_ess, extend_chain, posterior_mean, posterior_mode,
    potential_scale_reduction, run_chain, ChainRecord, ChainSettings, GaussianLikelihood,
    ModelPrior,
};
use wavesrc::scenarios::{
    model_intensity_error, model_trajectory_error, wavefield_error, Scenario,
};
use wavesrc::wavefield::{MeasurementSet, PhysicalConfig, SensorArray, SourceModel};

use crate::artifacts::*;
use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const MEASUREMENTS_FILE: &str = "measurements.csv";
pub const MEAN_FILE: &str = "posterior_mean.csv";
pub const MODE_FILE: &str = "posterior_mode.csv";
pub const AVERAGED_MODE_FILE: &str = "averaged_mode.csv";
pub const TRACES_FILE: &str = "traces.csv";
pub const SAMPLES_FILE: &str = "samples.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn file_names(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn timing(cfg: &PhysicalConfig) -> TimingConfig {
    TimingConfig {
        wave_speed: cfg.wave_speed,
        final_time: cfg.final_time,
        turn_off_time: cfg.turn_off_time,
    }
}

fn physical(t: &TimingConfig) -> Result<PhysicalConfig> {
    Ok(PhysicalConfig::new(t.wave_speed, t.final_time, t.turn_off_time)?)
}

/// Writes sensor positions, measurement times, the clean field, the noisy
/// field when the noise level is positive, the truth on the latent grid and
/// a manifest.
pub fn simulate(config: &RunConfig, out: &Path) -> Result<MeasurementManifest> {
    config.validate_fields()?;
    let scenario = config.scenario()?;
    create_dir(out)?;
    let clean = scenario.clean_measurements()?;
    write_sensors(&out.join(SENSORS_FILE), &scenario.sensors)?;
    write_times(&out.join(TIMES_FILE), &scenario.times)?;
    write_field(&out.join(CLEAN_FIELD_FILE), &clean.field, &scenario.times)?;
    write_model(&out.join(TRUTH_FILE), &scenario.truth_on_grid(&scenario.latent_grid)?)?;
    let mut files = file_names(&[SENSORS_FILE, TIMES_FILE, CLEAN_FIELD_FILE, TRUTH_FILE]);
    let data_file = if scenario.noise_level > 0.0 {
        let noisy = scenario.measurements(config.seed)?;
        write_field(&out.join(NOISY_FIELD_FILE), &noisy.field, &scenario.times)?;
        files.push(NOISY_FIELD_FILE.into());
        NOISY_FIELD_FILE
    } else {
        CLEAN_FIELD_FILE
    };
    let manifest = MeasurementManifest {
        format_version: FORMAT_VERSION,
        kind: "measurements".into(),
        scenario: scenario.name(),
        config_sha256: config.hash(),
        seed: config.seed,
        timing: timing(&scenario.cfg),
        geometry: SensorGeometry::of(&scenario.sensors),
        n_sensors: scenario.sensors.len(),
        n_times: scenario.times.len(),
        noise_level: scenario.noise_level,
        data_file: data_file.into(),
        files,
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    info!(
        "simulated {}: {} sensors x {} times, noise level {}",
        manifest.scenario, manifest.n_sensors, manifest.n_times, manifest.noise_level
    );
    Ok(manifest)
}

fn mismatch(dir: &Path, what: &str) -> CliError {
    CliError::artifact(dir.join(MANIFEST_FILE), format!("manifest mismatch: {what}"))
}

/// Loads a measurement directory and checks it against the scenario geometry.
pub fn load_measurements(dir: &Path, scenario: &Scenario) -> Result<(MeasurementManifest, MeasurementSet)> {
    let manifest: MeasurementManifest = read_json(&dir.join(MANIFEST_FILE))?;
    if manifest.format_version != FORMAT_VERSION || manifest.kind != "measurements" {
        return Err(mismatch(dir, "not a measurement manifest of a supported version"));
    }
    if manifest.timing != timing(&scenario.cfg) {
        return Err(mismatch(dir, "wave speed or time horizon differs from the config"));
    }
    if manifest.geometry != SensorGeometry::of(&scenario.sensors) {
        return Err(mismatch(dir, "sensor region differs from the config"));
    }
    let positions = read_sensor_positions(&dir.join(SENSORS_FILE))?;
    if positions.len() != manifest.n_sensors || positions != scenario.sensors.positions() {
        return Err(mismatch(dir, "sensor positions differ from the config"));
    }
    let times = read_times(&dir.join(TIMES_FILE))?;
    if times.len() != manifest.n_times || times != scenario.times {
        return Err(mismatch(dir, "measurement times differ from the config"));
    }
    let field = read_field(&dir.join(&manifest.data_file))?;
    let mut data = MeasurementSet::new(times, scenario.sensors.clone(), field)?;
    data.noise_level = manifest.noise_level;
    Ok((manifest, data))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub chain: usize,
    pub samples: usize,
    pub acceptance_ratio: f64,
    pub effective_sample_size: f64,
    pub final_log_likelihood: f64,
    pub mean_trajectory_error: f64,
    pub mean_intensity_error: f64,
    pub mode_trajectory_error: f64,
    pub mode_intensity_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub format_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub burn_in: usize,
    pub chains: Vec<ChainDiagnostics>,
    /// Gelman-Rubin statistic of the post-burn-in log-likelihood traces.
    pub potential_scale_reduction: Option<f64>,
    /// Chain-averaged errors of the per-chain posterior means.
    pub average_mean_trajectory_error: f64,
    pub average_mean_intensity_error: f64,
    /// Errors of the posterior mean pooled over all chains.
    pub pooled_mean_trajectory_error: f64,
    pub pooled_mean_intensity_error: f64,
    pub averaged_mode_trajectory_error: f64,
    pub averaged_mode_intensity_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionManifest {
    pub format_version: u32,
    pub kind: String,
    pub scenario: String,
    pub config: RunConfig,
    pub config_sha256: String,
    pub seed: u64,
    pub data_config_sha256: String,
    pub timing: TimingConfig,
    pub geometry: SensorGeometry,
    pub files: Vec<String>,
}

pub fn checkpoint_path(out: &Path, chain: usize) -> PathBuf {
    out.join(CHECKPOINT_DIR).join(format!("chain_{chain:02}.json"))
}

pub fn chain_mean_file(chain: usize) -> String {
    format!("chain_{chain:02}_mean.csv")
}

fn chain_settings(config: &RunConfig, scenario: &Scenario, chain: usize) -> ChainSettings {
    ChainSettings {
        delta: scenario.hyper.delta,
        seed: config.seed,
        chain_index: chain as u64,
        thinning: config.thinning,
        burn_in: config.burn_in_steps(),
    }
}

fn run_one_chain(
    config: &RunConfig,
    scenario: &Scenario,
    likelihood: &GaussianLikelihood,
    priors: &ModelPrior,
    out: &Path,
    chain: usize,
    resume: bool,
) -> Result<ChainRecord> {
    let path = checkpoint_path(out, chain);
    let settings = chain_settings(config, scenario, chain);
    let beta = scenario.hyper.beta;
    let every = config.checkpoint_every();
    let mut record = if resume && path.is_file() {
        let mut rec: ChainRecord = read_json(&path)?;
        let stored = ChainSettings {
            burn_in: settings.burn_in,
            ..rec.settings
        };
        if stored != settings || rec.beta != beta {
            return Err(CliError::artifact(&path, "checkpoint settings differ from the config"));
        }
        if rec.len() > config.samples {
            return Err(CliError::artifact(
                &path,
                format!("checkpoint holds {} samples, config asks for {}", rec.len(), config.samples),
            ));
        }
        rec.settings.burn_in = settings.burn_in;
        info!("chain {chain}: resuming at step {}", rec.len());
        rec
    } else {
        if resume {
            warn!("chain {chain}: no checkpoint at {}, starting fresh", path.display());
        }
        let rec = run_chain(likelihood, priors, every.min(config.samples), settings, beta)?;
        write_json(&path, &rec)?;
        rec
    };
    while record.len() < config.samples {
        let target = (record.len() + every).min(config.samples);
        record = extend_chain(record, likelihood, priors, target)?;
        write_json(&path, &record)?;
        info!("chain {chain}: {} / {} samples", record.len(), config.samples);
    }
    Ok(record)
}

fn errors(estimate: &SourceModel, truth: &SourceModel) -> Result<(f64, f64)> {
    Ok((
        model_trajectory_error(estimate, truth)?,
        model_intensity_error(estimate, truth)?,
    ))
}

fn write_traces(path: &Path, chains: &[ChainRecord]) -> Result<()> {
    let header = ["chain", "step", "log_likelihood", "accepted"].map(String::from).to_vec();
    let rows = chains
        .iter()
        .enumerate()
        .flat_map(|(c, rec)| {
            rec.log_likelihood.iter().enumerate().map(move |(k, ll)| {
                let acc = if k == 0 { true } else { rec.accepted[k - 1] };
                vec![c.to_string(), k.to_string(), format!("{ll}"), (acc as u8).to_string()]
            })
        })
        .collect::<Vec<_>>();
    write_csv(path, &header, &rows)
}

fn write_samples(path: &Path, chains: &[ChainRecord], priors: &ModelPrior, stride: usize) -> Result<()> {
    let header = ["chain", "step", "source", "t", "x", "y", "q"].map(String::from).to_vec();
    let mut rows = Vec::new();
    for (c, rec) in chains.iter().enumerate() {
        for snap in rec.snapshots.iter().filter(|s| s.step % stride == 0) {
            let model = priors.realize(&snap.whitened)?;
            for (k, s) in model.sources().iter().enumerate() {
                for i in 0..s.grid().len() {
                    rows.push(vec![
                        c.to_string(),
                        snap.step.to_string(),
                        k.to_string(),
                        format!("{}", s.grid()[i]),
                        format!("{}", s.x().values()[i]),
                        format!("{}", s.y().values()[i]),
                        format!("{}", s.q().values()[i]),
                    ]);
                }
            }
        }
    }
    write_csv(path, &header, &rows)
}

/// Runs the configured chains on a measurement directory and writes
/// checkpoints, posterior summaries, traces and diagnostics to `out`.
pub fn reconstruct(config: &RunConfig, data_dir: &Path, out: &Path, resume: bool) -> Result<Diagnostics> {
    config.validate_fields()?;
    let scenario = config.scenario()?;
    let (data_manifest, data) = load_measurements(data_dir, &scenario)?;
    create_dir(&out.join(CHECKPOINT_DIR))?;
    let likelihood = GaussianLikelihood::new(&data, scenario.cfg, scenario.hyper.beta)?;
    let priors = scenario.priors()?;
    info!(
        "reconstructing {}: {} chains x {} samples, delta {}, beta {}",
        scenario.name(),
        config.chains,
        config.samples,
        scenario.hyper.delta,
        scenario.hyper.beta
    );
    let chains = (0..config.chains)
        .into_par_iter()
        .map(|c| run_one_chain(config, &scenario, &likelihood, &priors, out, c, resume))
        .collect::<Result<Vec<_>>>()?;

    let burn_in = config.burn_in_steps();
    let truth = scenario.truth_on_grid(&scenario.latent_grid)?;
    let mut per_chain = Vec::with_capacity(chains.len());
    let mut files = file_names(&[SENSORS_FILE, TIMES_FILE, MEASUREMENTS_FILE]);
    for (c, rec) in chains.iter().enumerate() {
        let one = std::slice::from_ref(rec);
        let mean = posterior_mean(one, burn_in, &priors)?;
        let mode = posterior_mode(one, burn_in, &priors)?;
        write_model(&out.join(chain_mean_file(c)), &mean)?;
        files.push(chain_mean_file(c));
        let (mt, mi) = errors(&mean, &truth)?;
        let (ot, oi) = errors(&mode.model, &truth)?;
        info!(
            "chain {c}: acceptance {:.3}, trajectory error {mt:.4}, intensity error {mi:.4}",
            rec.acceptance_ratio()
        );
        per_chain.push(ChainDiagnostics {
            chain: c,
            samples: rec.len(),
            acceptance_ratio: rec.acceptance_ratio(),
            effective_sample_size: chain_ess(rec, burn_in),
            final_log_likelihood: rec.log_likelihood[rec.len() - 1],
            mean_trajectory_error: mt,
            mean_intensity_error: mi,
            mode_trajectory_error: ot,
            mode_intensity_error: oi,
        });
    }
    let pooled = posterior_mean(&chains, burn_in, &priors)?;
    let best = posterior_mode(&chains, burn_in, &priors)?;
    let avg_mode = averaged_mode(&chains, burn_in, &priors)?;
    write_model(&out.join(MEAN_FILE), &pooled)?;
    write_model(&out.join(MODE_FILE), &best.model)?;
    write_model(&out.join(AVERAGED_MODE_FILE), &avg_mode)?;
    write_traces(&out.join(TRACES_FILE), &chains)?;
    write_samples(&out.join(SAMPLES_FILE), &chains, &priors, config.sample_stride())?;
    write_sensors(&out.join(SENSORS_FILE), &scenario.sensors)?;
    write_times(&out.join(TIMES_FILE), &data.times)?;
    write_field(&out.join(MEASUREMENTS_FILE), &data.field, &data.times)?;
    files.extend(file_names(&[
        MEAN_FILE,
        MODE_FILE,
        AVERAGED_MODE_FILE,
        TRACES_FILE,
        SAMPLES_FILE,
        DIAGNOSTICS_FILE,
    ]));

    let start = burn_in.min(chains.iter().map(|c| c.len()).min().unwrap_or(0));
    let traces: Vec<&[f64]> = chains.iter().map(|c| &c.log_likelihood[start..]).collect();
    let (pt, pi) = errors(&pooled, &truth)?;
    let (at, ai) = errors(&avg_mode, &truth)?;
    let n = per_chain.len() as f64;
    let diagnostics = Diagnostics {
        format_version: FORMAT_VERSION,
        scenario: scenario.name(),
        seed: config.seed,
        burn_in,
        potential_scale_reduction: potential_scale_reduction(&traces),
        average_mean_trajectory_error: per_chain.iter().map(|d| d.mean_trajectory_error).sum::<f64>() / n,
        average_mean_intensity_error: per_chain.iter().map(|d| d.mean_intensity_error).sum::<f64>() / n,
        pooled_mean_trajectory_error: pt,
        pooled_mean_intensity_error: pi,
        averaged_mode_trajectory_error: at,
        averaged_mode_intensity_error: ai,
        chains: per_chain,
    };
    write_json(&out.join(DIAGNOSTICS_FILE), &diagnostics)?;
    let manifest = ReconstructionManifest {
        format_version: FORMAT_VERSION,
        kind: "reconstruction".into(),
        scenario: scenario.name(),
        config: config.clone(),
        config_sha256: config.hash(),
        seed: config.seed,
        data_config_sha256: data_manifest.config_sha256,
        timing: timing(&scenario.cfg),
        geometry: SensorGeometry::of(&scenario.sensors),
        files,
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)?;
    Ok(diagnostics)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub estimator: String,
    pub wavefield_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intensity_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub scenario: String,
    pub rows: Vec<EvaluationRow>,
}

impl EvaluationReport {
    pub fn row(&self, estimator: &str) -> Option<&EvaluationRow> {
        self.rows.iter().find(|r| r.estimator == estimator)
    }

    pub fn has_truth(&self) -> bool {
        self.rows.iter().any(|r| r.trajectory_error.is_some())
    }

    /// Plain-text table, one estimator per line.
    pub fn table(&self) -> String {
        let truth = self.has_truth();
        let mut s = format!("{:<20} {:>16}", "estimator", "wavefield");
        if truth {
            s += &format!(" {:>16} {:>16}", "trajectory", "intensity");
        }
        s.push('\n');
        for r in &self.rows {
            s += &format!("{:<20} {:>16.6e}", r.estimator, r.wavefield_error);
            if let (Some(t), Some(i)) = (r.trajectory_error, r.intensity_error) {
                s += &format!(" {t:>16.6e} {i:>16.6e}");
            }
            s.push('\n');
        }
        s
    }
}

fn evaluate_estimate(
    name: &str,
    estimate: &SourceModel,
    data: &MeasurementSet,
    cfg: &PhysicalConfig,
    scenario: Option<&Scenario>,
) -> Result<EvaluationRow> {
    let (trajectory_error, intensity_error) = match scenario {
        Some(s) => {
            if estimate.grid() != s.latent_grid.as_slice() {
                return Err(wavesrc::Error::GridMismatch(format!(
                    "{name} estimate has {} grid points, scenario latent grid has {}",
                    estimate.grid().len(),
                    s.latent_grid.len()
                ))
                .into());
            }
            let truth = s.truth_on_grid(&s.latent_grid)?;
            let (t, i) = errors(estimate, &truth)?;
            (Some(t), Some(i))
        }
        None => (None, None),
    };
    Ok(EvaluationRow {
        estimator: name.into(),
        wavefield_error: wavefield_error(estimate, data, cfg)?,
        trajectory_error,
        intensity_error,
    })
}

/// Error table for the summaries in a reconstruction directory. Without a
/// scenario only the wavefield residual is reported.
pub fn evaluate(summaries: &Path, scenario: Option<&Scenario>, out: Option<&Path>) -> Result<EvaluationReport> {
    let manifest: ReconstructionManifest = read_json(&summaries.join(MANIFEST_FILE))?;
    if manifest.format_version != FORMAT_VERSION || manifest.kind != "reconstruction" {
        return Err(CliError::artifact(
            summaries.join(MANIFEST_FILE),
            "not a reconstruction manifest of a supported version",
        ));
    }
    let cfg = physical(&manifest.timing)?;
    let positions = read_sensor_positions(&summaries.join(SENSORS_FILE))?;
    let sensors = SensorArray::new(positions, manifest.geometry.radius, manifest.geometry.region())?;
    let times = read_times(&summaries.join(TIMES_FILE))?;
    let field = read_field(&summaries.join(MEASUREMENTS_FILE))?;
    let data = MeasurementSet::new(times, sensors, field)?;

    let mut rows = Vec::new();
    for (name, file) in [("mean", MEAN_FILE), ("mode", MODE_FILE), ("averaged_mode", AVERAGED_MODE_FILE)] {
        let path = summaries.join(file);
        if path.is_file() {
            rows.push(evaluate_estimate(name, &read_model(&path)?, &data, &cfg, scenario)?);
        }
    }
    let chain_rows = (0..manifest.config.chains)
        .map(|c| summaries.join(chain_mean_file(c)))
        .filter(|p| p.is_file())
        .map(|p| evaluate_estimate("chain", &read_model(&p)?, &data, &cfg, scenario))
        .collect::<Result<Vec<_>>>()?;
    if !chain_rows.is_empty() {
        let n = chain_rows.len() as f64;
        let avg = |f: &dyn Fn(&EvaluationRow) -> Option<f64>| -> Option<f64> {
            chain_rows.iter().map(f).sum::<Option<f64>>().map(|s| s / n)
        };
        rows.push(EvaluationRow {
            estimator: "average_chain_mean".into(),
            wavefield_error: chain_rows.iter().map(|r| r.wavefield_error).sum::<f64>() / n,
            trajectory_error: avg(&|r| r.trajectory_error),
            intensity_error: avg(&|r| r.intensity_error),
        });
    }
    if rows.is_empty() {
        return Err(wavesrc::Error::EmptySampleSet.into());
    }
    let report = EvaluationReport {
        scenario: scenario.map(|s| s.name()).unwrap_or(manifest.scenario),
        rows,
    };
    if let Some(out) = out {
        write_report(out, &report)?;
    }
    Ok(report)
}

/// JSON when the path ends in `.json`, CSV otherwise.
pub fn write_report(path: &Path, report: &EvaluationReport) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    if path.extension().is_some_and(|e| e == "json") {
        return write_json(path, report);
    }
    let truth = report.has_truth();
    let mut header = vec!["estimator".to_string(), "wavefield_error".to_string()];
    if truth {
        header.extend(["trajectory_error".to_string(), "intensity_error".to_string()]);
    }
    let rows = report
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![r.estimator.clone(), format!("{}", r.wavefield_error)];
            if truth {
                let cell = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
                row.extend([cell(r.trajectory_error), cell(r.intensity_error)]);
            }
            row
        })
        .collect::<Vec<_>>();
    write_csv(path, &header, &rows)
}

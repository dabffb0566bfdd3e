//! Run configuration documents.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wavesrc::scenarios::{build_case, CaseOverrides, Scenario};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// A built-in case, by name (`"case2"`) or number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSelector {
    Id(u32),
    Name(String),
}

impl ScenarioSelector {
    pub fn case_id(&self) -> Result<u32> {
        match self {
            ScenarioSelector::Id(id) => Ok(*id),
            ScenarioSelector::Name(name) => name
                .trim()
                .trim_start_matches("case")
                .parse()
                .map_err(|_| CliError::Config(format!("unknown scenario {name:?}"))),
        }
    }
}

fn default_chains() -> usize {
    1
}

fn default_burn_in() -> f64 {
    0.5
}

fn default_thinning() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub scenario: ScenarioSelector,
    #[serde(default)]
    pub overrides: CaseOverrides,
    #[serde(default = "default_chains")]
    pub chains: usize,
    pub samples: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_level: Option<f64>,
    /// Keep every `thinning`-th whitened state for posterior summaries.
    #[serde(default = "default_thinning")]
    pub thinning: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_curve: Option<bool>,
    /// Steps between chain checkpoint writes; defaults to `samples`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_every: Option<usize>,
    /// Steps between realized samples written for plotting; defaults to 1000.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Desk-scale defaults for a built-in case.
    pub fn for_case(case_id: u32, samples: usize) -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            scenario: ScenarioSelector::Name(format!("case{case_id}")),
            overrides: CaseOverrides::default(),
            chains: 2,
            samples,
            burn_in_fraction: default_burn_in(),
            delta: None,
            beta: None,
            seed: 0,
            noise_level: None,
            thinning: default_thinning(),
            closed_curve: None,
            checkpoint_every: None,
            sample_stride: None,
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate_fields()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Full validation, including building the scenario.
    pub fn validate(&self) -> Result<()> {
        self.validate_fields()?;
        self.scenario()?;
        Ok(())
    }

    /// Checks the run settings without building the scenario.
    pub fn validate_fields(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.chains == 0 {
            return Err(CliError::Config("chains must be >= 1".into()));
        }
        if self.samples == 0 {
            return Err(CliError::Config("samples must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.burn_in_fraction) {
            return Err(CliError::Config(format!(
                "burn_in_fraction must lie in [0, 1), got {}",
                self.burn_in_fraction
            )));
        }
        if self.thinning == 0 || self.checkpoint_every == Some(0) || self.sample_stride == Some(0) {
            return Err(CliError::Config(
                "thinning, checkpoint_every and sample_stride must be >= 1".into(),
            ));
        }
        self.scenario.case_id()?;
        Ok(())
    }

    /// Case overrides with the top-level sampler and noise settings folded in.
    pub fn effective_overrides(&self) -> CaseOverrides {
        let mut o = self.overrides.clone();
        o.delta = self.delta.or(o.delta);
        o.beta = self.beta.or(o.beta);
        o.noise_level = self.noise_level.or(o.noise_level);
        o.closed_curve = self.closed_curve.or(o.closed_curve);
        o
    }

    pub fn scenario(&self) -> Result<Scenario> {
        Ok(build_case(self.scenario.case_id()?, &self.effective_overrides())?)
    }

    pub fn burn_in_steps(&self) -> usize {
        (self.burn_in_fraction * self.samples as f64).floor() as usize
    }

    pub fn checkpoint_every(&self) -> usize {
        self.checkpoint_every.unwrap_or(self.samples)
    }

    pub fn sample_stride(&self) -> usize {
        self.sample_stride.unwrap_or(1000)
    }

    /// SHA-256 of the canonical JSON serialization, hex encoded. The output
    /// directory does not contribute.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = None;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Resolves `--scenario` as a config file path or a built-in case name.
pub fn resolve_scenario(arg: &str) -> Result<Scenario> {
    let path = Path::new(arg);
    if path.is_file() {
        return RunConfig::load(path)?.scenario();
    }
    let id = ScenarioSelector::Name(arg.to_string()).case_id()?;
    Ok(build_case(id, &CaseOverrides::default())?)
}

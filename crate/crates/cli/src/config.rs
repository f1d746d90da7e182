//! Config-file layout. Every section is optional; command-line flags override it.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use optobell_core::device::DeviceConfig;
use optobell_core::optimizer::Axis;
use optobell_core::sweep::{PStrategy, Series};
use optobell_core::verify::OracleCheckConfig;
use optobell_core::Complex64;
use serde::Deserialize;
use serde_json::Value;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub model: ModelSection,
    /// Overrides applied field by field to the nanobeam operating point.
    pub device: Option<Value>,
    pub optimizer: OptimizerSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
    pub settings: SettingsSection,
    pub oracle_check: Option<OracleCheckConfig>,
    pub feasibility: FeasibilitySection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub p: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub eta: Option<f64>,
    pub n0: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub restarts: Option<usize>,
    pub real_only: Option<bool>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub axis: Option<Axis>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub steps: Option<usize>,
    pub strategy: Option<PStrategy>,
    pub series: Option<Series>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

/// Probe displacements as `[re, im]`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SettingsSection {
    pub alpha1: Option<Complex64>,
    pub alpha2: Option<Complex64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeasibilitySection {
    pub kappa_min_hz: Option<f64>,
    pub kappa_max_hz: Option<f64>,
    pub kappa_steps: Option<usize>,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub margin: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("malformed config {}", path.display()))
    }

    /// Nanobeam operating point with the file's device section laid over it.
    pub fn device(&self) -> anyhow::Result<DeviceConfig> {
        let base = DeviceConfig::nanobeam();
        let Some(overrides) = &self.device else {
            return Ok(base);
        };
        let Value::Object(overrides) = overrides else {
            bail!("config section `device` must be an object");
        };
        let mut merged = serde_json::to_value(base)?;
        for (k, v) in overrides {
            merged[k] = v.clone();
        }
        serde_json::from_value(merged).context("malformed config section `device`")
    }
}

/// Parses `re` or `re,im`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    match s.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(parse(re)?, parse(im)?)),
        None => Ok(Complex64::new(parse(s)?, 0.0)),
    }
}

pub fn parse_axis(s: &str) -> Result<Axis, String> {
    s.trim().parse::<Axis>().map_err(|e| e.to_string())
}

/// Parses `fixed-p` or `p-optimized`.
pub fn parse_strategy(s: &str) -> Result<PStrategy, String> {
    serde_json::from_value(Value::String(s.to_string()))
        .map_err(|_| format!("expected fixed-p or p-optimized, got {s:?}"))
}

/// Parses `AXIS=v1,v2,...`.
pub fn parse_series(s: &str) -> Result<Series, String> {
    let (axis, values) = s
        .split_once('=')
        .ok_or_else(|| format!("expected AXIS=v1,v2,..., got {s:?}"))?;
    let axis = parse_axis(axis)?;
    let values = values
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Series { axis, values })
}

//! TOML experiment configs and their resolved, hashable form.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use martapprox::linear::CoefficientSequence;
use martapprox::model_file;
use martapprox::{presets, MarkovModel};

use crate::catalog;
use crate::error::{io_err, CliError};
use crate::grid::parse_grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CoefficientSpec {
    SummableGeometric { rho: f64 },
    Harmonic,
    LogGap,
    PowerLaw { beta: f64 },
    AlternatingPower { beta: f64 },
    /// One value per line; `#` comments and blank lines are skipped.
    Tabulated {
        path: PathBuf,
        #[serde(default)]
        finite_support: bool,
    },
}

impl CoefficientSpec {
    pub fn build(&self) -> Result<CoefficientSequence, CliError> {
        Ok(match self {
            CoefficientSpec::SummableGeometric { rho } => CoefficientSequence::geometric(*rho)?,
            CoefficientSpec::Harmonic => CoefficientSequence::harmonic(),
            CoefficientSpec::LogGap => CoefficientSequence::log_gap(),
            CoefficientSpec::PowerLaw { beta } => CoefficientSequence::power_law(*beta)?,
            CoefficientSpec::AlternatingPower { beta } => CoefficientSequence::alternating_power(*beta)?,
            CoefficientSpec::Tabulated { path, finite_support } => {
                let text = std::fs::read_to_string(path).map_err(io_err(path))?;
                let mut values = Vec::new();
                for (i, line) in text.lines().enumerate() {
                    let t = line.split('#').next().unwrap_or("").trim();
                    if t.is_empty() {
                        continue;
                    }
                    values.push(t.parse::<f64>().map_err(|_| {
                        CliError::Config(format!("{} line {}: {t:?} is not a number", path.display(), i + 1))
                    })?);
                }
                CoefficientSequence::tabulated(values, *finite_support)?
            }
        })
    }
}

/// Verdict thresholds. Every field may be overridden under `[thresholds]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub bound_slack: f64,
    pub identity_tol: f64,
    pub equivalence_final: f64,
    pub ratio4_final: f64,
    pub sigma1_tol: f64,
    pub condition9_holds_below: f64,
    pub condition9_stable_rel_change: f64,
    pub exponent_tol: f64,
    pub clt_final: f64,
    pub clt_inversion: f64,
    pub lindeberg_mean_lo: f64,
    pub lindeberg_mean_hi: f64,
    pub lindeberg_eps: f64,
    pub remainder_eps: f64,
    pub remainder_from_n: usize,
    pub limit_tol: f64,
    pub chaining_se: f64,
    pub example3_growth: f64,
    pub control_shrink: f64,
    pub coboundary_shrink: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            bound_slack: 1e-8,
            identity_tol: 1e-10,
            equivalence_final: 0.01,
            ratio4_final: 0.1,
            sigma1_tol: 1e-6,
            condition9_holds_below: 0.05,
            condition9_stable_rel_change: 0.10,
            exponent_tol: 0.05,
            clt_final: 0.05,
            clt_inversion: 0.005,
            lindeberg_mean_lo: 0.98,
            lindeberg_mean_hi: 1.02,
            lindeberg_eps: 0.25,
            remainder_eps: 0.25,
            remainder_from_n: 1024,
            limit_tol: 1e-4,
            chaining_se: 3.0,
            example3_growth: 1.5,
            control_shrink: 3.0,
            coboundary_shrink: 3.0,
        }
    }
}

/// Contents of a config file. Command-line flags take precedence.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<String>,
    /// Preset name or path to a model file.
    pub model: Option<String>,
    pub grid: Option<String>,
    pub ensemble: Option<usize>,
    pub root_seed: Option<u64>,
    pub coefficients: Option<CoefficientSpec>,
    #[serde(default)]
    pub thresholds: Thresholds,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::ConfigParse {
            line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        Self::parse(&std::fs::read_to_string(path).map_err(io_err(path))?)
    }
}

/// Overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub kind: Option<String>,
    pub grid: Option<String>,
    pub root_seed: Option<u64>,
    pub model: Option<String>,
    pub ensemble: Option<usize>,
}

/// Everything a run depends on. Serialized into run records and manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: String,
    pub model: Option<String>,
    pub grid: Vec<usize>,
    pub ensemble: usize,
    pub root_seed: u64,
    pub coefficients: Option<CoefficientSpec>,
    pub thresholds: Thresholds,
}

impl RunConfig {
    pub fn resolve(file: ExperimentConfig, over: Overrides) -> Result<Self, CliError> {
        let kind_name = over
            .kind
            .or(file.kind)
            .ok_or_else(|| CliError::Config("no experiment kind given".into()))?;
        let info = catalog::lookup(&kind_name)?;
        let grid = parse_grid(over.grid.as_deref().or(file.grid.as_deref()).unwrap_or(info.default_grid))?;
        let model = over.model.or(file.model).or(info.default_model.map(str::to_string));
        let coefficients = file.coefficients.or(info.default_coefficients.map(|f| f()));
        let cfg = RunConfig {
            kind: info.name.to_string(),
            model,
            grid,
            ensemble: over.ensemble.or(file.ensemble).unwrap_or(info.default_ensemble),
            root_seed: over.root_seed.or(file.root_seed).unwrap_or(0),
            coefficients,
            thresholds: file.thresholds,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let info = catalog::lookup(&self.kind)?;
        if info.default_ensemble > 0 && self.ensemble == 0 {
            return Err(CliError::Config(format!("{} needs a positive ensemble size", self.kind)));
        }
        if info.default_coefficients.is_some() && self.coefficients.is_none() {
            return Err(CliError::Config(format!("{} needs a [coefficients] section", self.kind)));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn load_model(&self) -> Result<(MarkovModel, Vec<String>), CliError> {
        let name = self
            .model
            .as_deref()
            .ok_or_else(|| CliError::Config(format!("{} needs a model", self.kind)))?;
        if let Some(m) = presets::by_name(name) {
            return Ok((m, Vec::new()));
        }
        let path = Path::new(name);
        if !path.exists() {
            return Err(CliError::Config(format!(
                "model {name:?} is neither a preset ({}) nor an existing file",
                presets::PRESET_NAMES.join(", ")
            )));
        }
        let parsed = model_file::load_model(path)?;
        Ok((parsed.model, parsed.warnings))
    }
}

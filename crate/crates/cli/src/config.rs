//! JSON run configuration. Every field is optional; command-line flags take
//! precedence over the file.

use std::fs;
use std::path::{Path, PathBuf};

use rankfield::pointproc::ProcessSpec;
use rankfield::{Grid, WeightFunction};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    /// `a0,a1,M`
    pub grid: Option<String>,
    /// `indicator` or `exp:<rate>`
    pub phi: Option<String>,
    pub dim: Option<usize>,
    pub simulate: Option<SimulateConfig>,
    pub csr_fit: Option<CsrFitSection>,
    pub power: Option<PowerConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub spec: ProcessSpec,
    pub count: usize,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsrFitSection {
    pub n_mean: Option<usize>,
    pub n_null: Option<usize>,
    pub n_points: Option<usize>,
    pub p_level: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    /// Models to test; the four standard models when absent.
    pub specs: Option<Vec<ProcessSpec>>,
    pub n_test: Option<usize>,
    pub fit: Option<CsrFitSection>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Parses and validates a configuration document.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("line {}: {e}", e.line())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(g) = &self.grid {
            parse_grid(g)?;
        }
        if let Some(p) = &self.phi {
            parse_phi(p)?;
        }
        if self.jobs == Some(0) {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }
        if let Some(sim) = &self.simulate {
            sim.spec.validate().map_err(|e| CliError::Config(format!("simulate.spec: {e}")))?;
        }
        if let Some(fit) = &self.csr_fit {
            fit.validate("csr_fit")?;
        }
        if let Some(power) = &self.power {
            for (i, spec) in power.specs.iter().flatten().enumerate() {
                spec.validate().map_err(|e| CliError::Config(format!("power.specs[{i}]: {e}")))?;
            }
            if let Some(fit) = &power.fit {
                fit.validate("power.fit")?;
            }
        }
        Ok(())
    }
}

impl CsrFitSection {
    fn validate(&self, at: &str) -> Result<(), CliError> {
        if let Some(p) = self.p_level {
            if !(p > 0.0 && p < 1.0) {
                return Err(CliError::Config(format!("{at}.p_level must lie in (0, 1), got {p}")));
            }
        }
        if self.n_mean.is_some_and(|n| n < 2) || self.n_null.is_some_and(|n| n < 2) {
            return Err(CliError::Config(format!("{at}: n_mean and n_null must be at least 2")));
        }
        Ok(())
    }
}

pub fn parse_grid(s: &str) -> Result<Grid, CliError> {
    s.parse().map_err(|e| CliError::Config(format!("grid '{s}': {e}")))
}

pub fn parse_phi(s: &str) -> Result<WeightFunction, CliError> {
    s.parse().map_err(|e| CliError::Config(format!("phi '{s}': {e}")))
}

//! Run configuration files and the embedded presets.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distributions::{DistributionSpec, IncomeRange};
use crate::error::{Error, Result};
use crate::solver::ModelConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub model: ModelSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// Points per axis unless overridden below.
    pub grid_points: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_points: Option<usize>,
    #[serde(default)]
    pub income_range: IncomeRange,
    pub beta: f64,
    pub field: DistributionSpec,
    pub topic: DistributionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            tolerance: 1e-9,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateSection {
    pub horizon: usize,
    pub trials: usize,
    pub seed: u64,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            horizon: 400,
            trials: 10_000,
            seed: 2018,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Fig4a,
    Fig4b,
    Fig5,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Fig4a, Preset::Fig4b, Preset::Fig5];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig4a => "fig4a",
            Preset::Fig4b => "fig4b",
            Preset::Fig5 => "fig5",
        }
    }

    pub fn source(self) -> &'static str {
        match self {
            Preset::Fig4a => include_str!("../presets/fig4a.toml"),
            Preset::Fig4b => include_str!("../presets/fig4b.toml"),
            Preset::Fig5 => include_str!("../presets/fig5.toml"),
        }
    }

    pub fn config(self) -> RunConfig {
        RunConfig::from_toml(self.source()).expect("embedded presets are valid")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// Small uniform problem that exhaustive enumeration can handle.
    pub fn oracle_default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            model: ModelSection {
                grid_points: 3,
                theta_points: None,
                epsilon_points: None,
                income_range: IncomeRange::default(),
                beta: 0.5,
                field: DistributionSpec::Uniform,
                topic: DistributionSpec::Uniform,
            },
            solver: SolverSection {
                tolerance: 1e-11,
                max_iterations: 100_000,
            },
            simulate: SimulateSection::default(),
            output: OutputSection::default(),
        }
    }

    pub fn theta_points(&self) -> usize {
        self.model.theta_points.unwrap_or(self.model.grid_points)
    }

    pub fn epsilon_points(&self) -> usize {
        self.model.epsilon_points.unwrap_or(self.model.grid_points)
    }

    /// Check every parameter, building the model along the way.
    pub fn validate(&self) -> Result<ModelConfig> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if self.theta_points() == 0 || self.epsilon_points() == 0 {
            return Err(Error::invalid("model.grid_points", "must be at least 1"));
        }
        if self.solver.tolerance.is_nan() || self.solver.tolerance <= 0.0 {
            return Err(Error::invalid("solver.tolerance", "must be positive"));
        }
        if self.solver.max_iterations == 0 {
            return Err(Error::invalid("solver.max_iterations", "must be at least 1"));
        }
        if self.simulate.horizon == 0 {
            return Err(Error::invalid("simulate.horizon", "must be at least 1"));
        }
        if self.simulate.trials < 2 {
            return Err(Error::invalid("simulate.trials", "must be at least 2"));
        }
        self.model_config()
    }

    pub fn model_config(&self) -> Result<ModelConfig> {
        let range = IncomeRange::new(self.model.income_range.lo, self.model.income_range.hi)?;
        let field = self.model.field.build(self.theta_points(), range)?;
        let topic = self.model.topic.build(self.epsilon_points(), range)?;
        ModelConfig::new(self.model.beta, field, topic)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }
}

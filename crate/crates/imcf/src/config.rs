//! JSON run and sweep configuration.

use std::path::{Path, PathBuf};

use imcf_core::geometry::MIN_NODES;
use imcf_core::initial_data::{self, InitialDataError};
use imcf_core::{GraphFunction, Mode, Thresholds, TimeStepPolicy};
use serde::{Deserialize, Serialize};

use crate::Error;

/// Environment variable that replaces `outputs.directory`.
pub const OUTPUT_DIR_ENV: &str = "IMCF_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Cap { lambda0: f64 },
    PerturbedCap { lambda0: f64, amplitude: f64 },
}

impl InitialSpec {
    pub fn lambda0(&self) -> f64 {
        match *self {
            InitialSpec::Cap { lambda0 } | InitialSpec::PerturbedCap { lambda0, .. } => lambda0,
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            InitialSpec::Cap { .. } => 0.0,
            InitialSpec::PerturbedCap { amplitude, .. } => amplitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub directory: PathBuf,
    pub profiles_csv: bool,
    pub area_csv: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { directory: PathBuf::from("imcf-out"), profiles_csv: true, area_csv: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub mode: Mode,
    pub m: usize,
    pub initial: InitialSpec,
    #[serde(default)]
    pub policy: TimeStepPolicy,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub outputs: Outputs,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.n != 1 && self.n != 2 {
            return Err(Error::Config(format!("n must be 1 or 2, got {}", self.n)));
        }
        if self.mode.dim() != self.n {
            return Err(Error::Config(format!("mode {:?} is {}-dimensional but n = {}", self.mode, self.mode.dim(), self.n)));
        }
        if self.m < MIN_NODES {
            return Err(Error::Config(format!("grid too coarse: m = {} < {MIN_NODES}", self.m)));
        }
        self.policy.validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// The output directory, with the environment override applied.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.outputs.directory.clone(),
        }
    }

    pub fn initial_graph(&self) -> Result<GraphFunction, Error> {
        let built = match self.initial {
            InitialSpec::Cap { lambda0 } => initial_data::cap(lambda0, self.mode, self.m),
            InitialSpec::PerturbedCap { lambda0, amplitude } => {
                initial_data::perturbed_cap(lambda0, amplitude, self.mode, self.m)
            }
        };
        built.map_err(|e: InitialDataError| Error::Config(e.to_string()))
    }
}

/// Cartesian sweep over `λ₀ × a × m` around a base run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: RunConfig,
    pub lambda0: Vec<f64>,
    #[serde(default = "zero_amplitude")]
    pub amplitude: Vec<f64>,
    pub m: Vec<usize>,
}

fn zero_amplitude() -> Vec<f64> {
    vec![0.0]
}

impl SweepConfig {
    pub fn from_path(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let sweep: SweepConfig = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        if sweep.lambda0.is_empty() || sweep.amplitude.is_empty() || sweep.m.is_empty() {
            return Err(Error::Config("sweep axes must be non-empty".into()));
        }
        sweep.base.validate()?;
        Ok(sweep)
    }

    /// Every entry in row-major order `λ₀`, then `a`, then `m`. A zero
    /// amplitude selects the plain cap.
    pub fn entries(&self) -> Vec<RunConfig> {
        let mut out = Vec::new();
        for &lambda0 in &self.lambda0 {
            for &amplitude in &self.amplitude {
                for &m in &self.m {
                    let mut c = self.base.clone();
                    c.m = m;
                    c.initial = if amplitude == 0.0 {
                        InitialSpec::Cap { lambda0 }
                    } else {
                        InitialSpec::PerturbedCap { lambda0, amplitude }
                    };
                    out.push(c);
                }
            }
        }
        out
    }
}

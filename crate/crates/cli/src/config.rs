// Copyright 2026 the scenery-sim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Experiment configuration: one flat, diffable TOML file.
//!
//! ```toml
//! # experiment.toml
//! process = "brownian"        # brownian | stable_levy | fractional_bm | iterated_bm
//! # delta = 1.5               # stable_levy only, in (1, 2]
//! # zeta = 0.0                # stable_levy only, in [-1, 1]
//! # hurst = 0.75              # fractional_bm only, in (0, 1)
//! dt = 0.015625
//! n_steps = 4096              # simulate
//! t_grid = [16.0, 64.0, 256.0, 1024.0, 4096.0]   # persistence / molchan
//! n_replicas = 20000
//! master_seed = 1
//! barrier = 1.0
//! dx_kappa = 0.5
//! dx_floor = 1e-4
//! workers = 0                 # 0 = all cores
//! out_dir = "out"
//! ```
//!
//! Unknown keys are rejected at load; every module precondition is
//! re-validated here, with all offending keys reported together.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use scenery_core::local_time::DxPolicy;
use scenery_core::process::ProcessSpec;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub process: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hurst: Option<f64>,
    pub dt: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<f64>>,
    pub n_replicas: u64,
    pub master_seed: u64,
    #[serde(default = "default_barrier")]
    pub barrier: f64,
    #[serde(default = "default_dx_kappa")]
    pub dx_kappa: f64,
    #[serde(default = "default_dx_floor")]
    pub dx_floor: f64,
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

fn default_barrier() -> f64 {
    1.0
}
fn default_dx_kappa() -> f64 {
    0.5
}
fn default_dx_floor() -> f64 {
    1e-4
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: ExperimentConfig = toml::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Re-validate every module precondition, reporting all offenders.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut problems = Vec::new();
        match self.process.as_str() {
            "brownian" | "iterated_bm" => {}
            "stable_levy" => {
                let delta = self.delta.unwrap_or(f64::NAN);
                if !(delta > 1.0 && delta <= 2.0) {
                    problems.push(format!(
                        "delta: stable_levy needs a stability index in (1, 2], got {delta}"
                    ));
                }
                if let Some(zeta) = self.zeta {
                    if !(-1.0..=1.0).contains(&zeta) {
                        problems.push(format!("zeta: skewness must lie in [-1, 1], got {zeta}"));
                    }
                }
            }
            "fractional_bm" => {
                let hurst = self.hurst.unwrap_or(f64::NAN);
                if !(hurst > 0.0 && hurst < 1.0) {
                    problems.push(format!(
                        "hurst: fractional_bm needs a Hurst index in (0, 1), got {hurst}"
                    ));
                }
            }
            other => problems.push(format!(
                "process: unknown family `{other}` (expected brownian, stable_levy, \
                 fractional_bm or iterated_bm)"
            )),
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            problems.push(format!("dt: must be positive, got {}", self.dt));
        }
        if self.n_replicas == 0 {
            problems.push("n_replicas: must be at least 1".into());
        }
        if let Some(n) = self.n_steps {
            if n == 0 {
                problems.push("n_steps: must be at least 1".into());
            }
        }
        if let Some(grid) = &self.t_grid {
            if grid.is_empty() {
                problems.push("t_grid: must not be empty".into());
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                problems.push("t_grid: must be strictly increasing".into());
            }
            for &t in grid {
                let k = (t / self.dt).round();
                if k < 1.0 || (t - k * self.dt).abs() > 1e-9 * t.max(self.dt) {
                    problems.push(format!("t_grid: {t} is not a multiple of dt = {}", self.dt));
                }
            }
        }
        if self.dx_kappa.is_nan() || self.dx_kappa <= 0.0 {
            problems.push(format!("dx_kappa: must be positive, got {}", self.dx_kappa));
        }
        if self.dx_floor.is_nan() || self.dx_floor <= 0.0 {
            problems.push(format!("dx_floor: must be positive, got {}", self.dx_floor));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(problems))
        }
    }

    pub fn spec(&self) -> ProcessSpec {
        match self.process.as_str() {
            "brownian" => ProcessSpec::Brownian,
            "stable_levy" => {
                ProcessSpec::stable(self.delta.unwrap(), self.zeta.unwrap_or(0.0))
                    .expect("validated at load")
            }
            "fractional_bm" => ProcessSpec::fbm(self.hurst.unwrap()).expect("validated at load"),
            "iterated_bm" => ProcessSpec::IteratedBm,
            _ => unreachable!("validated at load"),
        }
    }

    pub fn dx_policy(&self) -> DxPolicy {
        DxPolicy::Auto {
            kappa: self.dx_kappa,
            floor: self.dx_floor,
        }
    }
}

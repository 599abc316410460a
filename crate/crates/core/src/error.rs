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

//! Error types shared by every module.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, SimError>;

/// Everything that can go wrong when building paths, fields and estimates.
#[derive(Debug, Error)]
pub enum SimError {
    /// A constructor or operation precondition was violated.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A requested time does not lie on the sample grid.
    #[error("time {t} is not on the sample grid (dt = {dt})")]
    OffGrid { t: f64, dt: f64 },

    /// A requested time is not one of a field's checkpoints.
    #[error("time {0} is not a checkpoint of the local-time field")]
    NotACheckpoint(f64),

    /// Local-time field and scenery were built on different grids.
    #[error("grid mismatch: local-time field and scenery use different grids")]
    GridMismatch,

    /// A generator could not produce a sample (with diagnostic).
    #[error("generation failed: {0}")]
    Generation(String),

    /// A regression was asked to fit fewer points than it needs.
    #[error("exponent fit needs at least {needed} usable points, found {found}")]
    TooFewPoints { needed: usize, found: usize },
}

impl SimError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        SimError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

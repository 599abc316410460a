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

//! Monte Carlo toolkit for random processes in Brownian scenery.
//!
//! The object of study is `Δ_t = ∫ L_t(x) dW(x)`, where `W` is a two-sided
//! white-noise scenery over space and `L_t(x)` is the local time of a
//! self-similar driving process `Y` (Brownian motion, strictly stable Lévy,
//! fractional Brownian motion, or iterated Brownian motion). The crate
//! provides:
//!
//! - exact-in-distribution path generators for the four driver families
//!   ([`process`]),
//! - an occupation-measure local-time estimator with exact mass conservation
//!   ([`local_time`]),
//! - the white-noise scenery and the discretized `Δ` construction
//!   ([`scenery`]),
//! - Monte Carlo campaigns for the persistence probability
//!   `F(T) = P[sup_{[0,T]} Δ ≤ barrier]`, the reciprocal-integral functional
//!   `I(T)`, tail envelopes and inequality checks ([`estimators`]),
//! - a bundled validation suite aggregating every distributional identity
//!   into one machine-readable report ([`validate`]).
//!
//! All randomness flows from a single master seed through per-replica,
//! per-stream hashed sub-seeds, so every campaign is bit-reproducible
//! regardless of worker count.

pub mod error;
pub mod estimators;
pub mod local_time;
pub mod process;
pub mod rng;
pub mod scenery;
pub mod stats;
pub mod tolerances;
pub mod validate;

pub use error::{Result, SimError};
pub use local_time::{DxPolicy, GridSpec, LocalTimeField, TestFunction};
pub use process::{PathSample, ProcessFamily, ProcessSpec};
pub use scenery::{DeltaPath, SceneryField};

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

//! Strictly stable Lévy increments via the Chambers–Mallows–Stuck transform.
//!
//! The target characteristic function (unit scale, horizon `t`) is
//!
//! ```text
//! E[e^{iuY(t)}] = exp{ -|u|^delta t (1 + i zeta sgn(u) tan(pi delta / 2)) }
//! ```
//!
//! The CMS transform below samples the standard parameterization with
//! `exp{-|u|^delta (1 - i b sgn(u) tan(pi delta / 2))}`, so `b = -zeta`.
//! Increments over `dt` are `dt^{1/delta}` times a unit-time variate, and at
//! `delta = 2` the variate is `N(0, 2)`, i.e. Brownian motion scaled by
//! `sqrt(2)` in this normalization.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Exp1, Open01};

use super::{validate_steps, PathSample, ProcessSpec};
use crate::error::{Result, SimError};
use crate::rng::{replica_rng, Stream};

/// One standard stable variate with index `alpha ∈ (1, 2]` and skewness
/// `b ∈ [-1, 1]` in the `1 - i b sgn(u) tan(pi alpha/2)` convention.
fn cms_standard<R: Rng>(alpha: f64, b: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.sample(Open01);
    let v = PI * (u - 0.5); // Uniform(-pi/2, pi/2)
    let w: f64 = rng.sample::<f64, _>(Exp1).max(f64::MIN_POSITIVE);

    let t = b * (FRAC_PI_2 * alpha).tan();
    let b0 = t.atan() / alpha;
    let s0 = (1.0 + t * t).powf(0.5 / alpha);
    s0 * (alpha * (v + b0)).sin() / v.cos().powf(1.0 / alpha)
        * ((v - alpha * (v + b0)).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Sample a strictly stable Lévy path by summing i.i.d. CMS increments.
pub fn sample_stable(spec: ProcessSpec, n: usize, dt: f64, seed: u64) -> Result<PathSample> {
    let ProcessSpec::StableLevy { delta, zeta } = spec else {
        return Err(SimError::param("spec", "expected a stable-Lévy spec"));
    };
    validate_steps(n, dt)?;

    let mut rng = replica_rng(seed, Stream::Path, 0);
    let scale = dt.powf(1.0 / delta);
    let b = -zeta;
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    let mut y = 0.0;
    for _ in 0..n {
        y += scale * cms_standard(delta, b, &mut rng);
        values.push(y);
    }
    Ok(PathSample {
        spec,
        dt,
        values,
        seed,
    })
}

/// Theoretical characteristic function `E[e^{iuY(t)}]` as `(re, im)`.
///
/// Used by tests to pin the CMS sign conventions against the definition.
pub fn stable_char_fn(delta: f64, zeta: f64, t: f64, u: f64) -> (f64, f64) {
    let a = u.abs().powf(delta) * t;
    let phase = zeta * (FRAC_PI_2 * delta).tan() * a * u.signum();
    ((-a).exp() * phase.cos(), -(-a).exp() * phase.sin())
}

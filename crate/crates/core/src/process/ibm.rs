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

//! Iterated Brownian motion `Y(t) = B(B~(t))`.
//!
//! The inner motion `B~` runs on the time grid; the outer two-sided motion
//! `B` is realized on a spatial grid covering `[-M, M]` with
//! `M = 1.05 * max|B~|` and evaluated by linear interpolation. The grid uses
//! a fixed cell count of `2n` per side (spacing `M / 2n`), so the whole
//! discrete construction commutes exactly with the self-similar rescaling:
//! scaling time by `c` scales `M` by `sqrt(c)` and every cell with it. At
//! unit horizon the spacing matches the inner time step, keeping the
//! interpolation error at `O(sqrt(dt))`.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{validate_steps, PathSample, ProcessSpec};
use crate::error::Result;
use crate::rng::{replica_rng, Stream};

/// Two-sided Brownian field on a uniform grid, linearly interpolated.
struct TwoSidedPath {
    dx: f64,
    pos: Vec<f64>,
    neg: Vec<f64>,
}

impl TwoSidedPath {
    fn generate<R: Rng>(extent: f64, cells_per_side: usize, rng: &mut R) -> Self {
        let steps = cells_per_side + 1;
        let dx = extent / cells_per_side as f64;
        let sqrt_dx = dx.sqrt();
        let walk = |rng: &mut R| {
            let mut values = Vec::with_capacity(steps + 1);
            values.push(0.0);
            let mut b = 0.0;
            for _ in 0..steps {
                let z: f64 = rng.sample(StandardNormal);
                b += sqrt_dx * z;
                values.push(b);
            }
            values
        };
        let pos = walk(rng);
        let neg = walk(rng);
        TwoSidedPath { dx, pos, neg }
    }

    fn eval(&self, x: f64) -> f64 {
        let side = if x >= 0.0 { &self.pos } else { &self.neg };
        let u = x.abs() / self.dx;
        let j = (u.floor() as usize).min(side.len() - 2);
        let frac = u - j as f64;
        side[j] + frac * (side[j + 1] - side[j])
    }
}

/// Sample an iterated-Brownian-motion path.
pub fn sample_ibm(n: usize, dt: f64, seed: u64) -> Result<PathSample> {
    validate_steps(n, dt)?;

    let mut inner_rng = replica_rng(seed, Stream::Path, 0);
    let sqrt_dt = dt.sqrt();
    let mut inner = Vec::with_capacity(n + 1);
    inner.push(0.0);
    let mut b = 0.0;
    for _ in 0..n {
        let z: f64 = inner_rng.sample(StandardNormal);
        b += sqrt_dt * z;
        inner.push(b);
    }

    let max_abs = inner.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let values = if max_abs == 0.0 {
        vec![0.0; n + 1]
    } else {
        let mut outer_rng = replica_rng(seed, Stream::PathAux, 0);
        let outer = TwoSidedPath::generate(1.05 * max_abs, 2 * n, &mut outer_rng);
        inner.iter().map(|&x| outer.eval(x)).collect()
    };

    Ok(PathSample {
        spec: ProcessSpec::IteratedBm,
        dt,
        values,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ks_two_sample;
    use approx::assert_relative_eq;

    fn marginals(n: usize, dt: f64, n_rep: u64, base: u64) -> Vec<f64> {
        (0..n_rep)
            .map(|r| *sample_ibm(n, dt, base + r).unwrap().values.last().unwrap())
            .collect()
    }

    #[test]
    fn centered_at_unit_time() {
        let xs = marginals(64, 1.0 / 64.0, 20_000, 0);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn unit_time_variance_is_mean_abs_inner() {
        // Var[Y(1)] = E[|B~(1)|] = sqrt(2/pi).
        let xs = marginals(64, 1.0 / 64.0, 30_000, 0);
        let var = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert_relative_eq!(var, (2.0 / std::f64::consts::PI).sqrt(), max_relative = 0.05);
    }

    #[test]
    fn self_similar_with_index_one_quarter() {
        // Empirical CDF of Y(16) / 16^{1/4} matches Y(1).
        let at_16: Vec<f64> = marginals(256, 16.0 / 256.0, 10_000, 0)
            .into_iter()
            .map(|y| y / 2.0)
            .collect();
        let at_1 = marginals(256, 1.0 / 256.0, 10_000, 600_000);
        let ks = ks_two_sample(&at_16, &at_1, 0.01);
        assert!(ks.passed, "D = {} > {}", ks.statistic, ks.threshold);
    }

    #[test]
    fn deterministic_and_starts_at_zero() {
        let a = sample_ibm(32, 0.03125, 5).unwrap();
        let b = sample_ibm(32, 0.03125, 5).unwrap();
        assert_eq!(a.values[0], 0.0);
        assert_eq!(a.values, b.values);
    }
}

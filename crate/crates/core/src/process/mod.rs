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

//! Sample-path generators for the four driver families.
//!
//! All generators are pure functions of `(spec, n, dt, seed)`: same inputs,
//! bit-identical output. Each family is self-similar of index `gamma`:
//! `{Y(ct)} = {c^gamma Y(t)}` in distribution, which downstream campaigns
//! rely on and the validation suite re-checks empirically.

mod fbm;
mod ibm;
mod stable;

pub use fbm::{sample_fbm, sample_fbm_cholesky, FbmPlan};
pub use ibm::sample_ibm;
pub use stable::{sample_stable, stable_char_fn};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Result, SimError};
use crate::rng::{replica_rng, Stream};

/// Relative tolerance when snapping a time to the sample grid.
const GRID_SNAP_TOL: f64 = 1e-9;

/// Driver family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessFamily {
    Brownian,
    StableLevy,
    FractionalBm,
    IteratedBm,
}

/// A fully-parameterized driving process.
///
/// Carries the family plus its shape parameters, and exposes the three
/// exponents the theory attaches to each family: the self-similarity index
/// `gamma`, the upper-tail exponent `alpha` of the self-intersection local
/// time `V_1` (`P[V_1 ≥ x] ≤ C e^{-c x^alpha}`), and the lower-tail exponent
/// `beta` (`P[V_1 ≤ x] ≤ C e^{-c x^{-beta}}`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProcessSpec {
    /// Standard Brownian motion, `Var[Y(t)] = t`.
    Brownian,
    /// Strictly stable Lévy process with index `delta ∈ (1, 2]` and skewness
    /// `zeta ∈ [-1, 1]`, characteristic function
    /// `E[e^{iuY(t)}] = exp{-|u|^delta t (1 + i zeta sgn(u) tan(pi delta/2))}`
    /// (unit scale). `zeta != 0` is accepted but experimental; the
    /// persistence exponent does not depend on it.
    StableLevy { delta: f64, zeta: f64 },
    /// Fractional Brownian motion with Hurst index `hurst ∈ (0, 1)`,
    /// covariance `E[Y(t)Y(s)] = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2`.
    FractionalBm { hurst: f64 },
    /// Iterated Brownian motion `Y(t) = B(B~(t))` with `B` two-sided and
    /// independent of the inner motion `B~`.
    IteratedBm,
}

impl ProcessSpec {
    /// Validated stable-Lévy spec.
    pub fn stable(delta: f64, zeta: f64) -> Result<Self> {
        if !(delta > 1.0 && delta <= 2.0) {
            return Err(SimError::param(
                "delta",
                format!("stability index must lie in (1, 2], got {delta}"),
            ));
        }
        if !(-1.0..=1.0).contains(&zeta) {
            return Err(SimError::param(
                "zeta",
                format!("skewness must lie in [-1, 1], got {zeta}"),
            ));
        }
        Ok(ProcessSpec::StableLevy { delta, zeta })
    }

    /// Validated fractional-Brownian spec.
    pub fn fbm(hurst: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            return Err(SimError::param(
                "hurst",
                format!("Hurst index must lie in (0, 1), got {hurst}"),
            ));
        }
        Ok(ProcessSpec::FractionalBm { hurst })
    }

    pub fn family(&self) -> ProcessFamily {
        match self {
            ProcessSpec::Brownian => ProcessFamily::Brownian,
            ProcessSpec::StableLevy { .. } => ProcessFamily::StableLevy,
            ProcessSpec::FractionalBm { .. } => ProcessFamily::FractionalBm,
            ProcessSpec::IteratedBm => ProcessFamily::IteratedBm,
        }
    }

    /// Self-similarity index of `Y`.
    pub fn gamma(&self) -> f64 {
        match self {
            ProcessSpec::Brownian => 0.5,
            ProcessSpec::StableLevy { delta, .. } => 1.0 / delta,
            ProcessSpec::FractionalBm { hurst } => *hurst,
            ProcessSpec::IteratedBm => 0.25,
        }
    }

    /// Upper-tail exponent of `V_1`.
    pub fn alpha(&self) -> f64 {
        match self {
            ProcessSpec::Brownian => 2.0,
            ProcessSpec::StableLevy { delta, .. } => *delta,
            ProcessSpec::FractionalBm { hurst } => 1.0 / hurst,
            ProcessSpec::IteratedBm => 4.0 / 3.0,
        }
    }

    /// Lower-tail exponent of `V_1`.
    pub fn beta(&self) -> f64 {
        match self {
            ProcessSpec::Brownian => 2.0 / 3.0,
            ProcessSpec::StableLevy { delta, .. } => delta / (2.0 * delta - 1.0),
            ProcessSpec::FractionalBm { .. } => 2.0,
            ProcessSpec::IteratedBm => 4.0 / 3.0,
        }
    }

    /// Self-similarity index of the scenery process `Δ`: `h = 1 - gamma/2`.
    pub fn delta_index(&self) -> f64 {
        1.0 - self.gamma() / 2.0
    }

    /// Sample one path of `n` steps with spacing `dt`.
    pub fn sample(&self, n: usize, dt: f64, seed: u64) -> Result<PathSample> {
        match *self {
            ProcessSpec::Brownian => sample_brownian(n, dt, seed),
            ProcessSpec::StableLevy { .. } => sample_stable(*self, n, dt, seed),
            ProcessSpec::FractionalBm { .. } => sample_fbm(*self, n, dt, seed),
            ProcessSpec::IteratedBm => sample_ibm(n, dt, seed),
        }
    }
}

/// A discretized trajectory `Y(k dt)`, `k = 0..=n`, together with the spec
/// and seed that produced it.
#[derive(Debug, Clone)]
pub struct PathSample {
    pub spec: ProcessSpec,
    pub dt: f64,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl PathSample {
    /// Number of time steps (`values.len() - 1`).
    pub fn n_steps(&self) -> usize {
        self.values.len() - 1
    }

    /// Full horizon `n * dt`.
    pub fn horizon(&self) -> f64 {
        self.n_steps() as f64 * self.dt
    }

    /// Grid index of time `t`, if `t` lies on the grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let k = (t / self.dt).round();
        if k < 0.0 || (t - k * self.dt).abs() > GRID_SNAP_TOL * self.dt.max(t.abs()) {
            return Err(SimError::OffGrid { t, dt: self.dt });
        }
        let k = k as usize;
        if k > self.n_steps() {
            return Err(SimError::OffGrid { t, dt: self.dt });
        }
        Ok(k)
    }

    /// `max_{k <= idx} |Y(k dt)|`.
    pub fn max_abs_until(&self, idx: usize) -> f64 {
        self.values[..=idx].iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_until(self.n_steps())
    }
}

fn validate_steps(n: usize, dt: f64) -> Result<()> {
    if n < 1 {
        return Err(SimError::param("n", "need at least one step"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SimError::param("dt", format!("must be positive, got {dt}")));
    }
    Ok(())
}

/// Standard Brownian motion: cumulative sum of independent `N(0, dt)`
/// increments, `Var[Y(n dt)] = n dt`.
pub fn sample_brownian(n: usize, dt: f64, seed: u64) -> Result<PathSample> {
    validate_steps(n, dt)?;
    let mut rng = replica_rng(seed, Stream::Path, 0);
    let sqrt_dt = dt.sqrt();
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    let mut y = 0.0;
    for _ in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        y += sqrt_dt * z;
        values.push(y);
    }
    Ok(PathSample {
        spec: ProcessSpec::Brownian,
        dt,
        values,
        seed,
    })
}

/// A prepared sampler for repeated replica draws.
///
/// Fractional Brownian motion amortizes its embedding eigenvalues across
/// replicas; the other families carry no per-campaign state. Generators are
/// `Send + Sync` and safe to share across workers.
pub enum PathGenerator {
    Direct { spec: ProcessSpec, n: usize, dt: f64 },
    Fbm(FbmPlan),
}

impl PathGenerator {
    pub fn prepare(spec: ProcessSpec, n: usize, dt: f64) -> Result<Self> {
        match spec {
            ProcessSpec::FractionalBm { .. } => Ok(PathGenerator::Fbm(FbmPlan::new(spec, n, dt)?)),
            _ => {
                validate_steps(n, dt)?;
                Ok(PathGenerator::Direct { spec, n, dt })
            }
        }
    }

    pub fn sample(&self, seed: u64) -> PathSample {
        match self {
            PathGenerator::Direct { spec, n, dt } => spec
                .sample(*n, *dt, seed)
                .expect("parameters validated at prepare time"),
            PathGenerator::Fbm(plan) => plan.sample(seed),
        }
    }

    pub fn n_steps(&self) -> usize {
        match self {
            PathGenerator::Direct { n, .. } => *n,
            PathGenerator::Fbm(plan) => plan.n_steps(),
        }
    }
}

/// Time reversal at the full horizon: `t ↦ Y(T - t) - Y(T)` on the same grid.
///
/// `T` must equal the path's horizon `n * dt`.
pub fn reverse_path(path: &PathSample, t_total: f64) -> Result<PathSample> {
    let k = path.index_of(t_total)?;
    if k != path.n_steps() {
        return Err(SimError::param(
            "t_total",
            format!(
                "time reversal requires the full horizon {} but got {t_total}",
                path.horizon()
            ),
        ));
    }
    let last = path.values[k];
    let values = path.values.iter().rev().map(|v| v - last).collect();
    Ok(PathSample {
        spec: path.spec,
        dt: path.dt,
        values,
        seed: path.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn brownian_starts_at_zero_and_has_unit_variance_at_one() {
        // n=1, dt=1: Var over replicas of values[1] must be 1 up to MC error.
        let n_rep = 20_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for r in 0..n_rep {
            let p = sample_brownian(1, 1.0, r).unwrap();
            assert_eq!(p.values[0], 0.0);
            sum += p.values[1];
            sum_sq += p.values[1] * p.values[1];
        }
        let mean = sum / n_rep as f64;
        let var = sum_sq / n_rep as f64 - mean * mean;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert_relative_eq!(var, 1.0, max_relative = 0.05);
    }

    #[test]
    fn brownian_is_centered_at_unit_time() {
        // n=4, dt=0.25: E[Y(1)] = 0 up to MC error.
        let n_rep = 20_000;
        let mut sum = 0.0;
        for r in 0..n_rep {
            let p = sample_brownian(4, 0.25, 1_000_000 + r).unwrap();
            sum += *p.values.last().unwrap();
        }
        assert!((sum / n_rep as f64).abs() < 0.02);
    }

    #[test]
    fn brownian_running_max_matches_reflection_value() {
        // E[max_{[0,1]} B] = sqrt(2/pi) ≈ 0.7979 by reflection; the grid max
        // undershoots the continuous max by about 0.5826 sqrt(dt).
        let n = 1 << 10;
        let n_rep = 20_000u64;
        let mut acc = 0.0;
        for r in 0..n_rep {
            let p = sample_brownian(n, 1.0 / n as f64, 3_000_000 + r).unwrap();
            acc += p.values.iter().fold(0.0f64, |m, v| m.max(*v));
        }
        let mean = acc / n_rep as f64;
        let expected = (2.0 / std::f64::consts::PI).sqrt();
        assert!(
            mean > expected - 0.030 && mean < expected + 0.008,
            "E[max] = {mean}, continuum value {expected}"
        );
    }

    /// Fine-grid oracle behind the frozen 0.7979 constant; run manually with
    /// `cargo test --release -- --ignored brownian_running_max_oracle`.
    #[test]
    #[ignore]
    fn brownian_running_max_oracle_fine_grid() {
        let n = 1 << 14;
        let n_rep = 100_000u64;
        let mut acc = 0.0;
        for r in 0..n_rep {
            let p = sample_brownian(n, 1.0 / n as f64, 4_000_000 + r).unwrap();
            acc += p.values.iter().fold(0.0f64, |m, v| m.max(*v));
        }
        let mean = acc / n_rep as f64;
        let expected = (2.0 / std::f64::consts::PI).sqrt();
        println!("E[max B over [0,1]] MC = {mean:.6}, reflection = {expected:.6}");
        assert!((mean - expected).abs() < 0.012, "{mean} vs {expected}");
    }

    #[test]
    fn brownian_rejects_bad_parameters() {
        assert!(sample_brownian(0, 1.0, 0).is_err());
        assert!(sample_brownian(4, 0.0, 0).is_err());
        assert!(sample_brownian(4, -1.0, 0).is_err());
    }

    #[test]
    fn brownian_is_deterministic_in_seed() {
        let a = sample_brownian(64, 0.125, 99).unwrap();
        let b = sample_brownian(64, 0.125, 99).unwrap();
        assert_eq!(a.values, b.values);
        let c = sample_brownian(64, 0.125, 100).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn reverse_of_constant_zero_is_constant_zero() {
        let p = PathSample {
            spec: ProcessSpec::Brownian,
            dt: 1.0,
            values: vec![0.0; 5],
            seed: 0,
        };
        let r = reverse_path(&p, 4.0).unwrap();
        assert_eq!(r.values, vec![0.0; 5]);
    }

    #[test]
    fn reverse_matches_hand_computation() {
        let p = PathSample {
            spec: ProcessSpec::Brownian,
            dt: 1.0,
            values: vec![0.0, 1.0, 3.0],
            seed: 0,
        };
        let r = reverse_path(&p, 2.0).unwrap();
        assert_eq!(r.values, vec![0.0, -2.0, -3.0]);
    }

    #[test]
    fn reverse_requires_full_horizon() {
        let p = sample_brownian(8, 0.5, 1).unwrap();
        assert!(reverse_path(&p, 2.0).is_err());
        assert!(reverse_path(&p, 4.1).is_err());
        assert!(reverse_path(&p, 4.0).is_ok());
    }

    #[test]
    fn spec_exponents_match_theory() {
        let brownian = ProcessSpec::Brownian;
        assert_eq!(brownian.gamma(), 0.5);
        assert_eq!(brownian.alpha(), 2.0);
        assert_relative_eq!(brownian.beta(), 2.0 / 3.0);

        let stable = ProcessSpec::stable(1.5, 0.0).unwrap();
        assert_relative_eq!(stable.gamma(), 2.0 / 3.0);
        assert_eq!(stable.alpha(), 1.5);
        assert_relative_eq!(stable.beta(), 0.75);

        let fbm = ProcessSpec::fbm(0.75).unwrap();
        assert_eq!(fbm.gamma(), 0.75);
        assert_relative_eq!(fbm.alpha(), 4.0 / 3.0);
        assert_eq!(fbm.beta(), 2.0);

        let ibm = ProcessSpec::IteratedBm;
        assert_eq!(ibm.gamma(), 0.25);
        assert_relative_eq!(ibm.alpha(), 4.0 / 3.0);
        assert_relative_eq!(ibm.beta(), 4.0 / 3.0);
        assert_relative_eq!(ibm.delta_index(), 0.875);
    }

    #[test]
    fn spec_constructors_validate() {
        assert!(ProcessSpec::stable(0.5, 0.0).is_err());
        assert!(ProcessSpec::stable(1.0, 0.0).is_err());
        assert!(ProcessSpec::stable(2.0, 0.0).is_ok());
        assert!(ProcessSpec::stable(2.1, 0.0).is_err());
        assert!(ProcessSpec::stable(1.5, 1.5).is_err());
        assert!(ProcessSpec::fbm(0.0).is_err());
        assert!(ProcessSpec::fbm(1.0).is_err());
        assert!(ProcessSpec::fbm(0.5).is_ok());
    }
}

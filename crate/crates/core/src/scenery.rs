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

//! White-noise scenery and the discretized process
//! `Δ_t = ∫ L_t(x) dW(x) ≈ sum_i L_t(x_i) dW_i`.
//!
//! Conditionally on the driving path, `Δ_t` is centered Gaussian with
//! variance `V_t`, and the conditional covariance of two times is
//! `sum_i L_s(x_i) L_t(x_i) dx`. Scenery cells are i.i.d. `N(0, dx)` drawn
//! from a seed stream disjoint from the path's, so `Y` and `W` are
//! independent by construction.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Result, SimError};
use crate::local_time::{deposit_segment, GridSpec, LocalTimeField};
use crate::process::PathSample;
use crate::rng::{replica_rng, Stream};

/// One realization of the white-noise increments over a grid.
#[derive(Debug, Clone)]
pub struct SceneryField {
    pub grid: GridSpec,
    /// Independent centered Gaussian cells, each with variance `dx`.
    pub dw: Vec<f64>,
    pub seed: u64,
}

/// Sample a scenery: `dW_i ~ N(0, dx)`, i.i.d. across cells.
pub fn sample_scenery(grid: &GridSpec, seed: u64) -> SceneryField {
    let mut rng = replica_rng(seed, Stream::Scenery, 0);
    let sqrt_dx = grid.dx.sqrt();
    let dw = (0..grid.bins)
        .map(|_| sqrt_dx * rng.sample::<f64, _>(StandardNormal))
        .collect();
    SceneryField {
        grid: grid.clone(),
        dw,
        seed,
    }
}

/// The discretized scenery process at a field's checkpoints.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaPath {
    pub checkpoints: Vec<f64>,
    pub delta: Vec<f64>,
    /// `max_{t_l <= t_j} Δ_{t_l}`, nondecreasing by construction.
    pub running_sup: Vec<f64>,
    /// Conditional variance `V_{t_j}` copied from the local-time field.
    pub cond_var: Vec<f64>,
}

/// Contract `Δ_{t_j} = sum_i L_{t_j}(x_i) dW_i` over a shared grid.
pub fn build_delta(field: &LocalTimeField, scenery: &SceneryField) -> Result<DeltaPath> {
    if field.grid != scenery.grid {
        return Err(SimError::GridMismatch);
    }
    let mut delta = Vec::with_capacity(field.checkpoints.len());
    let mut running_sup = Vec::with_capacity(field.checkpoints.len());
    let mut sup = f64::NEG_INFINITY;
    for j in 0..field.checkpoints.len() {
        let d: f64 = field
            .row(j)
            .iter()
            .zip(&scenery.dw)
            .map(|(l, w)| l * w)
            .sum();
        sup = sup.max(d);
        delta.push(d);
        running_sup.push(sup);
    }
    Ok(DeltaPath {
        checkpoints: field.checkpoints.clone(),
        delta,
        running_sup,
        cond_var: field.v.clone(),
    })
}

/// Conditional covariance `E[Δ_s Δ_t | Y] = sum_i L_s(x_i) L_t(x_i) dx`
/// between two checkpoints; always nonnegative.
pub fn conditional_covariance(field: &LocalTimeField, s: f64, t: f64) -> Result<f64> {
    let js = field.checkpoint_index(s)?;
    let jt = field.checkpoint_index(t)?;
    Ok(field
        .row(js)
        .iter()
        .zip(field.row(jt))
        .map(|(a, b)| a * b)
        .sum::<f64>()
        * field.grid.dx)
}

/// Slepian positivity precondition: for checkpoints `t <= s`,
/// `E[Δ_t (Δ_s - Δ_t) | Y] = sum_i L_t (L_s - L_t) dx >= 0` pathwise,
/// which follows from the monotonicity of `t ↦ L_t(x)`.
pub fn delta_increment_cov_check(field: &LocalTimeField, t: f64, s: f64) -> Result<bool> {
    let cov = conditional_covariance(field, t, s)?;
    let v_t = field.self_intersection(t)?;
    Ok(cov - v_t >= -f64::EPSILON * v_t.max(1.0))
}

/// Checkpoint layout used by path exports: geometric horizons
/// `T, T/2, T/4, ...` down to the grid resolution, plus a uniform fine grid
/// on `[0, min(1, T)]`, all snapped to the time grid.
pub fn checkpoint_grid(t_max: f64, dt: f64, fine_step: f64) -> Vec<f64> {
    let mut indices = std::collections::BTreeSet::new();
    let n = (t_max / dt).round() as usize;
    let mut t = t_max;
    while t >= dt {
        indices.insert(((t / dt).round() as usize).min(n));
        t /= 2.0;
    }
    let fine_step = fine_step.max(dt);
    let fine_end = t_max.min(1.0);
    let mut f = fine_step;
    while f <= fine_end + 1e-12 {
        indices.insert(((f / dt).round() as usize).min(n));
        f += fine_step;
    }
    indices.into_iter().map(|k| k as f64 * dt).collect()
}

/// A record of the incremental sweep at one time-grid index.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRecord {
    /// Time-grid index; the time is `idx * dt`.
    pub idx: usize,
    pub delta: f64,
    /// Supremum of `Δ` over all grid times up to `idx`, including `Δ_0 = 0`.
    pub running_sup: f64,
    /// `V` at `idx`, accumulated incrementally.
    pub v: f64,
}

/// Walk a path's segments once against a scenery, recording `Δ`, its running
/// supremum over the full time grid, and `V` at the requested indices.
///
/// Equivalent to [`build_delta`] on a field with every grid point as a
/// checkpoint, at `O(path)` memory.
pub fn sweep_delta(
    path: &PathSample,
    scenery: &SceneryField,
    at_indices: &[usize],
) -> Result<Vec<SweepRecord>> {
    let grid = &scenery.grid;
    if at_indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SimError::param("at_indices", "must be strictly increasing"));
    }
    if let Some(&last) = at_indices.last() {
        if last > path.n_steps() {
            return Err(SimError::param("at_indices", "beyond the path horizon"));
        }
    }

    let inv_dx = 1.0 / grid.dx;
    let mut occ = vec![0.0f64; grid.bins];
    let mut delta = 0.0;
    let mut v = 0.0;
    let mut sup = 0.0f64; // includes Δ_0 = 0
    let mut out = Vec::with_capacity(at_indices.len());
    let mut next = at_indices.iter().copied().peekable();

    if next.peek() == Some(&0) {
        out.push(SweepRecord {
            idx: 0,
            delta: 0.0,
            running_sup: 0.0,
            v: 0.0,
        });
        next.next();
    }
    for k in 0..path.n_steps() {
        deposit_segment(grid, path.values[k], path.values[k + 1], path.dt, |b, w| {
            delta += w * scenery.dw[b] * inv_dx;
            v += (2.0 * occ[b] + w) * w * inv_dx;
            occ[b] += w;
        });
        sup = sup.max(delta);
        if next.peek() == Some(&(k + 1)) {
            out.push(SweepRecord {
                idx: k + 1,
                delta,
                running_sup: sup,
                v,
            });
            next.next();
        }
    }
    Ok(out)
}

/// Lean sweep for campaigns that only need `Δ` itself: walks the segments
/// once and calls `visit(k, delta_k)` after each step `k = 1..=n`. Skips the
/// occupation bookkeeping entirely, so it is the cheapest way to drive
/// suprema and time integrals of `Δ` over the full grid.
pub fn sweep_delta_visit<F: FnMut(usize, f64)>(
    path: &PathSample,
    scenery: &SceneryField,
    mut visit: F,
) {
    let grid = &scenery.grid;
    let inv_dx = 1.0 / grid.dx;
    let mut delta = 0.0;
    for k in 0..path.n_steps() {
        deposit_segment(grid, path.values[k], path.values[k + 1], path.dt, |b, w| {
            delta += w * scenery.dw[b] * inv_dx;
        });
        visit(k + 1, delta);
    }
}

/// Per-step deposit lists for one path on one grid, so that many sceneries
/// can be swept against the same path without re-binning (used by the
/// conditional Slepian checks).
pub struct StepDeposits {
    offsets: Vec<u32>,
    bins: Vec<u32>,
    weights: Vec<f64>,
    inv_dx: f64,
}

impl StepDeposits {
    pub fn build(path: &PathSample, grid: &GridSpec) -> Self {
        let n = path.n_steps();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut bins = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0u32);
        for k in 0..n {
            deposit_segment(grid, path.values[k], path.values[k + 1], path.dt, |b, w| {
                bins.push(b as u32);
                weights.push(w);
            });
            offsets.push(bins.len() as u32);
        }
        StepDeposits {
            offsets,
            bins,
            weights,
            inv_dx: 1.0 / grid.dx,
        }
    }

    pub fn n_steps(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Run `Δ` against one scenery, calling `visit(k, delta_k)` after each
    /// step `k = 1..=n`.
    pub fn sweep<F: FnMut(usize, f64)>(&self, dw: &[f64], mut visit: F) {
        let mut delta = 0.0;
        for k in 0..self.n_steps() {
            let (a, b) = (self.offsets[k] as usize, self.offsets[k + 1] as usize);
            for e in a..b {
                delta += self.weights[e] * dw[self.bins[e] as usize] * self.inv_dx;
            }
            visit(k + 1, delta);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_time::{compute_local_time, DxPolicy};
    use crate::process::{sample_brownian, ProcessSpec};
    use crate::stats::ks_vs_standard_normal;
    use crate::tolerances::EXACT_REL;
    use approx::assert_relative_eq;

    fn constant_path(n: usize, horizon: f64) -> PathSample {
        PathSample {
            spec: ProcessSpec::Brownian,
            dt: horizon / n as f64,
            values: vec![0.0; n + 1],
            seed: 0,
        }
    }

    #[test]
    fn scenery_cells_have_variance_dx() {
        let grid = GridSpec {
            x_min: 0.0,
            dx: 1.0,
            bins: 100_000,
        };
        let field = sample_scenery(&grid, 42);
        let n = field.dw.len() as f64;
        let mean = field.dw.iter().sum::<f64>() / n;
        let var = field.dw.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / n;
        assert_relative_eq!(var, 1.0, max_relative = 0.03);
    }

    #[test]
    fn scenery_total_over_unit_interval_is_standard_normal() {
        // sum of dW over [0,1] is N(0,1) regardless of the cell width.
        for k in [4u32, 8] {
            let dx = 0.5f64.powi(k as i32);
            let bins = (1.0 / dx) as usize;
            let grid = GridSpec {
                x_min: 0.0,
                dx,
                bins,
            };
            let sums: Vec<f64> = (0..5000u64)
                .map(|s| sample_scenery(&grid, 9000 + s).dw.iter().sum())
                .collect();
            let ks = ks_vs_standard_normal(&sums, 0.01);
            assert!(ks.passed, "k = {k}: D = {} > {}", ks.statistic, ks.threshold);
        }
    }

    #[test]
    fn scenery_is_deterministic_in_seed() {
        let grid = GridSpec {
            x_min: -1.0,
            dx: 0.125,
            bins: 16,
        };
        let a = sample_scenery(&grid, 7);
        let b = sample_scenery(&grid, 7);
        assert_eq!(a.dw, b.dw);
    }

    #[test]
    fn delta_is_zero_at_time_zero() {
        let path = sample_brownian(64, 1.0 / 64.0, 3).unwrap();
        let field = compute_local_time(&path, &[0.0, 1.0], &DxPolicy::default()).unwrap();
        let scenery = sample_scenery(&field.grid, 5);
        let dp = build_delta(&field, &scenery).unwrap();
        assert_eq!(dp.delta[0], 0.0);
        assert_eq!(dp.cond_var[0], 0.0);
        assert!(dp.running_sup.windows(2).all(|w| w[1] >= w[0]));
        assert!(dp
            .running_sup
            .iter()
            .zip(&dp.delta)
            .all(|(sup, d)| sup >= d));
    }

    #[test]
    fn constant_path_delta_has_variance_t_squared_over_dx() {
        // Single occupied bin: Δ_t = (t/dx) dW_bin ~ N(0, t^2/dx).
        let path = constant_path(16, 1.0);
        let field = compute_local_time(&path, &[1.0], &DxPolicy::Fixed(0.1)).unwrap();
        let n_rep = 20_000u64;
        let mut sum_sq = 0.0;
        for s in 0..n_rep {
            let scenery = sample_scenery(&field.grid, s);
            let dp = build_delta(&field, &scenery).unwrap();
            sum_sq += dp.delta[0] * dp.delta[0];
        }
        assert_relative_eq!(sum_sq / n_rep as f64, 10.0, max_relative = 0.05);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let path = sample_brownian(64, 1.0 / 64.0, 3).unwrap();
        let field = compute_local_time(&path, &[1.0], &DxPolicy::default()).unwrap();
        let other = GridSpec {
            x_min: -2.0,
            dx: 0.5,
            bins: 8,
        };
        let scenery = sample_scenery(&other, 1);
        assert!(matches!(
            build_delta(&field, &scenery),
            Err(SimError::GridMismatch)
        ));
    }

    #[test]
    fn unconditional_delta_variance_matches_mean_self_intersection() {
        // Law of total variance: Var[Δ_1] = E[V_1] ≈ 1.06385 for Brownian Y.
        let expected = 8.0 / (3.0 * (2.0 * std::f64::consts::PI).sqrt());
        let n_rep = 4000u64;
        let mut sum_sq = 0.0;
        for r in 0..n_rep {
            let path = sample_brownian(2048, 1.0 / 2048.0, 50_000 + r).unwrap();
            let field = compute_local_time(&path, &[1.0], &DxPolicy::default()).unwrap();
            let scenery = sample_scenery(&field.grid, 1_050_000 + r);
            let dp = build_delta(&field, &scenery).unwrap();
            sum_sq += dp.delta[0] * dp.delta[0];
        }
        assert_relative_eq!(sum_sq / n_rep as f64, expected, max_relative = 0.08);
    }

    #[test]
    fn conditional_covariance_diagonal_is_v() {
        let path = sample_brownian(256, 1.0 / 128.0, 21).unwrap();
        let field = compute_local_time(&path, &[1.0, 2.0], &DxPolicy::default()).unwrap();
        let cov = conditional_covariance(&field, 1.0, 1.0).unwrap();
        assert_relative_eq!(cov, field.v[0], max_relative = EXACT_REL);
        assert!(conditional_covariance(&field, 1.0, 2.0).unwrap() >= 0.0);
        assert!(conditional_covariance(&field, 0.5, 1.0).is_err());
    }

    #[test]
    fn conditional_covariance_constant_path_arithmetic() {
        // L_1 = 10, L_2 = 20 in one bin: cov = 10 * 20 * 0.1 = 20.
        let path = constant_path(20, 2.0);
        let field = compute_local_time(&path, &[1.0, 2.0], &DxPolicy::Fixed(0.1)).unwrap();
        let cov = conditional_covariance(&field, 1.0, 2.0).unwrap();
        assert_relative_eq!(cov, 20.0, max_relative = EXACT_REL);
    }

    #[test]
    fn increment_cov_check_holds() {
        // s = t gives exactly zero; monotone local time gives >= 0 pathwise.
        let path = constant_path(16, 1.0);
        let field =
            compute_local_time(&path, &[0.5, 1.0], &DxPolicy::Fixed(0.1)).unwrap();
        assert!(delta_increment_cov_check(&field, 1.0, 1.0).unwrap());
        assert!(delta_increment_cov_check(&field, 0.5, 1.0).unwrap());

        for r in 0..200u64 {
            let path = sample_brownian(512, 1.0 / 512.0, 60_000 + r).unwrap();
            let field =
                compute_local_time(&path, &[0.5, 1.0], &DxPolicy::default()).unwrap();
            assert!(delta_increment_cov_check(&field, 0.5, 1.0).unwrap());
        }
    }

    #[test]
    fn sweep_agrees_with_field_construction() {
        let path = sample_brownian(512, 1.0 / 256.0, 33).unwrap();
        let cps = [0.5, 1.0, 2.0];
        let field = compute_local_time(&path, &cps, &DxPolicy::default()).unwrap();
        let scenery = sample_scenery(&field.grid, 77);
        let dp = build_delta(&field, &scenery).unwrap();

        let indices: Vec<usize> = cps.iter().map(|&t| path.index_of(t).unwrap()).collect();
        let records = sweep_delta(&path, &scenery, &indices).unwrap();
        for (r, j) in records.iter().zip(0..cps.len()) {
            assert_relative_eq!(r.delta, dp.delta[j], epsilon = 1e-9);
            assert_relative_eq!(r.v, field.v[j], max_relative = 1e-9);
            // The sweep sup covers every grid point, so it dominates the
            // checkpoint-only sup.
            assert!(r.running_sup >= dp.running_sup[j] - 1e-12);
        }
    }

    #[test]
    fn step_deposits_match_sweep() {
        let path = sample_brownian(256, 1.0 / 256.0, 44).unwrap();
        let grid = GridSpec::for_path(&path, &DxPolicy::default()).unwrap();
        let scenery = sample_scenery(&grid, 55);
        let deposits = StepDeposits::build(&path, &grid);
        let mut last = 0.0;
        deposits.sweep(&scenery.dw, |_, d| last = d);
        let records = sweep_delta(&path, &scenery, &[path.n_steps()]).unwrap();
        assert_relative_eq!(last, records[0].delta, epsilon = 1e-10);
    }

    #[test]
    fn conditional_gaussianity_for_fixed_path() {
        // For a fixed path, Δ_1 / sqrt(V_1) over scenery replicas is N(0,1).
        let path = sample_brownian(1024, 1.0 / 1024.0, 101).unwrap();
        let field = compute_local_time(&path, &[1.0], &DxPolicy::default()).unwrap();
        let sqrt_v = field.v[0].sqrt();
        let normalized: Vec<f64> = (0..4000u64)
            .map(|s| {
                let scenery = sample_scenery(&field.grid, 3_000_000 + s);
                build_delta(&field, &scenery).unwrap().delta[0] / sqrt_v
            })
            .collect();
        let ks = ks_vs_standard_normal(&normalized, 0.01);
        assert!(ks.passed, "D = {} > {}", ks.statistic, ks.threshold);
    }

    #[test]
    fn checkpoint_grid_is_sorted_dedup_and_snapped() {
        let cps = checkpoint_grid(4.0, 1.0 / 64.0, 0.25);
        assert!(cps.windows(2).all(|w| w[0] < w[1]));
        assert!(cps.contains(&4.0) && cps.contains(&2.0) && cps.contains(&1.0));
        assert!(cps.contains(&0.25) && cps.contains(&0.5));
        for &t in &cps {
            let k = (t / (1.0 / 64.0)).round();
            assert!((t - k * (1.0 / 64.0)).abs() < 1e-12);
        }
    }
}

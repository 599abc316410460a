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

//! Property tests for the structural invariants: exact identities that must
//! hold for arbitrary inputs, not just the seeded campaign fixtures.

use proptest::prelude::*;

use scenery_core::local_time::{compute_local_time, DxPolicy};
use scenery_core::process::{reverse_path, PathSample, ProcessSpec};
use scenery_core::scenery::{checkpoint_grid, sample_scenery, sweep_delta};
use scenery_core::stats::{ks_two_sample, wilson_95};

fn arbitrary_path() -> impl Strategy<Value = PathSample> {
    (
        prop::collection::vec(-10.0f64..10.0, 1..200),
        1e-3f64..1.0,
    )
        .prop_map(|(mut steps, dt)| {
            steps.insert(0, 0.0);
            let values: Vec<f64> = steps
                .iter()
                .scan(0.0, |acc, s| {
                    *acc += s;
                    Some(*acc)
                })
                .collect();
            PathSample {
                spec: ProcessSpec::Brownian,
                dt,
                values,
                seed: 0,
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mass_is_conserved_for_arbitrary_paths(path in arbitrary_path()) {
        let horizon = path.horizon();
        let field = compute_local_time(&path, &[horizon], &DxPolicy::default()).unwrap();
        let mass: f64 = field.row(0).iter().sum::<f64>() * field.grid.dx;
        prop_assert!((mass - horizon).abs() <= 1e-9 * horizon.max(1.0));
        prop_assert!(field.row(0).iter().all(|&l| l >= 0.0));
        prop_assert!(field.v[0] > 0.0);
    }

    #[test]
    fn reversal_is_an_involution(path in arbitrary_path()) {
        let horizon = path.horizon();
        let twice = reverse_path(&reverse_path(&path, horizon).unwrap(), horizon).unwrap();
        for (a, b) in path.values.iter().zip(&twice.values) {
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn delta_sweep_matches_field_route(path in arbitrary_path()) {
        let field = compute_local_time(&path, &[path.horizon()], &DxPolicy::default()).unwrap();
        let scenery = sample_scenery(&field.grid, 42);
        let records = sweep_delta(&path, &scenery, &[path.n_steps()]).unwrap();
        let direct: f64 = field
            .row(0)
            .iter()
            .zip(&scenery.dw)
            .map(|(l, w)| l * w)
            .sum();
        let scale = direct.abs().max(1.0);
        prop_assert!((records[0].delta - direct).abs() <= 1e-9 * scale);
        prop_assert!((records[0].v - field.v[0]).abs() <= 1e-9 * field.v[0].max(1.0));
    }

    #[test]
    fn wilson_interval_brackets_and_bounds(k in 0u64..1000, extra in 0u64..1000) {
        let n = k + extra + 1;
        let ci = wilson_95(k, n);
        prop_assert!(ci.lo <= ci.p_hat && ci.p_hat <= ci.hi);
        prop_assert!((0.0..=1.0).contains(&ci.lo));
        prop_assert!((0.0..=1.0).contains(&ci.hi));
    }

    #[test]
    fn ks_statistic_is_zero_on_identical_samples(
        xs in prop::collection::vec(-100.0f64..100.0, 10..200),
    ) {
        let out = ks_two_sample(&xs, &xs, 0.01);
        prop_assert!(out.statistic == 0.0);
        prop_assert!(out.passed);
    }

    #[test]
    fn checkpoint_grid_is_sorted_and_on_grid(
        exp_t in 1u32..10,
        exp_dt in 3u32..10,
    ) {
        let t_max = 2f64.powi(exp_t as i32);
        let dt = 2f64.powi(-(exp_dt as i32));
        let cps = checkpoint_grid(t_max, dt, 0.25);
        prop_assert!(!cps.is_empty());
        prop_assert!(cps.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(cps.last() == Some(&t_max));
        for &t in &cps {
            let k = (t / dt).round();
            prop_assert!((t - k * dt).abs() < 1e-12 * t.max(1.0));
        }
    }
}

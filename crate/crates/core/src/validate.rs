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

//! The bundled validation suite: every distributional identity, inequality
//! and exactness property for one configured driver family, aggregated into
//! a machine-readable report.
//!
//! Scheduled KS tests run at level [`KS_LEVEL`](crate::tolerances::KS_LEVEL)
//! and the suite tolerates at most
//! [`KS_FAILURE_BUDGET`](crate::tolerances::KS_FAILURE_BUDGET) failures per
//! run (multiple-testing budget); every non-KS check must pass outright.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::estimators::{
    maximal_inequality_check, sample_delta_records, slepian_check, tail_check_delta1, Campaign,
};
use crate::local_time::{
    comparison_check, compute_local_time, occupation_residual, superadditivity_check, DxPolicy,
    TestFunction,
};
use crate::process::{reverse_path, PathGenerator, ProcessFamily, ProcessSpec};
use crate::rng::{derive_seed, Stream};
use crate::scenery::{build_delta, sample_scenery};
use crate::stats::{correlation, ks_two_sample, ks_vs_standard_normal, mean_and_se};
use crate::tolerances::{
    DISCRETIZATION_TOL, EXACT_REL, KS_FAILURE_BUDGET, KS_LEVEL, OCCUPATION_RESIDUAL_TOL, TAIL_DT,
    VALIDATE_DT,
};

/// Sample correlation magnitude accepted as "independent" for the Lévy
/// superadditivity split at ten thousand replicas.
const CORR_INDEPENDENCE_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Two-sample or one-sample KS test, counted against the failure budget.
    Ks,
    /// Pathwise inequality with zero tolerated violations.
    Inequality,
    /// Identity that must hold to machine precision.
    Exact,
    /// One-sided tail envelope admissibility.
    Envelope,
    /// Monte Carlo consistency within confidence slack.
    Consistency,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub kind: CheckKind,
    pub passed: bool,
    pub statistic: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub spec: ProcessSpec,
    pub master_seed: u64,
    pub checks: Vec<CheckResult>,
    pub ks_total: usize,
    pub ks_failures: usize,
    pub ks_budget: usize,
    pub passed: bool,
}

/// Budgets and discretization for one suite run.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationConfig {
    pub spec: ProcessSpec,
    pub master_seed: u64,
    /// Time step for identity campaigns.
    pub dt: f64,
    /// Time step for the pathwise inequality campaigns, finer than `dt`
    /// because the comparison bound needs a well-resolved `V_1`.
    pub dt_inequality: f64,
    /// Replicas per KS sample.
    pub n_identity: u64,
    /// Paths per inequality check.
    pub n_inequality: u64,
    /// Replicas for the tail envelopes.
    pub n_tails: u64,
    pub n_slepian_paths: u64,
    pub n_slepian_sceneries: u64,
    /// Paths for the occupation-residual median.
    pub n_occupation: u64,
    pub dx_policy: DxPolicy,
}

impl ValidationConfig {
    /// Full budgets: 10^4-replica KS samples, 10^4-path inequalities,
    /// 10^5-replica tails, 50 x 10^3 conditional checks.
    pub fn standard(spec: ProcessSpec, master_seed: u64) -> Self {
        ValidationConfig {
            spec,
            master_seed,
            dt: VALIDATE_DT,
            dt_inequality: 1.0 / 1024.0,
            n_identity: 10_000,
            n_inequality: 10_000,
            n_tails: 100_000,
            n_slepian_paths: 50,
            n_slepian_sceneries: 1_000,
            n_occupation: 100,
            dx_policy: DxPolicy::default(),
        }
    }

    /// Reduced budgets for smoke tests; statistically meaningful but not the
    /// acceptance configuration.
    pub fn quick(spec: ProcessSpec, master_seed: u64) -> Self {
        ValidationConfig {
            spec,
            master_seed,
            dt: 1.0 / 64.0,
            dt_inequality: 1.0 / 256.0,
            n_identity: 1_500,
            n_inequality: 400,
            n_tails: 20_000,
            n_slepian_paths: 8,
            n_slepian_sceneries: 300,
            n_occupation: 9,
            dx_policy: DxPolicy::default(),
        }
    }

    fn submaster(&self, tag: u64) -> u64 {
        derive_seed(self.master_seed, Stream::Campaign, tag)
    }

    fn campaign(&self, n_replicas: u64, seed_tag: u64, dt: f64) -> Campaign {
        Campaign {
            spec: self.spec,
            dt,
            n_replicas,
            master_seed: self.submaster(seed_tag),
            dx_policy: self.dx_policy,
        }
    }
}

fn ks_result(name: impl Into<String>, xs: &[f64], ys: &[f64]) -> CheckResult {
    let ks = ks_two_sample(xs, ys, KS_LEVEL);
    CheckResult {
        name: name.into(),
        kind: CheckKind::Ks,
        passed: ks.passed,
        statistic: ks.statistic,
        threshold: ks.threshold,
        detail: format!("n={} m={}", ks.n, ks.m),
    }
}

/// Marginals of `Y` at fixed times over independent replicas.
fn y_marginals(
    cfg: &ValidationConfig,
    seed_tag: u64,
    horizon: f64,
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let n_steps = (horizon / cfg.dt).round() as usize;
    let generator = PathGenerator::prepare(cfg.spec, n_steps, cfg.dt)?;
    let master = cfg.submaster(seed_tag);
    let indices: Vec<usize> = times
        .iter()
        .map(|&t| (t / cfg.dt).round() as usize)
        .collect();
    Ok((0..cfg.n_identity)
        .into_par_iter()
        .map(|r| {
            let path = generator.sample(derive_seed(master, Stream::Path, r));
            indices.iter().map(|&k| path.values[k]).collect()
        })
        .collect())
}

/// `Δ` marginals at fixed times over independent `(path, scenery)` replicas.
fn delta_marginals(
    cfg: &ValidationConfig,
    seed_tag: u64,
    horizon: f64,
    times: &[f64],
) -> Result<Vec<Vec<f64>>> {
    let n_steps = (horizon / cfg.dt).round() as usize;
    let generator = PathGenerator::prepare(cfg.spec, n_steps, cfg.dt)?;
    let campaign = cfg.campaign(cfg.n_identity, seed_tag, cfg.dt);
    let indices: Vec<usize> = times
        .iter()
        .map(|&t| (t / cfg.dt).round() as usize)
        .collect();
    Ok((0..cfg.n_identity)
        .into_par_iter()
        .map(|r| {
            let (_, records) = sample_delta_records(&generator, &campaign, r, &indices);
            records.iter().map(|rec| rec.delta).collect()
        })
        .collect())
}

/// Samples of `V` at one horizon, holding the step count fixed so the
/// discretization commutes with the self-similar rescaling: a path over
/// `[0, c]` with `n` steps is distributed as `c^gamma` times a path over
/// `[0, 1]` with `n` steps, bins and all.
fn v_at_horizon(cfg: &ValidationConfig, seed_tag: u64, horizon: f64) -> Result<Vec<f64>> {
    let n_steps = (1.0 / cfg.dt).round() as usize;
    let dt = horizon / n_steps as f64;
    let generator = PathGenerator::prepare(cfg.spec, n_steps, dt)?;
    let master = cfg.submaster(seed_tag);
    Ok((0..cfg.n_identity)
        .into_par_iter()
        .map(|r| {
            let path = generator.sample(derive_seed(master, Stream::Path, r));
            let field = compute_local_time(&path, &[horizon], &cfg.dx_policy)
                .expect("horizon lies on the grid");
            field.v[0]
        })
        .collect())
}

fn column(data: &[Vec<f64>], j: usize) -> Vec<f64> {
    data.iter().map(|row| row[j]).collect()
}

/// (H2) Self-similarity of `Y`: `Y(c)/c^gamma` matches `Y(1)` for
/// `c ∈ {2, 4, 16}`.
fn check_y_self_similarity(
    cfg: &ValidationConfig,
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    times: &[f64],
) -> Vec<CheckResult> {
    let gamma = cfg.spec.gamma();
    let t1 = times.iter().position(|&t| t == 1.0).unwrap();
    let reference = column(b, t1);
    [2.0f64, 4.0, 16.0]
        .iter()
        .map(|&c| {
            let j = times.iter().position(|&t| t == c).unwrap();
            let scaled: Vec<f64> = a.iter().map(|row| row[j] / c.powf(gamma)).collect();
            ks_result(format!("y_self_similarity_c{c}"), &scaled, &reference)
        })
        .collect()
}

/// Stationary increments of `Y`: `Y(s+1) - Y(s)` matches `Y(1)`.
fn check_y_stationary_increments(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    times: &[f64],
) -> Vec<CheckResult> {
    let t1 = times.iter().position(|&t| t == 1.0).unwrap();
    let reference = column(b, t1);
    [0.5f64, 1.0, 2.0]
        .iter()
        .map(|&s| {
            let js = times.iter().position(|&t| t == s).unwrap();
            let je = times.iter().position(|&t| t == s + 1.0).unwrap();
            let increments: Vec<f64> = a.iter().map(|row| row[je] - row[js]).collect();
            ks_result(format!("y_stationary_increment_s{s}"), &increments, &reference)
        })
        .collect()
}

/// (H3) Time reversal of `Y` at `T = 2`: marginals of `Y(T-t) - Y(T)` match
/// `+Y(t)` or `-Y(t)`; both signs are tested and the passing one recorded.
fn check_y_time_reversal(a: &[Vec<f64>], b: &[Vec<f64>], times: &[f64]) -> Vec<CheckResult> {
    let big_t = 2.0;
    [0.5f64, 1.0, 2.0]
        .iter()
        .map(|&t| {
            let j_rev = times.iter().position(|&u| u == big_t - t);
            let j_t_end = times.iter().position(|&u| u == big_t).unwrap();
            let reversed: Vec<f64> = a
                .iter()
                .map(|row| {
                    let at = match j_rev {
                        Some(j) => row[j],
                        None => 0.0, // T - t = 0
                    };
                    at - row[j_t_end]
                })
                .collect();
            let j = times.iter().position(|&u| u == t).unwrap();
            let plus = column(b, j);
            let minus: Vec<f64> = plus.iter().map(|x| -x).collect();
            let ks_plus = ks_two_sample(&reversed, &plus, KS_LEVEL);
            let ks_minus = ks_two_sample(&reversed, &minus, KS_LEVEL);
            let sign = match (ks_plus.passed, ks_minus.passed) {
                (true, true) => "both",
                (true, false) => "+",
                (false, true) => "-",
                (false, false) => "neither",
            };
            CheckResult {
                name: format!("y_time_reversal_t{t}"),
                kind: CheckKind::Ks,
                passed: ks_plus.passed || ks_minus.passed,
                statistic: ks_plus.statistic.min(ks_minus.statistic),
                threshold: ks_plus.threshold,
                detail: format!("sign={sign}"),
            }
        })
        .collect()
}

/// Scaling of the self-intersection local time: `V_c / c^{2-gamma}`
/// matches `V_1` for `c ∈ {2, 4}`.
fn check_v_scaling(cfg: &ValidationConfig) -> Result<Vec<CheckResult>> {
    let index = 2.0 - cfg.spec.gamma();
    let reference = v_at_horizon(cfg, 15, 1.0)?;
    let mut out = Vec::new();
    for (i, c) in [2.0f64, 4.0].into_iter().enumerate() {
        let scaled: Vec<f64> = v_at_horizon(cfg, 14 + 10 * i as u64 + 10, c)?
            .into_iter()
            .map(|v| v / c.powf(index))
            .collect();
        out.push(ks_result(format!("v_scaling_c{c}"), &scaled, &reference));
    }
    Ok(out)
}

/// Time reversal of `Δ` at `T = 2` (no sign ambiguity) and stationary
/// increments of `Δ`, plus the symmetry of `Δ_1`.
fn check_delta_identities(cfg: &ValidationConfig) -> Result<Vec<CheckResult>> {
    let times = [0.5, 1.0, 1.5, 2.0];
    let a = delta_marginals(cfg, 12, 2.0, &times)?;
    let b = delta_marginals(cfg, 13, 2.0, &times)?;
    let mut out = Vec::new();

    // {Δ_{T-t} - Δ_T} matches {Δ_t} at t ∈ {T/4, T/2, T}.
    for &t in &[0.5f64, 1.0, 2.0] {
        let j_end = 3; // T = 2
        let reversed: Vec<f64> = a
            .iter()
            .map(|row| {
                let at = if t == 2.0 {
                    0.0 // Δ_0
                } else {
                    let j = times.iter().position(|&u| u == 2.0 - t).unwrap();
                    row[j]
                };
                at - row[j_end]
            })
            .collect();
        let j = times.iter().position(|&u| u == t).unwrap();
        out.push(ks_result(
            format!("delta_time_reversal_t{t}"),
            &reversed,
            &column(&b, j),
        ));
    }

    // Δ_{t+s} - Δ_s matches Δ_t for (s, t) ∈ {(0.5, 0.5), (1, 1)}.
    for &(s, t) in &[(0.5f64, 0.5f64), (1.0, 1.0)] {
        let js = times.iter().position(|&u| u == s).unwrap();
        let je = times.iter().position(|&u| u == s + t).unwrap();
        let increments: Vec<f64> = a.iter().map(|row| row[je] - row[js]).collect();
        let j = times.iter().position(|&u| u == t).unwrap();
        out.push(ks_result(
            format!("delta_stationary_increment_s{s}_t{t}"),
            &increments,
            &column(&b, j),
        ));
    }

    // Δ_1 and -Δ_1 identically distributed.
    let j1 = 1;
    let plus = column(&a, j1);
    let minus: Vec<f64> = column(&b, j1).iter().map(|x| -x).collect();
    out.push(ks_result("delta_symmetry", &plus, &minus));

    // Moment identity: E|Δ_t - Δ_s|^2 = |t-s|^{2h} E[Δ_1^2] at three pairs.
    let h = cfg.spec.delta_index();
    let sq1: Vec<f64> = column(&b, j1).iter().map(|d| d * d).collect();
    let (m1, se1) = mean_and_se(&sq1);
    let mut worst: f64 = 0.0;
    let mut all_ok = true;
    for &(s, t) in &[(0.5f64, 1.0f64), (1.0, 2.0), (0.5, 2.0)] {
        let js = times.iter().position(|&u| u == s).unwrap();
        let jt = times.iter().position(|&u| u == t).unwrap();
        let sq: Vec<f64> = a
            .iter()
            .map(|row| {
                let d = row[jt] - row[js];
                d * d
            })
            .collect();
        let (lhs, se_l) = mean_and_se(&sq);
        let scale = (t - s).abs().powf(2.0 * h);
        let rhs = scale * m1;
        let tol = 3.0 * (se_l * se_l + scale * scale * se1 * se1).sqrt();
        let gap = (lhs - rhs).abs();
        worst = worst.max(gap / tol);
        all_ok &= gap <= tol;
    }
    out.push(CheckResult {
        name: "delta_increment_moment_identity".into(),
        kind: CheckKind::Consistency,
        passed: all_ok,
        statistic: worst,
        threshold: 1.0,
        detail: "max |lhs-rhs| / (3 sigma) over three (s,t) pairs".into(),
    });

    Ok(out)
}

/// Conditional Gaussianity: for one fixed path, `Δ_1 / sqrt(V_1)` over
/// scenery replicas is standard normal.
fn check_conditional_gaussianity(cfg: &ValidationConfig) -> Result<CheckResult> {
    let n_steps = (1.0 / cfg.dt).round() as usize;
    let generator = PathGenerator::prepare(cfg.spec, n_steps, cfg.dt)?;
    let master = cfg.submaster(16);
    let path = generator.sample(derive_seed(master, Stream::Path, 0));
    let field = compute_local_time(&path, &[1.0], &cfg.dx_policy)?;
    let sqrt_v = field.v[0].sqrt();
    let normalized: Vec<f64> = (0..cfg.n_identity)
        .into_par_iter()
        .map(|s| {
            let scenery = sample_scenery(&field.grid, derive_seed(master, Stream::Scenery, s));
            build_delta(&field, &scenery).expect("same grid").delta[0] / sqrt_v
        })
        .collect();
    let ks = ks_vs_standard_normal(&normalized, KS_LEVEL);
    Ok(CheckResult {
        name: "delta_conditional_gaussianity".into(),
        kind: CheckKind::Ks,
        passed: ks.passed,
        statistic: ks.statistic,
        threshold: ks.threshold,
        detail: format!("fixed path, {} sceneries", cfg.n_identity),
    })
}

/// Occupation-density residuals: exact for `f == 1` and bin-aligned
/// indicators, small in median for the Gaussian bump.
fn check_occupation(cfg: &ValidationConfig) -> Result<Vec<CheckResult>> {
    let n = 100_000usize;
    let dt = 1.0 / n as f64;
    let generator = PathGenerator::prepare(cfg.spec, n, dt)?;
    let master = cfg.submaster(17);
    let mut out = Vec::new();

    let path = generator.sample(derive_seed(master, Stream::Path, 0));
    let all = TestFunction::Indicator { a: -1e12, b: 1e12 };
    let r_const = occupation_residual(&path, all, 1.0, &cfg.dx_policy)?;
    out.push(CheckResult {
        name: "occupation_residual_constant".into(),
        kind: CheckKind::Exact,
        passed: r_const < EXACT_REL,
        statistic: r_const,
        threshold: EXACT_REL,
        detail: "f == 1".into(),
    });

    let field = compute_local_time(&path, &[1.0], &cfg.dx_policy)?;
    let g = &field.grid;
    let a = g.left_edge(g.bins / 2 - g.bins / 8);
    let b = g.left_edge(g.bins / 2 + g.bins / 8);
    let r_ind = occupation_residual(&path, TestFunction::Indicator { a, b }, 1.0, &cfg.dx_policy)?;
    out.push(CheckResult {
        name: "occupation_residual_indicator".into(),
        kind: CheckKind::Exact,
        passed: r_ind < EXACT_REL,
        statistic: r_ind,
        threshold: EXACT_REL,
        detail: "bin-aligned interval".into(),
    });

    let mut residuals: Vec<f64> = (0..cfg.n_occupation)
        .into_par_iter()
        .map(|r| {
            let path = generator.sample(derive_seed(master, Stream::Path, 100 + r));
            occupation_residual(&path, TestFunction::GaussianBump, 1.0, &cfg.dx_policy)
                .expect("valid checkpoint")
        })
        .collect();
    residuals.sort_by(|x, y| x.total_cmp(y));
    let median = residuals[residuals.len() / 2];
    out.push(CheckResult {
        name: "occupation_residual_gaussian_bump".into(),
        kind: CheckKind::Consistency,
        passed: median < OCCUPATION_RESIDUAL_TOL,
        statistic: median,
        threshold: OCCUPATION_RESIDUAL_TOL,
        detail: format!("median over {} paths, n = {n}", cfg.n_occupation),
    });
    Ok(out)
}

/// Pathwise comparison and superadditivity inequalities over many paths,
/// plus the Lévy independence of the superadditivity split.
fn check_pathwise_inequalities(cfg: &ValidationConfig) -> Result<Vec<CheckResult>> {
    let dt = cfg.dt_inequality;
    let n_steps = (1.0 / dt).round() as usize;
    let generator = PathGenerator::prepare(cfg.spec, n_steps, dt)?;
    let master = cfg.submaster(18);

    let is_levy = cfg.spec.family() == ProcessFamily::StableLevy;

    struct PerPath {
        comparison_ok: bool,
        superadd_ok: bool,
        cov_ok: bool,
        v_first: f64,
        v_shifted: f64,
    }

    let rows: Vec<PerPath> = (0..cfg.n_inequality)
        .into_par_iter()
        .map(|r| {
            let path = generator.sample(derive_seed(master, Stream::Path, r));
            let field = compute_local_time(&path, &[0.5, 1.0], &cfg.dx_policy)
                .expect("checkpoints on grid");
            let comparison_ok = comparison_check(&path, &field, 1.0).expect("checkpoint");
            let sup = superadditivity_check(&path, 0.5, 0.5, &cfg.dx_policy).expect("on grid");
            let cov_ok = crate::scenery::delta_increment_cov_check(&field, 0.5, 1.0)
                .expect("checkpoints");

            // For the Lévy independence check, each half must be binned on
            // a grid derived from that half alone, so the two values are
            // genuine functionals of disjoint increment blocks.
            let (v_first, v_shifted) = if is_levy {
                let k_s = path.index_of(0.5).expect("on grid");
                let k_e = path.index_of(1.0).expect("on grid");
                let own = |values: Vec<f64>| {
                    let sub = crate::process::PathSample {
                        spec: path.spec,
                        dt: path.dt,
                        values,
                        seed: path.seed,
                    };
                    compute_local_time(&sub, &[0.5], &cfg.dx_policy)
                        .expect("on grid")
                        .v[0]
                };
                let y_s = path.values[k_s];
                (
                    own(path.values[..=k_s].to_vec()),
                    own(path.values[k_s..=k_e].iter().map(|y| y - y_s).collect()),
                )
            } else {
                (sup.v_first, sup.v_shifted)
            };
            PerPath {
                comparison_ok,
                superadd_ok: sup.holds,
                cov_ok,
                v_first,
                v_shifted,
            }
        })
        .collect();

    let n = rows.len();
    let mut out = Vec::new();
    let comparison_violations = rows.iter().filter(|r| !r.comparison_ok).count();
    out.push(CheckResult {
        name: "comparison_inequality".into(),
        kind: CheckKind::Inequality,
        passed: comparison_violations == 0,
        statistic: comparison_violations as f64,
        threshold: 0.0,
        detail: format!("violations over {n} paths at {DISCRETIZATION_TOL} slack"),
    });
    let superadd_violations = rows.iter().filter(|r| !r.superadd_ok).count();
    out.push(CheckResult {
        name: "superadditivity".into(),
        kind: CheckKind::Inequality,
        passed: superadd_violations == 0,
        statistic: superadd_violations as f64,
        threshold: 0.0,
        detail: format!("violations over {n} paths at {DISCRETIZATION_TOL} slack"),
    });
    let cov_violations = rows.iter().filter(|r| !r.cov_ok).count();
    out.push(CheckResult {
        name: "delta_increment_cov_positivity".into(),
        kind: CheckKind::Inequality,
        passed: cov_violations == 0,
        statistic: cov_violations as f64,
        threshold: 0.0,
        detail: format!("violations over {n} fields"),
    });

    if is_levy {
        let v1: Vec<f64> = rows.iter().map(|r| r.v_first).collect();
        let v2: Vec<f64> = rows.iter().map(|r| r.v_shifted).collect();
        let corr = correlation(&v1, &v2);
        out.push(CheckResult {
            name: "superadditivity_split_independence".into(),
            kind: CheckKind::Consistency,
            passed: corr.abs() <= CORR_INDEPENDENCE_TOL,
            statistic: corr,
            threshold: CORR_INDEPENDENCE_TOL,
            detail: "corr(V_s, V_t shifted) for the Lévy driver".into(),
        });
    }
    Ok(out)
}

/// Persistence estimates at doubled grid density agree within joint CIs,
/// quantifying the supremum-discretization undershoot.
fn check_sup_discretization(cfg: &ValidationConfig) -> Result<CheckResult> {
    let t = 16.0;
    let n = (cfg.n_identity / 2).max(1_000);
    let coarse = crate::estimators::estimate_persistence(
        &cfg.campaign(n, 21, 1.0 / 64.0),
        1.0,
        &[t],
    )?;
    let fine = crate::estimators::estimate_persistence(
        &cfg.campaign(n, 22, 1.0 / 128.0),
        1.0,
        &[t],
    )?;
    let gap = (coarse.f_hat[0] - fine.f_hat[0]).abs();
    // The undershoot is a real O(dt) bias, so statistical stability alone is
    // the wrong yardstick once replicas resolve it; bound the drift by the
    // joint CI or a fixed fraction of the level, whichever is larger.
    let slack = ((coarse.ci_hi[0] - coarse.ci_lo[0]) / 2.0
        + (fine.ci_hi[0] - fine.ci_lo[0]) / 2.0)
        .max(crate::tolerances::SUP_STABILITY_REL_TOL * coarse.f_hat[0].max(fine.f_hat[0]));
    Ok(CheckResult {
        name: "sup_discretization_stability".into(),
        kind: CheckKind::Consistency,
        passed: gap <= slack,
        statistic: gap,
        threshold: slack,
        detail: format!(
            "F(16): dt=2^-6 gives {:.4}, dt=2^-7 gives {:.4}",
            coarse.f_hat[0], fine.f_hat[0]
        ),
    })
}

/// Run the full suite for one configured family.
pub fn run_validation(cfg: &ValidationConfig) -> Result<ValidationReport> {
    let mut checks = Vec::new();

    // Y identity campaigns share one marginal table.
    let y_times = [0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 16.0];
    let y_a = y_marginals(cfg, 10, 16.0, &y_times)?;
    let y_b = y_marginals(cfg, 11, 16.0, &y_times)?;
    checks.extend(check_y_self_similarity(cfg, &y_a, &y_b, &y_times));
    checks.extend(check_y_stationary_increments(&y_a, &y_b, &y_times));
    checks.extend(check_y_time_reversal(&y_a, &y_b, &y_times));

    checks.extend(check_v_scaling(cfg)?);
    checks.extend(check_delta_identities(cfg)?);
    checks.push(check_conditional_gaussianity(cfg)?);
    checks.extend(check_occupation(cfg)?);
    checks.extend(check_pathwise_inequalities(cfg)?);

    let maximal = maximal_inequality_check(
        &cfg.campaign(cfg.n_inequality, 19, cfg.dt),
        1.0,
        &[0.5, 1.0, 2.0],
    )?;
    checks.push(CheckResult {
        name: "maximal_inequality".into(),
        kind: CheckKind::Inequality,
        passed: maximal.passed,
        statistic: maximal.rows.iter().filter(|r| !r.passed).count() as f64,
        threshold: 0.0,
        detail: format!("x in {{0.5, 1, 2}} at T = {}", maximal.horizon),
    });

    let slepian = slepian_check(
        &cfg.campaign(cfg.n_slepian_paths, 20, cfg.dt),
        0.0,
        0.5,
        1.0,
        1.0,
        1.0,
        cfg.n_slepian_sceneries,
    )?;
    checks.push(CheckResult {
        name: "slepian_product_inequalities".into(),
        kind: CheckKind::Inequality,
        passed: slepian.passed,
        statistic: (slepian.violations_joint + slepian.violations_increment) as f64,
        threshold: 0.0,
        detail: format!(
            "{} paths x {} sceneries",
            slepian.n_paths, slepian.n_sceneries
        ),
    });

    let tails = tail_check_delta1(&cfg.campaign(cfg.n_tails, 23, TAIL_DT))?;
    for (name, fit) in [
        ("tail_envelope_delta1", &tails.delta1),
        ("tail_envelope_v1_upper", &tails.v1_upper),
        ("tail_envelope_v1_lower", &tails.v1_lower),
    ] {
        checks.push(CheckResult {
            name: name.into(),
            kind: CheckKind::Envelope,
            passed: fit.admissible,
            statistic: fit.corr,
            threshold: crate::tolerances::ENVELOPE_MIN_NEG_CORR,
            detail: format!(
                "exponent {:.4}, rate {:.4}{}",
                fit.exponent,
                fit.rate,
                if fit.low_power { ", low power" } else { "" }
            ),
        });
    }

    checks.push(check_sup_discretization(cfg)?);

    let ks_total = checks.iter().filter(|c| c.kind == CheckKind::Ks).count();
    let ks_failures = checks
        .iter()
        .filter(|c| c.kind == CheckKind::Ks && !c.passed)
        .count();
    let non_ks_ok = checks
        .iter()
        .filter(|c| c.kind != CheckKind::Ks)
        .all(|c| c.passed);
    let passed = non_ks_ok && ks_failures <= KS_FAILURE_BUDGET;

    Ok(ValidationReport {
        spec: cfg.spec,
        master_seed: cfg.master_seed,
        checks,
        ks_total,
        ks_failures,
        ks_budget: KS_FAILURE_BUDGET,
        passed,
    })
}

/// Reverse-path marginal test used by the process-level property suite:
/// checks the reversal of concrete sampled paths rather than recorded
/// marginal tables.
pub fn reversal_marginals_from_paths(
    spec: ProcessSpec,
    n: usize,
    dt: f64,
    n_rep: u64,
    master_seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let generator = PathGenerator::prepare(spec, n, dt)?;
    let horizon = n as f64 * dt;
    let mut reversed_at_1 = Vec::with_capacity(n_rep as usize);
    let mut minus_y_at_1 = Vec::with_capacity(n_rep as usize);
    let k1 = (1.0 / dt).round() as usize;
    for r in 0..n_rep {
        let path = generator.sample(derive_seed(master_seed, Stream::Path, r));
        let rev = reverse_path(&path, horizon)?;
        reversed_at_1.push(rev.values[k1]);
        let other = generator.sample(derive_seed(master_seed, Stream::PathAux, r));
        minus_y_at_1.push(-other.values[k1]);
    }
    Ok((reversed_at_1, minus_y_at_1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_runs_and_reports_shape() {
        let cfg = ValidationConfig::quick(ProcessSpec::Brownian, 20_260_101);
        let report = run_validation(&cfg).unwrap();
        assert!(report.ks_total >= 15, "ks_total = {}", report.ks_total);
        assert!(report.checks.len() >= 24, "checks = {}", report.checks.len());
        let failed: Vec<&CheckResult> =
            report.checks.iter().filter(|c| !c.passed).collect();
        assert!(
            report.passed,
            "quick suite failed: {:?}",
            failed
                .iter()
                .map(|c| (&c.name, c.statistic, c.threshold))
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn reversed_brownian_marginal_matches_minus_y() {
        let (rev, minus) =
            reversal_marginals_from_paths(ProcessSpec::Brownian, 128, 1.0 / 64.0, 4000, 77)
                .unwrap();
        let ks = ks_two_sample(&rev, &minus, KS_LEVEL);
        assert!(ks.passed, "D = {} > {}", ks.statistic, ks.threshold);
    }
}

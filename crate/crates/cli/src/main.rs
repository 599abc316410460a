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

//! `scenery` — Monte Carlo campaigns for random processes in Brownian
//! scenery.
//!
//! One subcommand per claim cluster: `simulate` exports sample artifacts,
//! `persistence` estimates the survival exponent, `molchan` the
//! reciprocal-integral functional, `tails` the one-sided tail envelopes, and
//! `validate` runs the bundled identity/inequality suite (exit code 0 iff
//! everything passes).

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use scenery_core::estimators::{
    estimate_persistence, molchan_functional, tail_check_delta1, Campaign, MolchanEstimate,
    PersistenceEstimate,
};
use scenery_core::process::ProcessSpec;
use scenery_core::rng::{derive_seed, Stream};
use scenery_core::scenery::{build_delta, checkpoint_grid, sample_scenery};
use scenery_core::tolerances::{MOLCHAN_REL_TOL, SLOPE_BAND};
use scenery_core::validate::{run_validation, ValidationConfig};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(
    name = "scenery",
    about = "Monte Carlo simulation of random processes in Brownian scenery",
    version
)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, value_name = "PATH", global = true)]
    config: Option<PathBuf>,
    /// Override the master seed from the config file.
    #[arg(long, value_name = "U64", global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, value_name = "N", global = true)]
    workers: Option<usize>,
    /// Output directory override.
    #[arg(long, value_name = "DIR", global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write path, local-time and delta CSVs for each replica.
    Simulate,
    /// Estimate the persistence probability over the horizon grid and fit
    /// the decay exponent.
    Persistence,
    /// Estimate I(T) and its normalization against E[max delta on [0,1]].
    Molchan,
    /// Fit the one-sided tail envelopes of delta_1 and V_1.
    Tails,
    /// Run the full validation suite; exit 0 iff every check passes.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let config_path = cli
        .config
        .ok_or("missing --config PATH (an experiment TOML file)")?;
    let mut config = ExperimentConfig::load(&config_path)?;
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    if let Some(out) = cli.out {
        config.out_dir = out;
    }
    if let Some(workers) = cli.workers {
        config.workers = workers;
    }
    if config.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build_global()?;
    }
    std::fs::create_dir_all(&config.out_dir)?;
    // Snapshot the fully-resolved configuration next to the artifacts; the
    // TOML round-trips through `ExperimentConfig::load` unchanged.
    std::fs::write(config.out_dir.join("config_resolved.toml"), config.to_toml())?;

    match cli.command {
        Command::Simulate => cmd_simulate(&config),
        Command::Persistence => cmd_persistence(&config),
        Command::Molchan => cmd_molchan(&config),
        Command::Tails => cmd_tails(&config),
        Command::Validate => cmd_validate(&config),
    }
}

fn campaign(config: &ExperimentConfig) -> Campaign {
    Campaign {
        spec: config.spec(),
        dt: config.dt,
        n_replicas: config.n_replicas,
        master_seed: config.master_seed,
        dx_policy: config.dx_policy(),
    }
}

fn require_t_grid(config: &ExperimentConfig) -> Result<Vec<f64>, Box<dyn std::error::Error>> {
    config
        .t_grid
        .clone()
        .ok_or_else(|| "this command needs `t_grid` in the config".into())
}

fn cmd_simulate(config: &ExperimentConfig) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let n_steps = config
        .n_steps
        .ok_or("simulate needs `n_steps` in the config")?;
    let spec = config.spec();
    let horizon = n_steps as f64 * config.dt;
    let checkpoints = checkpoint_grid(horizon, config.dt, (1.0f64 / 16.0).max(config.dt));
    let policy = config.dx_policy();
    for r in 0..config.n_replicas {
        let path_seed = derive_seed(config.master_seed, Stream::Path, r);
        let scenery_seed = derive_seed(config.master_seed, Stream::Scenery, r);
        let path = spec.sample(n_steps, config.dt, path_seed)?;
        let field = scenery_core::local_time::compute_local_time(&path, &checkpoints, &policy)?;
        let scenery = sample_scenery(&field.grid, scenery_seed);
        let delta = build_delta(&field, &scenery)?;

        let stem = |kind: &str| config.out_dir.join(format!("replica_{r:05}_{kind}.csv"));
        output::write_path_csv(&stem("path"), &path)?;
        output::write_local_time_csv(&stem("local_time"), &field)?;
        output::write_delta_csv(&stem("delta"), &delta)?;
    }
    println!(
        "wrote {} replica artifact sets to {}",
        config.n_replicas,
        config.out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct PersistenceSummary {
    process: ProcessSpec,
    gamma: f64,
    expected_exponent: f64,
    barrier: f64,
    dt: f64,
    #[serde(flatten)]
    estimate: PersistenceEstimate,
    slope_band_halfwidth: f64,
    band_verdict: Option<bool>,
    flags: Vec<String>,
}

fn cmd_persistence(config: &ExperimentConfig) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let t_grid = require_t_grid(config)?;
    let spec = config.spec();
    let estimate = estimate_persistence(&campaign(config), config.barrier, &t_grid)?;

    let mut flags: Vec<String> = Vec::new();
    for (j, &t) in estimate.t_grid.iter().enumerate() {
        if estimate.degenerate[j] {
            flags.push(format!(
                "T={t}: {} replicas survived; excluded from the fit",
                if estimate.f_hat[j] == 0.0 { "no" } else { "all" }
            ));
        }
    }
    if estimate.fitted_slope.is_none() {
        flags.push("slope omitted: fewer than 3 usable horizons".into());
    }

    let expected = -spec.gamma() / 2.0;
    let band_verdict = estimate
        .fitted_slope
        .map(|s| (s - expected).abs() <= SLOPE_BAND);
    let slope = estimate.fitted_slope;

    let mut csv = String::from("T,F_hat,ci_lo,ci_hi,degenerate\n");
    for (j, &t) in estimate.t_grid.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            t, estimate.f_hat[j], estimate.ci_lo[j], estimate.ci_hi[j], estimate.degenerate[j]
        ));
    }
    std::fs::write(config.out_dir.join("persistence.csv"), csv)?;

    let summary = PersistenceSummary {
        process: spec,
        gamma: spec.gamma(),
        expected_exponent: expected,
        barrier: config.barrier,
        dt: config.dt,
        estimate,
        slope_band_halfwidth: SLOPE_BAND,
        band_verdict,
        flags: flags.clone(),
    };
    output::write_json(&config.out_dir.join("persistence.json"), &summary)?;

    match slope {
        Some(s) => {
            println!(
                "fitted slope {s:.4} (expected {expected:.4}, band +-{SLOPE_BAND}); verdict: {}",
                if band_verdict == Some(true) { "in band" } else { "OUT OF BAND" }
            );
            Ok(ExitCode::SUCCESS)
        }
        None => {
            for f in &flags {
                eprintln!("flag: {f}");
            }
            Ok(ExitCode::FAILURE)
        }
    }
}

#[derive(Serialize)]
struct MolchanSummary {
    process: ProcessSpec,
    gamma: f64,
    #[serde(flatten)]
    estimate: MolchanEstimate,
    /// Largest-two-horizon agreement within joint 95% CIs.
    stability_verdict: Option<bool>,
    /// Relative gap between the normalized value at the largest horizon and
    /// the independent max campaign, against the tolerance.
    max_agreement_rel_gap: f64,
    max_agreement_tol: f64,
    max_agreement_verdict: bool,
}

fn cmd_molchan(config: &ExperimentConfig) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let t_grid = require_t_grid(config)?;
    let spec = config.spec();
    let estimate = molchan_functional(&campaign(config), &t_grid)?;

    let m = estimate.t_grid.len();
    let stability_verdict = (m >= 2).then(|| {
        let gap = (estimate.normalized[m - 1] - estimate.normalized[m - 2]).abs();
        let joint = 1.96
            * (estimate.normalized_se[m - 1].powi(2) + estimate.normalized_se[m - 2].powi(2))
                .sqrt();
        gap <= joint
    });
    let rel_gap =
        (estimate.normalized[m - 1] - estimate.max_delta_01).abs() / estimate.max_delta_01;
    let max_agreement_verdict = rel_gap <= MOLCHAN_REL_TOL;

    let mut csv = String::from("T,I_hat,I_se,normalized,normalized_se\n");
    for (j, &t) in estimate.t_grid.iter().enumerate() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            t, estimate.i_hat[j], estimate.i_se[j], estimate.normalized[j],
            estimate.normalized_se[j]
        ));
    }
    std::fs::write(config.out_dir.join("molchan.csv"), csv)?;

    let ok = stability_verdict.unwrap_or(true) && max_agreement_verdict;
    let summary = MolchanSummary {
        process: spec,
        gamma: spec.gamma(),
        estimate,
        stability_verdict,
        max_agreement_rel_gap: rel_gap,
        max_agreement_tol: MOLCHAN_REL_TOL,
        max_agreement_verdict,
    };
    output::write_json(&config.out_dir.join("molchan.json"), &summary)?;
    println!(
        "normalized I(T) consistency: stability {:?}, max agreement {} (rel gap {:.3})",
        stability_verdict, max_agreement_verdict, rel_gap
    );
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_tails(config: &ExperimentConfig) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let report = tail_check_delta1(&campaign(config))?;
    let passed = report.passed;
    output::write_json(&config.out_dir.join("tails.json"), &report)?;
    println!(
        "tail envelopes: delta1 {} | V1 upper {} | V1 lower {}",
        report.delta1.admissible, report.v1_upper.admissible, report.v1_lower.admissible
    );
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_validate(config: &ExperimentConfig) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let mut vcfg = ValidationConfig::standard(config.spec(), config.master_seed);
    vcfg.dx_policy = config.dx_policy();
    let report = run_validation(&vcfg)?;
    for c in &report.checks {
        println!(
            "{} {} (stat {:.5}, threshold {:.5})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.statistic,
            c.threshold
        );
    }
    println!(
        "suite: {} ({} of {} KS tests failed, budget {})",
        if report.passed { "PASS" } else { "FAIL" },
        report.ks_failures,
        report.ks_total,
        report.ks_budget
    );
    output::write_checks_csv(&config.out_dir.join("validate.csv"), &report.checks)?;
    let passed = report.passed;
    output::write_json(&config.out_dir.join("validate.json"), &report)?;
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

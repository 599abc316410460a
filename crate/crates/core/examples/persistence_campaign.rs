// Persistence campaign at the default budgets (T up to 2^12, dt = 2^-6).
//
// Usage: cargo run --release --example persistence_campaign [family] [n_replicas]
use scenery_core::estimators::{estimate_persistence, Campaign};
use scenery_core::local_time::DxPolicy;
use scenery_core::process::ProcessSpec;

fn main() {
    let family = std::env::args().nth(1).unwrap_or_else(|| "brownian".into());
    let n_replicas: u64 = std::env::args()
        .nth(2)
        .map(|s| s.parse().unwrap())
        .unwrap_or(20_000);
    let spec = match family.as_str() {
        "brownian" => ProcessSpec::Brownian,
        "fbm" => ProcessSpec::fbm(0.75).unwrap(),
        "stable" => ProcessSpec::stable(1.5, 0.0).unwrap(),
        "ibm" => ProcessSpec::IteratedBm,
        other => panic!("unknown family {other}"),
    };
    let t_grid: Vec<f64> = (4..=12).map(|k| 2f64.powi(k)).collect();
    let campaign = Campaign {
        spec,
        dt: 1.0 / 64.0,
        n_replicas,
        master_seed: 20_260_810,
        dx_policy: DxPolicy::default(),
    };
    let t0 = std::time::Instant::now();
    let est = estimate_persistence(&campaign, 1.0, &t_grid).unwrap();
    for (j, &t) in est.t_grid.iter().enumerate() {
        println!(
            "T = {t:>6}: F = {:.4} [{:.4}, {:.4}]{}",
            est.f_hat[j],
            est.ci_lo[j],
            est.ci_hi[j],
            if est.degenerate[j] { " (degenerate)" } else { "" }
        );
    }
    println!(
        "gamma = {}, expected slope = {}, fitted = {:?} +- {:?} over {} pts, elapsed {:.1}s",
        spec.gamma(),
        -spec.gamma() / 2.0,
        est.fitted_slope,
        est.slope_se,
        est.fit_points,
        t0.elapsed().as_secs_f64()
    );
}

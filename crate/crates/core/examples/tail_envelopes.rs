// One-sided tail envelopes of delta_1 and V_1 for all four families.
//
// Usage: cargo run --release --example tail_envelopes
use scenery_core::estimators::{tail_check_delta1, Campaign};
use scenery_core::local_time::DxPolicy;
use scenery_core::process::ProcessSpec;

fn main() {
    for (name, spec) in [
        ("brownian", ProcessSpec::Brownian),
        ("stable", ProcessSpec::stable(1.5, 0.0).unwrap()),
        ("fbm", ProcessSpec::fbm(0.75).unwrap()),
        ("ibm", ProcessSpec::IteratedBm),
    ] {
        let campaign = Campaign {
            spec,
            dt: 1.0 / 1024.0,
            n_replicas: 100_000,
            master_seed: 20_260_810,
            dx_policy: DxPolicy::default(),
        };
        let t0 = std::time::Instant::now();
        let report = tail_check_delta1(&campaign).unwrap();
        println!(
            "{name}: passed={} ({:.1}s)",
            report.passed,
            t0.elapsed().as_secs_f64()
        );
        for (tag, fit) in [
            ("delta1", &report.delta1),
            ("v1_up", &report.v1_upper),
            ("v1_lo", &report.v1_lower),
        ] {
            println!(
                "  {tag}: exp={:.4} rate={:.4} corr={:.5} admissible={} low_power={}",
                fit.exponent, fit.rate, fit.corr, fit.admissible, fit.low_power
            );
        }
    }
}

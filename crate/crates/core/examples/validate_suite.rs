// Run the standard validation suite for one driver family and print
// per-check lines.
//
// Usage: cargo run --release --example validate_suite [brownian|stable|fbm|ibm]
use scenery_core::process::ProcessSpec;
use scenery_core::validate::{run_validation, ValidationConfig};

fn main() {
    let family = std::env::args().nth(1).unwrap_or_else(|| "brownian".into());
    let spec = match family.as_str() {
        "brownian" => ProcessSpec::Brownian,
        "stable" => ProcessSpec::stable(1.5, 0.0).unwrap(),
        "fbm" => ProcessSpec::fbm(0.75).unwrap(),
        "ibm" => ProcessSpec::IteratedBm,
        other => panic!("unknown family {other}"),
    };
    let t0 = std::time::Instant::now();
    let report = run_validation(&ValidationConfig::standard(spec, 20_260_810)).unwrap();
    for c in &report.checks {
        println!(
            "{} {:<40} stat={:<12.5} thr={:<12.5} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.statistic,
            c.threshold,
            c.detail
        );
    }
    println!(
        "passed={} ks {}/{} failed, elapsed {:.1}s",
        report.passed,
        report.ks_failures,
        report.ks_total,
        t0.elapsed().as_secs_f64()
    );
}

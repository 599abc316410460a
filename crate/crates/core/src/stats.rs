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

//! Statistical primitives: Kolmogorov–Smirnov tests, Wilson score intervals,
//! and weighted least squares. Kept dependency-light so estimator campaigns
//! can call them in hot loops.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Result, SimError};

/// Outcome of a KS test at a fixed level.
#[derive(Debug, Clone, Serialize)]
pub struct KsOutcome {
    pub statistic: f64,
    pub threshold: f64,
    pub passed: bool,
    pub n: usize,
    pub m: usize,
}

/// Asymptotic Kolmogorov quantile `c(level)` with
/// `c = sqrt(-ln(level / 2) / 2)`; `c(0.01) ≈ 1.6276`.
pub fn ks_critical_coefficient(level: f64) -> f64 {
    (-(level / 2.0).ln() / 2.0).sqrt()
}

/// Two-sample Kolmogorov–Smirnov test at the given level.
pub fn ks_two_sample(xs: &[f64], ys: &[f64], level: f64) -> KsOutcome {
    let mut a: Vec<f64> = xs.to_vec();
    let mut b: Vec<f64> = ys.to_vec();
    a.sort_by(|p, q| p.total_cmp(q));
    b.sort_by(|p, q| p.total_cmp(q));

    let (n, m) = (a.len(), b.len());
    let (na, nb) = (n as f64, m as f64);
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let threshold = ks_critical_coefficient(level) * ((na + nb) / (na * nb)).sqrt();
    KsOutcome {
        statistic: d,
        threshold,
        passed: d <= threshold,
        n,
        m,
    }
}

/// One-sample KS test against the standard normal CDF.
pub fn ks_vs_standard_normal(xs: &[f64], level: f64) -> KsOutcome {
    let mut a: Vec<f64> = xs.to_vec();
    a.sort_by(|p, q| p.total_cmp(q));
    let n = a.len();
    let na = n as f64;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut d: f64 = 0.0;
    for (i, &x) in a.iter().enumerate() {
        let cdf = normal.cdf(x);
        d = d.max((cdf - i as f64 / na).abs());
        d = d.max(((i + 1) as f64 / na - cdf).abs());
    }
    let threshold = ks_critical_coefficient(level) / na.sqrt();
    KsOutcome {
        statistic: d,
        threshold,
        passed: d <= threshold,
        n,
        m: 0,
    }
}

/// Wilson score interval for a binomial proportion.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WilsonInterval {
    pub p_hat: f64,
    pub lo: f64,
    pub hi: f64,
}

impl WilsonInterval {
    pub fn half_width(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }
}

/// 95% Wilson score interval; valid down to zero successes, which is the
/// regime persistence estimates live in.
pub fn wilson_95(successes: u64, trials: u64) -> WilsonInterval {
    wilson(successes, trials, 1.959_963_984_540_054)
}

/// Wilson score interval at an arbitrary normal quantile `z`.
pub fn wilson(successes: u64, trials: u64, z: f64) -> WilsonInterval {
    assert!(trials > 0, "Wilson interval needs at least one trial");
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = p + z2 / (2.0 * n);
    let rad = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // Clamp against rounding at the boundary counts (0 or n successes).
    WilsonInterval {
        p_hat: p,
        lo: ((center - rad) / denom).max(0.0).min(p),
        hi: ((center + rad) / denom).min(1.0).max(p),
    }
}

/// Weighted least-squares line fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub r_squared: f64,
}

/// Fit a line through `(x, y)` with per-point weights (inverse variances).
///
/// The slope standard error is the design-based `1 / sqrt(sum w (x - xbar)^2)`
/// appropriate when the weights are true inverse variances.
pub fn weighted_line_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() || x.len() != w.len() {
        return Err(SimError::param("x/y/w", "length mismatch"));
    }
    if x.len() < 2 {
        return Err(SimError::TooFewPoints {
            needed: 2,
            found: x.len(),
        });
    }
    let sw: f64 = w.iter().sum();
    if sw.is_nan() || sw <= 0.0 {
        return Err(SimError::param("w", "weights must have positive sum"));
    }
    let xbar = x.iter().zip(w).map(|(xi, wi)| xi * wi).sum::<f64>() / sw;
    let ybar = y.iter().zip(w).map(|(yi, wi)| yi * wi).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        let dx = xi - xbar;
        let dy = yi - ybar;
        sxx += wi * dx * dx;
        sxy += wi * dx * dy;
        syy += wi * dy * dy;
    }
    if sxx.is_nan() || sxx <= 0.0 {
        return Err(SimError::param("x", "degenerate abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let r_squared = if syy > 0.0 {
        (sxy * sxy) / (sxx * syy)
    } else {
        1.0
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_se: (1.0 / sxx).sqrt(),
        r_squared,
    })
}

/// Pearson correlation coefficient.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - xm) * (b - ym);
        sxx += (a - xm) * (a - xm);
        syy += (b - ym) * (b - ym);
    }
    sxy / (sxx * syy).sqrt()
}

/// Sample mean and its standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    use crate::rng::{replica_rng, Stream};

    #[test]
    fn ks_accepts_same_distribution_and_rejects_shifted() {
        let mut rng = replica_rng(7, Stream::Campaign, 0);
        let a: Vec<f64> = (0..5000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let b: Vec<f64> = (0..5000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let c: Vec<f64> = b.iter().map(|x| x + 0.2).collect();
        assert!(ks_two_sample(&a, &b, 0.01).passed);
        assert!(!ks_two_sample(&a, &c, 0.01).passed);
    }

    #[test]
    fn ks_one_sample_detects_scale() {
        let mut rng = replica_rng(8, Stream::Campaign, 0);
        let a: Vec<f64> = (0..5000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let b: Vec<f64> = a.iter().map(|x| 1.4 * x).collect();
        assert!(ks_vs_standard_normal(&a, 0.01).passed);
        assert!(!ks_vs_standard_normal(&b, 0.01).passed);
    }

    #[test]
    fn ks_critical_coefficient_at_one_percent() {
        assert_relative_eq!(ks_critical_coefficient(0.01), 1.6276, max_relative = 1e-4);
    }

    #[test]
    fn wilson_brackets_the_point_estimate() {
        for (k, n) in [(0u64, 50u64), (1, 50), (25, 50), (50, 50)] {
            let ci = wilson_95(k, n);
            assert!(ci.lo <= ci.p_hat && ci.p_hat <= ci.hi, "{ci:?}");
            assert!((0.0..=1.0).contains(&ci.lo) && (0.0..=1.0).contains(&ci.hi));
        }
    }

    #[test]
    fn wilson_coverage_on_synthetic_bernoulli() {
        // Coverage of the 95% interval should land in [0.93, 0.97]
        // over a thousand synthetic trials with known p.
        let p = 0.3;
        let trials = 1000;
        let n = 200u64;
        let mut covered = 0;
        for t in 0..trials {
            let mut rng = replica_rng(1234, Stream::Campaign, t);
            let k = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
            let ci = wilson_95(k, n);
            if ci.lo <= p && p <= ci.hi {
                covered += 1;
            }
        }
        let coverage = covered as f64 / trials as f64;
        assert!(
            (0.93..=0.97).contains(&coverage),
            "coverage {coverage} outside [0.93, 0.97]"
        );
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|xi| 3.0 - 2.0 * xi).collect();
        let w = [1.0, 2.0, 0.5, 1.0];
        let fit = weighted_line_fit(&x, &y, &w).unwrap();
        assert_relative_eq!(fit.slope, -2.0, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, 3.0, epsilon = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn line_fit_rejects_degenerate_input() {
        assert!(weighted_line_fit(&[1.0], &[1.0], &[1.0]).is_err());
        assert!(weighted_line_fit(&[1.0, 1.0], &[1.0, 2.0], &[1.0, 1.0]).is_err());
    }
}

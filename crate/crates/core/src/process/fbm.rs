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

//! Exact fractional Brownian motion by circulant embedding of the
//! fractional-Gaussian-noise covariance, with a Cholesky fallback for small
//! paths when the embedding is not nonnegative definite.
//!
//! The embedding row is the true fGn autocovariance extended to the full
//! circulant length (never zero-padded), so the sampled increments carry the
//! exact covariance `gamma(k) = (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2` at
//! unit spacing; the path is the cumulative sum scaled by `dt^H`.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{validate_steps, PathSample, ProcessSpec};
use crate::error::{Result, SimError};
use crate::rng::{replica_rng, Stream};

/// Largest circulant size we are willing to try before falling back.
const MAX_EMBED_LEN: usize = 1 << 24;
/// Largest path length served by the Cholesky fallback.
const MAX_CHOLESKY_STEPS: usize = 4096;
/// Eigenvalues below `-tol * max_eig` mean the embedding truly failed;
/// anything closer to zero is clamped as rounding noise.
const EIG_CLAMP_REL: f64 = 1e-8;

/// fGn autocovariance at unit spacing.
fn fgn_autocov(hurst: f64, k: usize) -> f64 {
    let k = k as f64;
    let two_h = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
}

/// Reusable sampling plan: embedding eigenvalues plus an FFT instance.
///
/// Building the plan costs one FFT of the covariance row; each sample then
/// costs one FFT. Plans are `Send + Sync` and meant to be shared across
/// replica workers.
pub struct FbmPlan {
    spec: ProcessSpec,
    n: usize,
    dt: f64,
    m: usize,
    /// `sqrt(lambda_j / m)` for `j = 0..m`.
    coef: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl FbmPlan {
    pub fn new(spec: ProcessSpec, n: usize, dt: f64) -> Result<Self> {
        let ProcessSpec::FractionalBm { hurst } = spec else {
            return Err(SimError::param("spec", "expected a fractional-BM spec"));
        };
        validate_steps(n, dt)?;

        let mut planner = FftPlanner::new();
        let mut m = (2 * n).next_power_of_two();
        loop {
            // First circulant row: gamma(0..=m/2) mirrored onto the back half.
            let half = m / 2;
            let mut row: Vec<Complex<f64>> = (0..m)
                .map(|j| {
                    let lag = if j <= half { j } else { m - j };
                    Complex::new(fgn_autocov(hurst, lag), 0.0)
                })
                .collect();
            let fft = planner.plan_fft_forward(m);
            fft.process(&mut row);

            let max_eig = row.iter().map(|c| c.re).fold(0.0f64, f64::max);
            let min_eig = row.iter().map(|c| c.re).fold(f64::INFINITY, f64::min);
            if min_eig >= -EIG_CLAMP_REL * max_eig {
                let scale = 1.0 / m as f64;
                let coef = row
                    .iter()
                    .map(|c| (c.re.max(0.0) * scale).sqrt())
                    .collect();
                return Ok(FbmPlan {
                    spec,
                    n,
                    dt,
                    m,
                    coef,
                    fft,
                });
            }
            if m >= MAX_EMBED_LEN {
                return Err(SimError::Generation(format!(
                    "circulant embedding not nonnegative definite for H = {hurst}, \
                     n = {n} (min eigenvalue {min_eig:.3e} at length {m})"
                )));
            }
            m *= 2;
        }
    }

    pub fn n_steps(&self) -> usize {
        self.n
    }

    /// Draw one path. Same `(plan, seed)` gives a bit-identical path.
    pub fn sample(&self, seed: u64) -> PathSample {
        let mut rng = replica_rng(seed, Stream::Path, 0);
        self.sample_with(&mut rng, seed)
    }

    fn sample_with(&self, rng: &mut ChaCha12Rng, seed: u64) -> PathSample {
        // Reuse per-thread FFT buffers: campaign replicas would otherwise
        // allocate (and page-fault) tens of megabytes each.
        type Buffers = (Vec<Complex<f64>>, Vec<Complex<f64>>);
        thread_local! {
            static FFT_BUFFERS: std::cell::RefCell<Buffers> =
                const { std::cell::RefCell::new((Vec::new(), Vec::new())) };
        }
        FFT_BUFFERS.with(|cell| {
            let (buf, scratch) = &mut *cell.borrow_mut();
            let (m, half) = (self.m, self.m / 2);
            buf.clear();
            buf.resize(m, Complex::new(0.0, 0.0));
            scratch.resize(
                self.fft.get_inplace_scratch_len(),
                Complex::new(0.0, 0.0),
            );

            let z0: f64 = rng.sample(StandardNormal);
            buf[0] = Complex::new(self.coef[0] * z0, 0.0);
            let z1: f64 = rng.sample(StandardNormal);
            buf[half] = Complex::new(self.coef[half] * z1, 0.0);
            for j in 1..half {
                let zr: f64 = rng.sample(StandardNormal);
                let zi: f64 = rng.sample(StandardNormal);
                let c = self.coef[j] * std::f64::consts::FRAC_1_SQRT_2;
                buf[j] = Complex::new(c * zr, c * zi);
                buf[m - j] = buf[j].conj();
            }
            self.fft.process_with_scratch(buf, scratch);

            let hurst = match self.spec {
                ProcessSpec::FractionalBm { hurst } => hurst,
                _ => unreachable!(),
            };
            let step_scale = self.dt.powf(hurst);
            let mut values = Vec::with_capacity(self.n + 1);
            values.push(0.0);
            let mut y = 0.0;
            for item in buf.iter().take(self.n) {
                y += step_scale * item.re;
                values.push(y);
            }
            PathSample {
                spec: self.spec,
                dt: self.dt,
                values,
                seed,
            }
        })
    }
}

/// Sample fractional Brownian motion, preferring circulant embedding and
/// falling back to Cholesky for small `n` if the embedding fails.
pub fn sample_fbm(spec: ProcessSpec, n: usize, dt: f64, seed: u64) -> Result<PathSample> {
    match FbmPlan::new(spec, n, dt) {
        Ok(plan) => Ok(plan.sample(seed)),
        Err(SimError::Generation(diag)) if n <= MAX_CHOLESKY_STEPS => {
            let _ = diag;
            sample_fbm_cholesky(spec, n, dt, seed)
        }
        Err(e) => Err(e),
    }
}

/// Exact fBm by Cholesky factorization of the fGn covariance matrix.
///
/// `O(n^3)`; limited to `n <= 4096`. Serves both as the embedding fallback
/// and as an independent generation route in tests.
pub fn sample_fbm_cholesky(spec: ProcessSpec, n: usize, dt: f64, seed: u64) -> Result<PathSample> {
    let ProcessSpec::FractionalBm { hurst } = spec else {
        return Err(SimError::param("spec", "expected a fractional-BM spec"));
    };
    validate_steps(n, dt)?;
    if n > MAX_CHOLESKY_STEPS {
        return Err(SimError::Generation(format!(
            "Cholesky fallback supports n <= {MAX_CHOLESKY_STEPS}, got {n}"
        )));
    }

    // Packed lower triangle of the factor, row-major.
    let idx = |i: usize, j: usize| i * (i + 1) / 2 + j;
    let mut l = vec![0.0f64; n * (n + 1) / 2];
    for i in 0..n {
        for j in 0..=i {
            let mut s = fgn_autocov(hurst, i - j);
            for k in 0..j {
                s -= l[idx(i, k)] * l[idx(j, k)];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(SimError::Generation(format!(
                        "fGn covariance lost positive definiteness at row {i} (H = {hurst})"
                    )));
                }
                l[idx(i, i)] = s.sqrt();
            } else {
                l[idx(i, j)] = s / l[idx(j, j)];
            }
        }
    }

    let mut rng = replica_rng(seed, Stream::Path, 0);
    let z: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let step_scale = dt.powf(hurst);
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    let mut y = 0.0;
    for i in 0..n {
        let mut incr = 0.0;
        for k in 0..=i {
            incr += l[idx(i, k)] * z[k];
        }
        y += step_scale * incr;
        values.push(y);
    }
    Ok(PathSample {
        spec,
        dt,
        values,
        seed,
    })
}

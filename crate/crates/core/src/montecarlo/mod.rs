//! Sampling-based checks of the closed forms: Monte Carlo estimates of the
//! generalized mutual information and its weighted variant, plus a
//! random-coding experiment with the actual minimum-distance decoder.
//!
//! Every unit of work (a chunk of samples, a coding trial) draws from its own
//! stream `rng_stream(seed, unit_index)`, and partial results are merged in unit
//! order, so results do not depend on the number of worker threads.

mod coding;

pub use coding::{
    codebook_size, estimate_coding_error_rate, run_random_coding, run_random_coding_with,
    simulate_trial, trial_outcomes, CodingResult, TrialOutcome, MAX_CODEBOOK,
};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::analytic::ln_weighted_metric_denominator;
use crate::channel::{reduced_distance, sample_channel, DecoderConfig};
use crate::error::{ensure_positive, invalid, Result};

/// A reproducible random stream.
pub type RngStream = ChaCha12Rng;

/// Stream `stream_index` of the family keyed by `seed`.
///
/// ChaCha is counter based: the key comes from `seed`, the stream id selects
/// an independent keystream, and output is identical on every platform.
pub fn rng_stream(seed: u64, stream_index: u64) -> RngStream {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream_index);
    rng
}

/// Result of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n_samples)`.
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// `(mean - reference) / stderr`.
    pub fn studentized(&self, reference: f64) -> f64 {
        (self.mean - reference) / self.stderr
    }

    /// True when `reference` lies within `k` standard errors of the mean.
    pub fn covers(&self, reference: f64, k: f64) -> bool {
        (self.mean - reference).abs() <= k * self.stderr
    }
}

/// Streaming mean/variance (Welford) with an order-fixed merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub(crate) fn push(&mut self, v: f64) {
        self.n += 1;
        let delta = v - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (v - self.mean);
    }

    pub(crate) fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64 / n as f64);
        Self { n, mean, m2 }
    }

    pub(crate) fn into_estimate(self, seed: u64) -> McEstimate {
        let var = if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            stderr: (var / self.n as f64).sqrt(),
            n_samples: self.n,
            seed,
        }
    }
}

/// How samples are split into independent work units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McOptions {
    /// Samples per stream. Part of the reproducibility key.
    pub chunk_size: u64,
    pub parallel: bool,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            chunk_size: 1 << 16,
            parallel: true,
        }
    }
}

pub const MIN_SAMPLES: u64 = 1000;

/// Monte Carlo estimate of the generalized mutual information at `(a, s)`.
///
/// Each sample is `s ln q(X, Y) - ln E_X'[q(X', Y)^s]` with the inner
/// expectation in closed form. Note that the per-sample values have a finite
/// mean but infinite variance (the `y²/x` term with small `x`), so the reported
/// standard error fluctuates more than the mean does.
pub fn estimate_gmi_mc(
    eps_s: f64,
    a: f64,
    s: f64,
    n_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    estimate_gmi_mc_with(eps_s, a, s, n_samples, seed, McOptions::default())
}

pub fn estimate_gmi_mc_with(
    eps_s: f64,
    a: f64,
    s: f64,
    n_samples: u64,
    seed: u64,
    options: McOptions,
) -> Result<McEstimate> {
    let config = DecoderConfig::gmi(a, s)?;
    estimate_weighted_mc(eps_s, &config, n_samples, seed, options)
}

/// Monte Carlo estimate of the weighted rate with `a = 1` and weight
/// `exp(-(s / eps_s) x)`.
pub fn estimate_lm_mc(eps_s: f64, s: f64, n_samples: u64, seed: u64) -> Result<McEstimate> {
    estimate_lm_mc_with(eps_s, s, n_samples, seed, McOptions::default())
}

pub fn estimate_lm_mc_with(
    eps_s: f64,
    s: f64,
    n_samples: u64,
    seed: u64,
    options: McOptions,
) -> Result<McEstimate> {
    let config = DecoderConfig::lm(eps_s, s)?;
    estimate_weighted_mc(eps_s, &config, n_samples, seed, options)
}

/// Estimator behind both rates: per sample
/// `-w X + s ln q(X, Y) - ln E_X'[exp(-w X') q(X', Y)^s]`.
pub fn estimate_weighted_mc(
    eps_s: f64,
    config: &DecoderConfig,
    n_samples: u64,
    seed: u64,
    options: McOptions,
) -> Result<McEstimate> {
    let eps_s = ensure_positive("eps_s", eps_s)?;
    if n_samples < MIN_SAMPLES {
        return Err(invalid(
            "n_samples",
            n_samples as f64,
            "at least 1000 samples are required",
        ));
    }
    if options.chunk_size == 0 {
        return Err(invalid("chunk_size", 0.0, "must be positive"));
    }
    let config = *config;
    let chunks = n_samples.div_ceil(options.chunk_size);
    let run_chunk = |k: u64| {
        let len = options.chunk_size.min(n_samples - k * options.chunk_size);
        let mut rng = rng_stream(seed, k);
        let mut stats = RunningStats::default();
        for _ in 0..len {
            let ch = sample_channel(eps_s, &mut rng);
            let v = -config.weight_rate * ch.x
                - config.s * reduced_distance(ch.x, ch.y as f64, config.a)
                - ln_weighted_metric_denominator(ch.y, eps_s, &config);
            stats.push(v);
        }
        stats
    };
    let parts: Vec<RunningStats> = if options.parallel {
        (0..chunks).into_par_iter().map(run_chunk).collect()
    } else {
        (0..chunks).map(run_chunk).collect()
    };
    let total = parts
        .into_iter()
        .fold(RunningStats::default(), RunningStats::merge);
    Ok(total.into_estimate(seed))
}

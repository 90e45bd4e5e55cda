//! Random-coding experiment: i.i.d. shape-1/2 gamma codebooks sent over the
//! Poisson channel and decoded by minimum summed distance.

use rand::Rng;
use rand_distr::{Distribution, InverseGaussian, StandardNormal};
use rayon::prelude::*;

use super::{rng_stream, McEstimate, RunningStats};
use crate::analytic::ln_weighted_metric_denominator;
use crate::channel::{
    full_distance, reduced_distance, sample_half_gamma, sample_poisson_unchecked, DecoderConfig,
    DistanceForm,
};
use crate::error::{ensure_nonnegative, ensure_positive, invalid, Error, Result};

/// Largest codebook the exhaustive decoder will enumerate.
pub const MAX_CODEBOOK: u64 = 1 << 22;

/// Outcome of [`run_random_coding`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodingResult {
    pub eps_s: f64,
    pub a: f64,
    /// Nats per channel use.
    pub rate: f64,
    pub n: usize,
    pub codebook_size: u64,
    pub trials: u64,
    pub errors: u64,
    pub seed: u64,
}

impl CodingResult {
    pub fn error_rate(&self) -> f64 {
        self.errors as f64 / self.trials as f64
    }
}

/// Decoder output for one trial. Codeword 0 is the transmitted one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    /// First index attaining the minimum total distance.
    pub decoded: u64,
    /// Some other codeword's total distance is `<=` the transmitted one's.
    pub error: bool,
}

/// `ceil(exp(rate * n))`, rejected above [`MAX_CODEBOOK`].
pub fn codebook_size(rate: f64, n: usize) -> Result<u64> {
    let rate = ensure_nonnegative("rate", rate)?;
    let size = (rate * n as f64).exp();
    if !(size <= MAX_CODEBOOK as f64) {
        return Err(Error::CodebookTooLarge {
            rate,
            n,
            size,
            limit: MAX_CODEBOOK,
        });
    }
    Ok(size.ceil() as u64)
}

fn validate(eps_s: f64, a: f64, n: usize, trials: u64) -> Result<()> {
    ensure_positive("eps_s", eps_s)?;
    ensure_positive("a", a)?;
    if n < 2 {
        return Err(invalid("n", n as f64, "blocklength must be at least 2"));
    }
    if trials == 0 {
        return Err(invalid("trials", 0.0, "at least one trial is required"));
    }
    Ok(())
}

/// One transmission with a fresh codebook of `codebook_size` words drawn from `rng`.
///
/// The transmitted word and its channel output are drawn first, then the
/// competitors one at a time, so only `O(n)` memory is used. With
/// `stop_at_error` the scan ends at the first competitor that ties or beats the
/// transmitted word; `error` is unaffected but `decoded` is then not final.
pub fn simulate_trial<R: Rng + ?Sized>(
    eps_s: f64,
    a: f64,
    n: usize,
    codebook_size: u64,
    form: DistanceForm,
    stop_at_error: bool,
    rng: &mut R,
) -> TrialOutcome {
    let sqrt_a = a.sqrt();
    let distance = |x: f64, y: f64| match form {
        DistanceForm::Full => full_distance(x, y, sqrt_a),
        DistanceForm::Reduced => reduced_distance(x, y, a),
    };

    let sent: Vec<f64> = (0..n).map(|_| sample_half_gamma(eps_s, rng)).collect();
    let received: Vec<f64> = sent
        .iter()
        .map(|&x| sample_poisson_unchecked(x, rng) as f64)
        .collect();
    let truth: f64 = sent
        .iter()
        .zip(&received)
        .map(|(&x, &y)| distance(x, y))
        .sum();

    let mut outcome = TrialOutcome {
        decoded: 0,
        error: false,
    };
    let mut best = truth;
    for m in 1..codebook_size {
        let mut total = 0.0;
        for &y in &received {
            total += distance(sample_half_gamma(eps_s, rng), y);
        }
        if total <= truth {
            outcome.error = true;
            if stop_at_error {
                return outcome;
            }
        }
        if total < best {
            best = total;
            outcome.decoded = m;
        }
    }
    outcome
}

/// Per-trial decoder decisions; trial `t` uses `rng_stream(seed, t)`.
pub fn trial_outcomes(
    eps_s: f64,
    a: f64,
    rate: f64,
    n: usize,
    trials: u64,
    seed: u64,
    form: DistanceForm,
) -> Result<Vec<TrialOutcome>> {
    validate(eps_s, a, n, trials)?;
    let m = codebook_size(rate, n)?;
    Ok((0..trials)
        .into_par_iter()
        .map(|t| simulate_trial(eps_s, a, n, m, form, false, &mut rng_stream(seed, t)))
        .collect())
}

/// Counts decoding errors over `trials` independent codebooks (reduced distance).
pub fn run_random_coding(
    eps_s: f64,
    a: f64,
    rate: f64,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<CodingResult> {
    run_random_coding_with(eps_s, a, rate, n, trials, seed, DistanceForm::Reduced)
}

pub fn run_random_coding_with(
    eps_s: f64,
    a: f64,
    rate: f64,
    n: usize,
    trials: u64,
    seed: u64,
    form: DistanceForm,
) -> Result<CodingResult> {
    validate(eps_s, a, n, trials)?;
    let m = codebook_size(rate, n)?;
    let errors = (0..trials)
        .into_par_iter()
        .map(|t| simulate_trial(eps_s, a, n, m, form, true, &mut rng_stream(seed, t)).error as u64)
        .sum();
    Ok(CodingResult {
        eps_s,
        a,
        rate,
        n,
        codebook_size: m,
        trials,
        errors,
        seed,
    })
}

/// Random-coding error probability for codebooks too large to enumerate.
///
/// For each trial the transmitted word and output are drawn as in
/// [`simulate_trial`]. Given them, the competitors are i.i.d., so the trial
/// errs with probability `1 - (1 - p)^(M - 1)` where `p` is the chance that a
/// single random word has total distance `<=` the transmitted one. `p` is
/// estimated by importance sampling from the exponentially tilted input law
/// (a reciprocal inverse-Gaussian per symbol, or a gamma when `y = 0`); its
/// normalizer is the closed-form metric denominator. The estimate is the mean
/// of the per-trial error probabilities, with `n_samples = trials`.
pub fn estimate_coding_error_rate(
    eps_s: f64,
    a: f64,
    rate: f64,
    n: usize,
    trials: u64,
    tilted_samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    validate(eps_s, a, n, trials)?;
    let rate = ensure_nonnegative("rate", rate)?;
    if tilted_samples == 0 {
        return Err(invalid("tilted_samples", 0.0, "must be positive"));
    }
    let competitors = (rate * n as f64).exp().ceil() - 1.0;
    let per_trial: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_stream(seed, t);
            let sent: Vec<f64> = (0..n).map(|_| sample_half_gamma(eps_s, &mut rng)).collect();
            let received: Vec<u64> = sent
                .iter()
                .map(|&x| sample_poisson_unchecked(x, &mut rng))
                .collect();
            let truth: f64 = sent
                .iter()
                .zip(&received)
                .map(|(&x, &y)| reduced_distance(x, y as f64, a))
                .sum();
            let p =
                pairwise_error_probability(eps_s, a, &received, truth, tilted_samples, &mut rng);
            if competitors <= 0.0 || p <= 0.0 {
                0.0
            } else if p >= 1.0 {
                1.0
            } else {
                -(competitors * (-p).ln_1p()).exp_m1()
            }
        })
        .collect();
    let stats = per_trial
        .into_iter()
        .fold(RunningStats::default(), |mut acc, v| {
            acc.push(v);
            acc
        });
    Ok(stats.into_estimate(seed))
}

/// Mean of the tilted law of `y²/X + a X` summed over the block.
fn tilted_mean(eps_s: f64, a: f64, received: &[u64], lambda: f64) -> f64 {
    let c = 1.0 + 2.0 * a * eps_s * lambda;
    let h = (2.0 * lambda * c / eps_s).sqrt();
    received
        .iter()
        .map(|&y| y as f64 * (1.0 + 4.0 * a * eps_s * lambda) / (eps_s * h) + a * eps_s / c)
        .sum()
}

fn pairwise_error_probability<R: Rng + ?Sized>(
    eps_s: f64,
    a: f64,
    received: &[u64],
    truth: f64,
    samples: u64,
    rng: &mut R,
) -> f64 {
    // Tilt so that the tilted mean total distance sits at the threshold.
    let (mut lo, mut hi) = (1e-12f64.ln(), 1e12f64.ln());
    let lambda = if tilted_mean(eps_s, a, received, lo.exp()) <= truth {
        lo.exp()
    } else if tilted_mean(eps_s, a, received, hi.exp()) >= truth {
        hi.exp()
    } else {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if tilted_mean(eps_s, a, received, mid.exp()) > truth {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi)).exp()
    };

    let config = DecoderConfig {
        a,
        s: lambda,
        weight_rate: 0.0,
    };
    let ln_normalizer: f64 = received
        .iter()
        .map(|&y| ln_weighted_metric_denominator(y, eps_s, &config))
        .sum();
    let beta = 0.5 / eps_s + lambda * a;
    let laws: Vec<Option<InverseGaussian<f64>>> = received
        .iter()
        .map(|&y| {
            (y > 0).then(|| {
                let mean = (beta / lambda).sqrt() / y as f64;
                InverseGaussian::new(mean, 2.0 * beta).expect("tilted law parameters are positive")
            })
        })
        .collect();

    let mut hits = 0.0;
    for _ in 0..samples {
        let mut total = 0.0;
        for (&y, law) in received.iter().zip(&laws) {
            let x = match law {
                Some(ig) => 1.0 / ig.sample(rng),
                None => {
                    let z: f64 = rng.sample(StandardNormal);
                    z * z / (2.0 * beta)
                }
            };
            total += reduced_distance(x, y as f64, a);
        }
        if total <= truth {
            hits += (lambda * total + ln_normalizer).exp();
        }
    }
    hits / samples as f64
}

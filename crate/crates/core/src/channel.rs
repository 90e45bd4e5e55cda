//! The discrete-time Poisson channel: transition law, gamma input family,
//! exact samplers, and the distance used by the mismatched decoder.
//!
//! The channel maps a nonnegative real input `x` (an energy) to an integer
//! count `y ~ Poisson(x)`. Inputs are drawn from a gamma law with shape `nu`
//! and mean `eps_s`; the shape-1/2 member is the one the decoder analysis
//! is built on.

use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{ensure_nonnegative, ensure_positive, invalid, Result};
use crate::special::{ln_factorial, ln_gamma};

/// Average input energy per channel use, `eps_s > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EnergyBudget(f64);

impl EnergyBudget {
    pub fn new(eps_s: f64) -> Result<Self> {
        ensure_positive("eps_s", eps_s).map(Self)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Gamma input law with shape `nu` and mean `eps_s` (scale `eps_s / nu`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaInput {
    nu: f64,
    eps_s: f64,
}

impl GammaInput {
    pub fn new(nu: f64, eps_s: f64) -> Result<Self> {
        Ok(Self {
            nu: ensure_positive("nu", nu)?,
            eps_s: ensure_positive("eps_s", eps_s)?,
        })
    }

    /// The shape-1/2 input, density `(2π eps_s x)^(-1/2) exp(-x / (2 eps_s))`.
    pub fn half(eps_s: f64) -> Result<Self> {
        Self::new(0.5, eps_s)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn eps_s(&self) -> f64 {
        self.eps_s
    }

    pub fn scale(&self) -> f64 {
        self.eps_s / self.nu
    }

    /// Log density at `x > 0`.
    pub fn ln_density(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(invalid("x", x, "gamma density is only defined for x > 0"));
        }
        Ok(self.ln_density_unchecked(x))
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        self.ln_density(x).map(f64::exp)
    }

    pub(crate) fn ln_density_unchecked(&self, x: f64) -> f64 {
        let theta = self.scale();
        (self.nu - 1.0) * x.ln() - x / theta - ln_gamma(self.nu) - self.nu * theta.ln()
    }
}

/// Metric parameters: `q(x, y)^s = exp(s (-a x - y²/x))`, optionally weighted by
/// `exp(-weight_rate x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    pub a: f64,
    pub s: f64,
    pub weight_rate: f64,
}

impl DecoderConfig {
    pub fn new(a: f64, s: f64, weight_rate: f64) -> Result<Self> {
        Ok(Self {
            a: ensure_positive("a", a)?,
            s: ensure_positive("s", s)?,
            weight_rate: ensure_nonnegative("weight_rate", weight_rate)?,
        })
    }

    /// Unweighted metric, as used by the generalized mutual information.
    pub fn gmi(a: f64, s: f64) -> Result<Self> {
        Self::new(a, s, 0.0)
    }

    /// The weighted variant with `a = 1` and weight `exp(-(s / eps_s) x)`.
    pub fn lm(eps_s: f64, s: f64) -> Result<Self> {
        let eps_s = ensure_positive("eps_s", eps_s)?;
        Self::new(1.0, s, s / eps_s)
    }
}

/// One use of the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSample {
    pub x: f64,
    pub y: u64,
}

/// `ln W(y|x) = -x + y ln x - ln y!`, with `W(0|0) = 1`.
pub fn ln_poisson_pmf(y: u64, x: f64) -> f64 {
    if x == 0.0 {
        return if y == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if y == 0 {
        return -x;
    }
    -x + y as f64 * x.ln() - ln_factorial(y)
}

/// Poisson transition probability `e^{-x} x^y / y!`, evaluated in the log domain.
pub fn poisson_pmf(y: u64, x: f64) -> f64 {
    ln_poisson_pmf(y, x).exp()
}

/// Smallest count `y_max` such that `P(Y > y_max) < 1e-12` by the Chernoff bound
/// `P(Y >= k) <= e^{-x} (e x / k)^k`, and never below `x + 12 √x + 20`.
pub fn truncation_point(x: f64) -> u64 {
    const LN_TAIL: f64 = -27.631_021_115_928_547; // ln 1e-12
    let mut m = (x + 12.0 * x.sqrt() + 20.0).ceil() as u64;
    if x <= 0.0 {
        return m;
    }
    loop {
        let k = (m + 1) as f64;
        let ln_bound = -x + k * (1.0 + x.ln() - k.ln());
        if ln_bound < LN_TAIL {
            return m;
        }
        m += 1;
    }
}

const GAMMA_UNDERFLOW: f64 = 1e-300;

/// Draws from the shape-1/2 gamma input as `eps_s Z²` with `Z` standard normal.
///
/// Draws below `1e-300 eps_s` are redrawn so that `y²/x` stays finite.
pub fn sample_gamma_input<R: Rng + ?Sized>(input: &GammaInput, rng: &mut R) -> Result<f64> {
    if input.nu != 0.5 {
        return Err(invalid(
            "nu",
            input.nu,
            "the squared-normal sampler only covers shape 1/2",
        ));
    }
    Ok(sample_half_gamma(input.eps_s, rng))
}

#[inline]
pub(crate) fn sample_half_gamma<R: Rng + ?Sized>(eps_s: f64, rng: &mut R) -> f64 {
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let x = eps_s * z * z;
        if x >= GAMMA_UNDERFLOW * eps_s {
            return x;
        }
    }
}

const INVERSION_LIMIT: f64 = 10.0;

/// Exact Poisson draw: sequential-search inversion below mean 10, Hörmann's
/// transformed rejection with squeeze (PTRS) above.
pub fn sample_poisson<R: Rng + ?Sized>(x: f64, rng: &mut R) -> Result<u64> {
    let x = ensure_nonnegative("x", x)?;
    Ok(sample_poisson_unchecked(x, rng))
}

#[inline]
pub(crate) fn sample_poisson_unchecked<R: Rng + ?Sized>(x: f64, rng: &mut R) -> u64 {
    if x == 0.0 {
        0
    } else if x < INVERSION_LIMIT {
        poisson_inversion(x, rng)
    } else {
        poisson_ptrs(x, rng)
    }
}

fn poisson_inversion<R: Rng + ?Sized>(x: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-x).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= x / k as f64;
        if p == 0.0 {
            // cdf rounded short of u; the remaining mass is below 1e-300.
            break;
        }
        cdf += p;
    }
    k
}

fn poisson_ptrs<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> u64 {
    let smu = mu.sqrt();
    let b = 0.931 + 2.53 * smu;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    let ln_mu = mu.ln();
    loop {
        let u: f64 = rng.sample::<f64, _>(Open01) - 0.5;
        let v: f64 = rng.sample(Open01);
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mu + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mu + k * ln_mu - ln_gamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// Draws one `(x, y)` pair with `x` from the shape-1/2 input and `y ~ Poisson(x)`.
pub fn sample_channel<R: Rng + ?Sized>(eps_s: f64, rng: &mut R) -> ChannelSample {
    let x = sample_half_gamma(eps_s, rng);
    let y = sample_poisson_unchecked(x, rng);
    ChannelSample { x, y }
}

/// Which algebraic form of the decoder distance to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceForm {
    /// `(y - √a x)² / x`
    Full,
    /// `y²/x + a x`, i.e. the full form plus the codeword-independent `2 y √a`.
    #[default]
    Reduced,
}

/// Symbol distance of the minimum-distance decoder.
///
/// Both forms differ by `2 y √a`, which does not depend on the candidate `x`,
/// so summed over a block they rank codewords identically.
pub fn decoder_distance(x: f64, y: u64, a: f64, form: DistanceForm) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(invalid("x", x, "distance is singular at x <= 0"));
    }
    let a = ensure_positive("a", a)?;
    let y = y as f64;
    Ok(match form {
        DistanceForm::Full => full_distance(x, y, a.sqrt()),
        DistanceForm::Reduced => reduced_distance(x, y, a),
    })
}

#[inline]
pub(crate) fn full_distance(x: f64, y: f64, sqrt_a: f64) -> f64 {
    let r = y - sqrt_a * x;
    r * r / x
}

#[inline]
pub(crate) fn reduced_distance(x: f64, y: f64, a: f64) -> f64 {
    y * y / x + a * x
}

/// `s ln q(x, y) = s (-a x - y²/x)`.
pub fn metric_value(x: f64, y: u64, config: &DecoderConfig) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(invalid("x", x, "metric is singular at x <= 0"));
    }
    Ok(-config.s * reduced_distance(x, y as f64, config.a))
}

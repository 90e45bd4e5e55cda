//! Closed-form rates for the Poisson channel with a shape-1/2 gamma input.
//!
//! With the metric `q(x, y) = exp(-a x - y²/x)` and tilt `s`, the generalized
//! mutual information evaluates to
//!
//! ```text
//! I(s) = -s((a+1) eps + 1) + sqrt(2 eps s (1 + 2 a eps s)) + ½ ln(1 + 2 a eps s)
//! ```
//!
//! The first two terms cancel at `s_hat(eps, a)`, and for `a = 1 + 1/eps` the
//! remaining term is `½ ln(1 + eps)`. The weighted variant (`a = 1`, input
//! weight `exp(-(s/eps) x)`) reduces to the same expression.

mod digamma;
mod mutual_info;

use std::fmt;

pub use digamma::digamma;
pub use mutual_info::{
    exact_mi_direct, exact_mi_gamma, ln_output_marginal, marginal_truncation, output_entropy,
    output_marginal, MARGINAL_TAIL,
};

use crate::channel::DecoderConfig;
use crate::error::{ensure_positive, Error, Result};

/// `½ ln(1 + eps_s)`, the rate achieved by the modified minimum-distance decoder.
pub fn theorem_rate(eps_s: f64) -> f64 {
    if !(eps_s >= 0.0) {
        return f64::NAN;
    }
    0.5 * eps_s.ln_1p()
}

/// The metric coefficient `a = 1 + 1/eps_s` used with the shape-1/2 input.
pub fn matched_coefficient(eps_s: f64) -> f64 {
    1.0 + 1.0 / eps_s
}

/// Sum of the two tilt-linear terms of the closed-form GMI; zero at [`s_hat`].
pub fn gmi_leading_terms(eps_s: f64, a: f64, s: f64) -> f64 {
    -s * ((a + 1.0) * eps_s + 1.0) + (2.0 * eps_s * s * (1.0 + 2.0 * a * eps_s * s)).sqrt()
}

/// Closed-form generalized mutual information at tilt `s` (nats).
pub fn gmi_closed_form(eps_s: f64, a: f64, s: f64) -> f64 {
    gmi_leading_terms(eps_s, a, s) + 0.5 * (2.0 * a * eps_s * s).ln_1p()
}

/// Tilt at which the leading terms of [`gmi_closed_form`] cancel.
pub fn s_hat(eps_s: f64, a: f64) -> f64 {
    let am1 = a - 1.0;
    2.0 * eps_s / (am1 * am1 * eps_s * eps_s + 2.0 * eps_s * (a + 1.0) + 1.0)
}

/// Lapidoth–Moser lower bound
/// `ln((1 + 1/eps)^(1+eps) √eps) - (1 + √(π / (24 eps)))`.
///
/// Goes to −∞ as `eps_s -> 0`.
pub fn lapidoth_moser_bound(eps_s: f64) -> f64 {
    (1.0 + eps_s) * (1.0 / eps_s).ln_1p() + 0.5 * eps_s.ln()
        - (1.0 + (std::f64::consts::PI / (24.0 * eps_s)).sqrt())
}

fn weight_constant(eps_s: f64, config: &DecoderConfig) -> f64 {
    1.0 + 2.0 * eps_s * (config.a * config.s + config.weight_rate)
}

/// `ln` of [`weighted_metric_denominator`].
pub fn ln_weighted_metric_denominator(y: u64, eps_s: f64, config: &DecoderConfig) -> f64 {
    let c = weight_constant(eps_s, config);
    -(y as f64) * (2.0 * config.s * c / eps_s).sqrt() - 0.5 * c.ln()
}

/// `E_X[ exp(-w X) q(X, y)^s ]` under the shape-1/2 input of mean `eps_s`:
/// `exp(-y √(2 s c / eps_s)) / √c` with `c = 1 + 2 eps_s (a s + w)`.
///
/// The weight `exp(-w x)` is left unnormalized; the ratio in the weighted rate
/// is invariant to constant rescaling of the weight.
pub fn weighted_metric_denominator(y: u64, eps_s: f64, config: &DecoderConfig) -> f64 {
    ln_weighted_metric_denominator(y, eps_s, config).exp()
}

/// Closed-form expectation of `ln[ a(X) q(X,Y)^s / E_X'[a(X') q(X',Y)^s] ]` with
/// weight `a(x) = exp(-weight_rate x)`; equals [`gmi_closed_form`] when the
/// weight rate is zero.
pub fn weighted_gmi_closed_form(eps_s: f64, config: &DecoderConfig) -> f64 {
    weighted_leading_terms(eps_s, config) + 0.5 * weight_constant(eps_s, config).ln()
}

fn weighted_leading_terms(eps_s: f64, config: &DecoderConfig) -> f64 {
    let c = weight_constant(eps_s, config);
    -config.weight_rate * eps_s - config.s * ((config.a + 1.0) * eps_s + 1.0)
        + (2.0 * eps_s * config.s * c).sqrt()
}

/// Weighted rate with `a = 1` and weight `exp(-(s / eps_s) x)`.
pub fn lm_closed_form(eps_s: f64, s: f64) -> Result<f64> {
    let config = DecoderConfig::lm(eps_s, s)?;
    Ok(weighted_gmi_closed_form(eps_s, &config))
}

/// Tilt at which the leading terms of [`lm_closed_form`] cancel, found by
/// bracketing the sign change and bisecting to machine precision.
pub fn lm_cancellation_tilt(eps_s: f64) -> Result<f64> {
    let eps_s = ensure_positive("eps_s", eps_s)?;
    let leading = |s: f64| -> Result<f64> {
        Ok(weighted_leading_terms(eps_s, &DecoderConfig::lm(eps_s, s)?))
    };

    // The leading terms are positive for small s and negative for large s.
    let mut lo = 1.0;
    let mut hi = 1.0;
    let mut steps = 0;
    while leading(lo)? <= 0.0 {
        lo *= 0.5;
        steps += 1;
        if steps > 1100 {
            return Err(Error::RootSolve(
                "no positive leading terms found below s = 1",
            ));
        }
    }
    steps = 0;
    while leading(hi)? >= 0.0 {
        hi *= 2.0;
        steps += 1;
        if steps > 1100 {
            return Err(Error::RootSolve(
                "no negative leading terms found above s = 1",
            ));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) || (hi - lo) <= 1e-15 * hi {
            break;
        }
        if leading(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The weighted rate evaluated at its cancellation tilt.
pub fn lm_rate_check(eps_s: f64) -> Result<f64> {
    let s = lm_cancellation_tilt(eps_s)?;
    lm_closed_form(eps_s, s)
}

/// One closed-form GMI evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmiEvaluation {
    pub eps_s: f64,
    pub a: f64,
    pub s: f64,
    pub value: f64,
}

impl GmiEvaluation {
    pub fn new(eps_s: f64, a: f64, s: f64) -> Result<Self> {
        let eps_s = ensure_positive("eps_s", eps_s)?;
        let a = ensure_positive("a", a)?;
        let s = crate::error::ensure_nonnegative("s", s)?;
        Ok(Self {
            eps_s,
            a,
            s,
            value: gmi_closed_form(eps_s, a, s),
        })
    }

    /// Evaluation at `a = 1 + 1/eps_s`, `s = s_hat`.
    pub fn theorem_point(eps_s: f64) -> Result<Self> {
        let eps_s = ensure_positive("eps_s", eps_s)?;
        let a = matched_coefficient(eps_s);
        Self::new(eps_s, a, s_hat(eps_s, a))
    }
}

/// Grid scan of the closed-form GMI over `s` in `[s_hat / 10, 10 s_hat]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmiScan {
    pub s_hat: f64,
    pub value_at_s_hat: f64,
    pub s_best: f64,
    pub best_value: f64,
}

/// Reports the empirical maximizer over a log grid next to the cancellation tilt.
/// No claim is made that `s_hat` is the maximizer.
pub fn scan_gmi(eps_s: f64, a: f64, points: usize) -> Result<GmiScan> {
    let eps_s = ensure_positive("eps_s", eps_s)?;
    let a = ensure_positive("a", a)?;
    let points = points.max(2);
    let sh = s_hat(eps_s, a);
    let (lo, hi) = ((sh / 10.0).ln(), (sh * 10.0).ln());
    let at_hat = gmi_closed_form(eps_s, a, sh);
    let (mut s_best, mut best_value) = (sh, at_hat);
    for i in 0..points {
        let s = (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp();
        let v = gmi_closed_form(eps_s, a, s);
        if v > best_value {
            s_best = s;
            best_value = v;
        }
    }
    Ok(GmiScan {
        s_hat: sh,
        value_at_s_hat: at_hat,
        s_best,
        best_value,
    })
}

/// Which bound a [`BoundPoint`] holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundId {
    TheoremRate,
    Gmi { a: f64, s: f64 },
    LapidothMoser,
    ExactMi { nu: f64 },
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundId::TheoremRate => f.write_str("theorem-rate"),
            BoundId::Gmi { a, s } => write!(f, "gmi(a={a},s={s})"),
            BoundId::LapidothMoser => f.write_str("lapidoth-moser"),
            BoundId::ExactMi { nu } => write!(f, "exact-mi(nu={nu})"),
        }
    }
}

/// A rate in nats at one energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPoint {
    pub eps_s: f64,
    pub bound: BoundId,
    pub value: f64,
}

impl BoundPoint {
    pub fn evaluate(eps_s: f64, bound: BoundId, tol: f64) -> Result<Self> {
        let eps_s = ensure_positive("eps_s", eps_s)?;
        let value = match bound {
            BoundId::TheoremRate => theorem_rate(eps_s),
            BoundId::Gmi { a, s } => GmiEvaluation::new(eps_s, a, s)?.value,
            BoundId::LapidothMoser => lapidoth_moser_bound(eps_s),
            BoundId::ExactMi { nu } => exact_mi_gamma(eps_s, nu, tol)?,
        };
        Ok(Self {
            eps_s,
            bound,
            value,
        })
    }
}

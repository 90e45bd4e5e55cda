//! Mutual information of the Poisson channel under a gamma(nu) input.
//!
//! The output law is negative binomial:
//! `P_Y(y) = Γ(y+nu) / (y! Γ(nu)) (nu/(nu+eps))^nu (eps/(nu+eps))^y`.
//! [`exact_mi_gamma`] uses the one-dimensional integral representation;
//! [`exact_mi_direct`] sums `Σ_y ∫ P_X W ln(W / P_Y) dx` term by term and only
//! serves as an independent check on it.

use rayon::prelude::*;

use super::digamma::digamma_unchecked;
use crate::channel::{ln_poisson_pmf, GammaInput};
use crate::error::{ensure_positive, invalid, Result};
use crate::quadrature::{integrate_adaptive, mi_integrand, IntegrationRequest};
use crate::special::{ln_factorial, ln_gamma};

/// Tail mass left out of sums over the output alphabet.
pub const MARGINAL_TAIL: f64 = 1e-13;

const MAX_NU: f64 = 4.0;
const MIN_TOL: f64 = 1e-10;

/// `ln P_Y(y)` for the gamma(nu)-input output marginal.
pub fn ln_output_marginal(y: u64, eps_s: f64, nu: f64) -> f64 {
    let yf = y as f64;
    let head = if y == 0 {
        0.0
    } else {
        ln_gamma(yf + nu) - ln_factorial(y) - ln_gamma(nu)
    };
    head - nu * (eps_s / nu).ln_1p() - yf * (nu / eps_s).ln_1p()
}

pub fn output_marginal(y: u64, eps_s: f64, nu: f64) -> f64 {
    ln_output_marginal(y, eps_s, nu).exp()
}

/// Smallest `y_max` whose geometric tail bound `P(Y > y_max)` is below `tail`.
///
/// For `y` past the mode the pmf ratio `r(y) = (y+nu)/(y+1) q`, `q = eps/(nu+eps)`,
/// is monotone with limit `q`, so `max(r(y), q)` bounds every later ratio.
pub fn marginal_truncation(eps_s: f64, nu: f64, tail: f64) -> u64 {
    let q = eps_s / (nu + eps_s);
    let mut y = 0u64;
    let mut ln_p = ln_output_marginal(0, eps_s, nu);
    loop {
        let yf = y as f64;
        let r = (yf + nu) / (yf + 1.0) * q;
        let bound = r.max(q);
        if r < 1.0 && bound < 1.0 {
            let ln_tail = ln_p + bound.ln() - (1.0 - bound).ln();
            if ln_tail < tail.ln() {
                return y;
            }
        }
        ln_p += r.ln();
        y += 1;
    }
}

/// Entropy of the output (nats), truncated at [`MARGINAL_TAIL`].
pub fn output_entropy(eps_s: f64, nu: f64) -> f64 {
    let y_max = marginal_truncation(eps_s, nu, MARGINAL_TAIL);
    (0..=y_max)
        .map(|y| {
            let lp = ln_output_marginal(y, eps_s, nu);
            -lp.exp() * lp
        })
        .sum()
}

fn validate(eps_s: f64, nu: f64, tol: f64) -> Result<()> {
    ensure_positive("nu", nu)?;
    if nu > MAX_NU {
        return Err(invalid("nu", nu, "shape parameter is supported on (0, 4]"));
    }
    if !(tol >= MIN_TOL) || !tol.is_finite() {
        return Err(invalid("tol", tol, "tolerance must be at least 1e-10"));
    }
    if !(eps_s >= 0.0) || !eps_s.is_finite() {
        return Err(invalid("eps_s", eps_s, "must be finite and >= 0"));
    }
    Ok(())
}

/// Mutual information (nats) of a gamma(nu) input with mean `eps_s`:
///
/// `∫0^1 g(u) du + (eps+nu) ln((eps+nu)/nu) + eps (ψ(nu+1) - 1)`
///
/// with `g` from [`crate::quadrature::integrate_mi_integrand`]. `tol` is the
/// relative tolerance handed to the integrator.
pub fn exact_mi_gamma(eps_s: f64, nu: f64, tol: f64) -> Result<f64> {
    validate(eps_s, nu, tol)?;
    if eps_s == 0.0 {
        return Ok(0.0);
    }
    let req = IntegrationRequest::new(|u| mi_integrand(eps_s, nu, u), 0.0, 1.0)
        .rel_tol(tol)
        .abs_tol(1e-15);
    let integral = integrate_adaptive(&req)?.value()?;
    let closed = (eps_s + nu) * (eps_s / nu).ln_1p() + eps_s * (digamma_unchecked(nu + 1.0) - 1.0);
    Ok(integral + closed)
}

/// Mutual information by direct summation over outputs of the inner integral
/// `∫ P_X(x) W(y|x) ln(W(y|x) / P_Y(y)) dx`. Slow; meant for cross-checks.
pub fn exact_mi_direct(eps_s: f64, nu: f64, tol: f64) -> Result<f64> {
    validate(eps_s, nu, tol)?;
    if eps_s == 0.0 {
        return Ok(0.0);
    }
    let input = GammaInput::new(nu, eps_s)?;
    let y_max = marginal_truncation(eps_s, nu, MARGINAL_TAIL);
    let terms: Vec<Result<f64>> = (0..=y_max)
        .into_par_iter()
        .map(|y| output_term(&input, y, tol))
        .collect();
    let mut total = 0.0;
    for t in terms {
        total += t?;
    }
    Ok(total)
}

fn output_term(input: &GammaInput, y: u64, tol: f64) -> Result<f64> {
    let (eps_s, nu) = (input.eps_s(), input.nu());
    let ln_py = ln_output_marginal(y, eps_s, nu);
    let integrand = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        let ln_w = ln_poisson_pmf(y, x);
        let joint = (input.ln_density_unchecked(x) + ln_w).exp();
        if joint == 0.0 {
            0.0
        } else {
            joint * (ln_w - ln_py)
        }
    };
    // The x-posterior given y is gamma(y + nu, rate 1 + nu/eps); split around its bulk.
    let shrink = eps_s / (nu + eps_s);
    let centre = (y as f64 + nu) * shrink;
    let spread = (y as f64 + nu).sqrt() * shrink;
    let far = centre + 40.0 * spread;
    let abs_tol = (1e-2 * tol * ln_py.exp()).max(1e-300);
    let mut total = 0.0;
    for (lo, hi) in [(0.0, centre), (centre, far), (far, f64::INFINITY)] {
        let req = IntegrationRequest::new(integrand, lo, hi)
            .rel_tol(tol)
            .abs_tol(abs_tol);
        total += integrate_adaptive(&req)?.value()?;
    }
    Ok(total)
}

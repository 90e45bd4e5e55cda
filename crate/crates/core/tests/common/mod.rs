//! Reference implementations used only by the integration tests. Nothing here
//! calls into the library's numerical routines.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

/// Double-exponential quadrature of `f` over `[a, b]`.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    // Nodes are written as distances from the nearer endpoint to keep precision.
    let term = |t: f64| {
        let u = FRAC_PI_2 * t.sinh();
        let dist = half / (u.exp() * u.cosh());
        let w = half * FRAC_PI_2 * t.cosh() / (u.cosh() * u.cosh());
        let inside = |x: f64| if x > a && x < b { f(x) } else { 0.0 };
        let left = inside(a + dist);
        let right = inside(b - dist);
        if t == 0.0 {
            w * f(mid)
        } else {
            w * (left + right)
        }
    };
    refine(term, 4.0, rel_tol)
}

/// Double-exponential quadrature of `f` over `[a, ∞)`.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F, a: f64, rel_tol: f64) -> f64 {
    let term = |t: f64| {
        let mut total = 0.0;
        for t in if t == 0.0 { vec![0.0] } else { vec![t, -t] } {
            let x = (FRAC_PI_2 * t.sinh()).exp();
            let w = FRAC_PI_2 * t.cosh() * x;
            if w.is_finite() && x.is_finite() && w > 0.0 {
                let v = f(a + x);
                if v.is_finite() {
                    total += w * v;
                }
            }
        }
        total
    };
    refine(term, 5.0, rel_tol)
}

fn refine<T: Fn(f64) -> f64>(term: T, t_max: f64, rel_tol: f64) -> f64 {
    let mut h = 0.5;
    let mut sum = term(0.0);
    let mut k = 1;
    while (k as f64) * h <= t_max {
        sum += term(k as f64 * h);
        k += 1;
    }
    let mut estimate = h * sum;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= t_max {
            sum += term(k as f64 * h);
            k += 2;
        }
        let next = h * sum;
        if (next - estimate).abs() <= rel_tol * next.abs() {
            return next;
        }
        estimate = next;
    }
    estimate
}

/// Poisson pmf as `e^{-x} Π_{k≤y} x/k`, with periodic rescaling.
pub fn poisson_pmf_product(y: u64, x: f64) -> f64 {
    if x == 0.0 {
        return if y == 0 { 1.0 } else { 0.0 };
    }
    let mut ln_scale = -x;
    let mut value = 1.0f64;
    for k in 1..=y {
        value *= x / k as f64;
        if !(1e-100..=1e100).contains(&value) {
            ln_scale += value.ln();
            value = 1.0;
        }
    }
    value * ln_scale.exp()
}

/// Density of the shape-1/2 gamma law with mean `eps`.
pub fn half_gamma_density(x: f64, eps: f64) -> f64 {
    (-x / (2.0 * eps)).exp() / (2.0 * PI * eps * x).sqrt()
}

/// `E[e^{-wX} exp(-s (y²/X + a X))]` by direct quadrature in `t = √x`.
pub fn denominator_by_quadrature(y: u64, eps: f64, a: f64, s: f64, w: f64) -> f64 {
    let yf = y as f64;
    let g = |t: f64| {
        let x = t * t;
        let metric = if y == 0 {
            -s * a * x
        } else {
            -s * (yf * yf / x + a * x)
        };
        2.0 / (2.0 * PI * eps).sqrt() * (-x / (2.0 * eps) - w * x + metric).exp()
    };
    exp_sinh(g, 0.0, 1e-13)
}

/// Arithmetic mean and standard error.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Log-spaced grid including both endpoints.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1) as f64;
            (lo.ln() + t * (hi.ln() - lo.ln())).exp()
        })
        .collect()
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs()
}

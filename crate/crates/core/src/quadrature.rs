//! Adaptive Gauss–Kronrod integration for the improper integrals that show up
//! in the mutual-information and metric-denominator computations.
//!
//! The engine bisects the interval with the largest error estimate until the
//! summed estimate drops below `max(abs_tol, rel_tol * |value|)`. All nodes are
//! interior, so integrable endpoint singularities are never evaluated.
//! Semi-infinite and infinite ranges are mapped onto `(0, 1)` with
//! `x = a + t / (1 - t)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{invalid, Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-9;
pub const DEFAULT_ABS_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 2000;

/// An integral to evaluate, with its stopping rule.
#[derive(Clone)]
pub struct IntegrationRequest<F> {
    pub integrand: F,
    pub lower: f64,
    pub upper: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl<F: Fn(f64) -> f64> IntegrationRequest<F> {
    /// A request with the default tolerances. Either bound may be infinite.
    pub fn new(integrand: F, lower: f64, upper: f64) -> Self {
        Self {
            integrand,
            lower,
            upper,
            rel_tol: DEFAULT_REL_TOL,
            abs_tol: DEFAULT_ABS_TOL,
            max_subdivisions: DEFAULT_MAX_SUBDIVISIONS,
        }
    }

    pub fn rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn max_subdivisions(mut self, max_subdivisions: usize) -> Self {
        self.max_subdivisions = max_subdivisions;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.lower.is_nan() || self.upper.is_nan() || !(self.lower < self.upper) {
            return Err(invalid(
                "upper",
                self.upper,
                "integration bounds must satisfy lower < upper",
            ));
        }
        if !(self.rel_tol > 0.0) {
            return Err(invalid("rel_tol", self.rel_tol, "must be > 0"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(invalid("abs_tol", self.abs_tol, "must be > 0"));
        }
        if self.max_subdivisions == 0 {
            return Err(invalid("max_subdivisions", 0.0, "must be positive"));
        }
        Ok(())
    }
}

/// Outcome of [`integrate_adaptive`]. A non-converged result carries the best
/// estimate found but must not be used as a value; see [`IntegrationResult::value`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    pub converged: bool,
}

impl IntegrationResult {
    /// The integral, or [`Error::NoConvergence`] if the tolerance was not met.
    pub fn value(&self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NoConvergence {
                value: self.value,
                error_estimate: self.error_estimate,
                subdivisions: self.subdivisions_used,
            })
        }
    }
}

/// Integrates `req.integrand` over `[req.lower, req.upper]`.
///
/// Returns `Err` only for a malformed request. Failure to reach the tolerance,
/// or a non-finite integrand value at some node, yields `converged == false`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    req: &IntegrationRequest<F>,
) -> Result<IntegrationResult> {
    req.validate()?;
    let f = &req.integrand;
    let (a, b) = (req.lower, req.upper);
    let result = match (a.is_finite(), b.is_finite()) {
        (true, true) => adapt(f, a, b, req),
        (true, false) => adapt(
            &|t: f64| {
                let r = 1.0 - t;
                f(a + t / r) / (r * r)
            },
            0.0,
            1.0,
            req,
        ),
        (false, true) => adapt(
            &|t: f64| {
                let r = 1.0 - t;
                f(b - t / r) / (r * r)
            },
            0.0,
            1.0,
            req,
        ),
        (false, false) => adapt(
            &|t: f64| {
                let r = 1.0 - t;
                let x = t / r;
                (f(x) + f(-x)) / (r * r)
            },
            0.0,
            1.0,
            req,
        ),
    };
    Ok(result)
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn adapt<G: Fn(f64) -> f64 + ?Sized, F>(
    g: &G,
    a: f64,
    b: f64,
    req: &IntegrationRequest<F>,
) -> IntegrationResult {
    let first = gk21(g, a, b);
    let mut heap = BinaryHeap::with_capacity(2 * req.max_subdivisions + 1);
    let mut total = first.value;
    let mut error = first.error;
    heap.push(first);
    let mut subdivisions = 0usize;

    let finish = |heap: &BinaryHeap<Segment>, subdivisions, converged| {
        let (value, error_estimate) = resum(heap);
        IntegrationResult {
            value,
            error_estimate,
            subdivisions_used: subdivisions,
            converged: converged && value.is_finite() && error_estimate.is_finite(),
        }
    };

    loop {
        if !total.is_finite() || !error.is_finite() {
            return finish(&heap, subdivisions, false);
        }
        if error <= tolerance(req, total) {
            // Incremental sums drift; confirm against a fresh summation.
            let (value, err) = resum(&heap);
            total = value;
            error = err;
            if error <= tolerance(req, total) {
                return finish(&heap, subdivisions, true);
            }
        }
        if subdivisions >= req.max_subdivisions {
            return finish(&heap, subdivisions, false);
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval exhausted at machine precision.
            heap.push(worst);
            return finish(&heap, subdivisions, false);
        }
        let left = gk21(g, worst.a, mid);
        let right = gk21(g, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
}

fn tolerance<F>(req: &IntegrationRequest<F>, value: f64) -> f64 {
    req.abs_tol.max(req.rel_tol * value.abs())
}

fn resum(heap: &BinaryHeap<Segment>) -> (f64, f64) {
    let mut segments: Vec<&Segment> = heap.iter().collect();
    segments.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut value = 0.0;
    let mut comp = 0.0;
    let mut error = 0.0;
    for s in segments {
        // Kahan summation keeps thousands of small pieces from losing digits.
        let y = s.value - comp;
        let t = value + y;
        comp = (t - value) - y;
        value = t;
        error += s.error;
    }
    (value, error)
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// 10-point Gauss / 21-point Kronrod pair on `[a, b]` with the QUADPACK error scaling.
fn gk21<G: Fn(f64) -> f64 + ?Sized>(g: &G, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = g(center);
    let mut res_kronrod = WGK[10] * f_center;
    let mut res_gauss = 0.0;
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = g(center - dx);
        let f2 = g(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_kronrod - res_gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value, error }
}

/// Below this distance from `u = 1` the integrand switches to its Taylor expansion.
const SERIES_SWITCH: f64 = 1e-8;

/// Integrand of the one-dimensional integral in the gamma-input mutual information,
///
/// `( eps_s - (1 - nu^nu / (nu + eps_s (1 - u))^nu) u^(nu - 1) / (1 - u) ) / ln u`,
///
/// for `0 < u < 1`. The removable `0/0` at `u -> 1` is evaluated through
/// `expm1`/`ln_1p` and, within `1e-8` of the endpoint, a three-term series.
pub fn integrate_mi_integrand(eps_s: f64, nu: f64, u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(invalid("u", u, "must lie in the open interval (0, 1)"));
    }
    if !(eps_s >= 0.0) || !eps_s.is_finite() {
        return Err(invalid("eps_s", eps_s, "must be finite and >= 0"));
    }
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(invalid("nu", nu, "must be finite and > 0"));
    }
    Ok(mi_integrand(eps_s, nu, u))
}

pub(crate) fn mi_integrand(eps: f64, nu: f64, u: f64) -> f64 {
    if eps == 0.0 {
        return 0.0;
    }
    // Exact for u >= 1/2 (Sterbenz).
    let t = 1.0 - u;
    if t < SERIES_SWITCH {
        return mi_integrand_series(eps, nu, t);
    }
    let bracket = -(-nu * (eps * t / nu).ln_1p()).exp_m1() / t;
    let power = ((nu - 1.0) * u.ln()).exp();
    let ln_u = if u > 0.5 { (-t).ln_1p() } else { u.ln() };
    (eps - bracket * power) / ln_u
}

fn mi_integrand_series(eps: f64, nu: f64, t: f64) -> f64 {
    let (e, n) = (eps, nu);
    let (e2, e3) = (e * e, e * e * e);
    let (n2, n3, n4, n5, n6) = (n * n, n * n * n, n.powi(4), n.powi(5), n.powi(6));
    let c0 = -e * (e * n + e + 2.0 * n2 - 2.0 * n) / (2.0 * n);
    let c1 = e
        * (2.0 * e2 * n2 + 6.0 * e2 * n + 4.0 * e2 + 6.0 * e * n3 + 3.0 * e * n2 - 3.0 * e * n
            + 6.0 * n4
            - 12.0 * n3
            + 6.0 * n2)
        / (12.0 * n2);
    let c2 = -e
        * (e3 * n3
            + 6.0 * e3 * n2
            + 11.0 * e3 * n
            + 6.0 * e3
            + 4.0 * e2 * n4
            + 10.0 * e2 * n3
            + 2.0 * e2 * n2
            - 4.0 * e2 * n
            + 6.0 * e * n5
            - 6.0 * e * n4
            - 7.0 * e * n3
            + 5.0 * e * n2
            + 4.0 * n6
            - 18.0 * n5
            + 24.0 * n4
            - 10.0 * n3)
        / (24.0 * n3);
    c0 + t * (c1 + t * c2)
}

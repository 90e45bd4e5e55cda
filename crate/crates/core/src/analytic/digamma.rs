use crate::error::{invalid, Result};

// B_{2k} / (2k), k = 1..7
const ASYMPTOTIC: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

const SHIFT_THRESHOLD: f64 = 10.0;

/// Euler's digamma ψ(z) for z > 0: shift upward with ψ(z) = ψ(z+1) − 1/z, then
/// apply the asymptotic series in 1/z².
pub fn digamma(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(invalid("z", z, "digamma is only provided for finite z > 0"));
    }
    Ok(digamma_unchecked(z))
}

pub(crate) fn digamma_unchecked(mut z: f64) -> f64 {
    let mut acc = 0.0;
    while z < SHIFT_THRESHOLD {
        acc -= 1.0 / z;
        z += 1.0;
    }
    let inv2 = 1.0 / (z * z);
    let mut series = 0.0;
    let mut power = inv2;
    for c in ASYMPTOTIC {
        series += c * power;
        power *= inv2;
    }
    acc + z.ln() - 0.5 / z - series
}

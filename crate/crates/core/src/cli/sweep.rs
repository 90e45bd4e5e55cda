//! Sweep specification and CSV rows shared by the subcommands.

use std::fmt;
use std::io::{self, Write};

use clap::ValueEnum;
use rayon::prelude::*;

use crate::analytic::{
    exact_mi_gamma, gmi_closed_form, lapidoth_moser_bound, lm_cancellation_tilt, lm_closed_form,
    matched_coefficient, s_hat, theorem_rate,
};
use crate::error::{ensure_positive, invalid, Error, Result};
use crate::montecarlo::{estimate_gmi_mc, estimate_lm_mc, McEstimate, MIN_SAMPLES};

pub const CSV_HEADER: &str = "eps_s,quantity,value,stderr,samples,seed";
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum Quantity {
    TheoremRate,
    Gmi,
    Lm,
    LapidothMoser,
    ExactMi,
    McGmi,
    McLm,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::TheoremRate => "theorem-rate",
            Quantity::Gmi => "gmi",
            Quantity::Lm => "lm",
            Quantity::LapidothMoser => "lapidoth-moser",
            Quantity::ExactMi => "exact-mi",
            Quantity::McGmi => "mc-gmi",
            Quantity::McLm => "mc-lm",
        }
    }

    fn is_monte_carlo(self) -> bool {
        matches!(self, Quantity::McGmi | Quantity::McLm)
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Energy grid plus the quantities to evaluate at each point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub eps_min: f64,
    pub eps_max: f64,
    pub points: usize,
    pub scale: Scale,
    pub quantities: Vec<Quantity>,
    /// Gamma shape for `exact-mi`.
    pub nu: f64,
    /// Relative quadrature tolerance for `exact-mi`.
    pub tol: f64,
    pub samples: u64,
    pub seed: u64,
    /// Metric coefficient override for `gmi`/`mc-gmi` (default `1 + 1/eps`).
    pub a: Option<f64>,
    /// Tilt override (default: the cancellation tilt of the respective rate).
    pub s: Option<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            eps_min: 0.01,
            eps_max: 100.0,
            points: 40,
            scale: Scale::Log,
            quantities: vec![Quantity::TheoremRate],
            nu: 0.5,
            tol: 1e-9,
            samples: 1_000_000,
            seed: 1,
            a: None,
            s: None,
        }
    }
}

impl SweepSpec {
    /// A one-point "sweep" at `eps`.
    pub fn single(eps: f64, quantities: Vec<Quantity>) -> Self {
        Self {
            eps_min: eps,
            eps_max: eps,
            points: 1,
            quantities,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("eps_min", self.eps_min)?;
        ensure_positive("eps_max", self.eps_max)?;
        if self.points == 1 {
            if self.eps_min != self.eps_max {
                return Err(invalid(
                    "points",
                    1.0,
                    "a single point needs eps_min == eps_max",
                ));
            }
        } else if self.points < 2 {
            return Err(invalid(
                "points",
                self.points as f64,
                "need at least 2 points",
            ));
        } else if !(self.eps_min < self.eps_max) {
            return Err(invalid("eps_max", self.eps_max, "must exceed eps_min"));
        }
        if self.quantities.is_empty() {
            return Err(invalid(
                "quantities",
                0.0,
                "at least one quantity is required",
            ));
        }
        if self.quantities.contains(&Quantity::ExactMi) {
            ensure_positive("nu", self.nu)?;
            if self.nu > 4.0 {
                return Err(invalid(
                    "nu",
                    self.nu,
                    "shape parameter is supported on (0, 4]",
                ));
            }
            if !(self.tol >= 1e-10) {
                return Err(invalid("tol", self.tol, "tolerance must be at least 1e-10"));
            }
        }
        if self.quantities.iter().any(|q| q.is_monte_carlo()) && self.samples < MIN_SAMPLES {
            return Err(invalid(
                "samples",
                self.samples as f64,
                "at least 1000 samples are required",
            ));
        }
        if let Some(a) = self.a {
            ensure_positive("a", a)?;
        }
        if let Some(s) = self.s {
            ensure_positive("s", s)?;
        }
        Ok(())
    }

    /// Grid points; the end points are reproduced exactly.
    pub fn grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.eps_min];
        }
        let last = self.points - 1;
        (0..self.points)
            .map(|i| {
                if i == 0 {
                    return self.eps_min;
                }
                if i == last {
                    return self.eps_max;
                }
                let f = i as f64 / last as f64;
                match self.scale {
                    Scale::Log => {
                        (self.eps_min.ln() + f * (self.eps_max.ln() - self.eps_min.ln())).exp()
                    }
                    Scale::Linear => self.eps_min + f * (self.eps_max - self.eps_min),
                }
            })
            .collect()
    }
}

/// One output line. `value == None` marks a failed evaluation ("NA").
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub eps_s: f64,
    pub quantity: Quantity,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
}

impl CsvRow {
    fn analytic(eps_s: f64, quantity: Quantity, value: f64) -> Self {
        Self {
            eps_s,
            quantity,
            value: Some(value),
            stderr: None,
            samples: None,
            seed: None,
        }
    }

    fn failed(eps_s: f64, quantity: Quantity) -> Self {
        Self {
            value: None,
            ..Self::analytic(eps_s, quantity, 0.0)
        }
    }

    fn monte_carlo(eps_s: f64, quantity: Quantity, est: McEstimate) -> Self {
        Self {
            eps_s,
            quantity,
            value: Some(est.mean),
            stderr: Some(est.stderr),
            samples: Some(est.n_samples),
            seed: Some(est.seed),
        }
    }

    pub fn write_to<W: Write + ?Sized>(&self, w: &mut W, bits: bool) -> io::Result<()> {
        let unit = if bits { std::f64::consts::LN_2 } else { 1.0 };
        let value = self.value.map_or_else(
            || "NA".to_string(),
            |v| format_significant(v / unit, SIGNIFICANT_DIGITS),
        );
        let stderr = self.stderr.map_or_else(String::new, |v| {
            format_significant(v / unit, SIGNIFICANT_DIGITS)
        });
        let samples = self.samples.map_or_else(String::new, |v| v.to_string());
        let seed = self.seed.map_or_else(String::new, |v| v.to_string());
        writeln!(
            w,
            "{},{},{},{},{},{}",
            format_significant(self.eps_s, SIGNIFICANT_DIGITS),
            self.quantity,
            value,
            stderr,
            samples,
            seed
        )
    }
}

/// Evaluates every (grid point, quantity) pair in grid order.
///
/// Errors only on an invalid spec; quadrature failures become `NA` rows.
pub fn sweep_rows(spec: &SweepSpec) -> Result<Vec<CsvRow>> {
    spec.validate()?;
    let grid = spec.grid();
    let rows: Vec<Result<Vec<CsvRow>>> = grid
        .par_iter()
        .map(|&eps| {
            spec.quantities
                .iter()
                .map(|&q| evaluate(spec, eps, q))
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(grid.len() * spec.quantities.len());
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

fn evaluate(spec: &SweepSpec, eps: f64, q: Quantity) -> Result<CsvRow> {
    let gmi_params = || {
        let a = spec.a.unwrap_or_else(|| matched_coefficient(eps));
        (a, spec.s.unwrap_or_else(|| s_hat(eps, a)))
    };
    let lm_tilt = || spec.s.map_or_else(|| lm_cancellation_tilt(eps), Ok);
    Ok(match q {
        Quantity::TheoremRate => CsvRow::analytic(eps, q, theorem_rate(eps)),
        Quantity::LapidothMoser => CsvRow::analytic(eps, q, lapidoth_moser_bound(eps)),
        Quantity::Gmi => {
            let (a, s) = gmi_params();
            CsvRow::analytic(eps, q, gmi_closed_form(eps, a, s))
        }
        Quantity::Lm => match lm_tilt() {
            Ok(s) => CsvRow::analytic(eps, q, lm_closed_form(eps, s)?),
            Err(Error::RootSolve(_)) => CsvRow::failed(eps, q),
            Err(e) => return Err(e),
        },
        Quantity::ExactMi => match exact_mi_gamma(eps, spec.nu, spec.tol) {
            Ok(v) => CsvRow::analytic(eps, q, v),
            Err(Error::NoConvergence { .. }) => CsvRow::failed(eps, q),
            Err(e) => return Err(e),
        },
        Quantity::McGmi => {
            let (a, s) = gmi_params();
            CsvRow::monte_carlo(eps, q, estimate_gmi_mc(eps, a, s, spec.samples, spec.seed)?)
        }
        Quantity::McLm => match lm_tilt() {
            Ok(s) => CsvRow::monte_carlo(eps, q, estimate_lm_mc(eps, s, spec.samples, spec.seed)?),
            Err(Error::RootSolve(_)) => CsvRow::failed(eps, q),
            Err(e) => return Err(e),
        },
    })
}

pub fn write_csv<W: Write + ?Sized>(rows: &[CsvRow], w: &mut W, bits: bool) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for row in rows {
        row.write_to(w, bits)?;
    }
    Ok(())
}

/// `%.{digits}g`-style formatting: fixed notation for decimal exponents in
/// `[-5, digits)`, scientific otherwise, trailing zeros removed.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci
        .split_once('e')
        .expect("scientific formatting has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_formatting() {
        assert_eq!(format_significant(0.34657359027997264, 12), "0.34657359028");
        assert_eq!(format_significant(1.0, 12), "1");
        assert_eq!(format_significant(-2.5, 12), "-2.5");
        assert_eq!(format_significant(100.0, 12), "100");
        assert_eq!(format_significant(1.5e-7, 12), "1.5e-07");
        assert_eq!(
            format_significant(123456789012345.0, 12),
            "1.23456789012e+14"
        );
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(0.024493, 12), "0.024493");
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let spec = SweepSpec {
            eps_min: 0.01,
            eps_max: 100.0,
            points: 40,
            ..SweepSpec::default()
        };
        let g = spec.grid();
        assert_eq!(g.len(), 40);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[39], 100.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let lin = SweepSpec {
            scale: Scale::Linear,
            eps_min: 1.0,
            eps_max: 3.0,
            points: 3,
            ..SweepSpec::default()
        };
        assert_eq!(lin.grid(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn spec_validation() {
        let ok = SweepSpec::default();
        assert!(ok.validate().is_ok());
        let bad = [
            SweepSpec {
                eps_min: 0.0,
                ..ok.clone()
            },
            SweepSpec {
                eps_min: 5.0,
                eps_max: 1.0,
                ..ok.clone()
            },
            SweepSpec {
                points: 0,
                ..ok.clone()
            },
            SweepSpec {
                quantities: vec![],
                ..ok.clone()
            },
            SweepSpec {
                quantities: vec![Quantity::ExactMi],
                nu: 5.0,
                ..ok.clone()
            },
            SweepSpec {
                quantities: vec![Quantity::McGmi],
                samples: 10,
                ..ok.clone()
            },
        ];
        for spec in bad {
            assert!(spec.validate().is_err(), "{spec:?}");
        }
    }

    #[test]
    fn analytic_rows_leave_mc_columns_empty() {
        let mut buf = Vec::new();
        CsvRow::analytic(1.0, Quantity::TheoremRate, theorem_rate(1.0))
            .write_to(&mut buf, false)
            .unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "1,theorem-rate,0.34657359028,,,\n"
        );
        let mut buf = Vec::new();
        CsvRow::failed(2.0, Quantity::ExactMi)
            .write_to(&mut buf, false)
            .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "2,exact-mi,NA,,,\n");
    }

    #[test]
    fn bits_divide_by_ln2() {
        let mut buf = Vec::new();
        CsvRow::analytic(1.0, Quantity::TheoremRate, theorem_rate(1.0))
            .write_to(&mut buf, true)
            .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1,theorem-rate,0.5,,,\n");
    }
}

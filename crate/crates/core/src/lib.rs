//! Capacity lower bounds for the discrete-time Poisson channel.
//!
//! The crate evaluates the rate `½ ln(1 + eps_s)` achieved by a modified
//! minimum-distance decoder under a shape-1/2 gamma input, the exact mutual
//! information of gamma inputs, and the Lapidoth–Moser bound, and cross-checks
//! them with quadrature, Monte Carlo estimation and a random-coding simulator.
//!
//! All rates are in nats.
//!
//! ```
//! use poisson_gmi::analytic::{gmi_closed_form, matched_coefficient, s_hat, theorem_rate};
//!
//! let eps = 3.0;
//! let a = matched_coefficient(eps);
//! let rate = gmi_closed_form(eps, a, s_hat(eps, a));
//! assert!((rate - theorem_rate(eps)).abs() < 1e-12);
//! ```

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod cli;
pub mod error;
pub mod montecarlo;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};

//! Fractional calculus on the t^α lattice.
//!
//! The crate evaluates the one-parameter Mittag-Leffler function and the
//! fractional trigonometric pair cos_α / sin_α, implements the Jumarie
//! modified Riemann-Liouville derivative twice (exactly on truncated
//! α-power series, and numerically on sampled data), and solves linear
//! constant-coefficient equations Σ p_m D^{mα} y = 0 by factoring the
//! characteristic polynomial into Mittag-Leffler modes.
//!
//! Identities that only hold in Jumarie's formal calculus (the pointwise
//! product law E_α(at^α)E_α(bt^α) = E_α((a+b)t^α), the fractional Leibniz
//! rule, the repeated-root ansatz) are not assumed anywhere; the
//! [`deviation`] module measures how far they are from true for α < 1.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod alpha_series;
pub mod cli;
pub mod deviation;
pub mod fractional_ops;
pub mod mittag_leffler;
pub mod roots;
pub mod solver;
pub mod special;
mod summation;

pub use alpha_series::{AlphaSeries, SeriesError};
pub use mittag_leffler::{cos_alpha, ml, ml_period, sin_alpha, MlError, MlEvaluation};
pub use special::{beta, gamma, incomplete_beta, SpecialError};
pub use num_complex::Complex64;

//! One-parameter Mittag-Leffler function and the fractional trigonometric pair.
//!
//! E_α(z) = Σ_{k≥0} z^k / Γ(1+kα) is summed directly. Consecutive terms are
//! linked by term_{k+1} = term_k · z · Γ(1+kα)/Γ(1+(k+1)α), with the Gamma
//! ratio taken in the log domain once the arguments pass the overflow bound.
//! The terms peak near exp(|z|^{1/α}), so the natural size of an argument
//! is |z|^{1/α}. While that stays moderate (tens) the plain series is
//! accurate; on the negative real axis the alternating terms cancel and the
//! absolute error grows like ε·exp(|z|^{1/α}). There is no asymptotic branch:
//! once the terms overflow or the term budget runs out the result is
//! [`MlError::Convergence`] rather than a wrong value.

use num_complex::Complex64;
use thiserror::Error;

use crate::special::{gamma_ratio, SpecialError};
use crate::summation::{ComplexKahanSum, KahanSum};

/// Maximum number of series terms before giving up.
pub const TERM_BUDGET: usize = 2000;

/// Threshold on |E_α(iM^α) − 1| that defines a period.
pub const PERIOD_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MlError {
    #[error("{0}")]
    Domain(String),
    #[error(
        "series did not converge within {terms} terms (partial sum {partial_sum}, last term magnitude {last_term:e})"
    )]
    Convergence {
        terms: usize,
        partial_sum: Complex64,
        last_term: f64,
    },
    #[error(transparent)]
    Special(#[from] SpecialError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlEvaluation {
    pub value: Complex64,
    pub terms_used: usize,
    /// Magnitude of the first omitted term.
    pub truncation_estimate: f64,
}

/// Scalars the Mittag-Leffler term recurrence can run over.
trait TermScalar: Copy + std::ops::Mul<Output = Self> + std::ops::Mul<f64, Output = Self> {
    const ONE: Self;
    fn magnitude(self) -> f64;
}

impl TermScalar for f64 {
    const ONE: Self = 1.0;
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl TermScalar for Complex64 {
    const ONE: Self = Complex64::new(1.0, 0.0);
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

struct Stalled {
    terms: usize,
    last_term: f64,
}

/// Walks the terms x^k/Γ(1+kα), handing each to `sink` (which returns the
/// magnitude of the running sum) until the next term is negligible and the
/// terms have started to decay. Returns (terms used, first omitted term).
fn walk_terms<T: TermScalar>(
    alpha: f64,
    x: T,
    tol: f64,
    mut sink: impl FnMut(usize, T) -> f64,
) -> Result<(usize, f64), Stalled> {
    let x_abs = x.magnitude();
    let mut term = T::ONE;
    for k in 0..TERM_BUDGET {
        let size = sink(k, term);
        let kf = k as f64;
        let ratio = gamma_ratio(1.0 + kf * alpha, 1.0 + (kf + 1.0) * alpha).map_err(|_| {
            Stalled {
                terms: k + 1,
                last_term: term.magnitude(),
            }
        })?;
        let next = term * x * ratio;
        let next_abs = next.magnitude();
        if !next_abs.is_finite() || !size.is_finite() {
            return Err(Stalled {
                terms: k + 1,
                last_term: next_abs,
            });
        }
        // |x|Γ(1+kα)/Γ(1+(k+1)α) decreases in k (Γ is log-convex), so once
        // it drops below one every later term is smaller still.
        if next_abs < tol * size.max(1.0) && x_abs * ratio < 1.0 {
            return Ok((k + 1, next_abs));
        }
        term = next;
    }
    Err(Stalled {
        terms: TERM_BUDGET,
        last_term: term.magnitude(),
    })
}

/// Evaluates E_α(z) to relative tolerance `tol`.
pub fn ml(alpha: f64, z: Complex64, tol: f64) -> Result<MlEvaluation, MlError> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(MlError::Domain(format!(
            "alpha must lie in (0, 2], got {alpha}"
        )));
    }
    if !(tol > 0.0) {
        return Err(MlError::Domain(format!("tol must be positive, got {tol}")));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(MlError::Domain(format!("argument must be finite, got {z}")));
    }

    let mut acc = ComplexKahanSum::default();
    let outcome = walk_terms(alpha, z, tol, |_, term| {
        acc.add(term);
        acc.value().norm()
    });
    match outcome {
        Ok((terms_used, truncation_estimate)) => Ok(MlEvaluation {
            value: acc.value(),
            terms_used,
            truncation_estimate,
        }),
        Err(Stalled { terms, last_term }) => Err(MlError::Convergence {
            terms,
            partial_sum: acc.value(),
            last_term,
        }),
    }
}

/// E_α(x) for real x, returning the real value.
pub fn ml_real(alpha: f64, x: f64, tol: f64) -> Result<f64, MlError> {
    Ok(ml(alpha, Complex64::new(x, 0.0), tol)?.value.re)
}

fn check_trig_args(alpha: f64, t: f64, tol: f64) -> Result<(), MlError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(MlError::Domain(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(MlError::Domain(format!(
            "t must be finite and non-negative, got {t}"
        )));
    }
    if !(tol > 0.0) {
        return Err(MlError::Domain(format!("tol must be positive, got {tol}")));
    }
    Ok(())
}

/// (cos_α(t^α), sin_α(t^α)) from the real even/odd sub-series.
fn trig_pair(alpha: f64, t: f64, tol: f64) -> Result<(f64, f64), MlError> {
    check_trig_args(alpha, t, tol)?;
    let x = t.powf(alpha);
    let mut cos = KahanSum::default();
    let mut sin = KahanSum::default();
    let outcome = walk_terms(alpha, x, tol, |k, term| {
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            cos.add(sign * term);
        } else {
            sin.add(sign * term);
        }
        cos.value().abs().max(sin.value().abs())
    });
    match outcome {
        Ok(_) => Ok((cos.value(), sin.value())),
        Err(Stalled { terms, last_term }) => Err(MlError::Convergence {
            terms,
            partial_sum: Complex64::new(cos.value(), sin.value()),
            last_term,
        }),
    }
}

/// cos_α(t^α) = Σ_{k≥0} (−1)^k t^{2kα}/Γ(1+2kα).
pub fn cos_alpha(alpha: f64, t: f64, tol: f64) -> Result<f64, MlError> {
    trig_pair(alpha, t, tol).map(|(c, _)| c)
}

/// sin_α(t^α) = Σ_{k≥0} (−1)^k t^{(2k+1)α}/Γ(1+(2k+1)α).
pub fn sin_alpha(alpha: f64, t: f64, tol: f64) -> Result<f64, MlError> {
    trig_pair(alpha, t, tol).map(|(_, s)| s)
}

fn period_gap(alpha: f64, m: f64) -> Result<f64, MlError> {
    let z = Complex64::new(0.0, m.powf(alpha));
    Ok((ml(alpha, z, 1e-16)?.value - 1.0).norm())
}

/// Smallest M in (0, search_max] with |E_α(iM^α) − 1| < 1e-9.
///
/// The trivial approach E_α(0) = 1 as M → 0 is not a period; only interior
/// local minima of |E_α(iM^α) − 1| are candidates. Each bracketed minimum is
/// refined by golden-section search and accepted if it reaches the threshold.
pub fn ml_period(alpha: f64, search_max: f64) -> Result<Option<f64>, MlError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(MlError::Domain(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if !(search_max > 0.0) || !search_max.is_finite() {
        return Err(MlError::Domain(format!(
            "search_max must be positive and finite, got {search_max}"
        )));
    }

    let step = (search_max / 1000.0).min(1e-2);
    let n = (search_max / step).ceil() as usize;
    let node = |i: usize| (i as f64 * step).min(search_max);

    let mut prev2 = period_gap(alpha, node(1))?;
    let mut prev = period_gap(alpha, node(2))?;
    for i in 3..=n {
        let cur = period_gap(alpha, node(i))?;
        if prev < prev2 && prev <= cur {
            let m = golden_section_min(alpha, node(i - 2), node(i))?;
            if period_gap(alpha, m)? < PERIOD_THRESHOLD {
                return Ok(Some(m));
            }
        }
        prev2 = prev;
        prev = cur;
    }
    if prev < prev2 && prev < PERIOD_THRESHOLD {
        return Ok(Some(search_max));
    }
    Ok(None)
}

fn golden_section_min(alpha: f64, mut lo: f64, mut hi: f64) -> Result<f64, MlError> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = period_gap(alpha, x1)?;
    let mut f2 = period_gap(alpha, x2)?;
    for _ in 0..200 {
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = period_gap(alpha, x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = period_gap(alpha, x2)?;
        }
    }
    Ok(if f1 <= f2 { x1 } else { x2 })
}

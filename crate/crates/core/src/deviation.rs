//! How far identities of Jumarie's formal calculus are from true for α < 1.
//!
//! Every identity below holds at α = 1, where E_1 is the exponential and D^1
//! is the ordinary derivative. For α < 1 the series product of Mittag-Leffler
//! functions is not a Mittag-Leffler function and D^α has no product rule, so
//! each one picks up a deviation that is measured here, never assumed away.

use num_complex::Complex64;
use thiserror::Error;

use crate::alpha_series::{AlphaSeries, SeriesError};
use crate::mittag_leffler::{ml, MlError};
use crate::solver::{residual_series, solve, FdeProblem, SolverError};

/// Deviation at α = 1, relative to max(1, |reference|), below which an
/// identity counts as exact.
pub const EXACT_TOL: f64 = 1e-12;
/// Series order used for the coefficient-level identities.
pub const SERIES_ORDER: usize = 40;

const ML_TOL: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeviationError {
    #[error("alpha must lie in (0, 1], got {0}")]
    Alpha(f64),
    #[error("scenario needs finite a, b and t >= 0, got a = {a}, b = {b}, t = {t}")]
    Scenario { a: f64, b: f64, t: f64 },
    #[error(transparent)]
    Ml(#[from] MlError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    /// E_α(at^α) E_α(bt^α) = E_α((a+b)t^α), pointwise.
    ProductLaw,
    /// E_α(at^α) E_α(−at^α) = 1, pointwise.
    InverseLaw,
    /// E_α(at^α)² = E_α(2at^α), pointwise.
    SquareLaw,
    /// (D^α − a)² annihilates t^α E_α(at^α); measured as the constant term of
    /// the operator applied to the solution with D^{kα}y(0) = (0, 1).
    RepeatedRoot,
    /// D^α(uv) = u D^α v + v D^α u for u, v = E_α(at^α), E_α(bt^α); largest
    /// coefficient of the defect.
    LeibnizRule,
    /// E_α((a+ib)t^α) = E_α(at^α) E_α(ibt^α), the exponential-times-trig
    /// factorization of a conjugate-pair mode, pointwise.
    TrigFactorization,
}

impl Identity {
    pub const ALL: [Identity; 6] = [
        Identity::ProductLaw,
        Identity::InverseLaw,
        Identity::SquareLaw,
        Identity::RepeatedRoot,
        Identity::LeibnizRule,
        Identity::TrigFactorization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::ProductLaw => "product_law",
            Identity::InverseLaw => "inverse_law",
            Identity::SquareLaw => "square_law",
            Identity::RepeatedRoot => "repeated_root_residual",
            Identity::LeibnizRule => "leibniz_rule",
            Identity::TrigFactorization => "trig_factorization",
        }
    }

    /// Whether the identity is checked at a point t rather than on series
    /// coefficients.
    pub fn is_pointwise(self) -> bool {
        !matches!(self, Identity::RepeatedRoot | Identity::LeibnizRule)
    }
}

/// Parameters shared by the identities: the pair (a, b) and the point t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub a: f64,
    pub b: f64,
    pub t: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self { a: 1.0, b: 1.0, t: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationRow {
    pub identity: Identity,
    pub alpha: f64,
    pub scenario: Scenario,
    pub deviation: f64,
    /// Whether the same identity and scenario are exact at α = 1.
    pub exact_at_alpha1: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub alphas: Vec<f64>,
    pub rows: Vec<DeviationRow>,
}

impl DeviationReport {
    pub fn row(&self, identity: Identity, alpha: f64) -> Option<&DeviationRow> {
        self.rows.iter().find(|r| r.identity == identity && r.alpha == alpha)
    }
}

fn e(alpha: f64, z: Complex64) -> Result<Complex64, MlError> {
    Ok(ml(alpha, z, ML_TOL)?.value)
}

/// (deviation, size of the quantities compared)
fn measure(identity: Identity, alpha: f64, s: Scenario) -> Result<(f64, f64), DeviationError> {
    let x = s.t.powf(alpha);
    let re = |v: f64| Complex64::new(v, 0.0);
    Ok(match identity {
        Identity::ProductLaw => {
            let lhs = e(alpha, re(s.a * x))? * e(alpha, re(s.b * x))?;
            let rhs = e(alpha, re((s.a + s.b) * x))?;
            ((lhs - rhs).norm(), rhs.norm())
        }
        Identity::InverseLaw => {
            let lhs = e(alpha, re(s.a * x))? * e(alpha, re(-s.a * x))?;
            ((lhs - 1.0).norm(), 1.0)
        }
        Identity::SquareLaw => {
            let lhs = e(alpha, re(s.a * x))?.powu(2);
            let rhs = e(alpha, re(2.0 * s.a * x))?;
            ((lhs - rhs).norm(), rhs.norm())
        }
        Identity::RepeatedRoot => {
            let a = s.a;
            let problem = FdeProblem::new(
                alpha,
                vec![re(a * a), re(-2.0 * a), re(1.0)],
                vec![re(0.0), re(1.0)],
                None,
            )?;
            let solution = solve(&problem)?;
            let r = residual_series(&solution, &problem, SERIES_ORDER)?;
            (r.coeff(0).norm(), solution.series(SERIES_ORDER)?.max_abs_coeff())
        }
        Identity::LeibnizRule => {
            let u = AlphaSeries::from_ml(alpha, re(s.a), SERIES_ORDER)?;
            let v = AlphaSeries::from_ml(alpha, re(s.b), SERIES_ORDER)?;
            let lhs = u.mul(&v)?.jumarie_deriv()?;
            let rhs = u.mul(&v.jumarie_deriv()?)?.add(&v.mul(&u.jumarie_deriv()?)?)?;
            (lhs.sub(&rhs)?.max_abs_coeff(), lhs.max_abs_coeff())
        }
        Identity::TrigFactorization => {
            let lhs = e(alpha, Complex64::new(s.a * x, s.b * x))?;
            let rhs = e(alpha, re(s.a * x))? * e(alpha, Complex64::new(0.0, s.b * x))?;
            ((lhs - rhs).norm(), lhs.norm())
        }
    })
}

/// One row per identity, α and scenario, in that nesting order.
pub fn deviation_report(alphas: &[f64], scenarios: &[Scenario]) -> Result<DeviationReport, DeviationError> {
    if let Some(&bad) = alphas.iter().find(|&&a| !(a > 0.0 && a <= 1.0)) {
        return Err(DeviationError::Alpha(bad));
    }
    if let Some(s) = scenarios
        .iter()
        .find(|s| !(s.a.is_finite() && s.b.is_finite() && s.t.is_finite() && s.t >= 0.0))
    {
        return Err(DeviationError::Scenario { a: s.a, b: s.b, t: s.t });
    }
    let mut rows = Vec::new();
    for &identity in &Identity::ALL {
        for &scenario in scenarios {
            let (at_one, size) = measure(identity, 1.0, scenario)?;
            let exact_at_alpha1 = at_one <= EXACT_TOL * size.max(1.0);
            for &alpha in alphas {
                let deviation = if alpha == 1.0 { at_one } else { measure(identity, alpha, scenario)?.0 };
                rows.push(DeviationRow {
                    identity,
                    alpha,
                    scenario,
                    deviation,
                    exact_at_alpha1,
                });
            }
        }
    }
    Ok(DeviationReport {
        alphas: alphas.to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(alphas: &[f64]) -> DeviationReport {
        deviation_report(alphas, &[Scenario::default()]).unwrap()
    }

    #[test]
    fn exact_at_alpha_one() {
        let r = report(&[1.0]);
        assert_eq!(r.rows.len(), Identity::ALL.len());
        for row in &r.rows {
            assert!(row.exact_at_alpha1, "{:?}", row.identity);
            assert!(row.deviation <= 1e-12, "{:?}: {}", row.identity, row.deviation);
        }
    }

    #[test]
    fn product_law_witness() {
        // |E_{1/2}(1)² − E_{1/2}(2)|, 40-digit series evaluation.
        let row = report(&[0.5]).row(Identity::ProductLaw, 0.5).unwrap().clone();
        assert!((row.deviation - 83.851_022_940_504_64).abs() <= 1e-8);
        // Square law coincides with the product law at a = b.
        let sq = report(&[0.5]).row(Identity::SquareLaw, 0.5).unwrap().deviation;
        assert_eq!(sq, row.deviation);
    }

    #[test]
    fn inverse_law_witness() {
        // E_{1/2}(1) E_{1/2}(−1) − 1, 40-digit series evaluation.
        let d = report(&[0.5]).row(Identity::InverseLaw, 0.5).unwrap().deviation;
        assert!((d - 1.141_757_615_825_540_2).abs() <= 1e-12);
    }

    #[test]
    fn repeated_root_witness() {
        let d = report(&[0.5]).row(Identity::RepeatedRoot, 0.5).unwrap().deviation;
        let want = 2.0 - 4.0 / std::f64::consts::PI;
        assert!((d - want).abs() <= 1e-10, "{d} vs {want}");
    }

    #[test]
    fn every_identity_fails_below_one() {
        let r = report(&[0.3, 0.5, 0.8]);
        for row in &r.rows {
            assert!(row.deviation > 1e-3, "{:?} at {}: {}", row.identity, row.alpha, row.deviation);
        }
    }

    #[test]
    fn trig_factorization_exact_on_imaginary_axis() {
        let s = Scenario { a: 0.0, b: 1.3, t: 2.0 };
        let r = deviation_report(&[0.4], &[s]).unwrap();
        assert!(r.row(Identity::TrigFactorization, 0.4).unwrap().deviation <= 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(deviation_report(&[0.0], &[Scenario::default()]), Err(DeviationError::Alpha(_))));
        assert!(matches!(deviation_report(&[1.2], &[Scenario::default()]), Err(DeviationError::Alpha(_))));
        let bad = Scenario { a: 1.0, b: 1.0, t: -1.0 };
        assert!(matches!(deviation_report(&[0.5], &[bad]), Err(DeviationError::Scenario { .. })));
    }
}

//! Linear constant-coefficient equations Σ_{m=0..n} p_m D^{mα} y = 0 in the
//! sequential Jumarie derivative.
//!
//! The characteristic polynomial Σ p_m λ^m is factored; a root a of
//! multiplicity r contributes the modes t^{jα} E_α(a t^α), j = 0..r−1. Only
//! the j = 0 modes are exact solutions for α < 1: D^α E_α(at^α) = a E_α(at^α)
//! holds coefficientwise on the t^α lattice, but D^α fails the product rule,
//! so t^{jα} E_α(at^α) with j ≥ 1 leaves a residual that vanishes only at
//! α = 1. [`residual`] reports it instead of hiding it.
//!
//! Initial conditions are the values D^{kα}y(0), k = 0..n−1, which are the
//! constant terms of the successively differentiated series.

use num_complex::Complex64;
use thiserror::Error;

use crate::alpha_series::{AlphaSeries, SeriesError};
use crate::mittag_leffler::{ml, MlError};
use crate::roots::{find_roots_with, Root, RootsError, CLUSTER_TOL};
use crate::summation::ComplexKahanSum;

/// Relative tolerance for Mittag-Leffler evaluations inside the solver.
pub const ML_TOL: f64 = 1e-16;
/// Series order used to fit initial conditions and compute residuals.
pub const DEFAULT_ORDER: usize = 60;
/// Threshold on |det M| / Π‖column‖ below which the IC system is singular.
pub const SINGULAR_TOL: f64 = 1e-12;

const CONJUGATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid problem: {0}")]
    Problem(String),
    #[error(transparent)]
    Roots(#[from] RootsError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("initial-condition system is singular (scaled determinant {scaled_det:e})")]
    SingularSystem { scaled_det: f64 },
    #[error("cannot pair conjugate modes: {0}")]
    Pairing(String),
    #[error("evaluation failed at t = {t}: {source}")]
    Evaluation { t: f64, source: MlError },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub t_end: f64,
    pub points: usize,
}

impl Grid {
    pub fn nodes(&self) -> Vec<f64> {
        match self.points {
            0 => Vec::new(),
            1 => vec![self.t_end],
            n => (0..n)
                .map(|i| if i + 1 == n { self.t_end } else { self.t_end * i as f64 / (n - 1) as f64 })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdeProblem {
    alpha: f64,
    char_coeffs: Vec<Complex64>,
    ics: Vec<Complex64>,
    grid: Option<Grid>,
}

impl FdeProblem {
    pub fn new(
        alpha: f64,
        char_coeffs: Vec<Complex64>,
        ics: Vec<Complex64>,
        grid: Option<Grid>,
    ) -> Result<Self, SolverError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(SolverError::Problem(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if char_coeffs.len() < 2 {
            return Err(SolverError::Problem(
                "operator needs coefficients p_0..p_n with n >= 1".into(),
            ));
        }
        if char_coeffs.iter().chain(&ics).any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(SolverError::Problem("coefficients and initial conditions must be finite".into()));
        }
        if char_coeffs[char_coeffs.len() - 1] == Complex64::new(0.0, 0.0) {
            return Err(SolverError::Problem("leading coefficient p_n must be nonzero".into()));
        }
        let n = char_coeffs.len() - 1;
        if ics.len() != n {
            return Err(SolverError::Problem(format!(
                "an order-{n} operator needs {n} initial conditions, got {}",
                ics.len()
            )));
        }
        if let Some(g) = grid {
            if !(g.t_end > 0.0 && g.t_end.is_finite()) || g.points < 2 {
                return Err(SolverError::Problem(format!(
                    "grid needs t_end > 0 and at least 2 points, got t_end = {}, points = {}",
                    g.t_end, g.points
                )));
            }
        }
        Ok(Self { alpha, char_coeffs, ics, grid })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn char_coeffs(&self) -> &[Complex64] {
        &self.char_coeffs
    }

    pub fn ics(&self) -> &[Complex64] {
        &self.ics
    }

    pub fn grid(&self) -> Option<Grid> {
        self.grid
    }

    pub fn degree(&self) -> usize {
        self.char_coeffs.len() - 1
    }

    /// Real operator and real initial conditions.
    pub fn is_real(&self) -> bool {
        self.char_coeffs.iter().chain(&self.ics).all(|c| c.im == 0.0)
    }
}

/// amplitude · t^{degree·α} · E_α(root · t^α)
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub root: Complex64,
    pub degree: usize,
    pub amplitude: Complex64,
}

/// A term of the real rendering of a solution with real data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RealTerm {
    /// amplitude · t^{jα} E_α(root t^α)
    Single { root: f64, degree: usize, amplitude: f64 },
    /// t^{jα} [A · Re E_α((a+ib)t^α) + B · Im E_α((a+ib)t^α)], b > 0.
    ///
    /// Equal to t^{jα} E_α(at^α)[A cos_α(bt^α) + B sin_α(bt^α)] only when
    /// α = 1 or a = 0; see [`RealTerm::factorizes`].
    Pair { a: f64, b: f64, degree: usize, cos_coeff: f64, sin_coeff: f64 },
}

impl RealTerm {
    /// Whether the exponential-times-trigonometric factorization is exact.
    pub fn factorizes(&self, alpha: f64) -> bool {
        match *self {
            RealTerm::Single { .. } => true,
            RealTerm::Pair { a, .. } => alpha == 1.0 || a == 0.0,
        }
    }

    pub fn eval(&self, alpha: f64, t: f64) -> Result<f64, SolverError> {
        let (root, degree) = match *self {
            RealTerm::Single { root, degree, .. } => (Complex64::new(root, 0.0), degree),
            RealTerm::Pair { a, b, degree, .. } => (Complex64::new(a, b), degree),
        };
        let x = t.powf(alpha);
        let e = ml(alpha, root * x, ML_TOL)
            .map_err(|source| SolverError::Evaluation { t, source })?
            .value;
        let weight = x.powi(degree as i32);
        Ok(match *self {
            RealTerm::Single { amplitude, .. } => amplitude * weight * e.re,
            RealTerm::Pair { cos_coeff, sin_coeff, .. } => weight * (cos_coeff * e.re + sin_coeff * e.im),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub alpha: f64,
    pub modes: Vec<Mode>,
    /// Set when some root has multiplicity above two; such modes extend the
    /// repeated-root pattern t^{jα}E_α(at^α) beyond the double-root case.
    pub extension_beyond_paper: bool,
    pub real_form: Option<Vec<RealTerm>>,
}

impl Solution {
    pub fn eval(&self, t: f64) -> Result<Complex64, SolverError> {
        eval_solution(self, &[t]).map(|v| v[0])
    }

    pub fn eval_real_form(&self, t: f64) -> Result<Option<f64>, SolverError> {
        let Some(terms) = &self.real_form else {
            return Ok(None);
        };
        let mut acc = 0.0;
        for term in terms {
            acc += term.eval(self.alpha, t)?;
        }
        Ok(Some(acc))
    }

    /// The solution as an α-power series truncated at `order`.
    pub fn series(&self, order: usize) -> Result<AlphaSeries, SolverError> {
        let mut y = AlphaSeries::zero(self.alpha, order)?;
        for m in &self.modes {
            let mode = AlphaSeries::ml_mode(self.alpha, m.root, m.degree, order)?;
            y = y.add(&mode.scale(m.amplitude))?;
        }
        Ok(y)
    }
}

/// One mode per root and degree 0..multiplicity−1, amplitudes zero.
pub fn general_solution(alpha: f64, roots: &[Root]) -> Result<Solution, SolverError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SolverError::Problem(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    let modes = roots
        .iter()
        .flat_map(|r| {
            (0..r.multiplicity).map(move |degree| Mode {
                root: r.value,
                degree,
                amplitude: Complex64::new(0.0, 0.0),
            })
        })
        .collect();
    Ok(Solution {
        alpha,
        modes,
        extension_beyond_paper: roots.iter().any(|r| r.multiplicity > 2),
        real_form: None,
    })
}

/// Solves M x = b by Gaussian elimination with partial pivoting.
fn solve_linear(mut m: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Result<Vec<Complex64>, SolverError> {
    let n = b.len();
    let col_norms: f64 = (0..n)
        .map(|j| (0..n).map(|i| m[i][j].norm_sqr()).sum::<f64>().sqrt())
        .product();
    let mut det_abs = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].norm().total_cmp(&m[j][k].norm()))
            .unwrap_or(k);
        m.swap(k, p);
        b.swap(k, p);
        det_abs *= m[k][k].norm();
        if m[k][k] == Complex64::new(0.0, 0.0) {
            break;
        }
        let (upper, lower) = m.split_at_mut(k + 1);
        let pivot = &upper[k];
        for (offset, row) in lower.iter_mut().enumerate() {
            let f = row[k] / pivot[k];
            for (x, &p) in row[k..].iter_mut().zip(&pivot[k..]) {
                *x -= f * p;
            }
            let v = b[k];
            b[k + 1 + offset] -= f * v;
        }
    }
    let scaled_det = if col_norms > 0.0 { det_abs / col_norms } else { 0.0 };
    if !(scaled_det >= SINGULAR_TOL) {
        return Err(SolverError::SingularSystem { scaled_det });
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut acc = ComplexKahanSum::default();
        acc.add(b[i]);
        for j in i + 1..n {
            acc.add(-m[i][j] * x[j]);
        }
        x[i] = acc.value() / m[i][i];
    }
    Ok(x)
}

/// Fits amplitudes so that D^{kα}y(0) = ics[k], k = 0..n−1.
pub fn apply_ics(solution: &Solution, ics: &[Complex64], order: usize) -> Result<Solution, SolverError> {
    let n = solution.modes.len();
    if ics.len() != n {
        return Err(SolverError::Problem(format!(
            "{n} modes need {n} initial conditions, got {}",
            ics.len()
        )));
    }
    let order = order.max(n);
    let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (i, mode) in solution.modes.iter().enumerate() {
        let s = AlphaSeries::ml_mode(solution.alpha, mode.root, mode.degree, order)?;
        for (k, row) in m.iter_mut().enumerate() {
            row[i] = s.deriv_at_zero(k)?;
        }
    }
    let amps = solve_linear(m, ics.to_vec())?;
    let mut out = solution.clone();
    for (mode, a) in out.modes.iter_mut().zip(amps) {
        mode.amplitude = a;
    }
    out.real_form = None;
    Ok(out)
}

/// Groups conjugate modes into real terms; requires real data.
pub fn to_real_form(solution: &Solution) -> Result<Solution, SolverError> {
    let scale = solution
        .modes
        .iter()
        .map(|m| m.amplitude.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut used = vec![false; solution.modes.len()];
    let mut terms = Vec::new();
    for (i, m) in solution.modes.iter().enumerate() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let tol = CONJUGATE_TOL * m.root.norm().max(1.0);
        if m.root.im == 0.0 {
            if m.amplitude.im.abs() > 1e-8 * scale {
                return Err(SolverError::Pairing(format!(
                    "real root {} carries complex amplitude {}",
                    m.root.re, m.amplitude
                )));
            }
            terms.push(RealTerm::Single {
                root: m.root.re,
                degree: m.degree,
                amplitude: m.amplitude.re,
            });
            continue;
        }
        let partner = solution.modes.iter().enumerate().position(|(j, other)| {
            !used[j] && other.degree == m.degree && (other.root - m.root.conj()).norm() <= tol
        });
        let Some(j) = partner else {
            return Err(SolverError::Pairing(format!(
                "root {} (degree {}) has no conjugate partner",
                m.root, m.degree
            )));
        };
        used[j] = true;
        // Orient the pair so that b > 0.
        let (upper, lower) = if m.root.im > 0.0 {
            (*m, solution.modes[j])
        } else {
            (solution.modes[j], *m)
        };
        let (a1, b1) = (upper.amplitude, lower.amplitude);
        if (a1 - b1.conj()).norm() > 1e-8 * scale {
            return Err(SolverError::Pairing(format!(
                "amplitudes {a1} and {b1} of conjugate roots are not conjugate"
            )));
        }
        let big_a = a1 + b1;
        let big_b = Complex64::new(0.0, 1.0) * (a1 - b1);
        terms.push(RealTerm::Pair {
            a: upper.root.re,
            b: upper.root.im,
            degree: m.degree,
            cos_coeff: big_a.re,
            sin_coeff: big_b.re,
        });
    }
    let mut out = solution.clone();
    out.real_form = Some(terms);
    Ok(out)
}

/// Roots, modes and fitted amplitudes, plus the real form for real data.
pub fn solve(problem: &FdeProblem) -> Result<Solution, SolverError> {
    solve_with(problem, CLUSTER_TOL)
}

/// [`solve`] with an explicit root-clustering tolerance.
pub fn solve_with(problem: &FdeProblem, cluster_tol: f64) -> Result<Solution, SolverError> {
    let roots = find_roots_with(problem.char_coeffs(), cluster_tol)?;
    let basis = general_solution(problem.alpha(), &roots)?;
    let fitted = apply_ics(&basis, problem.ics(), DEFAULT_ORDER)?;
    if problem.is_real() {
        to_real_form(&fitted)
    } else {
        Ok(fitted)
    }
}

/// The operator applied to the solution series; exactly zero in exact
/// arithmetic when every root is simple.
pub fn residual_series(solution: &Solution, problem: &FdeProblem, order: usize) -> Result<AlphaSeries, SolverError> {
    let y = solution.series(order)?;
    Ok(y.apply_operator(problem.char_coeffs())?)
}

/// Largest residual coefficient relative to the largest solution coefficient.
pub fn residual(solution: &Solution, problem: &FdeProblem, order: usize) -> Result<f64, SolverError> {
    let max_degree = solution.modes.iter().map(|m| m.degree).max().unwrap_or(0);
    let needed = max_degree + 10;
    if order < needed.max(problem.degree()) {
        return Err(SeriesError::Order {
            needed: needed.max(problem.degree()),
            available: order,
        }
        .into());
    }
    let scale = solution.series(order)?.max_abs_coeff();
    let r = residual_series(solution, problem, order)?.max_abs_coeff();
    Ok(if scale > 0.0 { r / scale } else { r })
}

/// Σ amplitude · t^{jα} · E_α(root t^α) at each t.
pub fn eval_solution(solution: &Solution, t_values: &[f64]) -> Result<Vec<Complex64>, SolverError> {
    t_values
        .iter()
        .map(|&t| {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(SolverError::Problem(format!("t must be finite and >= 0, got {t}")));
            }
            let x = t.powf(solution.alpha);
            let mut acc = ComplexKahanSum::default();
            for m in &solution.modes {
                let e = ml(solution.alpha, m.root * x, ML_TOL)
                    .map_err(|source| SolverError::Evaluation { t, source })?;
                acc.add(m.amplitude * x.powi(m.degree as i32) * e.value);
            }
            Ok(acc.value())
        })
        .collect()
}

/// Classical (α = 1) solution by Taylor series, with derivatives from the
/// recurrence Σ p_m y^{(k+m)}(0) = 0. Independent of root finding.
pub fn taylor_reference(problem: &FdeProblem, t: f64) -> Result<Complex64, SolverError> {
    if problem.alpha() != 1.0 {
        return Err(SolverError::Problem("the Taylor reference needs alpha = 1".into()));
    }
    let p = problem.char_coeffs();
    let n = problem.degree();
    // e_k = y^{(k)}(0)/k!, so y^{(k+m)}(0) = e_{k+m}(k+m)!.
    let mut e: Vec<Complex64> = Vec::new();
    let mut fact = 1.0;
    for (k, &d) in problem.ics().iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        e.push(d / fact);
    }
    let mut acc = ComplexKahanSum::default();
    let mut small_run = 0;
    let mut k = 0;
    while k < 4000 {
        if e.len() <= k {
            // e_{j+n} with j = k − n
            let j = k - n;
            let mut s = Complex64::new(0.0, 0.0);
            for m in 0..n {
                let mut ratio = 1.0;
                for q in j + m + 1..=j + n {
                    ratio /= q as f64;
                }
                s += p[m] * e[j + m] * ratio;
            }
            e.push(-s / p[n]);
        }
        let term = e[k] * t.powi(k as i32);
        acc.add(term);
        if term.norm() <= 1e-18 * acc.value().norm().max(f64::MIN_POSITIVE) {
            small_run += 1;
            if small_run > n + 2 {
                return Ok(acc.value());
            }
        } else {
            small_run = 0;
        }
        k += 1;
    }
    Err(SolverError::Problem(format!("Taylor reference did not converge at t = {t}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| c(x, 0.0)).collect()
    }

    fn classical() -> FdeProblem {
        FdeProblem::new(1.0, real(&[6.0, -5.0, 1.0]), real(&[2.0, 5.0]), None).unwrap()
    }

    #[test]
    fn problem_validation() {
        assert!(FdeProblem::new(0.0, real(&[1.0, 1.0]), real(&[1.0]), None).is_err());
        assert!(FdeProblem::new(0.5, real(&[1.0]), vec![], None).is_err());
        assert!(FdeProblem::new(0.5, real(&[1.0, 0.0]), real(&[1.0]), None).is_err());
        assert!(FdeProblem::new(0.5, real(&[1.0, 1.0]), real(&[1.0, 2.0]), None).is_err());
        let g = Some(Grid { t_end: 1.0, points: 1 });
        assert!(FdeProblem::new(0.5, real(&[1.0, 1.0]), real(&[1.0]), g).is_err());
    }

    #[test]
    fn single_mode_is_mittag_leffler() {
        let p = FdeProblem::new(0.5, real(&[-1.0, 1.0]), real(&[1.0]), None).unwrap();
        let s = solve(&p).unwrap();
        assert_eq!(s.modes.len(), 1);
        assert!((s.modes[0].amplitude - c(1.0, 0.0)).norm() < 1e-15);
        let y = s.eval(1.0).unwrap();
        assert!((y.re - 5.008_980_080_762_283).abs() < 1e-12);
    }

    #[test]
    fn classical_amplitudes_and_values() {
        let s = solve(&classical()).unwrap();
        assert_eq!(s.modes.len(), 2);
        for m in &s.modes {
            assert!((m.amplitude - c(1.0, 0.0)).norm() < 1e-13);
        }
        let y = s.eval(1.0).unwrap();
        let want = 2f64.exp() + 3f64.exp();
        assert!((y.re - want).abs() < 1e-12 * want);
        assert!((want - 27.474_593).abs() < 1e-6);
    }

    #[test]
    fn classical_matches_taylor_reference() {
        let problems = [
            classical(),
            FdeProblem::new(1.0, real(&[1.0, 0.0, 1.0]), real(&[1.0, 0.0]), None).unwrap(),
            FdeProblem::new(1.0, real(&[4.0, -4.0, 1.0]), real(&[1.0, -1.0]), None).unwrap(),
            FdeProblem::new(1.0, real(&[5.0, 2.0, 1.0]), real(&[0.5, 3.0]), None).unwrap(),
            FdeProblem::new(1.0, real(&[-1.0, 3.0, -3.0, 1.0]), real(&[1.0, 0.0, 2.0]), None).unwrap(),
        ];
        for p in &problems {
            let s = solve(p).unwrap();
            for i in 0..=50 {
                let t = i as f64 / 50.0;
                let y = s.eval(t).unwrap();
                let r = taylor_reference(p, t).unwrap();
                assert!((y - r).norm() <= 1e-9, "{:?} at t = {t}: {y} vs {r}", p.char_coeffs());
            }
        }
    }

    #[test]
    fn cosine_from_conjugate_roots() {
        let p = FdeProblem::new(1.0, real(&[1.0, 0.0, 1.0]), real(&[1.0, 0.0]), None).unwrap();
        let s = solve(&p).unwrap();
        let terms = s.real_form.as_ref().unwrap();
        assert_eq!(terms.len(), 1);
        match terms[0] {
            RealTerm::Pair { a, b, cos_coeff, sin_coeff, .. } => {
                assert!(a.abs() < 1e-15 && (b - 1.0).abs() < 1e-15);
                assert!((cos_coeff - 1.0).abs() < 1e-14 && sin_coeff.abs() < 1e-14);
                assert!(terms[0].factorizes(1.0));
            }
            other => panic!("expected a pair, got {other:?}"),
        }
        for t in [0.0, 0.5, 2.0] {
            assert!((s.eval_real_form(t).unwrap().unwrap() - f64::cos(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn real_form_agrees_with_complex_modes() {
        for &alpha in &[0.3, 0.5, 0.8, 1.0] {
            let (a, b) = (0.4, 1.5);
            let p = FdeProblem::new(alpha, real(&[a * a + b * b, -2.0 * a, 1.0]), real(&[1.0, -0.5]), None).unwrap();
            let s = solve(&p).unwrap();
            let terms = s.real_form.as_ref().unwrap();
            assert_eq!(terms[0].factorizes(alpha), alpha == 1.0);
            for i in 0..=40 {
                let t = 2.0 * i as f64 / 40.0;
                let z = s.eval(t).unwrap();
                let r = s.eval_real_form(t).unwrap().unwrap();
                assert!((z - r).norm() <= 1e-10, "alpha {alpha} t {t}");
            }
        }
    }

    #[test]
    fn real_roots_render_unchanged() {
        let s = solve(&classical()).unwrap();
        for t in [0.0, 0.3, 1.0] {
            let z = s.eval(t).unwrap();
            let r = s.eval_real_form(t).unwrap().unwrap();
            assert!((z.re - r).abs() <= 1e-12 * r.abs());
        }
    }

    #[test]
    fn pairing_failures() {
        let lonely = Solution {
            alpha: 0.5,
            modes: vec![Mode { root: c(1.0, 2.0), degree: 0, amplitude: c(1.0, 0.0) }],
            extension_beyond_paper: false,
            real_form: None,
        };
        assert!(matches!(to_real_form(&lonely), Err(SolverError::Pairing(_))));
        let mismatched = Solution {
            modes: vec![
                Mode { root: c(1.0, 2.0), degree: 0, amplitude: c(1.0, 0.0) },
                Mode { root: c(1.0, -2.0), degree: 0, amplitude: c(3.0, 0.0) },
            ],
            ..lonely
        };
        assert!(matches!(to_real_form(&mismatched), Err(SolverError::Pairing(_))));
    }

    #[test]
    fn duplicate_modes_are_singular() {
        let roots = [Root { value: c(2.0, 0.0), multiplicity: 1 }, Root { value: c(2.0, 0.0), multiplicity: 1 }];
        let basis = general_solution(0.5, &roots).unwrap();
        assert!(matches!(
            apply_ics(&basis, &real(&[1.0, 1.0]), 20),
            Err(SolverError::SingularSystem { .. })
        ));
    }

    #[test]
    fn repeated_root_modes() {
        let p = FdeProblem::new(0.5, real(&[1.0, -2.0, 1.0]), real(&[1.0, 2.0]), None).unwrap();
        let s = solve(&p).unwrap();
        assert_eq!(s.modes.len(), 2);
        assert_eq!((s.modes[0].degree, s.modes[1].degree), (0, 1));
        assert!(!s.extension_beyond_paper);

        let triple = FdeProblem::new(0.5, real(&[-1.0, 3.0, -3.0, 1.0]), real(&[1.0, 0.0, 0.0]), None).unwrap();
        assert!(solve(&triple).unwrap().extension_beyond_paper);
    }

    #[test]
    fn distinct_root_residuals_vanish() {
        let cases = [
            real(&[-2.0, 1.0, 1.0]),
            real(&[0.4f64.powi(2) + 1.5f64.powi(2), -0.8, 1.0]),
            real(&[6.0, 11.0, 6.0, 1.0]),
        ];
        for coeffs in cases {
            let ics = real(&vec![1.0; coeffs.len() - 1]);
            let p = FdeProblem::new(0.5, coeffs, ics, None).unwrap();
            let s = solve(&p).unwrap();
            assert!(residual(&s, &p, 60).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn repeated_root_residual_matches_closed_form() {
        for &(alpha, a) in &[(0.5, 1.0), (0.3, -2.0), (0.8, 0.5)] {
            let p = FdeProblem::new(alpha, real(&[a * a, -2.0 * a, 1.0]), real(&[0.0, 1.0]), None).unwrap();
            let s = solve(&p).unwrap();
            let lead = residual_series(&s, &p, 40).unwrap().coeff(0);
            let g = |x: f64| gamma(x).unwrap();
            let want = a * (g(1.0 + 2.0 * alpha) / g(1.0 + alpha).powi(2) - 2.0);
            assert!((lead.re - want).abs() <= 1e-12 * want.abs().max(1.0), "{alpha} {a}");
            let r = residual(&s, &p, 40).unwrap();
            assert!(r > 1e-6, "{alpha} {a}: {r}");
        }
        let p = FdeProblem::new(1.0, real(&[1.0, -2.0, 1.0]), real(&[0.0, 1.0]), None).unwrap();
        let s = solve(&p).unwrap();
        assert!(residual(&s, &p, 40).unwrap() <= 1e-13);
    }

    #[test]
    fn residual_needs_enough_order() {
        let p = FdeProblem::new(0.5, real(&[-1.0, 1.0]), real(&[1.0]), None).unwrap();
        let s = solve(&p).unwrap();
        assert!(residual(&s, &p, 5).is_err());
    }

    #[test]
    fn initial_conditions_reproduced() {
        let p = FdeProblem::new(0.6, real(&[-6.0, 1.0, 4.0, 1.0]), real(&[1.5, -0.25, 2.0]), None).unwrap();
        let s = solve(&p).unwrap();
        assert!((s.eval(0.0).unwrap() - p.ics()[0]).norm() <= 1e-10);
        let y = s.series(30).unwrap();
        for (k, &ic) in p.ics().iter().enumerate() {
            assert!((y.deriv_at_zero(k).unwrap() - ic).norm() <= 1e-10, "k = {k}");
        }
    }

    #[test]
    fn degree_zero_modes_are_annihilated_by_their_factor() {
        for &alpha in &[0.3, 0.5, 0.8, 1.0] {
            for root in [c(1.0, 0.0), c(-2.0, 0.0), c(0.3, 1.7)] {
                let s = AlphaSeries::from_ml(alpha, root, 40).unwrap();
                let r = s.apply_operator(&[-root, c(1.0, 0.0)]).unwrap();
                assert!(r.max_abs_coeff() <= 1e-12 * s.max_abs_coeff());
            }
        }
    }

    #[test]
    fn grid_nodes() {
        let g = Grid { t_end: 1.0, points: 51 };
        let nodes = g.nodes();
        assert_eq!(nodes.len(), 51);
        assert_eq!(nodes[0], 0.0);
        assert_eq!(nodes[50], 1.0);
        assert!((nodes[25] - 0.5).abs() < 1e-16);
    }

    proptest! {
        #[test]
        fn scaling_equivariance(
            s in prop_oneof![-20.0f64..-0.05, 0.05f64..20.0],
            alpha in 0.2f64..=1.0,
        ) {
            let coeffs = real(&[-2.0, 1.0, 1.0]);
            let scaled: Vec<Complex64> = coeffs.iter().map(|&x| x * s).collect();
            let ics = real(&[1.0, 0.5]);
            let a = solve(&FdeProblem::new(alpha, coeffs, ics.clone(), None).unwrap()).unwrap();
            let b = solve(&FdeProblem::new(alpha, scaled, ics, None).unwrap()).unwrap();
            prop_assert_eq!(a.modes.len(), b.modes.len());
            for (x, y) in a.modes.iter().zip(&b.modes) {
                prop_assert!((x.root - y.root).norm() <= 1e-13);
                prop_assert_eq!(x.degree, y.degree);
                prop_assert!((x.amplitude - y.amplitude).norm() <= 1e-13);
            }
        }

        #[test]
        fn ic_fit_roundtrip(
            r1 in -2.0f64..2.0, r2 in -2.0f64..2.0,
            y0 in -3.0f64..3.0, y1 in -3.0f64..3.0,
            alpha in 0.2f64..=1.0,
        ) {
            prop_assume!((r1 - r2).abs() > 0.05);
            let coeffs = crate::roots::expand_factors(&[c(r1, 0.0), c(r2, 0.0)]);
            let p = FdeProblem::new(alpha, coeffs, real(&[y0, y1]), None).unwrap();
            let s = solve(&p).unwrap();
            let y = s.series(20).unwrap();
            prop_assert!((y.deriv_at_zero(0).unwrap().re - y0).abs() <= 1e-10);
            prop_assert!((y.deriv_at_zero(1).unwrap().re - y1).abs() <= 1e-10);
        }
    }
}

//! Numerical Riemann-Liouville and Jumarie differintegrals on uniform grids.
//!
//! Both schemes are product-integration rules: the data is replaced by a
//! piecewise polynomial and the weakly singular kernel is integrated against
//! it in closed form, panel by panel.
//!
//! * [`rl_integral_num`] uses the piecewise-linear interpolant (product
//!   trapezoid), exact for data linear in t − a, second order for smooth data.
//! * [`jumarie_deriv_num`] is the L1 scheme: piecewise-constant slopes against
//!   (t − τ)^{−α}. For 0 < α < 1 the Jumarie derivative is the RL derivative of
//!   f − f(a); for absolutely continuous f that equals
//!   (1/Γ(1−α))∫_a^t (t−τ)^{−α} f'(τ) dτ, which is what L1 discretizes.
//!   Accuracy is O(h^{2−α}) for smooth data.
//!
//! The closed-form results for power functions with a shifted start point
//! ([`shifted_power_frac_integral`], [`shifted_power_jumarie_deriv`]) go
//! through the incomplete Beta function and serve as independent checks.

use thiserror::Error;

use crate::special::{gamma, incomplete_beta, SpecialError};
use crate::summation::KahanSum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpsError {
    #[error("grid: {0}")]
    Grid(String),
    #[error("{0}")]
    Domain(String),
    #[error("kernel is singular at t = {0}")]
    Singularity(f64),
    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Samples of f on the uniform grid start = t_0 < t_1 < … < t_n = end.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    start: f64,
    end: f64,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(start: f64, end: f64, values: Vec<f64>) -> Result<Self, OpsError> {
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(OpsError::Grid(format!(
                "need finite start < end, got [{start}, {end}]"
            )));
        }
        if values.len() < 3 {
            return Err(OpsError::Grid(format!(
                "need at least 2 intervals, got {}",
                values.len().saturating_sub(1)
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(OpsError::Domain(format!("non-finite sample {v}")));
        }
        Ok(Self { start, end, values })
    }

    /// Samples `f` at the n + 1 nodes of [start, end].
    pub fn from_fn(start: f64, end: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self, OpsError> {
        let h = (end - start) / n as f64;
        let values = (0..=n)
            .map(|i| if i == n { f(end) } else { f(start + i as f64 * h) })
            .collect();
        Self::new(start, end, values)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn intervals(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step(&self) -> f64 {
        (self.end - self.start) / self.intervals() as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.intervals() {
            self.end
        } else {
            self.start + i as f64 * self.step()
        }
    }

    /// Index of the grid node at `t`.
    pub fn node_index(&self, t: f64) -> Result<usize, OpsError> {
        let x = (t - self.start) / self.step();
        let i = x.round();
        if !(x.is_finite() && (x - i).abs() <= 1e-8 && i >= 0.0 && i <= self.intervals() as f64) {
            return Err(OpsError::Grid(format!(
                "t = {t} is not a node of the {}-interval grid on [{}, {}]",
                self.intervals(),
                self.start,
                self.end
            )));
        }
        Ok(i as usize)
    }
}

fn check_order(alpha: f64, upper_inclusive: bool) -> Result<(), OpsError> {
    let ok = alpha > 0.0 && (alpha < 1.0 || (upper_inclusive && alpha == 1.0));
    if !ok {
        let range = if upper_inclusive { "(0, 1]" } else { "(0, 1)" };
        return Err(OpsError::Domain(format!("alpha must lie in {range}, got {alpha}")));
    }
    Ok(())
}

/// Binomial series Σ_{k ≥ k0} C(β,k) (sign·x)^k, for |x| ≤ 1/8.
fn binomial_tail(beta: f64, x: f64, k0: usize, only_even: bool) -> f64 {
    let mut coef = 1.0;
    for k in 1..k0 {
        coef *= (beta - (k - 1) as f64) / k as f64;
    }
    let mut pow = x.powi(k0 as i32 - 1);
    let mut acc = KahanSum::default();
    for k in k0..k0 + 80 {
        coef *= (beta - (k - 1) as f64) / k as f64;
        pow *= x;
        if only_even && k % 2 == 1 {
            continue;
        }
        let term = coef * pow;
        acc.add(term);
        if term.abs() <= 1e-18 * acc.value().abs() {
            break;
        }
    }
    acc.value()
}

const SERIES_FROM: usize = 8;

/// (m+1)^β − 2m^β + (m−1)^β, m ≥ 1, without cancellation for large m.
fn second_difference(beta: f64, m: usize) -> f64 {
    let mf = m as f64;
    if m < SERIES_FROM {
        return (mf + 1.0).powf(beta) - 2.0 * mf.powf(beta) + (mf - 1.0).powf(beta);
    }
    // (1+x)^β + (1−x)^β − 2 = 2 Σ_{k≥1} C(β,2k) x^{2k}
    2.0 * mf.powf(beta) * binomial_tail(beta, 1.0 / mf, 2, true)
}

/// (m−1)^β − (m−1−α) m^α with β = α + 1, the weight of the far end node.
fn end_weight(alpha: f64, m: usize) -> f64 {
    let beta = alpha + 1.0;
    let mf = m as f64;
    if m < SERIES_FROM {
        return (mf - 1.0).powf(beta) - (mf - 1.0 - alpha) * mf.powf(alpha);
    }
    // m^β [(1−x)^β − 1 + βx] = m^β Σ_{k≥2} C(β,k)(−x)^k
    mf.powf(beta) * binomial_tail(beta, -1.0 / mf, 2, false)
}

/// (k+1)^{1−α} − k^{1−α}
fn l1_weight(alpha: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let kf = k as f64;
    let p = 1.0 - alpha;
    kf.powf(p) * (p * (1.0 / kf).ln_1p()).exp_m1()
}

/// (1/Γ(α)) ∫_a^t (t−τ)^{α−1} f(τ) dτ by product trapezoid.
pub fn rl_integral_num(f: &SampledFunction, alpha: f64, t: f64) -> Result<f64, OpsError> {
    check_order(alpha, true)?;
    let i = f.node_index(t)?;
    if i == 0 {
        return Ok(0.0);
    }
    let v = f.values();
    let mut acc = KahanSum::default();
    acc.add(end_weight(alpha, i) * v[0]);
    for (j, &vj) in v.iter().enumerate().take(i).skip(1) {
        acc.add(second_difference(alpha + 1.0, i - j) * vj);
    }
    acc.add(v[i]);
    let h = f.step();
    Ok(h.powf(alpha) / gamma(alpha + 2.0)? * acc.value())
}

/// Jumarie derivative of order α ∈ (0,1) with start point `f.start()`, L1 scheme.
pub fn jumarie_deriv_num(f: &SampledFunction, alpha: f64, t: f64) -> Result<f64, OpsError> {
    check_order(alpha, false)?;
    let i = f.node_index(t)?;
    if i == 0 {
        return Err(OpsError::Grid(format!(
            "the derivative is evaluated at t > start, got t = start = {t}"
        )));
    }
    let v = f.values();
    let mut acc = KahanSum::default();
    for j in 0..i {
        let df = v[j + 1] - v[j];
        if df != 0.0 {
            acc.add(df * l1_weight(alpha, i - j - 1));
        }
    }
    let h = f.step();
    Ok(acc.value() / (h.powf(alpha) * gamma(2.0 - alpha)?))
}

/// Left Riemann-Liouville derivative: the Jumarie derivative plus the RL
/// derivative of the constant f(a), f(a)(t−a)^{−α}/Γ(1−α).
pub fn rl_deriv_num(f: &SampledFunction, alpha: f64, t: f64) -> Result<f64, OpsError> {
    check_order(alpha, false)?;
    let i = f.node_index(t)?;
    if i == 0 {
        return Err(OpsError::Singularity(t));
    }
    let jumarie = jumarie_deriv_num(f, alpha, t)?;
    let fa = f.values()[0];
    if fa == 0.0 {
        return Ok(jumarie);
    }
    Ok(jumarie + fa * (t - f.start()).powf(-alpha) / gamma(1.0 - alpha)?)
}

fn check_shifted(a: f64, gamma_exp: f64, alpha: f64, t: f64) -> Result<(), OpsError> {
    check_order(alpha, false)?;
    if !(gamma_exp > -1.0) {
        return Err(OpsError::Domain(format!("need gamma > -1, got {gamma_exp}")));
    }
    if !(a >= 0.0 && t > 0.0 && a <= t && t.is_finite()) {
        return Err(OpsError::Domain(format!(
            "need 0 <= a <= t with t > 0, got a = {a}, t = {t}"
        )));
    }
    Ok(())
}

/// ₐD_t^{−(1−α)} t^γ = t^{γ+1−α}/Γ(1−α) · B_η(1−α, γ+1), η = (t−a)/t.
pub fn shifted_power_frac_integral(a: f64, gamma_exp: f64, alpha: f64, t: f64) -> Result<f64, OpsError> {
    check_shifted(a, gamma_exp, alpha, t)?;
    let eta = (t - a) / t;
    let b = incomplete_beta(eta, 1.0 - alpha, gamma_exp + 1.0)?;
    Ok(t.powf(gamma_exp + 1.0 - alpha) / gamma(1.0 - alpha)? * b)
}

/// Jumarie derivative of t^γ with start point a: the t-derivative of
/// [`shifted_power_frac_integral`] minus the RL derivative of the constant a^γ,
/// [(γ+1−α) t^{γ−α} B_η(1−α, γ+1) − a^γ (t−a)^{1−α}/t] / Γ(1−α).
pub fn shifted_power_jumarie_deriv(a: f64, gamma_exp: f64, alpha: f64, t: f64) -> Result<f64, OpsError> {
    check_shifted(a, gamma_exp, alpha, t)?;
    let eta = (t - a) / t;
    let b = incomplete_beta(eta, 1.0 - alpha, gamma_exp + 1.0)?;
    let head = (gamma_exp + 1.0 - alpha) * t.powf(gamma_exp - alpha) * b;
    let tail = if a == 0.0 {
        0.0
    } else {
        a.powf(gamma_exp) * (t - a).powf(1.0 - alpha) / t
    };
    Ok((head - tail) / gamma(1.0 - alpha)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    RlIntegral,
    JumarieL1,
    RlDerivative,
}

impl Scheme {
    fn apply(self, f: &SampledFunction, alpha: f64, t: f64) -> Result<f64, OpsError> {
        match self {
            Scheme::RlIntegral => rl_integral_num(f, alpha, t),
            Scheme::JumarieL1 => jumarie_deriv_num(f, alpha, t),
            Scheme::RlDerivative => rl_deriv_num(f, alpha, t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    /// Mean of log₂(e_i/e_{i+1}); `None` when the errors sit at roundoff
    /// level and no order can be read off.
    pub order: Option<f64>,
}

/// Runs `scheme` on grids [start, t] with the given interval counts (each
/// doubling the previous one) and fits the observed order against `analytic`.
pub fn convergence_order(
    scheme: Scheme,
    f: impl Fn(f64) -> f64,
    start: f64,
    alpha: f64,
    t: f64,
    analytic: f64,
    intervals: &[usize],
) -> Result<ConvergenceStudy, OpsError> {
    if intervals.len() < 3 {
        return Err(OpsError::Domain("a convergence study needs at least 3 grids".into()));
    }
    if intervals.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(OpsError::Domain(format!(
            "each grid must halve the previous step, got interval counts {intervals:?}"
        )));
    }
    let mut steps = Vec::with_capacity(intervals.len());
    let mut errors = Vec::with_capacity(intervals.len());
    for &n in intervals {
        let sampled = SampledFunction::from_fn(start, t, n, &f)?;
        let v = scheme.apply(&sampled, alpha, t)?;
        steps.push(sampled.step());
        errors.push((v - analytic).abs());
    }
    let floor = 1e-13 * analytic.abs().max(1.0);
    let order = if errors.iter().any(|&e| e <= floor) {
        None
    } else {
        let rates: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        Some(rates.iter().sum::<f64>() / rates.len() as f64)
    };
    Ok(ConvergenceStudy { steps, errors, order })
}

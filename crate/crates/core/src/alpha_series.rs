//! Truncated generalized power series Σ_{k=0..N} c_k t^{kα}.
//!
//! On this lattice the Jumarie derivative with start point zero is exact:
//! D^α t^{kα} = Γ(1+kα)/Γ(1+(k−1)α) · t^{(k−1)α} for k ≥ 1 and D^α 1 = 0.
//! Each derivative therefore shifts the coefficients down by one and loses
//! the top one, which is why results carry their own (smaller) order and no
//! operation ever reads past what is actually known.
//!
//! Multiplication is the genuine Cauchy product, since
//! t^{jα}·t^{kα} = t^{(j+k)α}.

use num_complex::Complex64;
use thiserror::Error;

use crate::special::gamma_ratio;
use crate::summation::ComplexKahanSum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("series live on different lattices: alpha {left} vs {right}")]
    AlphaMismatch { left: f64, right: f64 },
    #[error("series order {available} is too small, need at least {needed}")]
    Order { needed: usize, available: usize },
    #[error("{0}")]
    Domain(String),
}

/// Γ(1+(k+1)α)/Γ(1+kα), the factor picked up by the coefficient of
/// t^{(k+1)α} when it is differentiated down to t^{kα}.
pub(crate) fn lattice_ratio(alpha: f64, k: usize) -> f64 {
    let k = k as f64;
    gamma_ratio(1.0 + (k + 1.0) * alpha, 1.0 + k * alpha)
        .expect("Gamma arguments on the t^{kα} lattice are >= 1")
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSeries {
    alpha: f64,
    coeffs: Vec<Complex64>,
}

impl AlphaSeries {
    pub fn new(alpha: f64, coeffs: Vec<Complex64>) -> Result<Self, SeriesError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(SeriesError::Domain(format!(
                "alpha must lie in (0, 1], got {alpha}"
            )));
        }
        if coeffs.is_empty() {
            return Err(SeriesError::Domain("a series needs at least one coefficient".into()));
        }
        if let Some(c) = coeffs.iter().find(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(SeriesError::Domain(format!("non-finite coefficient {c}")));
        }
        Ok(Self { alpha, coeffs })
    }

    pub fn zero(alpha: f64, order: usize) -> Result<Self, SeriesError> {
        Self::new(alpha, vec![Complex64::new(0.0, 0.0); order + 1])
    }

    /// c · t^{kα}, truncated at `order`.
    pub fn monomial(alpha: f64, k: usize, c: Complex64, order: usize) -> Result<Self, SeriesError> {
        let mut s = Self::zero(alpha, order)?;
        if k <= order {
            s.coeffs[k] = c;
        }
        Ok(s)
    }

    pub fn constant(alpha: f64, c: Complex64, order: usize) -> Result<Self, SeriesError> {
        Self::monomial(alpha, 0, c, order)
    }

    /// Coefficients of E_α(a t^α): c_k = a^k / Γ(1+kα).
    pub fn from_ml(alpha: f64, a: Complex64, order: usize) -> Result<Self, SeriesError> {
        if order < 1 {
            return Err(SeriesError::Order {
                needed: 1,
                available: order,
            });
        }
        let mut s = Self::zero(alpha, order)?;
        s.coeffs[0] = Complex64::new(1.0, 0.0);
        for k in 1..=order {
            s.coeffs[k] = s.coeffs[k - 1] * a / lattice_ratio(alpha, k - 1);
        }
        Ok(s)
    }

    /// Coefficients of t^{jα} E_α(a t^α), the degree-j mode of root a.
    pub fn ml_mode(alpha: f64, a: Complex64, degree: usize, order: usize) -> Result<Self, SeriesError> {
        let base = Self::from_ml(alpha, a, order.max(1))?;
        let mut s = Self::zero(alpha, order)?;
        for k in degree..=order {
            s.coeffs[k] = base.coeffs[k - degree];
        }
        Ok(s)
    }

    /// cos_α(b t^α) = Σ (−1)^k b^{2k} t^{2kα}/Γ(1+2kα) as a series.
    pub fn cos_alpha(alpha: f64, b: f64, order: usize) -> Result<Self, SeriesError> {
        let e = Self::from_ml(alpha, Complex64::new(0.0, b), order)?;
        Self::new(alpha, e.coeffs.iter().map(|c| Complex64::new(c.re, 0.0)).collect())
    }

    /// sin_α(b t^α) = Σ (−1)^k b^{2k+1} t^{(2k+1)α}/Γ(1+(2k+1)α) as a series.
    pub fn sin_alpha(alpha: f64, b: f64, order: usize) -> Result<Self, SeriesError> {
        let e = Self::from_ml(alpha, Complex64::new(0.0, b), order)?;
        Self::new(alpha, e.coeffs.iter().map(|c| Complex64::new(c.im, 0.0)).collect())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Highest exponent index N that is known.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let keep = (order + 1).min(self.coeffs.len());
        Self {
            alpha: self.alpha,
            coeffs: self.coeffs[..keep].to_vec(),
        }
    }

    fn check_lattice(&self, other: &Self) -> Result<(), SeriesError> {
        if self.alpha != other.alpha {
            return Err(SeriesError::AlphaMismatch {
                left: self.alpha,
                right: other.alpha,
            });
        }
        Ok(())
    }

    /// Jumarie derivative D^α with start point zero. The constant term is
    /// annihilated and the result has order N − 1.
    pub fn jumarie_deriv(&self) -> Result<Self, SeriesError> {
        let n = self.order();
        if n == 0 {
            return Err(SeriesError::Order {
                needed: 1,
                available: 0,
            });
        }
        let coeffs = (0..n)
            .map(|k| self.coeffs[k + 1] * lattice_ratio(self.alpha, k))
            .collect();
        Ok(Self {
            alpha: self.alpha,
            coeffs,
        })
    }

    /// D^{mα} as m sequential applications of [`Self::jumarie_deriv`].
    pub fn jumarie_deriv_n(&self, m: usize) -> Result<Self, SeriesError> {
        if m > self.order() {
            return Err(SeriesError::Order {
                needed: m,
                available: self.order(),
            });
        }
        let mut s = self.clone();
        for _ in 0..m {
            s = s.jumarie_deriv()?;
        }
        Ok(s)
    }

    /// Riemann-Liouville integral of order α from zero. Result has order N + 1
    /// and a zero constant term.
    pub fn frac_integral(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Complex64::new(0.0, 0.0));
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| c / lattice_ratio(self.alpha, k)),
        );
        Self {
            alpha: self.alpha,
            coeffs,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_lattice(other)?;
        let n = self.coeffs.len().min(other.coeffs.len());
        Ok(Self {
            alpha: self.alpha,
            coeffs: (0..n).map(|k| self.coeffs[k] + other.coeffs[k]).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            alpha: self.alpha,
            coeffs: self.coeffs.iter().map(|&x| x * c).collect(),
        }
    }

    /// Cauchy product truncated at the smaller of the two orders.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_lattice(other)?;
        let n = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                let mut acc = ComplexKahanSum::default();
                for j in 0..=k {
                    acc.add(self.coeffs[j] * other.coeffs[k - j]);
                }
                acc.value()
            })
            .collect();
        Ok(Self {
            alpha: self.alpha,
            coeffs,
        })
    }

    /// Σ c_k t^{kα}.
    pub fn eval(&self, t: f64) -> Result<Complex64, SeriesError> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(SeriesError::Domain(format!(
                "series are evaluated at finite t >= 0, got {t}"
            )));
        }
        let mut acc = ComplexKahanSum::default();
        for (k, &c) in self.coeffs.iter().enumerate() {
            acc.add(c * t.powf(k as f64 * self.alpha));
        }
        Ok(acc.value())
    }

    /// Σ_m p_m D^{mα} s, of order N − n for n = op_coeffs.len() − 1.
    pub fn apply_operator(&self, op_coeffs: &[Complex64]) -> Result<Self, SeriesError> {
        if op_coeffs.is_empty() {
            return Err(SeriesError::Domain("operator has no coefficients".into()));
        }
        let n = op_coeffs.len() - 1;
        if self.order() < n {
            return Err(SeriesError::Order {
                needed: n,
                available: self.order(),
            });
        }
        let out_order = self.order() - n;
        let mut acc = vec![ComplexKahanSum::default(); out_order + 1];
        let mut deriv = self.clone();
        for (m, &p) in op_coeffs.iter().enumerate() {
            if m > 0 {
                deriv = deriv.jumarie_deriv()?;
            }
            for (k, slot) in acc.iter_mut().enumerate() {
                slot.add(p * deriv.coeffs[k]);
            }
        }
        Ok(Self {
            alpha: self.alpha,
            coeffs: acc.iter().map(ComplexKahanSum::value).collect(),
        })
    }

    /// Value of D^{kα} s at t = 0, i.e. the constant term after k derivatives.
    pub fn deriv_at_zero(&self, k: usize) -> Result<Complex64, SeriesError> {
        if k > self.order() {
            return Err(SeriesError::Order {
                needed: k,
                available: self.order(),
            });
        }
        // c_k Γ(1+kα), without building the intermediate series.
        let mut v = self.coeffs[k];
        for j in 0..k {
            v *= lattice_ratio(self.alpha, j);
        }
        Ok(v)
    }
}

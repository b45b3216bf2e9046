//! Exponential-polynomial functions `f(x) = Σⱼ pⱼ(x)·exp(-cⱼ·x)` on `[0, ∞)`.
//!
//! Survival functions of the M/M/1 age process and of its gamma surrogate are
//! of this form, and so is any product of them. Keeping tails in this
//! representation lets the mean of a minimum of independent ages be computed
//! exactly with `∫₀^∞ xᵏ e^{-cx} dx = k!/c^{k+1}`.

use crate::error::{Error, Result};

/// Relative tolerance under which two decay rates are considered equal.
pub const RATE_MERGE_TOL: f64 = 1e-12;

/// One term `(a₀ + a₁x + … + a_d x^d)·exp(-rate·x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpTerm {
    coeffs: Vec<f64>,
    rate: f64,
}

impl ExpTerm {
    /// Builds a term from ascending polynomial coefficients.
    ///
    /// The rate only has to be finite here; [`ExpSum::integrate`] is the
    /// place where a non-positive rate is rejected.
    pub fn new(coeffs: Vec<f64>, rate: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyCoefficients);
        }
        if !rate.is_finite() {
            return Err(Error::NonFiniteRate(rate));
        }
        Ok(Self { coeffs, rate })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn poly(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let e = (-self.rate * x).exp();
        if e == 0.0 {
            return 0.0;
        }
        self.poly(x) * e
    }

    /// `Σₖ aₖ·k!/c^{k+1}`.
    pub fn integrate(&self) -> Result<f64> {
        if self.rate <= 0.0 {
            return Err(Error::DivergentIntegral(self.rate));
        }
        let inv = 1.0 / self.rate;
        // moment = k!/c^{k+1}, updated in place
        let mut moment = inv;
        let mut total = 0.0;
        for (k, &a) in self.coeffs.iter().enumerate() {
            if k > 0 {
                moment *= k as f64 * inv;
            }
            total += a * moment;
        }
        Ok(total)
    }

    fn times(&self, other: &ExpTerm) -> ExpTerm {
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        ExpTerm {
            coeffs,
            rate: self.rate + other.rate,
        }
    }

    fn derivative(&self) -> ExpTerm {
        // d/dx [p(x) e^{-cx}] = (p'(x) - c p(x)) e^{-cx}
        let mut coeffs: Vec<f64> = self.coeffs.iter().map(|&a| -self.rate * a).collect();
        for (k, &a) in self.coeffs.iter().enumerate().skip(1) {
            coeffs[k - 1] += k as f64 * a;
        }
        ExpTerm {
            coeffs,
            rate: self.rate,
        }
    }

    /// `Σ |aₖ| xᵏ e^{-cx}`, a pointwise bound on `|self|`.
    fn envelope(&self, x: f64) -> f64 {
        let e = (-self.rate * x).exp();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &a| acc * x + a.abs())
            * e
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&a| a == 0.0)
    }
}

/// A finite sum of [`ExpTerm`]s.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExpSum {
    terms: Vec<ExpTerm>,
}

impl ExpSum {
    pub fn new(terms: Vec<ExpTerm>) -> Self {
        Self { terms }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// The constant function 1, i.e. `1·e^{0·x}`.
    pub fn one() -> Self {
        Self {
            terms: vec![ExpTerm {
                coeffs: vec![1.0],
                rate: 0.0,
            }],
        }
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.evaluate(x)).sum()
    }

    /// Merges terms whose rates agree within [`RATE_MERGE_TOL`] (relative),
    /// trims trailing zero coefficients and drops identically zero terms.
    ///
    /// Terms are returned sorted by ascending rate.
    pub fn canonicalize(&self) -> ExpSum {
        let mut sorted = self.terms.clone();
        sorted.sort_by(|a, b| a.rate.total_cmp(&b.rate));

        let mut merged: Vec<ExpTerm> = Vec::with_capacity(sorted.len());
        for term in sorted {
            match merged.last_mut() {
                Some(last) if rates_match(last.rate, term.rate) => {
                    if last.coeffs.len() < term.coeffs.len() {
                        last.coeffs.resize(term.coeffs.len(), 0.0);
                    }
                    for (dst, &a) in last.coeffs.iter_mut().zip(&term.coeffs) {
                        *dst += a;
                    }
                }
                _ => merged.push(term),
            }
        }

        let terms = merged
            .into_iter()
            .filter(|t| !t.is_zero())
            .map(|mut t| {
                while t.coeffs.len() > 1 && *t.coeffs.last().unwrap() == 0.0 {
                    t.coeffs.pop();
                }
                t
            })
            .collect();
        ExpSum { terms }
    }

    /// Pointwise product, canonicalized.
    pub fn multiply(&self, other: &ExpSum) -> ExpSum {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(a.times(b));
            }
        }
        ExpSum { terms }.canonicalize()
    }

    /// Pointwise sum, canonicalized.
    pub fn add(&self, other: &ExpSum) -> ExpSum {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        ExpSum { terms }.canonicalize()
    }

    pub fn scale(&self, k: f64) -> ExpSum {
        ExpSum {
            terms: self
                .terms
                .iter()
                .map(|t| ExpTerm {
                    coeffs: t.coeffs.iter().map(|&a| a * k).collect(),
                    rate: t.rate,
                })
                .collect(),
        }
    }

    pub fn derivative(&self) -> ExpSum {
        ExpSum {
            terms: self.terms.iter().map(ExpTerm::derivative).collect(),
        }
        .canonicalize()
    }

    /// Exact value of `∫₀^∞ f(x) dx`.
    pub fn integrate(&self) -> Result<f64> {
        self.terms
            .iter()
            .try_fold(0.0, |acc, t| Ok(acc + t.integrate()?))
    }

    /// Upper bound on `|f(x)|` obtained from absolute coefficient values.
    pub fn envelope(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.envelope(x)).sum()
    }

    /// A point past every term's peak, doubled until [`Self::envelope`]
    /// falls below `threshold`.
    pub fn truncation_point(&self, threshold: f64) -> Result<f64> {
        let mut past_peak: f64 = 1.0;
        for t in &self.terms {
            if t.rate <= 0.0 {
                return Err(Error::DivergentIntegral(t.rate));
            }
            past_peak = past_peak.max(t.degree() as f64 / t.rate);
        }
        let mut x = past_peak;
        while self.envelope(x) >= threshold {
            x *= 2.0;
        }
        Ok(x)
    }
}

fn rates_match(a: f64, b: f64) -> bool {
    let scale = a.abs().max(b.abs());
    (a - b).abs() <= RATE_MERGE_TOL * scale
}

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::{QPoly, Rational};
use crate::error::{Error, Result};

/// Truncation of a graded phase-space series: ℏ²-grade and |p-exponent|.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Cutoffs {
    pub n_max: usize,
    pub k_max: u32,
}

impl Default for Cutoffs {
    fn default() -> Self {
        Self {
            n_max: 3,
            k_max: 21,
        }
    }
}

impl Cutoffs {
    pub fn new(n_max: usize, k_max: u32) -> Self {
        Self { n_max, k_max }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    Q,
    P,
}

/// Unrestricted graded Laurent terms Σ_n ℏ^{2n} Σ_m c_{n,m}(q) p^m.
///
/// Used for intermediate results (derivatives, bracket output) whose
/// p-exponents can be even, zero or positive. Zero polynomials are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GradedLaurent {
    terms: BTreeMap<(usize, i32), QPoly>,
}

impl GradedLaurent {
    pub fn new() -> Self {
        Self::default()
    }

    /// Accumulates `poly` into the (grade, exponent) slot.
    pub fn add_term(&mut self, grade: usize, exponent: i32, poly: QPoly) {
        if poly.is_zero() {
            return;
        }
        let key = (grade, exponent);
        let sum = match self.terms.remove(&key) {
            Some(prev) => &prev + &poly,
            None => poly,
        };
        if !sum.is_zero() {
            self.terms.insert(key, sum);
        }
    }

    pub fn get(&self, grade: usize, exponent: i32) -> Option<&QPoly> {
        self.terms.get(&(grade, exponent))
    }

    pub fn remove(&mut self, grade: usize, exponent: i32) -> Option<QPoly> {
        self.terms.remove(&(grade, exponent))
    }

    /// Entries in (grade, exponent) order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i32, &QPoly)> {
        self.terms.iter().map(|(&(n, m), p)| (n, m, p))
    }

    pub fn grade(&self, n: usize) -> impl Iterator<Item = (i32, &QPoly)> {
        self.terms
            .range((n, i32::MIN)..=(n, i32::MAX))
            .map(|(&(_, m), p)| (m, p))
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn max_grade(&self) -> Option<usize> {
        self.terms.keys().map(|&(n, _)| n).max()
    }

    pub fn add(&self, other: &GradedLaurent) -> GradedLaurent {
        let mut out = self.clone();
        for (n, m, p) in other.iter() {
            out.add_term(n, m, p.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> GradedLaurent {
        let mut out = GradedLaurent::new();
        for (n, m, p) in self.iter() {
            out.add_term(n, m, p.scale(c));
        }
        out
    }

    /// Exact term-wise ∂^order/∂var^order.
    pub fn diff(&self, var: Var, order: usize) -> GradedLaurent {
        let mut out = GradedLaurent::new();
        for (n, m, poly) in self.iter() {
            match var {
                Var::Q => out.add_term(n, m, poly.nth_derivative(order)),
                Var::P => {
                    let factor = falling_factorial(m, order);
                    if !factor.is_zero() {
                        out.add_term(n, m - order as i32, poly.scale(&factor));
                    }
                }
            }
        }
        out
    }

    /// Multiplies every term by c(q)·p^shift.
    pub fn mul_poly_shift(&self, c: &QPoly, shift: i32) -> GradedLaurent {
        let mut out = GradedLaurent::new();
        for (n, m, poly) in self.iter() {
            out.add_term(n, m + shift, poly * c);
        }
        out
    }

    /// Σ_n ℏ^{2n} Σ_m c(q) p^m with coefficients converted to f64 at the end.
    pub fn eval_f64(&self, q: f64, p: f64, hbar: f64) -> Result<f64> {
        if p == 0.0 && self.iter().any(|(_, m, _)| m < 0) {
            return Err(Error::MomentumSingularity);
        }
        let h2 = hbar * hbar;
        let mut total = 0.0;
        let mut current_grade = None;
        let mut grade_sum = 0.0;
        for (n, m, poly) in self.iter() {
            if current_grade != Some(n) {
                if let Some(g) = current_grade {
                    total += h2.powi(g as i32) * grade_sum;
                }
                current_grade = Some(n);
                grade_sum = 0.0;
            }
            grade_sum += poly.eval_f64(q) * p.powi(m);
        }
        if let Some(g) = current_grade {
            total += h2.powi(g as i32) * grade_sum;
        }
        Ok(total)
    }
}

/// m(m−1)…(m−order+1) as an exact rational.
pub(crate) fn falling_factorial(m: i32, order: usize) -> Rational {
    (0..order as i32).fold(Rational::from_integer(1.into()), |acc, i| {
        acc * Rational::from_integer((m - i).into())
    })
}

/// Smallest |p-exponent| a grade-n correction can carry when the potential
/// feeds bracket orders r = 1..=r_max.
///
/// Each step of the recursion raises the grade by r and lowers the exponent by
/// 2r + 2 (plus 2 per exponential-shift power), so grade n is reached in at
/// least ⌈n / r_max⌉ steps. For r_max = 1 (cubic and quartic terms) this is 4n + 1.
pub fn min_abs_exponent(n: usize, r_max: usize) -> Option<u32> {
    if n == 0 {
        return Some(1);
    }
    if r_max == 0 {
        return None;
    }
    let steps = n.div_ceil(r_max);
    Some((2 * n + 2 * steps + 1) as u32)
}

/// Graded Moyal time-of-arrival series Σ_n ℏ^{2n} τ_n(q,p).
///
/// Every stored exponent is odd and negative (time-reversal structure), no
/// entry lies beyond the cutoffs, and a grade-n entry (n ≥ 1) has |m| ≥ 2n + 3,
/// the bound that holds for every polynomial potential.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseSeries {
    terms: GradedLaurent,
    mu: Rational,
    cutoffs: Cutoffs,
}

impl PhaseSeries {
    pub fn empty(mu: Rational, cutoffs: Cutoffs) -> Self {
        Self {
            terms: GradedLaurent::new(),
            mu,
            cutoffs,
        }
    }

    pub fn from_terms(terms: GradedLaurent, mu: Rational, cutoffs: Cutoffs) -> Result<Self> {
        for (n, m, _) in terms.iter() {
            check_entry(n, m, &cutoffs)?;
        }
        Ok(Self { terms, mu, cutoffs })
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    pub fn cutoffs(&self) -> Cutoffs {
        self.cutoffs
    }

    pub fn terms(&self) -> &GradedLaurent {
        &self.terms
    }

    pub fn into_terms(self) -> GradedLaurent {
        self.terms
    }

    pub fn get(&self, grade: usize, exponent: i32) -> Option<&QPoly> {
        self.terms.get(grade, exponent)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i32, &QPoly)> {
        self.terms.iter()
    }

    pub fn grade(&self, n: usize) -> impl Iterator<Item = (i32, &QPoly)> {
        self.terms.grade(n)
    }

    pub fn grade_is_empty(&self, n: usize) -> bool {
        self.grade(n).next().is_none()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Smallest |m| stored at grade n.
    pub fn min_abs_exponent_in_grade(&self, n: usize) -> Option<u32> {
        self.grade(n).map(|(m, _)| m.unsigned_abs()).min()
    }

    /// Keeps only grades ≤ n.
    pub fn truncate_grades(&self, n: usize) -> PhaseSeries {
        let mut terms = GradedLaurent::new();
        for (g, m, p) in self.iter().filter(|&(g, _, _)| g <= n) {
            terms.add_term(g, m, p.clone());
        }
        PhaseSeries {
            terms,
            mu: self.mu.clone(),
            cutoffs: Cutoffs::new(n.min(self.cutoffs.n_max), self.cutoffs.k_max),
        }
    }

    /// Drops grade n entirely.
    pub fn with_grade_removed(&self, n: usize) -> PhaseSeries {
        let mut terms = GradedLaurent::new();
        for (g, m, p) in self.iter().filter(|&(g, _, _)| g != n) {
            terms.add_term(g, m, p.clone());
        }
        PhaseSeries {
            terms,
            mu: self.mu.clone(),
            cutoffs: self.cutoffs,
        }
    }

    pub fn eval(&self, q: f64, p: f64, hbar: f64) -> Result<f64> {
        series_eval(self, q, p, hbar)
    }

    /// Value of the single grade n (without the ℏ^{2n} factor).
    pub fn eval_grade(&self, n: usize, q: f64, p: f64) -> Result<f64> {
        if p == 0.0 {
            return Err(Error::MomentumSingularity);
        }
        Ok(self.grade(n).map(|(m, c)| c.eval_f64(q) * p.powi(m)).sum())
    }
}

fn check_entry(n: usize, m: i32, cutoffs: &Cutoffs) -> Result<()> {
    if m >= 0 || m % 2 == 0 {
        return Err(Error::Structural(format!(
            "p-exponent {m} at grade {n} is not odd and negative"
        )));
    }
    if n > cutoffs.n_max || m.unsigned_abs() > cutoffs.k_max {
        return Err(Error::Structural(format!(
            "entry (n={n}, m={m}) lies beyond cutoffs (N_max={}, K_max={})",
            cutoffs.n_max, cutoffs.k_max
        )));
    }
    if n >= 1 && m.unsigned_abs() < 2 * n as u32 + 3 {
        return Err(Error::Structural(format!(
            "grade-{n} entry with |m| = {} is below the grading bound {}",
            m.unsigned_abs(),
            2 * n + 3
        )));
    }
    Ok(())
}

/// Term-wise derivative of a phase series. p-derivatives of odd order give even
/// exponents, so the result is returned in the unrestricted representation.
pub fn series_diff(s: &PhaseSeries, var: Var, order: usize) -> Result<GradedLaurent> {
    if order == 0 {
        return Err(Error::Precondition("derivative order must be ≥ 1".into()));
    }
    Ok(s.terms.diff(var, order))
}

/// Σ_n ℏ^{2n} Σ_m c_{n,m}(q) p^m in f64.
pub fn series_eval(s: &PhaseSeries, q: f64, p: f64, hbar: f64) -> Result<f64> {
    if p == 0.0 {
        return Err(Error::MomentumSingularity);
    }
    s.terms.eval_f64(q, p, hbar)
}

impl fmt::Display for PhaseSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, m, p) in self.iter() {
            writeln!(f, "ℏ^{} p^{m}: {p}", 2 * n)?;
        }
        Ok(())
    }
}

/// Exact-rational coefficient of q^k in entry (n, m), zero if absent.
pub fn entry_coeff(s: &PhaseSeries, n: usize, m: i32, k: usize) -> Rational {
    s.get(n, m)
        .map(|p| p.coeff(k))
        .unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn free_series(mu: Rational) -> PhaseSeries {
        let mut t = GradedLaurent::new();
        t.add_term(0, -1, QPoly::monomial(-mu.clone(), 1));
        PhaseSeries::from_terms(t, mu, Cutoffs::default()).unwrap()
    }

    #[test]
    fn q_derivative_of_free_term() {
        let s = free_series(r(1, 1));
        let d = series_diff(&s, Var::Q, 1).unwrap();
        assert_eq!(d.get(0, -1), Some(&QPoly::constant(r(-1, 1))));
    }

    #[test]
    fn third_p_derivative_of_free_term() {
        // ∂³/∂p³ (−μq p⁻¹) = −μq·(−1)(−2)(−3) p⁻⁴ = 6μq p⁻⁴
        let mu = r(3, 2);
        let s = free_series(mu.clone());
        let d = series_diff(&s, Var::P, 3).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.get(0, -4), Some(&QPoly::monomial(r(6, 1) * mu, 1)));
    }

    #[test]
    fn p_derivative_of_empty_series_is_empty() {
        let s = PhaseSeries::empty(r(1, 1), Cutoffs::default());
        assert!(series_diff(&s, Var::P, 1).unwrap().is_empty());
        assert!(series_diff(&s, Var::P, 0).is_err());
    }

    #[test]
    fn eval_free_series() {
        let s = free_series(r(1, 1));
        assert!((series_eval(&s, -2.0, 1.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(series_eval(&s, 0.0, 3.7, 1.0).unwrap(), 0.0);
        assert_eq!(
            series_eval(&s, 1.0, 0.0, 1.0),
            Err(Error::MomentumSingularity)
        );
    }

    #[test]
    fn rejects_even_or_out_of_range_entries() {
        let mut t = GradedLaurent::new();
        t.add_term(0, -2, QPoly::one());
        assert!(PhaseSeries::from_terms(t, r(1, 1), Cutoffs::default()).is_err());

        let mut t = GradedLaurent::new();
        t.add_term(0, -23, QPoly::one());
        assert!(PhaseSeries::from_terms(t, r(1, 1), Cutoffs::default()).is_err());

        let mut t = GradedLaurent::new();
        t.add_term(1, -3, QPoly::one());
        assert!(PhaseSeries::from_terms(t, r(1, 1), Cutoffs::default()).is_err());
    }

    #[test]
    fn add_term_cancels_to_nothing() {
        let mut t = GradedLaurent::new();
        t.add_term(0, -1, QPoly::one());
        t.add_term(0, -1, QPoly::constant(r(-1, 1)));
        assert!(t.is_empty());
    }

    #[test]
    fn minimum_exponent_law() {
        assert_eq!(min_abs_exponent(0, 1), Some(1));
        assert_eq!(min_abs_exponent(1, 1), Some(5));
        assert_eq!(min_abs_exponent(3, 1), Some(13));
        assert_eq!(min_abs_exponent(2, 2), Some(7));
        assert_eq!(min_abs_exponent(1, 0), None);
    }
}

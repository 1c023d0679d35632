use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::binomial;
use num_traits::{One, Zero};

use super::qpoly::rational_to_f64;
use super::{QPoly, Rational};

/// Sparse bivariate polynomial Σ c_{a,b} x^a y^b with exact coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BiPoly {
    terms: BTreeMap<(usize, usize), Rational>,
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(Rational::one(), 0, 0)
    }

    pub fn monomial(c: Rational, a: usize, b: usize) -> Self {
        let mut out = Self::zero();
        out.add_term(a, b, c);
        out
    }

    /// f(x) viewed as a bivariate polynomial.
    pub fn from_x(f: &QPoly) -> Self {
        let mut out = Self::zero();
        for (k, c) in f.terms() {
            out.add_term(k, 0, c.clone());
        }
        out
    }

    pub fn from_y(f: &QPoly) -> Self {
        let mut out = Self::zero();
        for (k, c) in f.terms() {
            out.add_term(0, k, c.clone());
        }
        out
    }

    /// f(α·x + β·y)
    pub fn from_affine(f: &QPoly, alpha: &Rational, beta: &Rational) -> Self {
        let mut out = Self::zero();
        for (k, c) in f.terms() {
            let mut ap = Rational::one();
            let a_pows: Vec<Rational> = (0..=k)
                .map(|_| {
                    let v = ap.clone();
                    ap *= alpha;
                    v
                })
                .collect();
            let mut bp = Rational::one();
            let b_pows: Vec<Rational> = (0..=k)
                .map(|_| {
                    let v = bp.clone();
                    bp *= beta;
                    v
                })
                .collect();
            for i in 0..=k {
                let binom = Rational::from_integer(binomial(k as u64, i as u64).into());
                let coeff = c * binom * &a_pows[i] * &b_pows[k - i];
                out.add_term(i, k - i, coeff);
            }
        }
        out
    }

    pub fn add_term(&mut self, a: usize, b: usize, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((a, b)).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&(a, b));
        }
    }

    pub fn coeff(&self, a: usize, b: usize) -> Rational {
        self.terms
            .get(&(a, b))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Nonzero ((a, b), c) entries ordered by (a, b).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.terms.iter().map(|(&(a, b), c)| (a, b, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero();
        for (a, b, x) in self.iter() {
            out.add_term(a, b, x * c);
        }
        out
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn diff_x(&self) -> Self {
        let mut out = Self::zero();
        for (a, b, c) in self.iter().filter(|&(a, _, _)| a > 0) {
            out.add_term(a - 1, b, c * Rational::from_integer(a.into()));
        }
        out
    }

    pub fn diff_y(&self) -> Self {
        let mut out = Self::zero();
        for (a, b, c) in self.iter().filter(|&(_, b, _)| b > 0) {
            out.add_term(a, b - 1, c * Rational::from_integer(b.into()));
        }
        out
    }

    /// ∫₀^y (·) dy′
    pub fn integrate_y(&self) -> Self {
        let mut out = Self::zero();
        for (a, b, c) in self.iter() {
            out.add_term(a, b + 1, c / Rational::from_integer((b + 1).into()));
        }
        out
    }

    /// x ↦ ∫₀^x f(x, y) dy, the diagonal of the y-antiderivative.
    pub fn integrate_y_to_diagonal(&self) -> QPoly {
        self.integrate_y().diagonal()
    }

    /// f(x, x)
    pub fn diagonal(&self) -> QPoly {
        let deg = self.iter().map(|(a, b, _)| a + b).max().unwrap_or(0);
        let mut coeffs = vec![Rational::zero(); deg + 1];
        for (a, b, c) in self.iter() {
            coeffs[a + b] += c;
        }
        QPoly::from_coeffs(coeffs)
    }

    /// Terms whose y-degree satisfies `keep`.
    pub fn filter_y(&self, keep: impl Fn(usize) -> bool) -> Self {
        let mut out = Self::zero();
        for (a, b, c) in self.iter().filter(|&(_, b, _)| keep(b)) {
            out.add_term(a, b, c.clone());
        }
        out
    }

    pub fn max_y_degree(&self) -> Option<usize> {
        self.iter().map(|(_, b, _)| b).max()
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        self.iter()
            .map(|(a, b, c)| rational_to_f64(c) * x.powi(a as i32) * y.powi(b as i32))
            .sum()
    }
}

impl Add for &BiPoly {
    type Output = BiPoly;

    fn add(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (a, b, c) in rhs.iter() {
            out.add_term(a, b, c.clone());
        }
        out
    }
}

impl Sub for &BiPoly {
    type Output = BiPoly;

    fn sub(self, rhs: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (a, b, c) in rhs.iter() {
            out.add_term(a, b, -c);
        }
        out
    }
}

impl Neg for &BiPoly {
    type Output = BiPoly;

    fn neg(self) -> BiPoly {
        self.scale(&-Rational::one())
    }
}

impl Mul for &BiPoly {
    type Output = BiPoly;

    fn mul(self, rhs: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for (a1, b1, c1) in self.iter() {
            for (a2, b2, c2) in rhs.iter() {
                out.add_term(a1 + a2, b1 + b2, c1 * c2);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn affine_composition_of_square() {
        // ((x + y)/2)² = x²/4 + xy/2 + y²/4
        let sq = QPoly::monomial(r(1, 1), 2);
        let b = BiPoly::from_affine(&sq, &r(1, 2), &r(1, 2));
        assert_eq!(b.coeff(2, 0), r(1, 4));
        assert_eq!(b.coeff(1, 1), r(1, 2));
        assert_eq!(b.coeff(0, 2), r(1, 4));
    }

    #[test]
    fn diagonal_integral_matches_univariate() {
        // ∫₀^x (x⁴ − y⁴) dy = (4/5) x⁵
        let v = QPoly::monomial(r(1, 1), 4);
        let diff = &BiPoly::from_x(&v) - &BiPoly::from_y(&v);
        assert_eq!(diff.integrate_y_to_diagonal(), QPoly::monomial(r(4, 5), 5));
    }

    #[test]
    fn derivatives() {
        let b = BiPoly::monomial(r(3, 1), 2, 3);
        assert_eq!(b.diff_x(), BiPoly::monomial(r(6, 1), 1, 3));
        assert_eq!(b.diff_y(), BiPoly::monomial(r(9, 1), 2, 2));
        assert!((b.eval_f64(2.0, 0.5) - 1.5).abs() < 1e-15);
    }
}

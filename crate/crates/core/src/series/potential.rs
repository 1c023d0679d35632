use std::fmt;
use std::str::FromStr;

use num_integer::binomial;

use super::{QPoly, Rational};
use crate::error::{Error, Result};

/// Polynomial interaction potential V(q) = a₀ + a₁q + … + a_d q^d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialPotential {
    poly: QPoly,
}

impl PolynomialPotential {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        Self {
            poly: QPoly::from_coeffs(coeffs),
        }
    }

    pub fn free() -> Self {
        Self {
            poly: QPoly::zero(),
        }
    }

    pub fn from_poly(poly: QPoly) -> Self {
        Self { poly }
    }

    /// λ q^k
    pub fn monomial(coupling: Rational, k: usize) -> Self {
        Self::from_poly(QPoly::monomial(coupling, k))
    }

    /// Parses coefficient strings such as `"0"`, `"-3"`, `"4/5"` (a₀ first).
    pub fn parse<S: AsRef<str>>(coeffs: &[S]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Parse {
                field: "potential".into(),
                message: "coefficient list is empty".into(),
            });
        }
        let parsed = coeffs
            .iter()
            .enumerate()
            .map(|(i, s)| parse_rational(s.as_ref(), &format!("potential[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(parsed))
    }

    pub fn poly(&self) -> &QPoly {
        &self.poly
    }

    /// Degree of the last nonzero coefficient; 0 for the zero potential.
    pub fn degree(&self) -> usize {
        self.poly.degree().unwrap_or(0)
    }

    /// True iff a_n = 0 for all n ≥ 3, in which case every Moyal correction vanishes.
    pub fn is_linear_system(&self) -> bool {
        self.degree() <= 2
    }

    pub fn derivative(&self, order: usize) -> QPoly {
        self.poly.nth_derivative(order)
    }

    /// Largest r with V^{(2r+1)} ≢ 0, i.e. the number of bracket orders that feed corrections.
    pub fn max_bracket_order(&self) -> usize {
        self.degree().saturating_sub(1) / 2
    }

    pub fn eval_f64(&self, q: f64) -> f64 {
        self.poly.eval_f64(q)
    }

    pub fn derivative_f64(&self, order: usize, q: f64) -> f64 {
        self.derivative(order).eval_f64(q)
    }
}

impl fmt::Display for PolynomialPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V(q) = {}", self.poly)
    }
}

pub fn parse_rational(s: &str, field: &str) -> Result<Rational> {
    Rational::from_str(s.trim()).map_err(|e| Error::Parse {
        field: field.to_string(),
        message: format!("`{s}` is not a rational number ({e})"),
    })
}

/// ∫₀^q (V(q) − V(q′))^k dq′ as an exact polynomial in q.
///
/// Expands the binomial in V(q) and V(q′) so only univariate integrals of V^j remain.
pub fn potential_difference_power(v: &PolynomialPotential, k: usize) -> QPoly {
    potential_difference_power_weighted(v, k, &QPoly::one())
}

/// ∫₀^q (V(q) − V(q′))^k f(q′) dq′ for a polynomial weight f.
pub fn potential_difference_power_weighted(v: &PolynomialPotential, k: usize, f: &QPoly) -> QPoly {
    let powers = PotentialPowers::new(v, k);
    powers.difference_power_weighted(k, f)
}

/// Cached powers V^0..V^k used by the binomial expansion of (V(q) − V(q′))^k.
pub(crate) struct PotentialPowers {
    powers: Vec<QPoly>,
}

impl PotentialPowers {
    pub(crate) fn new(v: &PolynomialPotential, max: usize) -> Self {
        let mut powers = Vec::with_capacity(max + 1);
        powers.push(QPoly::one());
        for j in 1..=max {
            let next = &powers[j - 1] * v.poly();
            powers.push(next);
        }
        Self { powers }
    }

    pub(crate) fn get(&self, j: usize) -> &QPoly {
        &self.powers[j]
    }

    /// Integrals I_i = ∫₀^q V(q′)^i f(q′) dq′ for i = 0..=max.
    pub(crate) fn weighted_integrals(&self, max: usize, f: &QPoly) -> Vec<QPoly> {
        (0..=max)
            .map(|i| (self.get(i) * f).integrate_zero_to_q())
            .collect()
    }

    /// Σ_i C(k,i) (−1)^i V(q)^{k−i} I_i
    pub(crate) fn combine(&self, k: usize, integrals: &[QPoly]) -> QPoly {
        let mut acc = QPoly::zero();
        for (i, integral) in integrals.iter().enumerate().take(k + 1) {
            if integral.is_zero() {
                continue;
            }
            let mut c = Rational::from_integer(binomial(k as u64, i as u64).into());
            if i % 2 == 1 {
                c = -c;
            }
            let term = (self.get(k - i) * integral).scale(&c);
            acc = &acc + &term;
        }
        acc
    }

    pub(crate) fn difference_power_weighted(&self, k: usize, f: &QPoly) -> QPoly {
        let integrals = self.weighted_integrals(k, f);
        self.combine(k, &integrals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn quartic_first_difference_power() {
        // ∫₀^q (λq⁴ − λq′⁴) dq′ = λq⁵ − λq⁵/5
        let v = PolynomialPotential::monomial(r(1, 1), 4);
        assert_eq!(
            potential_difference_power(&v, 1),
            QPoly::monomial(r(4, 5), 5)
        );
    }

    #[test]
    fn zeroth_power_is_q() {
        let v = PolynomialPotential::new(vec![r(1, 1), r(-2, 3), r(0, 1), r(5, 1)]);
        assert_eq!(
            potential_difference_power(&v, 0),
            QPoly::monomial(r(1, 1), 1)
        );
    }

    #[test]
    fn free_potential_difference_vanishes() {
        assert!(potential_difference_power(&PolynomialPotential::free(), 2).is_zero());
    }

    #[test]
    fn quartic_power_matches_beta_integral() {
        // ∫₀^q (q⁴ − q′⁴)^k dq′ = q^{4k+1} k!/(5/4)_k
        let v = PolynomialPotential::monomial(r(1, 1), 4);
        for k in 0..6usize {
            let mut expected = r(1, 1);
            for i in 0..k {
                expected *= r((i + 1) as i64, 1) / (r(5, 4) + r(i as i64, 1));
            }
            assert_eq!(
                potential_difference_power(&v, k),
                QPoly::monomial(expected, 4 * k + 1),
                "k = {k}"
            );
        }
    }

    #[test]
    fn linear_system_predicate() {
        assert!(PolynomialPotential::new(vec![r(1, 1), r(2, 1), r(3, 1)]).is_linear_system());
        assert!(
            PolynomialPotential::new(vec![r(1, 1), r(2, 1), r(3, 1), r(0, 1)]).is_linear_system()
        );
        assert!(!PolynomialPotential::monomial(r(1, 7), 3).is_linear_system());
        assert_eq!(
            PolynomialPotential::monomial(r(1, 1), 6).max_bracket_order(),
            2
        );
        assert_eq!(
            PolynomialPotential::monomial(r(1, 1), 4).max_bracket_order(),
            1
        );
    }

    #[test]
    fn parse_reports_field() {
        let err = PolynomialPotential::parse(&["0", "1/x"]).unwrap_err();
        match err {
            Error::Parse { field, .. } => assert_eq!(field, "potential[1]"),
            other => panic!("unexpected {other:?}"),
        }
        let v = PolynomialPotential::parse(&["0", "0", "0", "0", "4/5"]).unwrap();
        assert_eq!(v.degree(), 4);
    }
}

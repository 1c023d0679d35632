//! Classical arrival time: direct quadrature, successive approximation and the local series.

use std::f64::consts::PI;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{
    potential_difference_power, Cutoffs, GradedLaurent, PhaseSeries, PolynomialPotential, QPoly,
    Rational, Var,
};
use crate::specfun::integrate_composite;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrivalStatus {
    Arrived,
    /// The radicand H(q,p) − V(q′) vanishes or turns negative on the path.
    NonClassicalRegion,
    /// Negative arrival time: the particle moves away from the origin.
    MovingAway,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalToaResult {
    pub value: f64,
    pub status: ArrivalStatus,
}

const PANELS: usize = 8;
const NODES: usize = 32;

/// −sgn(p)√(μ/2) ∫₀^q dq′/√(H(q,p) − V(q′)) with H = p²/2μ + V(q).
pub fn classical_toa_quadrature(
    v: &PolynomialPotential,
    mu: f64,
    q: f64,
    p: f64,
) -> Result<ClassicalToaResult> {
    if p == 0.0 {
        return Err(Error::MomentumSingularity);
    }
    if mu.is_nan() || mu <= 0.0 {
        return Err(Error::Precondition("mass must be positive".into()));
    }
    let energy = p * p / (2.0 * mu) + v.eval_f64(q);
    let radicand = |x: f64| energy - v.eval_f64(x);

    // Chebyshev sampling of the radicand along [0, q] (endpoints included).
    let samples = 10 * (v.degree() + 1);
    let half = 0.5 * q;
    let crosses = (0..samples)
        .map(|j| half + half * (PI * (j as f64 + 0.5) / samples as f64).cos())
        .chain([0.0, q])
        .any(|x| radicand(x) <= 0.0);
    if crosses {
        return Ok(ClassicalToaResult {
            value: f64::NAN,
            status: ArrivalStatus::NonClassicalRegion,
        });
    }

    let integral = integrate_composite(|x| 1.0 / radicand(x).sqrt(), 0.0, q, NODES, PANELS)?;
    let value = -p.signum() * (mu / 2.0).sqrt() * integral;
    let status = if value < 0.0 {
        ArrivalStatus::MovingAway
    } else {
        ArrivalStatus::Arrived
    };
    Ok(ClassicalToaResult { value, status })
}

fn free_term(mu: &Rational) -> QPoly {
    QPoly::monomial(-mu.clone(), 1)
}

/// 𝒯_{C,n} from T_{C,0} = −μq/p and
/// T_{C,n} = −μq/p + (μ/p) ∫₀^q V′(q′) ∂_p T_{C,n−1}(q′,p) dq′.
pub fn successive_approximation(
    v: &PolynomialPotential,
    mu: &Rational,
    n: usize,
    k_max: u32,
) -> Result<PhaseSeries> {
    check_inputs(mu, k_max)?;
    let force = v.derivative(1);
    let cutoffs = Cutoffs::new(0, k_max);
    let mut current = GradedLaurent::new();
    current.add_term(0, -1, free_term(mu));
    for _ in 0..n {
        let dp = current.diff(Var::P, 1);
        let mut next = GradedLaurent::new();
        next.add_term(0, -1, free_term(mu));
        for (_, m, c) in dp.iter() {
            let exponent = m - 1;
            if exponent.unsigned_abs() > k_max {
                continue;
            }
            let integrand = &force * c;
            next.add_term(0, exponent, integrand.integrate_zero_to_q().scale(mu));
        }
        current = next;
    }
    PhaseSeries::from_terms(current, mu.clone(), cutoffs)
}

/// τ₀ = −Σ_k (−1)^k ((2k−1)!!/k!) μ^{k+1} p^{−2k−1} ∫₀^q (V(q)−V(q′))^k dq′ for 2k+1 ≤ K_max.
pub fn ltoa_series(v: &PolynomialPotential, mu: &Rational, k_max: u32) -> Result<PhaseSeries> {
    check_inputs(mu, k_max)?;
    let cutoffs = Cutoffs::new(0, k_max);
    let mut terms = GradedLaurent::new();
    let k_top = ((k_max - 1) / 2) as usize;
    let mut coeff = -mu.clone();
    for k in 0..=k_top {
        if k > 0 {
            // ratio of consecutive −(−1)^k (2k−1)!!/k! μ^{k+1}
            coeff = -coeff * Rational::from_integer((2 * k as i64 - 1).into())
                / Rational::from_integer((k as i64).into())
                * mu;
        }
        let poly = potential_difference_power(v, k);
        terms.add_term(0, -(2 * k as i32 + 1), poly.scale(&coeff));
    }
    PhaseSeries::from_terms(terms, mu.clone(), cutoffs)
}

fn check_inputs(mu: &Rational, k_max: u32) -> Result<()> {
    if k_max < 1 {
        return Err(Error::Precondition("K_max must be ≥ 1".into()));
    }
    if !mu.is_positive() {
        return Err(Error::Precondition("mass must be positive".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::rat;

    #[test]
    fn free_particle_quadrature() {
        let r = classical_toa_quadrature(&PolynomialPotential::free(), 1.0, -2.0, 1.0).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
        assert_eq!(r.status, ArrivalStatus::Arrived);
        let r = classical_toa_quadrature(&PolynomialPotential::free(), 1.0, -2.0, -1.0).unwrap();
        assert_eq!(r.status, ArrivalStatus::MovingAway);
        assert!((r.value + 2.0).abs() < 1e-14);
        assert_eq!(
            classical_toa_quadrature(&PolynomialPotential::free(), 1.0, 1.0, 0.0),
            Err(Error::MomentumSingularity)
        );
    }

    #[test]
    fn bounded_quartic_is_non_classical() {
        // V = −q⁴, q = 1, p = 1: 2μ|λ|q⁴/p² = 2 > 1
        let v = PolynomialPotential::monomial(rat(-1, 1), 4);
        let r = classical_toa_quadrature(&v, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(r.status, ArrivalStatus::NonClassicalRegion);
        assert!(r.value.is_nan());
    }

    #[test]
    fn ltoa_free_and_quartic_first_term() {
        let mu = rat(1, 1);
        let s = ltoa_series(&PolynomialPotential::free(), &mu, 21).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(0, -1), Some(&QPoly::monomial(rat(-1, 1), 1)));

        let mu = rat(3, 2);
        let lambda = rat(2, 7);
        let v = PolynomialPotential::monomial(lambda.clone(), 4);
        let s = ltoa_series(&v, &mu, 21).unwrap();
        let expected = rat(4, 5) * &mu * &mu * &lambda;
        assert_eq!(s.get(0, -3), Some(&QPoly::monomial(expected, 5)));
        assert_eq!(s.len(), 11);
    }

    #[test]
    fn successive_approximation_initial_term() {
        let v = PolynomialPotential::monomial(rat(1, 1), 4);
        let s = successive_approximation(&v, &rat(2, 1), 0, 21).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.get(0, -1), Some(&QPoly::monomial(rat(-2, 1), 1)));
    }

    #[test]
    fn successive_approximation_matches_truncated_ltoa() {
        let v =
            PolynomialPotential::new(vec![rat(0, 1), rat(1, 3), rat(-1, 2), rat(2, 1), rat(1, 1)]);
        let mu = rat(3, 4);
        let ltoa = ltoa_series(&v, &mu, 21).unwrap();
        for n in 0..5usize {
            let sa = successive_approximation(&v, &mu, n, 21).unwrap();
            for k in 0..=n {
                let m = -(2 * k as i32 + 1);
                assert_eq!(sa.get(0, m), ltoa.get(0, m), "n = {n}, k = {k}");
            }
            assert!(sa
                .iter()
                .all(|(_, m, _)| m.unsigned_abs() <= 2 * n as u32 + 1));
        }
    }
}

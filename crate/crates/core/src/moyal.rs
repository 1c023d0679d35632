//! ℏ²-graded Moyal corrections to the local arrival time and exact bracket checks.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::classical::ltoa_series;
use crate::error::{Error, Result};
use crate::series::{
    falling_factorial, min_abs_exponent, BiPoly, Cutoffs, GradedLaurent, PhaseSeries,
    PolynomialPotential, PotentialPowers, QPoly, Rational,
};

fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn factorial(n: usize) -> Rational {
    (1..=n as i64).fold(Rational::one(), |acc, k| acc * int(k))
}

/// (−1)^r / (4^r (2r+1)!)
fn bracket_weight(r: usize) -> Rational {
    let sign = if r.is_multiple_of(2) {
        Rational::one()
    } else {
        -Rational::one()
    };
    sign / (int(4).pow(r as i32) * factorial(2 * r + 1))
}

/// ((1/p)∂_p)^j p^e = Π_{i<j} (e − 2i) · p^{e−2j}
pub fn inv_p_dp_power(e: i32, j: usize) -> (Rational, i32) {
    let factor = (0..j as i32).fold(Rational::one(), |acc, i| acc * int((e - 2 * i) as i64));
    (factor, e - 2 * j as i32)
}

/// Expands exp[ΔV (μ/p)∂_p] on terms f_e(q′) p^e as
/// Σ_j (μ^j/j!) ΔV^j ((1/p)∂_p)^j, keeping exponents with |e′| ≤ K_max.
///
/// `delta` is a polynomial in (x, y) = (q, q′); the result maps each exponent to
/// a bivariate polynomial in (q, q′), still to be integrated over q′.
pub fn exp_shift_apply(
    delta: &BiPoly,
    mu: &Rational,
    terms: &BTreeMap<i32, QPoly>,
    k_max: u32,
) -> Result<BTreeMap<i32, BiPoly>> {
    let mut out: BTreeMap<i32, BiPoly> = BTreeMap::new();
    for (&e, f) in terms {
        if e >= 0 || e % 2 == 0 {
            return Err(Error::Precondition(format!(
                "exp-shift input exponent {e} is not odd and negative"
            )));
        }
        let base = BiPoly::from_y(f);
        let mut delta_pow = BiPoly::one();
        let mut weight = Rational::one();
        let mut j = 0usize;
        loop {
            let (factor, exponent) = inv_p_dp_power(e, j);
            if exponent.unsigned_abs() > k_max {
                break;
            }
            if j > 0 {
                delta_pow = &delta_pow * delta;
                weight = weight * mu / int(j as i64);
            }
            if delta_pow.is_zero() {
                break;
            }
            let term = (&delta_pow * &base).scale(&(&weight * &factor));
            let slot = out.entry(exponent).or_default();
            *slot = &*slot + &term;
            j += 1;
        }
    }
    out.retain(|_, b| !b.is_zero());
    Ok(out)
}

/// Source terms (1/p) V^{(2r+1)}(q′) ∂_p^{2r+1} τ_{n−r}, keyed by exponent, with the
/// bracket weight and overall μ folded in.
fn correction_sources(
    v: &PolynomialPotential,
    mu: &Rational,
    n: usize,
    prior: &PhaseSeries,
) -> Vec<(i32, QPoly)> {
    let k_max = prior.cutoffs().k_max;
    let mut sources = Vec::new();
    for r in 1..=n {
        let vd = v.derivative(2 * r + 1);
        if vd.is_zero() {
            continue;
        }
        let w = bracket_weight(r) * mu;
        for (m, c) in prior.grade(n - r) {
            let e = m - 2 * r as i32 - 2;
            if e.unsigned_abs() > k_max {
                continue;
            }
            let factor = falling_factorial(m, 2 * r + 1) * &w;
            sources.push((e, (&vd * c).scale(&factor)));
        }
    }
    sources
}

/// Grade-n correction τ_n from grades 0..n−1 of `prior`:
///
/// τ_n = μ Σ_{r=1}^n (−1)^r/(4^r (2r+1)!) ∫₀^q exp[(V(q)−V(q′))(μ/p)∂_p]
///       (1/p) V^{(2r+1)}(q′) ∂_p^{2r+1} τ_{n−r}(q′,p) dq′.
///
/// The q′-integrals use univariate integrals of V^i · source combined binomially.
pub fn moyal_correction(
    v: &PolynomialPotential,
    mu: &Rational,
    n: usize,
    prior: &PhaseSeries,
) -> Result<PhaseSeries> {
    if n == 0 {
        return Err(Error::Precondition("correction grade must be ≥ 1".into()));
    }
    if prior.grade_is_empty(0) {
        return Err(Error::Precondition(
            "prior series is missing grade 0".into(),
        ));
    }
    if prior.cutoffs().n_max + 1 < n {
        return Err(Error::Precondition(format!(
            "prior series stops at grade {} but grade {} needs grades up to {}",
            prior.cutoffs().n_max,
            n,
            n - 1
        )));
    }
    let k_max = prior.cutoffs().k_max;
    let sources = correction_sources(v, mu, n, prior);
    let j_max = sources
        .iter()
        .map(|(e, _)| ((k_max - e.unsigned_abs()) / 2) as usize)
        .max()
        .unwrap_or(0);
    let powers = PotentialPowers::new(v, j_max);

    let pieces: Vec<Vec<(i32, QPoly)>> = sources
        .par_iter()
        .map(|(e, f)| {
            let jm = ((k_max - e.unsigned_abs()) / 2) as usize;
            let integrals = powers.weighted_integrals(jm, f);
            let mut out = Vec::new();
            let mut mu_pow = Rational::one();
            for j in 0..=jm {
                if j > 0 {
                    mu_pow = mu_pow * mu / int(j as i64);
                }
                let (factor, exponent) = inv_p_dp_power(*e, j);
                let poly = powers.combine(j, &integrals);
                if !poly.is_zero() {
                    out.push((exponent, poly.scale(&(&mu_pow * &factor))));
                }
            }
            out
        })
        .collect();

    let mut terms = GradedLaurent::new();
    for (exponent, poly) in pieces.into_iter().flatten() {
        terms.add_term(n, exponent, poly);
    }
    let cutoffs = Cutoffs::new(n, k_max);
    PhaseSeries::from_terms(terms, mu.clone(), cutoffs)
}

/// Same correction computed through the bivariate exponential shift; used as a cross-check.
pub fn moyal_correction_bivariate(
    v: &PolynomialPotential,
    mu: &Rational,
    n: usize,
    prior: &PhaseSeries,
) -> Result<PhaseSeries> {
    let k_max = prior.cutoffs().k_max;
    let delta = &BiPoly::from_x(v.poly()) - &BiPoly::from_y(v.poly());
    let mut grouped: BTreeMap<i32, QPoly> = BTreeMap::new();
    for (e, f) in correction_sources(v, mu, n, prior) {
        let slot = grouped.entry(e).or_default();
        *slot = &*slot + &f;
    }
    let shifted = exp_shift_apply(&delta, mu, &grouped, k_max)?;
    let mut terms = GradedLaurent::new();
    for (e, b) in shifted {
        terms.add_term(n, e, b.integrate_y_to_diagonal());
    }
    PhaseSeries::from_terms(terms, mu.clone(), Cutoffs::new(n, k_max))
}

/// τ₀ from the local series plus grades 1..=N_max from the correction recursion.
pub fn build_moyal_toa(
    v: &PolynomialPotential,
    mu: &Rational,
    cutoffs: Cutoffs,
) -> Result<PhaseSeries> {
    let ltoa = ltoa_series(v, mu, cutoffs.k_max)?;
    let mut terms = ltoa.into_terms();
    let r_max = v.max_bracket_order();
    for n in 1..=cutoffs.n_max {
        let prior = PhaseSeries::from_terms(
            terms.clone(),
            mu.clone(),
            Cutoffs::new(n - 1, cutoffs.k_max),
        )?;
        let grade = moyal_correction(v, mu, n, &prior)?;
        if let Some(found) = grade.min_abs_exponent_in_grade(n) {
            let bound = min_abs_exponent(n, r_max).unwrap_or(u32::MAX);
            if found < bound {
                return Err(Error::Structural(format!(
                    "grade {n} holds |m| = {found}, below the minimum {bound}"
                )));
            }
        }
        for (g, m, c) in grade.iter() {
            terms.add_term(g, m, c.clone());
        }
    }
    PhaseSeries::from_terms(terms, mu.clone(), cutoffs)
}

/// Outcome of evaluating {H, 𝒯}_MB on a truncated series.
#[derive(Clone, Debug, PartialEq)]
pub struct BracketReport {
    /// Coefficient of ℏ⁰ p⁰ q⁰.
    pub constant_term: Rational,
    /// Nonzero entries of the bracket minus one, as (grade, p-exponent, polynomial).
    pub residual_entries: Vec<(usize, i32, QPoly)>,
    /// Orders whose contributing terms are not all inside the cutoffs.
    pub boundary_orders: BTreeSet<(usize, i32)>,
}

impl BracketReport {
    pub fn passes(&self) -> bool {
        self.constant_term.is_one()
            && self
                .residual_entries
                .iter()
                .all(|(n, e, _)| self.boundary_orders.contains(&(*n, *e)))
    }

    /// Residual entries at interior orders.
    pub fn interior_residuals(&self) -> impl Iterator<Item = &(usize, i32, QPoly)> {
        self.residual_entries
            .iter()
            .filter(|(n, e, _)| !self.boundary_orders.contains(&(*n, *e)))
    }
}

/// Raw ℏ-graded Moyal bracket {H, T} for H = p²/2μ + V(q):
/// at ℏ^{2N}, Σ_r (−1)^r/(4^r (2r+1)!) V^{(2r+1)} ∂_p^{2r+1} τ_{N−r} − (p/μ) ∂_q τ_N.
pub fn moyal_bracket_terms(
    v: &PolynomialPotential,
    mu: &Rational,
    t: &GradedLaurent,
) -> GradedLaurent {
    let r_max = v.max_bracket_order();
    let top = t.max_grade().unwrap_or(0);
    let mut out = GradedLaurent::new();
    let inv_mu = Rational::one() / mu;
    for (n, m, c) in t.iter() {
        out.add_term(n, m + 1, c.derivative().scale(&-inv_mu.clone()));
    }
    for r in 0..=r_max {
        let vd = v.derivative(2 * r + 1);
        if vd.is_zero() {
            continue;
        }
        let w = bracket_weight(r);
        for (g, m, c) in t.iter() {
            if g + r > top + r_max {
                continue;
            }
            let factor = falling_factorial(m, 2 * r + 1) * &w;
            if factor.is_zero() {
                continue;
            }
            out.add_term(g + r, m - 2 * r as i32 - 1, (&vd * c).scale(&factor));
        }
    }
    out
}

/// Evaluates {H, 𝒯}_MB − 1 and sorts residuals into interior and boundary orders.
///
/// Order (N, e) is interior iff N ≤ N_max and |e| + 1 ≤ K_max: every term that can
/// feed it then lies inside the series cutoffs.
pub fn moyal_bracket(v: &PolynomialPotential, t: &PhaseSeries) -> BracketReport {
    let cutoffs = t.cutoffs();
    let bracket = moyal_bracket_terms(v, t.mu(), t.terms());
    let constant_term = bracket
        .get(0, 0)
        .map(|p| p.coeff(0))
        .unwrap_or_else(Rational::zero);
    let mut residual = bracket.clone();
    residual.add_term(0, 0, QPoly::constant(-Rational::one()));

    let interior = |n: usize, e: i32| n <= cutoffs.n_max && e.unsigned_abs() < cutoffs.k_max;
    let boundary_orders = bracket
        .iter()
        .map(|(n, e, _)| (n, e))
        .filter(|&(n, e)| !interior(n, e))
        .collect();
    let residual_entries = residual.iter().map(|(n, e, c)| (n, e, c.clone())).collect();
    BracketReport {
        constant_term,
        residual_entries,
        boundary_orders,
    }
}

/// True iff every stored p-exponent is odd, i.e. 𝒯(q,−p) = −𝒯(q,p).
pub fn check_time_reversal(t: &GradedLaurent) -> bool {
    t.iter().all(|(_, m, _)| m % 2 != 0)
}

/// Corrections at grade ≥ 1 vanish identically for V = a + bq + cq².
pub fn corrections_empty(t: &PhaseSeries) -> bool {
    t.iter().all(|(n, _, _)| n == 0)
}

/// Entry-wise check of the potential-aware minimum-exponent law.
pub fn satisfies_exponent_law(t: &PhaseSeries, v: &PolynomialPotential) -> bool {
    let r_max = v.max_bracket_order();
    (0..=t.cutoffs().n_max).all(|n| match t.min_abs_exponent_in_grade(n) {
        None => true,
        Some(found) => min_abs_exponent(n, r_max).is_some_and(|b| found >= b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{rat, Var};

    fn quartic(lambda: Rational) -> PolynomialPotential {
        PolynomialPotential::monomial(lambda, 4)
    }

    #[test]
    fn inverse_p_derivative_power() {
        assert_eq!(inv_p_dp_power(-1, 1), (rat(-1, 1), -3));
        assert_eq!(inv_p_dp_power(-1, 0), (rat(1, 1), -1));
        assert_eq!(inv_p_dp_power(-5, 2), (rat(35, 1), -9));
    }

    #[test]
    fn exp_shift_with_zero_delta_is_identity() {
        let mut terms = BTreeMap::new();
        terms.insert(-3, QPoly::from_i64(&[0, 2, 1]));
        let out = exp_shift_apply(&BiPoly::zero(), &rat(1, 1), &terms, 21).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[&-3], BiPoly::from_y(&terms[&-3]));
    }

    #[test]
    fn exp_shift_quartic_on_free_term() {
        // exp[(q⁴−q′⁴)(μ/p)∂_p](−μq′/p), j ≤ 2, μ = 1:
        // −q′/p + (q⁴−q′⁴) q′/p³ − (3/2)(q⁴−q′⁴)² q′/p⁵
        let v = quartic(rat(1, 1));
        let delta = &BiPoly::from_x(v.poly()) - &BiPoly::from_y(v.poly());
        let mut terms = BTreeMap::new();
        terms.insert(-1, QPoly::monomial(rat(-1, 1), 1));
        let out = exp_shift_apply(&delta, &rat(1, 1), &terms, 5).unwrap();
        let qp = BiPoly::monomial(rat(1, 1), 0, 1);
        assert_eq!(out[&-1], -&qp);
        assert_eq!(out[&-3], &delta * &qp);
        assert_eq!(out[&-5], (&delta.pow(2) * &qp).scale(&rat(-3, 2)));
        assert_eq!(out.len(), 3);
    }

    #[test]
    fn quartic_first_correction_leading_term() {
        let mu = rat(2, 3);
        let lambda = rat(5, 7);
        let s = build_moyal_toa(&quartic(lambda.clone()), &mu, Cutoffs::new(1, 21)).unwrap();
        let lead = s.get(1, -5).unwrap();
        assert_eq!(lead, &QPoly::monomial(rat(-2, 1) * &mu * &mu * &lambda, 3));
        assert_eq!(s.min_abs_exponent_in_grade(1), Some(5));
    }

    #[test]
    fn cubic_first_correction_leading_term() {
        // V = c q³: V‴ = 6c gives −(3/4) μ² c q² p⁻⁵
        let mu = rat(1, 1);
        let c = rat(1, 1);
        let s = build_moyal_toa(
            &PolynomialPotential::monomial(c, 3),
            &mu,
            Cutoffs::new(1, 21),
        )
        .unwrap();
        assert_eq!(s.get(1, -5), Some(&QPoly::monomial(rat(-3, 4), 2)));
    }

    #[test]
    fn linear_systems_have_no_corrections() {
        let v = PolynomialPotential::new(vec![rat(1, 2), rat(-3, 1), rat(7, 5)]);
        let mu = rat(3, 1);
        let s = build_moyal_toa(&v, &mu, Cutoffs::new(3, 15)).unwrap();
        assert!(corrections_empty(&s));
        assert_eq!(s, {
            let l = ltoa_series(&v, &mu, 15).unwrap();
            PhaseSeries::from_terms(l.into_terms(), mu.clone(), Cutoffs::new(3, 15)).unwrap()
        });
    }

    #[test]
    fn univariate_and_bivariate_routes_agree() {
        let v =
            PolynomialPotential::new(vec![rat(0, 1), rat(0, 1), rat(1, 2), rat(1, 3), rat(-1, 5)]);
        let mu = rat(3, 2);
        let s = build_moyal_toa(&v, &mu, Cutoffs::new(2, 13)).unwrap();
        for n in 1..=2 {
            let prior = s.truncate_grades(n - 1);
            let prior =
                PhaseSeries::from_terms(prior.into_terms(), mu.clone(), Cutoffs::new(n - 1, 13))
                    .unwrap();
            let a = moyal_correction(&v, &mu, n, &prior).unwrap();
            let b = moyal_correction_bivariate(&v, &mu, n, &prior).unwrap();
            assert_eq!(a, b, "grade {n}");
        }
    }

    #[test]
    fn free_bracket_is_poisson() {
        let s =
            build_moyal_toa(&PolynomialPotential::free(), &rat(1, 1), Cutoffs::default()).unwrap();
        let report = moyal_bracket(&PolynomialPotential::free(), &s);
        assert!(report.passes());
        assert!(report.constant_term.is_one());
        assert!(report.residual_entries.is_empty());
    }

    #[test]
    fn quartic_bracket_passes_and_negative_control_fails() {
        let v = quartic(rat(1, 1));
        let mu = rat(1, 1);
        let s = build_moyal_toa(&v, &mu, Cutoffs::new(2, 13)).unwrap();
        let report = moyal_bracket(&v, &s);
        assert!(
            report.passes(),
            "{:?}",
            report.interior_residuals().collect::<Vec<_>>()
        );

        let broken = s.with_grade_removed(1);
        let report = moyal_bracket(&v, &broken);
        assert!(!report.passes());
        // the uncancelled ℏ² residual is the r = 1 source acting on τ₀
        let expected = {
            let mut g = GradedLaurent::new();
            let d3 = s.truncate_grades(0).terms().diff(Var::P, 3);
            for (_, m, c) in d3.iter() {
                g.add_term(1, m, (&v.derivative(3) * c).scale(&rat(-1, 24)));
            }
            g
        };
        let grade_one: Vec<_> = report
            .interior_residuals()
            .filter(|(n, _, _)| *n == 1)
            .collect();
        assert!(!grade_one.is_empty());
        for (_, e, c) in grade_one {
            assert_eq!(Some(c), expected.get(1, *e));
        }
        assert!(report.interior_residuals().all(|(n, _, _)| *n >= 1));
    }

    #[test]
    fn time_reversal_detects_even_exponent() {
        let s = build_moyal_toa(&quartic(rat(1, 1)), &rat(1, 1), Cutoffs::new(2, 13)).unwrap();
        assert!(check_time_reversal(s.terms()));
        let mut bad = s.terms().clone();
        bad.add_term(0, -2, QPoly::one());
        assert!(!check_time_reversal(&bad));
    }

    #[test]
    fn sextic_exponent_law() {
        let v = PolynomialPotential::monomial(rat(1, 1), 6);
        let s = build_moyal_toa(&v, &rat(1, 1), Cutoffs::new(2, 13)).unwrap();
        assert!(satisfies_exponent_law(&s, &v));
        // r = 2 reaches grade 2 at |m| = 7, below 4n + 1 = 9
        assert_eq!(s.min_abs_exponent_in_grade(2), Some(7));
        assert_eq!(s.get(2, -7), Some(&QPoly::monomial(rat(15, 1), 3)));
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-15;
pub const DEFAULT_MAX_TERMS: usize = 100_000;

/// Parameters of ₚF_q(a₁..a_p; b₁..b_q; z).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypergeomSpec {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub z: f64,
}

impl HypergeomSpec {
    pub fn new(a: &[f64], b: &[f64], z: f64) -> Self {
        Self {
            a: a.to_vec(),
            b: b.to_vec(),
            z,
        }
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// Direct series Σ_k (a)_k zᵏ / ((b)_k k!) with term-ratio stopping.
///
/// Fails with a domain error outside the disc of convergence (|z| ≥ 1 for
/// p = q + 1, any z ≠ 0 for p > q + 1) unless the series terminates.
pub fn hyp_pfq(spec: &HypergeomSpec, rel_tol: f64) -> Result<f64> {
    hyp_pfq_capped(spec, rel_tol, DEFAULT_MAX_TERMS)
}

pub(crate) fn hyp_pfq_capped(spec: &HypergeomSpec, rel_tol: f64, max_terms: usize) -> Result<f64> {
    let HypergeomSpec { a, b, z } = spec;
    let z = *z;
    if let Some(bad) = b.iter().find(|&&x| is_nonpositive_integer(x)) {
        return Err(Error::Domain(format!(
            "lower parameter {bad} is a non-positive integer"
        )));
    }
    if !z.is_finite() || a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::Domain("non-finite hypergeometric argument".into()));
    }
    let terminates = a.iter().any(|&x| is_nonpositive_integer(x));
    if !terminates && z != 0.0 {
        let (p, q) = (a.len(), b.len());
        if p > q + 1 || (p == q + 1 && z.abs() >= 1.0) {
            return Err(Error::Domain(format!(
                "z = {z} outside convergence region of {p}F{q}"
            )));
        }
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    // |z| bounds the asymptotic term ratio when p = q + 1.
    let ratio_limit = if a.len() == b.len() + 1 { z.abs() } else { 0.0 };

    let mut sum = 1.0_f64;
    let mut term = 1.0_f64;
    for k in 0..max_terms {
        let kf = k as f64;
        let mut ratio = z / (kf + 1.0);
        for &ai in a {
            ratio *= ai + kf;
        }
        for &bi in b {
            ratio /= bi + kf;
        }
        let next = term * ratio;
        if next == 0.0 {
            return Ok(sum);
        }
        sum += next;
        if !sum.is_finite() {
            return Err(Error::Convergence {
                what: "hypergeometric series (overflow)".into(),
                terms: k + 1,
            });
        }
        let rho = ratio.abs().max(ratio_limit);
        if rho < 1.0 {
            let tail = next.abs() * rho / (1.0 - rho);
            if tail <= rel_tol * sum.abs() || (sum == 0.0 && tail == 0.0) {
                return Ok(sum);
            }
        }
        term = next;
    }
    Err(Error::Convergence {
        what: "hypergeometric series".into(),
        terms: max_terms,
    })
}

pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    hyp_pfq(&HypergeomSpec::new(&[a, b], &[c], z), DEFAULT_REL_TOL)
}

pub fn hyp0f1(b: f64, z: f64) -> Result<f64> {
    hyp_pfq(&HypergeomSpec::new(&[], &[b], z), DEFAULT_REL_TOL)
}

/// ₀F₁(;1;z) = Σ zᵏ/(k!)², allocation-free for inner quadrature loops.
pub(crate) fn hyp0f1_unit(z: f64) -> Result<f64> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 1..10_000 {
        let kf = k as f64;
        term *= z / (kf * kf);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || term == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::Convergence {
        what: "0F1(;1;z)".into(),
        terms: 10_000,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_argument_is_one() {
        assert_eq!(hyp2f1(0.5, 1.0, 1.25, 0.0).unwrap(), 1.0);
        assert_eq!(hyp0f1(1.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn matches_brute_force_partial_sum() {
        // 200 terms of the raw series, summed independently.
        let (a, b, c, z) = (0.5, 1.0, 1.25, -0.5);
        let mut term = 1.0;
        let mut oracle = 1.0;
        for k in 0..200 {
            let k = k as f64;
            term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
            oracle += term;
        }
        let v = hyp2f1(a, b, c, z).unwrap();
        assert!((v - oracle).abs() <= 1e-12 * oracle.abs());
    }

    #[test]
    fn elementary_closed_forms() {
        // ₂F₁(1,1;2;z) = −ln(1−z)/z
        let z = 0.7;
        let v = hyp2f1(1.0, 1.0, 2.0, z).unwrap();
        let exact = -(1.0 - z).ln() / z;
        assert!((v - exact).abs() < 2e-12 * exact);
        // ₀F₁(;1;x²/4) = I₀(x); I₀(2) = 2.2795853023360673
        let v = hyp0f1(1.0, 1.0).unwrap();
        assert!((v - 2.279_585_302_336_067_3).abs() < 1e-12 * v);
        // ₀F₁(;1;−x²/4) = J₀(x); J₀(2) = 0.22389077914123567
        let v = hyp0f1(1.0, -1.0).unwrap();
        assert!((v - 0.223_890_779_141_235_67).abs() < 1e-12 * v);
    }

    #[test]
    fn unit_0f1_matches_generic() {
        for z in [-3.0, -0.4, 0.0, 0.25, 5.0] {
            let a = hyp0f1_unit(z).unwrap();
            let b = hyp0f1(1.0, z).unwrap();
            assert!(
                (a - b).abs() < 1e-13 * b.abs().max(1.0),
                "z={z}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(hyp2f1(0.5, 1.0, 1.25, 1.0), Err(Error::Domain(_))));
        assert!(matches!(
            hyp2f1(0.5, 1.0, 1.25, -1.5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(hyp2f1(0.5, 1.0, -2.0, 0.1), Err(Error::Domain(_))));
        // terminating series is fine anywhere: ₂F₁(−2,1;1;z) = (1−z)²
        assert!((hyp2f1(-2.0, 1.0, 1.0, 3.0).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn term_cap_reports_convergence_error() {
        let spec = HypergeomSpec::new(&[1.0, 1.0], &[1.0], 0.999_999);
        match hyp_pfq_capped(&spec, 1e-12, 50) {
            Err(Error::Convergence { terms, .. }) => assert_eq!(terms, 50),
            other => panic!("unexpected {other:?}"),
        }
    }
}

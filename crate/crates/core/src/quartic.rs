//! Closed-form quartic-oscillator arrival time and its first three quantum corrections,
//! kept as independent references for the series engine.

use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::float17;
use crate::series::{entry_coeff, PhaseSeries, Rational};
use crate::specfun::{hyp_pfq, HypergeomSpec, DEFAULT_REL_TOL};

/// V(q) = λq⁴ with mass μ and ℏ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuarticParams {
    pub lambda: f64,
    pub mu: f64,
    pub hbar: f64,
}

impl QuarticParams {
    pub fn new(lambda: f64, mu: f64, hbar: f64) -> Result<Self> {
        if !(mu > 0.0 && hbar > 0.0) || !lambda.is_finite() {
            return Err(Error::Precondition(
                "μ, ℏ must be positive and λ finite".into(),
            ));
        }
        Ok(Self { lambda, mu, hbar })
    }

    /// z = −2μλq⁴/p²
    pub fn z(&self, q: f64, p: f64) -> Result<f64> {
        if p == 0.0 {
            return Err(Error::MomentumSingularity);
        }
        Ok(-2.0 * self.mu * self.lambda * q.powi(4) / (p * p))
    }
}

/// One coefficient · ₚF_q(a; b; z) term of a closed form, parameters exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PfqTerm {
    pub coeff: (i64, i64),
    pub a: Vec<(i64, i64)>,
    pub b: Vec<(i64, i64)>,
}

fn term(coeff: (i64, i64), a: &[(i64, i64)], b: &[(i64, i64)]) -> PfqTerm {
    PfqTerm {
        coeff,
        a: a.to_vec(),
        b: b.to_vec(),
    }
}

fn r(x: (i64, i64)) -> Rational {
    Rational::new(x.0.into(), x.1.into())
}

fn f(x: (i64, i64)) -> f64 {
    x.0 as f64 / x.1 as f64
}

impl PfqTerm {
    fn spec(&self, z: f64) -> HypergeomSpec {
        HypergeomSpec {
            a: self.a.iter().copied().map(f).collect(),
            b: self.b.iter().copied().map(f).collect(),
            z,
        }
    }

    /// Exact coefficient of z^N: coeff · Π(a)_N / (Π(b)_N N!).
    pub fn taylor_coeff(&self, n: usize) -> Rational {
        let mut c = r(self.coeff);
        for k in 0..n as i64 {
            let kk = Rational::from_integer(k.into());
            for a in &self.a {
                c *= r(*a) + &kk;
            }
            for b in &self.b {
                c /= r(*b) + &kk;
            }
            c /= Rational::from_integer((k + 1).into());
        }
        c
    }
}

impl fmt::Display for PfqTerm {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &[(i64, i64)]| {
            v.iter()
                .map(|&(n, d)| {
                    if d == 1 {
                        n.to_string()
                    } else {
                        format!("{n}/{d}")
                    }
                })
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            fm,
            "{}/{} {}F{}({};{})",
            self.coeff.0,
            self.coeff.1,
            self.a.len(),
            self.b.len(),
            show(&self.a),
            show(&self.b)
        )
    }
}

/// Hypergeometric terms of 𝒯_n, n = 0..=3, multiplying −μ^{n+1}λ^n q^{2n+1} ℏ^{2n} / p^{4n+1}.
pub fn closed_form_terms(n: usize) -> Result<Vec<PfqTerm>> {
    Ok(match n {
        0 => vec![term((1, 1), &[(1, 2), (1, 1)], &[(5, 4)])],
        1 => vec![
            term((5, 2), &[(1, 1), (7, 2)], &[(5, 4)]),
            term((-1, 2), &[(1, 1), (5, 2)], &[(7, 4)]),
        ],
        2 => vec![
            term(
                (14, 3),
                &[(2, 1), (2, 1), (2, 1), (9, 2)],
                &[(1, 1), (1, 1), (9, 4)],
            ),
            term((301, 3), &[(2, 1), (113, 27), (9, 2)], &[(9, 4), (86, 27)]),
            term((-175, 4), &[(1, 1), (9, 2), (17, 2)], &[(7, 4), (15, 2)]),
            term((91, 4), &[(1, 1), (9, 2)], &[(9, 4)]),
        ],
        3 => vec![
            term(
                (1166, 3),
                &[(2, 1), (2, 1), (2, 1), (60, 7), (13, 2)],
                &[(1, 1), (1, 1), (9, 4), (53, 7)],
            ),
            term((-154, 5), &[(1, 1), (13, 2)], &[(9, 4)]),
            term(
                (891, 2),
                &[(2, 1), (2, 1), (2, 1), (13, 2)],
                &[(1, 1), (1, 1), (9, 4)],
            ),
            term(
                (-55, 1),
                &[(2, 1), (2, 1), (2, 1), (13, 2)],
                &[(1, 1), (1, 1), (11, 4)],
            ),
            term((54131, 12), &[(2, 1), (2, 1), (13, 2)], &[(1, 1), (9, 4)]),
            term(
                (284889, 40),
                &[(1, 1), (21277, 12644), (13, 2)],
                &[(8633, 12644), (9, 4)],
            ),
            term(
                (-12265, 2),
                &[(2, 1), (515, 69), (13, 2)],
                &[(11, 4), (446, 69)],
            ),
            term((75075, 8), &[(1, 1), (13, 2), (27, 2)], &[(9, 4), (25, 2)]),
            term((-15125, 4), &[(1, 1), (13, 2)], &[(11, 4)]),
            term((418, 15), &[(2, 1), (13, 2)], &[(9, 4)]),
        ],
        _ => {
            return Err(Error::Precondition(format!(
                "closed forms exist for grades 0..=3, not {n}"
            )))
        }
    })
}

/// −μ^{n+1} λ^n q^{2n+1} ℏ^{2n} / p^{4n+1}
fn prefactor(params: &QuarticParams, n: usize, q: f64, p: f64) -> f64 {
    let n32 = n as i32;
    -params.mu.powi(n32 + 1)
        * params.lambda.powi(n32)
        * q.powi(2 * n32 + 1)
        * params.hbar.powi(2 * n32)
        / p.powi(4 * n32 + 1)
}

/// Each term of 𝒯_n with the prefactor applied; errors name the failing term.
pub fn closed_form_term_values(
    params: &QuarticParams,
    n: usize,
    q: f64,
    p: f64,
) -> Result<Vec<f64>> {
    let z = params.z(q, p)?;
    let pre = prefactor(params, n, q, p);
    closed_form_terms(n)?
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let value = hyp_pfq(&t.spec(z), DEFAULT_REL_TOL).map_err(|e| match e {
                Error::Convergence { what, terms } => Error::Convergence {
                    what: format!("grade-{n} term {i} ({t}): {what}"),
                    terms,
                },
                Error::Domain(msg) => Error::Domain(format!("grade-{n} term {i} ({t}): {msg}")),
                other => other,
            })?;
            Ok(pre * f(t.coeff) * value)
        })
        .collect()
}

/// 𝒯_n(q, p) from the closed form (n = 0 is the classical arrival time).
pub fn quartic_closed_form(params: &QuarticParams, n: usize, q: f64, p: f64) -> Result<f64> {
    Ok(closed_form_term_values(params, n, q, p)?.iter().sum())
}

/// −(μq/p) ₂F₁(1/2, 1; 5/4; −2μλq⁴/p²)
pub fn quartic_classical(params: &QuarticParams, q: f64, p: f64) -> Result<f64> {
    quartic_closed_form(params, 0, q, p)
}

pub fn quartic_correction_1(params: &QuarticParams, q: f64, p: f64) -> Result<f64> {
    quartic_closed_form(params, 1, q, p)
}

pub fn quartic_correction_2(params: &QuarticParams, q: f64, p: f64) -> Result<f64> {
    quartic_closed_form(params, 2, q, p)
}

pub fn quartic_correction_3(params: &QuarticParams, q: f64, p: f64) -> Result<f64> {
    quartic_closed_form(params, 3, q, p)
}

/// Exact z^N coefficient of the bracketed hypergeometric sum of 𝒯_n.
pub fn closed_form_taylor(n: usize, order: usize) -> Result<Rational> {
    Ok(closed_form_terms(n)?
        .iter()
        .map(|t| t.taylor_coeff(order))
        .fold(Rational::zero(), |acc, c| acc + c))
}

/// Same coefficient read off an engine series built with μ = λ = 1:
/// −c / (−2)^N with c the coefficient of q^{2n+1+4N} p^{−(4n+1)−2N}.
pub fn engine_taylor(series: &PhaseSeries, n: usize, order: usize) -> Rational {
    let m = -(4 * n as i32 + 1) - 2 * order as i32;
    let c = entry_coeff(series, n, m, 2 * n + 1 + 4 * order);
    let scale = Rational::from_integer((-2i64).into()).pow(order as i32);
    -c / scale
}

/// Per-term Taylor coefficients at z^N, to locate a discrepancy.
pub fn closed_form_taylor_by_term(n: usize, order: usize) -> Result<Vec<(String, Rational)>> {
    Ok(closed_form_terms(n)?
        .iter()
        .map(|t| (t.to_string(), t.taylor_coeff(order)))
        .collect())
}

fn pochhammer(x: &Rational, k: usize) -> Rational {
    (0..k as i64).fold(Rational::one(), |acc, i| {
        acc * (x + Rational::from_integer(i.into()))
    })
}

fn double_factorial_odd(n: i64) -> Rational {
    // (2n+3)!! style helper: product of odd numbers up to n
    (1..=n).step_by(2).fold(Rational::one(), |acc, k| {
        acc * Rational::from_integer(k.into())
    })
}

/// Coefficient of q^{3+4N} p^{−5−2N} in τ₁ from the double sum
/// −(μ²λ/4)(−μλ)^N Σ_{l=0}^N (2l+2)(2N+3)!! / ((5/4)_l (l+3/4)_{N−l+1}).
pub fn first_correction_double_sum(mu: &Rational, lambda: &Rational, order: usize) -> Rational {
    let big_n = order as i64;
    let five_fourths = r((5, 4));
    let sum = (0..=big_n).fold(Rational::zero(), |acc, l| {
        let shift = r((3, 4)) + Rational::from_integer(l.into());
        acc + Rational::from_integer((2 * l + 2).into()) * double_factorial_odd(2 * big_n + 3)
            / (pochhammer(&five_fourths, l as usize) * pochhammer(&shift, (big_n - l + 1) as usize))
    });
    -(mu * mu * lambda) / Rational::from_integer(4.into())
        * (-(mu * lambda)).pow(order as i32)
        * sum
}

/// Same coefficient from the single sum
/// −μ²λ(−1)^N (1/2)_{N+2} (2μλ)^N Σ_{l=0}^N (2l+2) / ((5/4)_l (l+3/4)_{N+1−l}).
pub fn first_correction_single_sum(mu: &Rational, lambda: &Rational, order: usize) -> Rational {
    let big_n = order as i64;
    let sum = (0..=big_n).fold(Rational::zero(), |acc, l| {
        let shift = r((3, 4)) + Rational::from_integer(l.into());
        acc + Rational::from_integer((2 * l + 2).into())
            / (pochhammer(&r((5, 4)), l as usize) * pochhammer(&shift, (big_n + 1 - l) as usize))
    });
    let sign = if order.is_multiple_of(2) {
        Rational::one()
    } else {
        -Rational::one()
    };
    let two_mu_lambda = Rational::from_integer(2.into()) * mu * lambda;
    -(mu * mu * lambda)
        * sign
        * pochhammer(&r((1, 2)), order + 2)
        * two_mu_lambda.pow(order as i32)
        * sum
}

/// Same coefficient from the two-term Γ-function form
/// [(μ²λ/2)(1/2)_{N+2}/(3/4)_{N+1} − (μ²λ/6)(4N+5)(2N+5)(1/2)_{N+2}/(5/4)_{N+1}] (−2μλ)^N.
pub fn first_correction_gamma_form(mu: &Rational, lambda: &Rational, order: usize) -> Rational {
    let big_n = Rational::from_integer((order as i64).into());
    let two = Rational::from_integer(2.into());
    let half_poch = pochhammer(&r((1, 2)), order + 2);
    let a = &half_poch / pochhammer(&r((3, 4)), order + 1) / &two;
    let b = (Rational::from_integer(4.into()) * &big_n + Rational::from_integer(5.into()))
        * (&two * &big_n + Rational::from_integer(5.into()))
        * &half_poch
        / pochhammer(&r((5, 4)), order + 1)
        / Rational::from_integer(6.into());
    mu * mu * lambda * (a - b) * (-(&two * mu * lambda)).pow(order as i32)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    #[serde(rename = "T_C")]
    Classical,
    #[serde(rename = "T_1")]
    Correction1,
    #[serde(rename = "T_2")]
    Correction2,
    #[serde(rename = "T_3")]
    Correction3,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [
        Self::Classical,
        Self::Correction1,
        Self::Correction2,
        Self::Correction3,
    ];

    pub fn grade(self) -> usize {
        match self {
            Self::Classical => 0,
            Self::Correction1 => 1,
            Self::Correction2 => 2,
            Self::Correction3 => 3,
        }
    }

    /// Agreement target against the engine.
    pub fn tolerance(self) -> f64 {
        match self {
            Self::Classical | Self::Correction1 => 1e-8,
            Self::Correction2 | Self::Correction3 => 1e-6,
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Classical => "T_C",
            Self::Correction1 => "T_1",
            Self::Correction2 => "T_2",
            Self::Correction3 => "T_3",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowStatus {
    Ok,
    /// Engine and closed form differ by more than the quantity's tolerance.
    Deviation,
    /// Outside the hypergeometric convergence region: no arrival.
    NonConvergent,
    /// The engine series does not reach this grade.
    NotComputed,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ok => "ok",
            Self::Deviation => "deviation",
            Self::NonConvergent => "non-convergent",
            Self::NotComputed => "not-computed",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuarticRow {
    pub q: f64,
    pub p: f64,
    pub quantity: Quantity,
    pub engine_value: f64,
    pub closed_form_value: f64,
    pub rel_dev: f64,
    pub status: RowStatus,
}

/// ℏ^{2n} τ_n(q, p) from the engine series.
pub fn engine_grade_value(
    series: &PhaseSeries,
    n: usize,
    q: f64,
    p: f64,
    hbar: f64,
) -> Result<f64> {
    Ok(hbar.powi(2 * n as i32) * series.eval_grade(n, q, p)?)
}

/// Engine-versus-closed-form table for 𝒯_C, 𝒯₁, 𝒯₂, 𝒯₃ on the given points.
pub fn quartic_report(
    params: &QuarticParams,
    series: &PhaseSeries,
    points: &[(f64, f64)],
) -> Result<Vec<QuarticRow>> {
    let mut rows = Vec::with_capacity(points.len() * 4);
    for &(q, p) in points {
        if p == 0.0 {
            return Err(Error::MomentumSingularity);
        }
        for quantity in Quantity::ALL {
            let n = quantity.grade();
            let closed = quartic_closed_form(params, n, q, p);
            let computed = n <= series.cutoffs().n_max;
            let engine = if computed {
                engine_grade_value(series, n, q, p, params.hbar)?
            } else {
                f64::NAN
            };
            let (closed_value, rel_dev, status) = match closed {
                Err(Error::Domain(_)) | Err(Error::Convergence { .. }) => {
                    (f64::NAN, f64::NAN, RowStatus::NonConvergent)
                }
                Err(e) => return Err(e),
                Ok(c) if !computed => (c, f64::NAN, RowStatus::NotComputed),
                Ok(c) => {
                    let dev = if c == 0.0 {
                        (engine - c).abs()
                    } else {
                        ((engine - c) / c).abs()
                    };
                    let status = if dev <= quantity.tolerance() {
                        RowStatus::Ok
                    } else {
                        RowStatus::Deviation
                    };
                    (c, dev, status)
                }
            };
            rows.push(QuarticRow {
                q,
                p,
                quantity,
                engine_value: engine,
                closed_form_value: closed_value,
                rel_dev,
                status,
            });
        }
    }
    Ok(rows)
}

/// CSV with columns q, p, quantity, engine_value, closed_form_value, rel_dev, status.
pub fn quartic_csv(rows: &[QuarticRow]) -> String {
    let mut out = String::from("q,p,quantity,engine_value,closed_form_value,rel_dev,status\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            float17(row.q),
            float17(row.p),
            row.quantity,
            float17(row.engine_value),
            float17(row.closed_form_value),
            float17(row.rel_dev),
            row.status
        ));
    }
    out
}

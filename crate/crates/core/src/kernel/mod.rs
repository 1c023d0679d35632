//! Weyl-transform kernel factors T_M(q,q′) of the arrival-time series.
//!
//! Kernels live in the coordinates u = q + q′, v = q − q′. The prefactor
//! (μ/iℏ) sgn(q − q′) of the full kernel is never stored.

mod chebyshev;
mod grid;
mod quadrature;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::series::{
    rational_to_f64, BiPoly, Cutoffs, GradedLaurent, PhaseSeries, PolynomialPotential, QPoly,
    Rational,
};

pub use chebyshev::Chebyshev2d;
pub use grid::{kernel_csv, GradeTag, KernelGrid, KernelRoute};
pub use quadrature::{kernel_t0_quadrature, kernel_tn_quadrature, KernelQuadrature};

/// T_M = Σ_n ℏ^{2n} T_{M,n}(u, v), one bivariate polynomial per grade.
///
/// A monomial u^a v^b stored at grade n stands for u^a (v/ℏ)^b inside T_{M,n};
/// ℏ enters only through that ratio and the grade index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelSeries {
    grades: Vec<BiPoly>,
    mu: Rational,
    cutoffs: Cutoffs,
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn factorial(n: usize) -> Rational {
    (1..=n as i64).fold(Rational::one(), |acc, k| acc * int(k))
}

impl KernelSeries {
    pub fn new(grades: Vec<BiPoly>, mu: Rational, cutoffs: Cutoffs) -> Self {
        Self {
            grades,
            mu,
            cutoffs,
        }
    }

    pub fn grades(&self) -> &[BiPoly] {
        &self.grades
    }

    pub fn grade(&self, n: usize) -> Option<&BiPoly> {
        self.grades.get(n)
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    pub fn cutoffs(&self) -> Cutoffs {
        self.cutoffs
    }

    /// Replaces one grade; used to build corrupted kernels for negative controls.
    pub fn with_grade(&self, n: usize, poly: BiPoly) -> Self {
        let mut out = self.clone();
        if n >= out.grades.len() {
            out.grades.resize(n + 1, BiPoly::zero());
        }
        out.grades[n] = poly;
        out
    }

    /// T_{M,n}(q, q′) at the given ℏ, without the ℏ^{2n} weight.
    pub fn eval_grade(&self, n: usize, q: f64, qprime: f64, hbar: f64) -> f64 {
        let Some(poly) = self.grades.get(n) else {
            return 0.0;
        };
        let (u, v) = (q + qprime, (q - qprime) / hbar);
        poly.iter()
            .map(|(a, b, c)| rational_to_f64(c) * u.powi(a as i32) * v.powi(b as i32))
            .sum()
    }

    /// Σ_{n ≤ n_max} ℏ^{2n} T_{M,n}(q, q′).
    pub fn eval_sum(&self, n_max: usize, q: f64, qprime: f64, hbar: f64) -> f64 {
        (0..self.grades.len().min(n_max + 1))
            .map(|n| hbar.powi(2 * n as i32) * self.eval_grade(n, q, qprime, hbar))
            .sum()
    }

    /// True iff every grade is even in v, i.e. T(q,q′) = T(q′,q).
    pub fn is_symmetric(&self) -> bool {
        self.grades
            .iter()
            .all(|g| g.iter().all(|(_, b, _)| b % 2 == 0))
    }

    /// T(q, q) per grade as a polynomial in q.
    pub fn diagonal(&self, n: usize) -> QPoly {
        let mut coeffs = Vec::new();
        if let Some(poly) = self.grades.get(n) {
            for (a, b, c) in poly.iter().filter(|&(_, b, _)| b == 0) {
                debug_assert_eq!(b, 0);
                if coeffs.len() <= a {
                    coeffs.resize(a + 1, Rational::zero());
                }
                coeffs[a] += c * int(2).pow(a as i32);
            }
        }
        QPoly::from_coeffs(coeffs)
    }

    /// T(q, −q) per grade as a polynomial in v = 2q (the u = 0 slice).
    pub fn antidiagonal(&self, n: usize) -> QPoly {
        let mut coeffs = Vec::new();
        if let Some(poly) = self.grades.get(n) {
            for (_, b, c) in poly.iter().filter(|&(a, _, _)| a == 0) {
                if coeffs.len() <= b {
                    coeffs.resize(b + 1, Rational::zero());
                }
                coeffs[b] += c;
            }
        }
        QPoly::from_coeffs(coeffs)
    }
}

/// Maps c(q) p^{−m} (m odd, positive) to (−1)^{(m+1)/2} c(u/2) v^{m−1} / (2μ (m−1)!).
pub fn weyl_map_terms(
    terms: &GradedLaurent,
    mu: &Rational,
    cutoffs: Cutoffs,
) -> Result<KernelSeries> {
    let top = terms.max_grade().unwrap_or(0).max(cutoffs.n_max);
    let mut grades = vec![BiPoly::zero(); top + 1];
    let half = Rational::new(1.into(), 2.into());
    for (n, exponent, c) in terms.iter() {
        if exponent >= 0 || exponent % 2 == 0 {
            return Err(Error::Structural(format!(
                "p-exponent {exponent} at grade {n} has no Weyl image of kernel-factor form"
            )));
        }
        let m = exponent.unsigned_abs() as usize;
        let sign = if m.div_ceil(2).is_multiple_of(2) {
            Rational::one()
        } else {
            -Rational::one()
        };
        let factor = sign / (int(2) * mu * factorial(m - 1));
        let shrunk = c.rescale_argument(&half);
        for (a, coeff) in shrunk.terms() {
            grades[n].add_term(a, m - 1, coeff * &factor);
        }
    }
    Ok(KernelSeries::new(grades, mu.clone(), cutoffs))
}

pub fn weyl_map_series(t: &PhaseSeries) -> Result<KernelSeries> {
    weyl_map_terms(t.terms(), t.mu(), t.cutoffs())
}

/// Inverse Weyl map: u^a v^{2k} with coefficient d returns to
/// d · 2^a · 2μ (2k)! (−1)^{k+1} q^a p^{−(2k+1)}.
pub fn inverse_weyl_roundtrip(k: &KernelSeries) -> Result<PhaseSeries> {
    let mut terms = GradedLaurent::new();
    for (n, poly) in k.grades.iter().enumerate() {
        for (a, b, d) in poly.iter() {
            if b % 2 == 1 {
                return Err(Error::Structural(format!(
                    "grade {n} holds u^{a} v^{b}: odd v-power has no phase-space preimage"
                )));
            }
            let half_b = b / 2;
            let sign = if (half_b + 1) % 2 == 0 {
                Rational::one()
            } else {
                -Rational::one()
            };
            let c = d * int(2).pow(a as i32) * int(2) * &k.mu * factorial(b) * sign;
            terms.add_term(n, -(b as i32 + 1), QPoly::monomial(c, a));
        }
    }
    PhaseSeries::from_terms(terms, k.mu.clone(), k.cutoffs)
}

/// V((u+v)/2) − V((u−v)/2)
pub fn potential_difference_uv(v: &PolynomialPotential) -> BiPoly {
    let half = Rational::new(1.into(), 2.into());
    let plus = BiPoly::from_affine(v.poly(), &half, &half);
    let minus = BiPoly::from_affine(v.poly(), &half, &-half.clone());
    &plus - &minus
}

/// Grade-wise residual of the time kernel equation
/// −(2ℏ²/μ) ∂_u ∂_v T + [V(q) − V(q′)] T = 0 on a kernel series.
#[derive(Clone, Debug, PartialEq)]
pub struct TkeSeriesReport {
    /// Residual polynomial per grade restricted to fully resolved orders.
    pub interior: Vec<BiPoly>,
    /// Largest |coefficient| among the discarded frontier orders.
    pub frontier_max: f64,
}

impl TkeSeriesReport {
    pub fn is_exact_zero(&self) -> bool {
        self.interior.iter().all(BiPoly::is_zero)
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.interior
            .iter()
            .flat_map(|b| b.iter().map(|(_, _, c)| rational_to_f64(c).abs()))
            .fold(0.0, f64::max)
    }
}

/// Residual R_g = −(2/μ) ∂_u∂_v T_g + Σ_{d odd} ΔV_d T_{g−(d−1)/2}, where ΔV_d is the
/// v^d part of the potential difference. A monomial of v-degree β in R_g carries
/// ℏ^{2g+1−β}; it is fully resolved when g ≤ N_max and β + 2 ≤ K_max.
pub fn tke_residual_series(k: &KernelSeries, v: &PolynomialPotential) -> TkeSeriesReport {
    let cutoffs = k.cutoffs;
    let delta = potential_difference_uv(v);
    let top_d = delta.max_y_degree().unwrap_or(0);
    let minus_two_over_mu = -int(2) / &k.mu;
    let mut interior = Vec::new();
    let mut frontier_max = 0.0_f64;
    for g in 0..k.grades.len() {
        let mut r = k.grades[g].diff_x().diff_y().scale(&minus_two_over_mu);
        for d in (1..=top_d).step_by(2) {
            let shift = (d - 1) / 2;
            if shift > g {
                break;
            }
            let part = delta.filter_y(|b| b == d);
            if part.is_zero() {
                continue;
            }
            r = &r + &(&part * &k.grades[g - shift]);
        }
        let resolved = g <= cutoffs.n_max;
        let k_max = cutoffs.k_max as usize;
        let inside = r.filter_y(|beta| resolved && beta + 2 <= k_max);
        let outside = &r - &inside;
        for (_, _, c) in outside.iter() {
            frontier_max = frontier_max.max(rational_to_f64(c).abs());
        }
        interior.push(inside);
    }
    TkeSeriesReport {
        interior,
        frontier_max,
    }
}

/// Max finite-difference TKE residual −(ℏ²/2μ)T_qq + (ℏ²/2μ)T_q′q′ + [V(q)−V(q′)]T
/// over interior nodes of a uniformly spaced grid.
pub fn tke_residual_grid(
    grid: &KernelGrid,
    v: &PolynomialPotential,
    mu: f64,
    hbar: f64,
) -> Result<f64> {
    let (nq, nqp) = (grid.q_nodes.len(), grid.qprime_nodes.len());
    if nq < 5 || nqp < 5 {
        return Err(Error::Precondition(
            "TKE grid needs at least 3 interior nodes per axis".into(),
        ));
    }
    let h = grid.q_nodes[1] - grid.q_nodes[0];
    let uniform = |nodes: &[f64]| {
        nodes
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs())
    };
    if h.is_nan() || h <= 0.0 || !uniform(&grid.q_nodes) || !uniform(&grid.qprime_nodes) {
        return Err(Error::Precondition(
            "TKE grid must be uniform with equal spacing on both axes".into(),
        ));
    }
    let c = hbar * hbar / (2.0 * mu);
    let t = &grid.values;
    let mut worst = 0.0_f64;
    for i in 1..nq - 1 {
        for j in 1..nqp - 1 {
            let t_qq = (t[i + 1][j] - 2.0 * t[i][j] + t[i - 1][j]) / (h * h);
            let t_pp = (t[i][j + 1] - 2.0 * t[i][j] + t[i][j - 1]) / (h * h);
            let dv = v.eval_f64(grid.q_nodes[i]) - v.eval_f64(grid.qprime_nodes[j]);
            let res = -c * t_qq + c * t_pp + dv * t[i][j];
            worst = worst.max(res.abs());
        }
    }
    Ok(worst)
}

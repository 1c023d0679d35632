use rayon::prelude::*;

use super::chebyshev::{cheb_points, from_unit, Chebyshev2d};
use super::grid::{GradeTag, KernelGrid, KernelRoute};
use crate::error::{Error, Result};
use crate::series::PolynomialPotential;
use crate::specfun::{gauss_legendre, hyp0f1_unit, GaussRule};

/// Quadrature route for the kernel factors T_{M,n}(u, v), u = q + q′, v = q − q′.
#[derive(Clone, Debug)]
pub struct KernelQuadrature {
    v: Vec<f64>,
    /// (r, coefficients of V^{(2r+1)}) for every nonvanishing odd derivative of order ≥ 3
    odd_derivs: Vec<(usize, Vec<f64>)>,
    mu: f64,
    hbar: f64,
    nodes: usize,
    degree: usize,
}

/// Source of lower-grade kernels inside the recursion; always queried with w ≥ 0.
enum Prior<'a> {
    Direct(&'a (dyn Fn(usize, f64, f64) -> Result<f64> + Sync)),
    Interpolated(&'a [Chebyshev2d]),
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn mapped(rule: &GaussRule, upper: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    // ∫₀^upper f = (upper/2) Σ w f(upper(1+x)/2)
    let half = 0.5 * upper;
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(move |(x, w)| (half * (1.0 + x), half * w))
}

impl KernelQuadrature {
    pub fn new(v: &PolynomialPotential, mu: f64, hbar: f64) -> Result<Self> {
        if !(mu > 0.0 && hbar > 0.0) {
            return Err(Error::Precondition("μ and ℏ must be positive".into()));
        }
        let odd_derivs = (1..=v.max_bracket_order())
            .map(|r| (r, v.derivative(2 * r + 1).to_f64_coeffs()))
            .filter(|(_, c)| !c.is_empty())
            .collect();
        Ok(Self {
            v: v.poly().to_f64_coeffs(),
            odd_derivs,
            mu,
            hbar,
            nodes: 64,
            degree: 24,
        })
    }

    /// Gauss-Legendre points per nesting level.
    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes = nodes.max(2);
        self
    }

    /// Chebyshev degree of the memoized lower-grade kernels.
    pub fn with_degree(mut self, degree: usize) -> Self {
        self.degree = degree.max(2);
        self
    }

    fn kappa(&self) -> f64 {
        self.mu / (2.0 * self.hbar * self.hbar)
    }

    /// T_{M,0}(u, v) = (1/4) ∫₀^u ₀F₁(;1; (μ/2ℏ²) v² [V(u/2) − V(s/2)]) ds
    pub fn t0_uv(&self, u: f64, v: f64) -> Result<f64> {
        if u == 0.0 {
            return Ok(0.0);
        }
        let rule = gauss_legendre(self.nodes);
        let arg = self.kappa() * v * v;
        let vu = horner(&self.v, 0.5 * u);
        let mut total = 0.0;
        for (s, w) in mapped(&rule, u) {
            total += w * hyp0f1_unit(arg * (vu - horner(&self.v, 0.5 * s)))?;
        }
        Ok(0.25 * total)
    }

    pub fn t0(&self, q: f64, qprime: f64) -> Result<f64> {
        self.t0_uv(q + qprime, q - qprime)
    }

    /// T_{M,n}(u, v) = (μ/2ℏ²) Σ_r 1/((2r+1)! 4^r) ∫₀^u ds V^{(2r+1)}(s/2)
    ///                 ∫₀^v dw w^{2r+1} T_{M,n−r}(s, w) G(s, w),
    /// G = ₀F₁(;1; (μ/2ℏ²)(v² − w²)[V(u/2) − V(s/2)]).
    fn tn_core(&self, n: usize, u: f64, v: f64, prior: &Prior<'_>) -> Result<f64> {
        if u == 0.0 || v == 0.0 {
            return Ok(0.0);
        }
        let rule = gauss_legendre(self.nodes);
        let kappa = self.kappa();
        let vu = horner(&self.v, 0.5 * u);
        let mut total = 0.0;
        for (r, deriv) in self.odd_derivs.iter().filter(|(r, _)| *r <= n) {
            let (r, grade) = (*r, n - *r);
            let weight = 1.0 / (factorial(2 * r + 1) * 4f64.powi(r as i32));
            let mut outer = 0.0;
            for (s, ws) in mapped(&rule, u) {
                let dv = vu - horner(&self.v, 0.5 * s);
                let d = horner(deriv, 0.5 * s);
                if d == 0.0 {
                    continue;
                }
                let slice = match prior {
                    Prior::Interpolated(interps) => Some(interps[grade].slice_x(s)),
                    Prior::Direct(_) => None,
                };
                let mut inner = 0.0;
                for (w, ww) in mapped(&rule, v) {
                    let aw = w.abs();
                    let lower = match (prior, &slice) {
                        (Prior::Interpolated(interps), Some(sl)) => {
                            interps[grade].eval_slice(sl, aw)
                        }
                        (Prior::Direct(f), _) => f(grade, s, aw)?,
                        _ => unreachable!(),
                    };
                    let g = hyp0f1_unit(kappa * (v * v - w * w) * dv)?;
                    inner += ww * w.powi(2 * r as i32 + 1) * lower * g;
                }
                outer += ws * d * inner;
            }
            total += weight * outer;
        }
        Ok(kappa * total)
    }

    /// T_{M,n}(q, q′) with lower grades supplied by `prior(grade, s, w)` in (u, v) coordinates.
    pub fn tn(
        &self,
        n: usize,
        q: f64,
        qprime: f64,
        prior: &(dyn Fn(usize, f64, f64) -> Result<f64> + Sync),
    ) -> Result<f64> {
        if n == 0 {
            return self.t0(q, qprime);
        }
        self.tn_core(n, q + qprime, q - qprime, &Prior::Direct(prior))
    }

    fn interpolate(
        &self,
        s_box: (f64, f64),
        w_box: (f64, f64),
        f: impl Fn(f64, f64) -> Result<f64> + Sync,
    ) -> Result<Chebyshev2d> {
        let pts = cheb_points(self.degree);
        let values = pts
            .par_iter()
            .map(|&sx| {
                pts.iter()
                    .map(|&wy| f(from_unit(sx, s_box), from_unit(wy, w_box)))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Chebyshev2d::from_samples(
            s_box,
            w_box,
            self.degree,
            &values,
        ))
    }

    /// Grids of T_{M,0} … T_{M,n_max} on the (q, q′) nodes.
    ///
    /// Lower grades are memoized once on a Chebyshev grid covering every (s, w)
    /// reached from the requested nodes, so each grade costs two nesting levels.
    pub fn grids(
        &self,
        n_max: usize,
        q_nodes: &[f64],
        qprime_nodes: &[f64],
    ) -> Result<Vec<KernelGrid>> {
        let pairs: Vec<(f64, f64)> = q_nodes
            .iter()
            .flat_map(|&q| qprime_nodes.iter().map(move |&qp| (q + qp, q - qp)))
            .collect();
        let u_lo = pairs.iter().map(|p| p.0).fold(0.0, f64::min);
        let u_hi = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
        let v_hi = pairs.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
        let s_box = if u_hi > u_lo {
            (u_lo, u_hi)
        } else {
            (0.0, 1.0)
        };
        let w_box = if v_hi > 0.0 { (0.0, v_hi) } else { (0.0, 1.0) };

        let mut interps: Vec<Chebyshev2d> = Vec::new();
        for g in 0..n_max {
            let built = if g == 0 {
                self.interpolate(s_box, w_box, |s, w| self.t0_uv(s, w))?
            } else {
                let lower = &interps[..];
                self.interpolate(s_box, w_box, |s, w| {
                    self.tn_core(g, s, w, &Prior::Interpolated(lower))
                })?
            };
            interps.push(built);
        }

        (0..=n_max)
            .map(|n| {
                let values = q_nodes
                    .par_iter()
                    .map(|&q| {
                        qprime_nodes
                            .iter()
                            .map(|&qp| {
                                if n == 0 {
                                    self.t0(q, qp)
                                } else {
                                    self.tn_core(n, q + qp, q - qp, &Prior::Interpolated(&interps))
                                }
                            })
                            .collect::<Result<Vec<f64>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(KernelGrid {
                    q_nodes: q_nodes.to_vec(),
                    qprime_nodes: qprime_nodes.to_vec(),
                    values,
                    grade: GradeTag::Single(n),
                    route: KernelRoute::Quadrature,
                })
            })
            .collect()
    }
}

/// (1/4) ∫₀^{q+q′} ₀F₁(;1; (μ/2ℏ²)(q−q′)²[V((q+q′)/2) − V(s/2)]) ds by 64-point Gauss-Legendre.
pub fn kernel_t0_quadrature(
    v: &PolynomialPotential,
    mu: f64,
    hbar: f64,
    q: f64,
    qprime: f64,
) -> Result<f64> {
    KernelQuadrature::new(v, mu, hbar)?.t0(q, qprime)
}

/// One level of the kernel recursion with lower grades from `prior(grade, s, w)`.
pub fn kernel_tn_quadrature(
    v: &PolynomialPotential,
    mu: f64,
    hbar: f64,
    n: usize,
    q: f64,
    qprime: f64,
    prior: &(dyn Fn(usize, f64, f64) -> Result<f64> + Sync),
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("recursion grade must be ≥ 1".into()));
    }
    KernelQuadrature::new(v, mu, hbar)?.tn(n, q, qprime, prior)
}

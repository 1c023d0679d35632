//! Wigner functions of Gaussian states and phase-space averages of arrival-time functions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{PhaseSeries, PolynomialPotential};
use crate::specfun::{dawson, gauss_legendre, principal_value};

/// Gaussian wave packet centred at q0 with mean momentum ℏk0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianState {
    pub q0: f64,
    pub k0: f64,
    pub sigma: f64,
    pub hbar: f64,
    pub mu: f64,
}

impl GaussianState {
    pub fn new(q0: f64, k0: f64, sigma: f64, hbar: f64, mu: f64) -> Result<Self> {
        let s = Self {
            q0,
            k0,
            sigma,
            hbar,
            mu,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.hbar > 0.0 && self.mu > 0.0) {
            return Err(Error::Precondition(
                "σ, ℏ and μ must be strictly positive".into(),
            ));
        }
        if ![self.q0, self.k0].iter().all(|x| x.is_finite()) {
            return Err(Error::Precondition("q0 and k0 must be finite".into()));
        }
        Ok(())
    }

    pub fn p0(&self) -> f64 {
        self.hbar * self.k0
    }

    /// Width s_p of the momentum marginal e^{−(p−p0)²/s_p²}.
    pub fn p_scale(&self) -> f64 {
        self.hbar / (2f64.sqrt() * self.sigma)
    }

    /// Width s_q of the position marginal e^{−(q−q0)²/s_q²}.
    pub fn q_scale(&self) -> f64 {
        2f64.sqrt() * self.sigma
    }
}

/// W(q,p) = (1/πℏ) e^{−(q−q0)²/2σ²} e^{−2σ²(p−ℏk0)²/ℏ²}
pub fn wigner_gaussian(state: &GaussianState, q: f64, p: f64) -> f64 {
    let dq = q - state.q0;
    let dp = p - state.p0();
    let s2 = state.sigma * state.sigma;
    (-(dq * dq) / (2.0 * s2) - 2.0 * s2 * dp * dp / (state.hbar * state.hbar)).exp()
        / (PI * state.hbar)
}

/// Normalized Gaussian ψ(x) = (2πσ²)^{−1/4} e^{−(x−q0)²/4σ²} e^{ik0x}.
pub fn gaussian_wavefunction(state: &GaussianState, x: f64) -> Complex64 {
    let s2 = state.sigma * state.sigma;
    let amp = (2.0 * PI * s2).powf(-0.25) * (-(x - state.q0).powi(2) / (4.0 * s2)).exp();
    Complex64::from_polar(amp, state.k0 * x)
}

/// Wigner function sampled from a wavefunction on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub q_nodes: Vec<f64>,
    pub p_nodes: Vec<f64>,
    /// values[i][j] = W(q_i, p_j)
    pub values: Vec<Vec<f64>>,
    /// Edge amplitude max(|ψ₀|, |ψ_{N−1}|)/max|ψ|; large values mean the grid truncates ψ.
    pub est_error: f64,
}

/// (1/πℏ) ∫ ψ*(q+y) ψ(q−y) e^{2ipy/ℏ} dy at every grid node q_i = x_min + i·h,
/// by the trapezoid rule over y = j·h (both q ± y land on grid nodes).
pub fn wigner_from_wavefunction(
    psi: &[Complex64],
    x_min: f64,
    h: f64,
    hbar: f64,
    p_nodes: &[f64],
) -> Result<WignerGrid> {
    if psi.len() < 3 || h.is_nan() || h <= 0.0 || hbar.is_nan() || hbar <= 0.0 {
        return Err(Error::Precondition(
            "need at least 3 samples, positive spacing and positive ℏ".into(),
        ));
    }
    let n = psi.len();
    let peak = psi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::Precondition(
            "wavefunction vanishes on the grid".into(),
        ));
    }
    let est_error = psi[0].norm().max(psi[n - 1].norm()) / peak;
    let values = (0..n)
        .into_par_iter()
        .map(|i| {
            let reach = i.min(n - 1 - i);
            p_nodes
                .iter()
                .map(|&p| {
                    // j and −j give complex conjugates, so only the real part survives
                    let mut sum = (psi[i].conj() * psi[i]).re;
                    for j in 1..=reach {
                        let y = j as f64 * h;
                        let phase = Complex64::from_polar(1.0, 2.0 * p * y / hbar);
                        sum += 2.0 * (psi[i + j].conj() * psi[i - j] * phase).re;
                    }
                    sum * h / (PI * hbar)
                })
                .collect()
        })
        .collect();
    Ok(WignerGrid {
        q_nodes: (0..n).map(|i| x_min + i as f64 * h).collect(),
        p_nodes: p_nodes.to_vec(),
        values,
        est_error,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectationMethod {
    ClosedForm,
    PvQuadrature,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationResult {
    pub value: f64,
    pub method: ExpectationMethod,
    pub est_error: f64,
    /// Wigner mass left out because the arrival-time function is undefined there.
    #[serde(default)]
    pub excluded_mass: f64,
}

/// Tensor quadrature over phase space: Gauss-Legendre in q, principal value in p.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseQuadrature {
    pub q_range: (f64, f64),
    pub p_range: (f64, f64),
    pub nodes: usize,
    pub q_panels: usize,
    pub p_panels: usize,
}

impl PhaseQuadrature {
    /// Windows of ±9 marginal widths around the packet centre.
    pub fn for_state(state: &GaussianState) -> Self {
        let (sq, sp) = (state.q_scale(), state.p_scale());
        Self {
            q_range: (state.q0 - 9.0 * sq, state.q0 + 9.0 * sq),
            p_range: (state.p0() - 9.0 * sp, state.p0() + 9.0 * sp),
            nodes: 32,
            q_panels: 6,
            p_panels: 8,
        }
    }
}

/// ⟨T⟩ = ∫∫ T(q,p) W(q,p) dq dp with the p-integral as a principal value about p = 0.
///
/// `t` may return `None` where the arrival-time function is undefined; such points are
/// dropped and their Wigner mass is reported in `excluded_mass`.
pub fn toa_expectation<T, W>(t: T, w: W, quad: &PhaseQuadrature) -> Result<ExpectationResult>
where
    T: Fn(f64, f64) -> Option<f64> + Sync,
    W: Fn(f64, f64) -> f64 + Sync,
{
    if quad.nodes < 2 || quad.q_panels == 0 || quad.p_panels == 0 {
        return Err(Error::Precondition(
            "quadrature needs ≥ 2 nodes and ≥ 1 panel".into(),
        ));
    }
    let rule = gauss_legendre(quad.nodes);
    let (qa, qb) = quad.q_range;
    let width = (qb - qa) / quad.q_panels as f64;
    let q_points: Vec<(f64, f64)> = (0..quad.q_panels)
        .flat_map(|k| {
            let mid = qa + (k as f64 + 0.5) * width;
            let rule = rule.clone();
            rule.nodes
                .iter()
                .zip(rule.weights.iter())
                .map(|(x, wt)| (mid + 0.5 * width * x, 0.5 * width * wt))
                .collect::<Vec<_>>()
        })
        .collect();
    let (pa, pb) = quad.p_range;
    let pole_inside = pa < 0.0 && 0.0 < pb;

    let rows: Vec<(f64, f64, f64)> = q_points
        .par_iter()
        .map(|&(q, wq)| {
            let integrand = |p: f64| t(q, p).map_or(0.0, |v| v * w(q, p));
            let excluded = |p: f64| if t(q, p).is_none() { w(q, p) } else { 0.0 };
            let (value, err) = if pole_inside {
                let est = principal_value(integrand, 0.0, pa, pb, quad.nodes, quad.p_panels)?;
                (est.value, est.est_error)
            } else {
                (
                    crate::specfun::integrate_composite(
                        integrand,
                        pa,
                        pb,
                        quad.nodes,
                        quad.p_panels,
                    )?,
                    0.0,
                )
            };
            let mass =
                crate::specfun::integrate_composite(excluded, pa, pb, quad.nodes, quad.p_panels)?;
            Ok((wq * value, wq * err, wq * mass))
        })
        .collect::<Result<Vec<_>>>()?;

    // fixed-order reduction keeps results bit-reproducible across thread counts
    let value: f64 = rows.iter().map(|r| r.0).sum();
    let est_error: f64 = rows.iter().map(|r| r.1.abs()).sum();
    let excluded_mass: f64 = rows.iter().map(|r| r.2).sum();
    if !value.is_finite() {
        return Err(Error::Convergence {
            what: "phase-space principal value".into(),
            terms: quad.nodes,
        });
    }
    Ok(ExpectationResult {
        value,
        method: ExpectationMethod::PvQuadrature,
        est_error,
        excluded_mass,
    })
}

/// Free-particle average split as 𝒯_cl · Q.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeToaClosedForm {
    pub value: f64,
    /// −μ q0 / p0
    pub classical: f64,
    /// √(2π) k0σ e^{−2k0²σ²} erfi(√2 σ k0); `None` when k0 = 0.
    pub quantum_factor: Option<f64>,
}

/// Q(x) with x = √2 k0 σ, evaluated as 2x·D(x) to avoid overflow in e^{x²}.
pub fn quantum_factor(k0: f64, sigma: f64) -> f64 {
    let x = 2f64.sqrt() * k0 * sigma;
    2.0 * x * dawson(x)
}

/// −(μ q0/p0) √(2π) k0 σ e^{−2σ²k0²} erfi(√2 σ k0), p0 = ℏk0.
pub fn free_toa_closed_form(state: &GaussianState) -> Result<FreeToaClosedForm> {
    state.validate()?;
    if state.k0 == 0.0 {
        return Ok(FreeToaClosedForm {
            value: 0.0,
            classical: f64::NAN,
            quantum_factor: None,
        });
    }
    let classical = -state.mu * state.q0 / state.p0();
    let q = quantum_factor(state.k0, state.sigma);
    Ok(FreeToaClosedForm {
        value: classical * q,
        classical,
        quantum_factor: Some(q),
    })
}

/// Both routes for the free arrival time −μq/p.
pub fn free_toa_pv(state: &GaussianState) -> Result<ExpectationResult> {
    state.validate()?;
    let mu = state.mu;
    toa_expectation(
        |q, p| Some(-mu * q / p),
        |q, p| wigner_gaussian(state, q, p),
        &PhaseQuadrature::for_state(state),
    )
}

/// True iff |V(q) − V(q′)| < p²/2μ along [0, q], sampled at Chebyshev points.
pub fn in_series_region(v: &PolynomialPotential, mu: f64, q: f64, p: f64) -> bool {
    let bound = p * p / (2.0 * mu);
    let vq = v.eval_f64(q);
    let samples = 10 * (v.degree() + 1);
    let half = 0.5 * q;
    (0..samples)
        .map(|j| half + half * (PI * (j as f64 + 0.5) / samples as f64).cos())
        .chain([0.0])
        .all(|x| (vq - v.eval_f64(x)).abs() < bound)
}

/// ⟨𝒯_M⟩ for an interacting series, restricted to the region where the series converges.
pub fn series_expectation(
    series: &PhaseSeries,
    v: &PolynomialPotential,
    state: &GaussianState,
) -> Result<ExpectationResult> {
    state.validate()?;
    let (mu, hbar) = (state.mu, state.hbar);
    toa_expectation(
        |q, p| {
            if p != 0.0 && in_series_region(v, mu, q, p) {
                series.eval(q, p, hbar).ok()
            } else {
                None
            }
        },
        |q, p| wigner_gaussian(state, q, p),
        &PhaseQuadrature::for_state(state),
    )
}

/// JSON record {state, method, value, est_error}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationRecord {
    pub state: GaussianState,
    pub method: ExpectationMethod,
    pub value: f64,
    pub est_error: f64,
}

impl ExpectationRecord {
    pub fn new(state: GaussianState, result: &ExpectationResult) -> Self {
        Self {
            state,
            method: result.method,
            value: result.value,
            est_error: result.est_error,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::integrate_composite;

    fn state(q0: f64, k0: f64, sigma: f64) -> GaussianState {
        GaussianState::new(q0, k0, sigma, 1.0, 1.0).unwrap()
    }

    #[test]
    fn peak_and_symmetry() {
        let s = GaussianState::new(0.3, 2.0, 0.7, 0.5, 1.0).unwrap();
        assert!((wigner_gaussian(&s, 0.3, 1.0) - 1.0 / (PI * 0.5)).abs() < 1e-15);
        assert_eq!(
            wigner_gaussian(&s, 0.3 + 0.4, 0.2),
            wigner_gaussian(&s, 0.3 - 0.4, 0.2)
        );
        assert!(GaussianState::new(0.0, 1.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn gaussian_wigner_normalized() {
        let s = GaussianState::new(-1.0, 1.5, 0.8, 0.7, 2.0).unwrap();
        let quad = PhaseQuadrature::for_state(&s);
        let total = integrate_composite(
            |q| {
                integrate_composite(
                    |p| wigner_gaussian(&s, q, p),
                    quad.p_range.0,
                    quad.p_range.1,
                    32,
                    4,
                )
                .unwrap()
            },
            quad.q_range.0,
            quad.q_range.1,
            32,
            4,
        )
        .unwrap();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn wigner_from_gaussian_wavefunction() {
        let s = GaussianState::new(0.5, 2.0, 0.6, 1.0, 1.0).unwrap();
        let h = 0.02;
        let x_min = -6.0;
        let psi: Vec<Complex64> = (0..=700)
            .map(|i| gaussian_wavefunction(&s, x_min + i as f64 * h))
            .collect();
        let ps = [0.5, 1.3, 2.0, 2.9];
        let grid = wigner_from_wavefunction(&psi, x_min, h, 1.0, &ps).unwrap();
        assert!(grid.est_error < 1e-12);
        for i in [300, 325, 350, 380] {
            for (j, &p) in ps.iter().enumerate() {
                let exact = wigner_gaussian(&s, grid.q_nodes[i], p);
                assert!(
                    (grid.values[i][j] - exact).abs() < 1e-8,
                    "q = {}, p = {p}",
                    grid.q_nodes[i]
                );
            }
        }
    }

    #[test]
    fn real_even_wavefunction_gives_p_even_wigner() {
        let h = 0.05;
        let psi: Vec<Complex64> = (0..=200)
            .map(|i| {
                let x = -5.0 + i as f64 * h;
                Complex64::new((-x * x).exp() * (1.0 + x * x), 0.0)
            })
            .collect();
        let grid = wigner_from_wavefunction(&psi, -5.0, h, 1.0, &[-1.3, 1.3]).unwrap();
        for row in &grid.values {
            assert!((row[0] - row[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_form_limits() {
        assert_eq!(
            free_toa_closed_form(&state(0.0, 3.0, 1.0)).unwrap().value,
            0.0
        );
        let zero = free_toa_closed_form(&state(-3.0, 0.0, 1.0)).unwrap();
        assert_eq!(zero.value, 0.0);
        assert!(zero.quantum_factor.is_none());
        // large k0σ: Q → 1 like 1 + 1/(2x²)
        let big = free_toa_closed_form(&state(-10.0, 50.0, 1.0)).unwrap();
        let x2 = 2.0 * 2500.0;
        assert!((big.quantum_factor.unwrap() - (1.0 + 1.0 / (2.0 * x2))).abs() < 1e-7);
        assert!((big.value - big.classical).abs() < 1e-3 * big.classical);
    }

    #[test]
    fn pv_route_matches_closed_form() {
        let s = state(-10.0, 5.0, 1.0);
        let pv = free_toa_pv(&s).unwrap();
        let cf = free_toa_closed_form(&s).unwrap();
        assert!(
            (pv.value - cf.value).abs() < 1e-6 * cf.value.abs(),
            "{} vs {}",
            pv.value,
            cf.value
        );
    }

    #[test]
    fn parity_and_normalization_of_expectation() {
        let s = state(-2.0, 0.0, 1.0);
        let quad = PhaseQuadrature::for_state(&s);
        let r =
            toa_expectation(|q, p| Some(-q / p), |q, p| wigner_gaussian(&s, q, p), &quad).unwrap();
        assert!(r.value.abs() < 1e-10);
        let s = state(-2.0, 1.5, 0.8);
        let quad = PhaseQuadrature::for_state(&s);
        let r = toa_expectation(|_, _| Some(1.0), |q, p| wigner_gaussian(&s, q, p), &quad).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }
}

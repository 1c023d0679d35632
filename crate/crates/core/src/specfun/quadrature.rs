use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss rule.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Integration rule selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum QuadratureSpec {
    /// ∫_a^b f, split into `panels` equal panels of `node_count` points each.
    GaussLegendre {
        node_count: usize,
        a: f64,
        b: f64,
        #[serde(default = "one")]
        panels: usize,
    },
    /// ∫ e^{−((x−center)/scale)²} f(x) dx over the real line; the weight is implicit.
    GaussHermite {
        node_count: usize,
        center: f64,
        scale: f64,
    },
    /// Principal value of ∫_a^b f with a simple pole at `pole`.
    PvSymmetric {
        node_count: usize,
        pole: f64,
        a: f64,
        b: f64,
        #[serde(default = "one")]
        panels: usize,
    },
}

fn one() -> usize {
    1
}

impl QuadratureSpec {
    pub fn node_count(&self) -> usize {
        match self {
            Self::GaussLegendre { node_count, .. }
            | Self::GaussHermite { node_count, .. }
            | Self::PvSymmetric { node_count, .. } => *node_count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count() < 2 {
            return Err(Error::Precondition("node_count must be ≥ 2".into()));
        }
        match *self {
            Self::GaussLegendre { panels, .. } | Self::PvSymmetric { panels, .. }
                if panels == 0 =>
            {
                Err(Error::Precondition("panels must be ≥ 1".into()))
            }
            Self::GaussHermite { scale, .. } if scale.is_nan() || scale <= 0.0 => Err(
                Error::Precondition("Gauss-Hermite scale must be positive".into()),
            ),
            Self::PvSymmetric { pole, a, b, .. } if !(a < pole && pole < b) => Err(
                Error::Precondition(format!("pole {pole} not inside ({a}, {b})")),
            ),
            _ => Ok(()),
        }
    }
}

type RuleCache = Mutex<HashMap<usize, Arc<GaussRule>>>;

fn cached(
    cache: &'static OnceLock<RuleCache>,
    n: usize,
    build: fn(usize) -> GaussRule,
) -> Arc<GaussRule> {
    let map = cache.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = map.lock().expect("rule cache poisoned").get(&n) {
        return Arc::clone(rule);
    }
    let rule = Arc::new(build(n));
    map.lock()
        .expect("rule cache poisoned")
        .entry(n)
        .or_insert(rule)
        .clone()
}

/// Gauss-Legendre rule on [−1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    cached(&CACHE, n, build_legendre)
}

/// Gauss-Hermite rule for the weight e^{−x²}, nodes ascending.
pub fn gauss_hermite(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    cached(&CACHE, n, build_hermite)
}

fn build_legendre(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

// Newton iteration on orthonormal Hermite functions.
fn build_hermite(n: usize) -> GaussRule {
    let pim4 = PI.powf(-0.25);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0_f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[n - 1],
            3 => 1.91 * z - 0.91 * nodes[n - 2],
            _ => 2.0 * z - nodes[n - i + 1],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        // nodes[n-1-i] holds the i-th largest root
        nodes[n - 1 - i] = z;
        nodes[i] = -z;
        let w = 2.0 / (pp * pp);
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

fn checked(x: f64, fx: f64) -> Result<f64> {
    if fx.is_nan() {
        Err(Error::Evaluation(format!("integrand is NaN at x = {x}")))
    } else {
        Ok(fx)
    }
}

/// ∫_a^b f by an n-point Gauss-Legendre rule on each of `panels` equal panels.
pub fn integrate_composite(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    n: usize,
    panels: usize,
) -> Result<f64> {
    let rule = gauss_legendre(n);
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = a + (k as f64 + 0.5) * width;
        let mut panel = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let t = mid + half * x;
            panel += w * checked(t, f(t))?;
        }
        total += half * panel;
    }
    Ok(total)
}

/// Principal-value estimate with an error bound from the extrapolation table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PvEstimate {
    pub value: f64,
    pub est_error: f64,
}

const PV_LEVELS: usize = 7;

/// PV ∫_a^b f(x) dx with a simple pole at `pole`.
///
/// Symmetric pairs f(c+t) + f(c−t) are integrated over [ε, δ], with δ the
/// distance to the nearer endpoint; the ε → 0 limit is taken by Richardson
/// extrapolation on ε = δ/8, δ/16, …. The paired integrand is even in t, so the
/// excluded piece ∫₀^ε has only odd powers of ε. The one-sided remainder is regular.
pub fn principal_value(
    f: impl Fn(f64) -> f64,
    pole: f64,
    a: f64,
    b: f64,
    n: usize,
    panels: usize,
) -> Result<PvEstimate> {
    if !(a < pole && pole < b) {
        return Err(Error::Precondition(format!(
            "pole {pole} not inside ({a}, {b})"
        )));
    }
    let delta = (pole - a).min(b - pole);
    let paired = |t: f64| f(pole + t) + f(pole - t);

    let mut table: Vec<Vec<f64>> = Vec::with_capacity(PV_LEVELS);
    let mut eps = delta / 8.0;
    for level in 0..PV_LEVELS {
        let mut row = Vec::with_capacity(level + 1);
        row.push(integrate_composite(paired, eps, delta, n, panels)?);
        // I(ε) = PV − Σ_j c_j ε^{2j−1}: eliminate ε, ε³, ε⁵, … in turn
        for j in 1..=level {
            let factor = 2f64.powi(2 * j as i32 - 1);
            let prev = &table[level - 1];
            row.push((factor * row[j - 1] - prev[j - 1]) / (factor - 1.0));
        }
        table.push(row);
        eps *= 0.5;
    }
    let last = &table[PV_LEVELS - 1];
    let prev = &table[PV_LEVELS - 2];
    let value = last[PV_LEVELS - 1];
    let est_error = (value - prev[PV_LEVELS - 2]).abs();

    let remainder = if pole - a > b - pole {
        integrate_composite(&f, a, pole - delta, n, panels)?
    } else if b - pole > pole - a {
        integrate_composite(&f, pole + delta, b, n, panels)?
    } else {
        0.0
    };
    if !value.is_finite() {
        return Err(Error::Convergence {
            what: "principal-value extrapolation".into(),
            terms: PV_LEVELS,
        });
    }
    Ok(PvEstimate {
        value: value + remainder,
        est_error,
    })
}

/// Applies the rule in `spec` to f.
pub fn integrate(f: impl Fn(f64) -> f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    match *spec {
        QuadratureSpec::GaussLegendre {
            node_count,
            a,
            b,
            panels,
        } => integrate_composite(f, a, b, node_count, panels),
        QuadratureSpec::GaussHermite {
            node_count,
            center,
            scale,
        } => {
            let rule = gauss_hermite(node_count);
            let mut total = 0.0;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let t = center + scale * x;
                total += w * checked(t, f(t))?;
            }
            Ok(scale * total)
        }
        QuadratureSpec::PvSymmetric {
            node_count,
            pole,
            a,
            b,
            panels,
        } => principal_value(f, pole, a, b, node_count, panels).map(|e| e.value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::dawson;

    #[test]
    fn legendre_polynomial_exactness() {
        let spec = QuadratureSpec::GaussLegendre {
            node_count: 8,
            a: -1.0,
            b: 1.0,
            panels: 1,
        };
        let v = integrate(|x| x * x, &spec).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-14);
        // degree 2n − 1 = 15
        let v = integrate(|x| x.powi(14) + x.powi(15), &spec).unwrap();
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn odd_function_on_symmetric_domain() {
        let spec = QuadratureSpec::GaussLegendre {
            node_count: 16,
            a: -3.0,
            b: 3.0,
            panels: 1,
        };
        assert!(
            integrate(|x| x.powi(3) * (-x * x).exp(), &spec)
                .unwrap()
                .abs()
                < 1e-14
        );
    }

    #[test]
    fn legendre_weights_sum_to_two() {
        for n in [2, 7, 64, 128] {
            let rule = gauss_legendre(n);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}");
            assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn hermite_moments() {
        let spec = QuadratureSpec::GaussHermite {
            node_count: 20,
            center: 0.0,
            scale: 1.0,
        };
        assert!((integrate(|_| 1.0, &spec).unwrap() - PI.sqrt()).abs() < 1e-13);
        assert!((integrate(|x| x * x, &spec).unwrap() - PI.sqrt() / 2.0).abs() < 1e-13);
        let spec = QuadratureSpec::GaussHermite {
            node_count: 40,
            center: 1.5,
            scale: 0.5,
        };
        assert!((integrate(|_| 1.0, &spec).unwrap() - 0.5 * PI.sqrt()).abs() < 1e-13);
        let rule = gauss_hermite(41);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn nan_integrand_is_an_evaluation_error() {
        let spec = QuadratureSpec::GaussLegendre {
            node_count: 4,
            a: 0.0,
            b: 1.0,
            panels: 1,
        };
        assert!(matches!(
            integrate(|_| f64::NAN, &spec),
            Err(Error::Evaluation(_))
        ));
    }

    #[test]
    fn pv_of_shifted_gaussian_over_p() {
        // PV ∫ e^{−(p−1)²}/p dp = 2√π D(1)
        let est = principal_value(
            |p| (-(p - 1.0) * (p - 1.0)).exp() / p,
            0.0,
            -8.0,
            10.0,
            32,
            8,
        )
        .unwrap();
        let exact = 2.0 * PI.sqrt() * dawson(1.0);
        assert!(
            (est.value - exact).abs() < 1e-8 * exact.abs(),
            "{} vs {exact}",
            est.value
        );
        assert!(est.est_error < 1e-8, "{est:?}");
    }

    #[test]
    fn pv_of_even_pair_drops_pole() {
        // f(x) = x/(x·(1+x²)) has a removable singularity: PV equals the plain integral
        let est = principal_value(|x| 1.0 / (1.0 + x * x), 0.0, -1.0, 2.0, 32, 4).unwrap();
        let exact = 2f64.atan() + 1f64.atan();
        assert!((est.value - exact).abs() < 1e-12);
    }
}

use std::path::{Path, PathBuf};

use num_traits::Signed;
use serde::Deserialize;
use toa_core::kernel::KernelRoute;
use toa_core::series::{parse_rational, Cutoffs, PolynomialPotential, Rational};

use crate::error::CliError;

pub const DEFAULT_QUARTIC_K_MAX: u32 = 41;

/// A number given either as a JSON number or as an exact string such as "3/2".
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Exact {
    Number(f64),
    Text(String),
}

impl Exact {
    pub fn to_rational(&self, field: &str) -> Result<Rational, CliError> {
        let text = match self {
            Exact::Number(x) if x.is_finite() => x.to_string(),
            Exact::Number(x) => return Err(CliError::config(field, format!("{x} is not finite"))),
            Exact::Text(s) => s.trim().to_string(),
        };
        parse_exact(&text, field)
    }
}

/// Integers, fractions "a/b" and plain decimals "−1.25" as exact rationals.
pub fn parse_exact(text: &str, field: &str) -> Result<Rational, CliError> {
    if let Some((int_part, frac_part)) = text.split_once('.') {
        let negative = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(CliError::config(
                field,
                format!("`{text}` is not a decimal number"),
            ));
        }
        let numer: Rational = parse_rational(&digits, field)?;
        let denom = Rational::from_integer(num_bigint_pow10(frac_part.len()));
        let value = numer / denom;
        return Ok(if negative { -value } else { value });
    }
    Ok(parse_rational(text, field)?)
}

fn num_bigint_pow10(k: usize) -> num_bigint::BigInt {
    num_bigint::BigInt::from(10).pow(k as u32)
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Coefficients a₀..a_d of V(q) as rational strings.
    pub potential: Vec<String>,
    #[serde(default = "one")]
    pub mu: Exact,
    #[serde(default = "unit")]
    pub hbar: f64,
    pub n_max: Option<usize>,
    pub k_max: Option<u32>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub verify: Option<VerifyConfig>,
    pub expectation: Option<ExpectationConfig>,
    pub quartic: Option<QuarticConfig>,
    pub kernel: Option<KernelConfig>,
}

fn one() -> Exact {
    Exact::Number(1.0)
}

fn unit() -> f64 {
    1.0
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Test hook: perturb one coefficient of the built series before checking it.
    #[serde(default)]
    pub inject_corruption: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub q0: f64,
    pub k0: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectationConfig {
    pub states: Vec<StateSpec>,
    #[serde(default = "expectation_tol")]
    pub tolerance: f64,
}

fn expectation_tol() -> f64 {
    1e-6
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuarticConfig {
    /// Explicit (q, p) points.
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
    /// Cartesian grid q × p, appended after `points`.
    #[serde(default)]
    pub q: Vec<f64>,
    #[serde(default)]
    pub p: Vec<f64>,
}

impl QuarticConfig {
    pub fn all_points(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self.points.iter().map(|[q, p]| (*q, *p)).collect();
        for &q in &self.q {
            for &p in &self.p {
                out.push((q, p));
            }
        }
        out
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub q_nodes: Vec<f64>,
    pub qprime_nodes: Option<Vec<f64>>,
    #[serde(default = "both_routes")]
    pub routes: Vec<KernelRoute>,
    pub n_max: Option<usize>,
    pub nodes: Option<usize>,
    pub degree: Option<usize>,
}

fn both_routes() -> Vec<KernelRoute> {
    vec![KernelRoute::Series, KernelRoute::Quadrature]
}

/// Validated inputs shared by every command.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub potential: PolynomialPotential,
    pub mu: Rational,
    pub mu_f64: f64,
    pub hbar: f64,
    pub cutoffs: Cutoffs,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::config("config", format!("cannot read {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::config("config", e.to_string()))
    }

    pub fn prepare(&self, default_k_max: u32) -> Result<Prepared, CliError> {
        let potential = PolynomialPotential::parse(&self.potential)?;
        let mu = self.mu.to_rational("mu")?;
        if !mu.is_positive() {
            return Err(CliError::config("mu", "must be positive"));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(CliError::config("hbar", "must be positive and finite"));
        }
        let k_max = self.k_max.unwrap_or(default_k_max);
        if k_max < 1 {
            return Err(CliError::config("k_max", "must be ≥ 1"));
        }
        let cutoffs = Cutoffs::new(self.n_max.unwrap_or(Cutoffs::default().n_max), k_max);
        Ok(Prepared {
            mu_f64: toa_core_f64(&mu),
            potential,
            mu,
            hbar: self.hbar,
            cutoffs,
        })
    }
}

fn toa_core_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use toa_core::series::rat;

    #[test]
    fn exact_parsing() {
        assert_eq!(parse_exact("3/2", "x").unwrap(), rat(3, 2));
        assert_eq!(parse_exact("-1.25", "x").unwrap(), rat(-5, 4));
        assert_eq!(parse_exact("0.1", "x").unwrap(), rat(1, 10));
        assert_eq!(Exact::Number(0.5).to_rational("x").unwrap(), rat(1, 2));
        assert!(parse_exact("1.2.3", "x").is_err());
        assert!(parse_exact("abc", "x").is_err());
    }
}

use std::f64::consts::PI;

/// Crossover between the Maclaurin series and the asymptotic Dawson expansion.
const SERIES_LIMIT: f64 = 6.5;

/// Imaginary error function erfi(x) = (2/√π) ∫₀ˣ e^{t²} dt.
pub fn erfi(x: f64) -> f64 {
    if x < 0.0 {
        return -erfi(-x);
    }
    if x < SERIES_LIMIT {
        erfi_series(x)
    } else {
        2.0 / PI.sqrt() * (x * x).exp() * dawson_asymptotic(x)
    }
}

/// Dawson function D(x) = e^{−x²} ∫₀ˣ e^{t²} dt = (√π/2) e^{−x²} erfi(x).
pub fn dawson(x: f64) -> f64 {
    if x < 0.0 {
        return -dawson(-x);
    }
    if x < SERIES_LIMIT {
        0.5 * PI.sqrt() * (-x * x).exp() * erfi_series(x)
    } else {
        dawson_asymptotic(x)
    }
}

// (2/√π) Σ x^{2n+1} / (n! (2n+1)); all terms positive, so no cancellation.
fn erfi_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut power = x;
    let mut sum = x;
    for n in 1..400 {
        let nf = n as f64;
        power *= x2 / nf;
        let term = power / (2.0 * nf + 1.0);
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    2.0 / PI.sqrt() * sum
}

// D(x) ~ (1/2x) Σ (2k−1)!! / (2x²)^k, summed to the smallest term.
fn dawson_asymptotic(x: f64) -> f64 {
    let inv = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let next = term * (2.0 * k as f64 - 1.0) * inv;
        if next >= term {
            break;
        }
        term = next;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum / (2.0 * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_parity() {
        assert_eq!(erfi(0.0), 0.0);
        for x in [0.5, 2.0, 5.0, 8.0] {
            assert_eq!(erfi(-x), -erfi(x));
            assert_eq!(dawson(-x), -dawson(x));
        }
    }

    #[test]
    fn reference_values() {
        // erfi(1), D(1), D(10) from high-precision tables
        assert!((erfi(1.0) - 1.650_425_758_797_542_8).abs() < 1e-14);
        assert!((dawson(1.0) - 0.538_079_506_912_768_4).abs() < 1e-15);
        assert!((dawson(10.0) - 0.050_253_847_187_598_8).abs() < 1e-15);
    }

    #[test]
    fn branches_agree_at_crossover() {
        let x = SERIES_LIMIT;
        let series = 0.5 * PI.sqrt() * (-x * x).exp() * erfi_series(x);
        let asym = dawson_asymptotic(x);
        assert!((series - asym).abs() < 1e-14 * asym);
    }
}

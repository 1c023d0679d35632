//! Fixed output formatting shared by the CSV and JSON writers.

/// 17 significant digits in scientific notation; round-trips every f64.
pub fn float17(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, -2.0 / 3.0, 1e-300, 6.02e23] {
            assert_eq!(float17(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(float17(2.0), "2.0000000000000000e0");
    }
}

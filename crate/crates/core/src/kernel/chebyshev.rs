use std::f64::consts::PI;

/// Tensor Chebyshev interpolant on a rectangle [x0,x1] × [y0,y1].
#[derive(Clone, Debug)]
pub struct Chebyshev2d {
    x: (f64, f64),
    y: (f64, f64),
    /// coeffs[i][j] multiplies T_i(x̂) T_j(ŷ)
    coeffs: Vec<Vec<f64>>,
}

/// First-kind Chebyshev points on [−1, 1].
pub(crate) fn cheb_points(degree: usize) -> Vec<f64> {
    let n = degree + 1;
    (0..n)
        .map(|k| (PI * (k as f64 + 0.5) / n as f64).cos())
        .collect()
}

fn to_unit(t: f64, (a, b): (f64, f64)) -> f64 {
    (2.0 * t - a - b) / (b - a)
}

pub(crate) fn from_unit(s: f64, (a, b): (f64, f64)) -> f64 {
    0.5 * (a + b) + 0.5 * (b - a) * s
}

fn clenshaw(coeffs: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + coeffs[0]
}

impl Chebyshev2d {
    /// Builds the interpolant from samples `values[k][l]` = f(x_k, y_l) at the
    /// mapped Chebyshev points of the given degree.
    pub fn from_samples(x: (f64, f64), y: (f64, f64), degree: usize, values: &[Vec<f64>]) -> Self {
        let n = degree + 1;
        let pts = cheb_points(degree);
        // T_i(x_k) = cos(i θ_k)
        let basis: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| (i as f64 * PI * (k as f64 + 0.5) / n as f64).cos())
                    .collect()
            })
            .collect();
        debug_assert_eq!(pts.len(), n);
        let mut partial = vec![vec![0.0; n]; n];
        for i in 0..n {
            for l in 0..n {
                partial[i][l] = (0..n).map(|k| basis[i][k] * values[k][l]).sum();
            }
        }
        let mut coeffs = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|l| basis[j][l] * partial[i][l]).sum();
                let wi = if i == 0 { 1.0 } else { 2.0 };
                let wj = if j == 0 { 1.0 } else { 2.0 };
                coeffs[i][j] = wi * wj * s / (n * n) as f64;
            }
        }
        Self { x, y, coeffs }
    }

    /// Samples `f` on the Chebyshev grid and interpolates.
    pub fn build(x: (f64, f64), y: (f64, f64), degree: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let pts = cheb_points(degree);
        let values: Vec<Vec<f64>> = pts
            .iter()
            .map(|&sx| {
                pts.iter()
                    .map(|&sy| f(from_unit(sx, x), from_unit(sy, y)))
                    .collect()
            })
            .collect();
        Self::from_samples(x, y, degree, &values)
    }

    /// Coefficients in y of the slice at fixed x.
    pub fn slice_x(&self, x: f64) -> Vec<f64> {
        let xs = to_unit(x, self.x);
        let n = self.coeffs.len();
        (0..n)
            .map(|j| {
                let column: Vec<f64> = self.coeffs.iter().map(|row| row[j]).collect();
                clenshaw(&column, xs)
            })
            .collect()
    }

    pub fn eval_slice(&self, slice: &[f64], y: f64) -> f64 {
        clenshaw(slice, to_unit(y, self.y))
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_slice(&self.slice_x(x), y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_function() {
        let f = |x: f64, y: f64| (x * y).exp() + x.powi(3) - y * y;
        let c = Chebyshev2d::build((-1.0, 2.0), (0.0, 1.5), 24, f);
        for &(x, y) in &[(0.3, 0.7), (-0.9, 1.4), (1.9, 0.01)] {
            assert!((c.eval(x, y) - f(x, y)).abs() < 1e-12);
        }
    }
}

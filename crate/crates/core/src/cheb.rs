//! Chebyshev series on an interval `[lo, hi]`.
//!
//! Coefficients multiply `T_k(s)` with `s = (2x - lo - hi) / (hi - lo)`.
//! Evaluation uses the Clenshaw recurrence and differentiation and
//! integration act on the coefficient vector directly.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct ChebSeries {
    lo: f64,
    hi: f64,
    coeffs: Vec<f64>,
}

impl ChebSeries {
    pub fn new(lo: f64, hi: f64, coeffs: Vec<f64>) -> Self {
        assert!(hi > lo, "empty Chebyshev interval [{lo}, {hi}]");
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        ChebSeries { lo, hi, coeffs }
    }

    pub fn zero(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, vec![0.0])
    }

    pub fn constant(lo: f64, hi: f64, c: f64) -> Self {
        Self::new(lo, hi, vec![c])
    }

    /// `c0 + c1 * x` expressed on `[lo, hi]`.
    pub fn affine(lo: f64, hi: f64, c0: f64, c1: f64) -> Self {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        Self::new(lo, hi, vec![c0 + c1 * mid, c1 * half])
    }

    /// Interpolates `f` at the `degree + 1` Chebyshev–Gauss points.
    pub fn fit<F: FnMut(f64) -> f64>(lo: f64, hi: f64, degree: usize, mut f: F) -> Self {
        let n = degree + 1;
        let theta: Vec<f64> = (0..n).map(|j| PI * (j as f64 + 0.5) / n as f64).collect();
        let vals: Vec<f64> = theta
            .iter()
            .map(|t| f(from_unit(lo, hi, t.cos())))
            .collect();
        let coeffs = (0..n)
            .map(|k| {
                let s: f64 = vals
                    .iter()
                    .zip(&theta)
                    .map(|(v, t)| v * (k as f64 * t).cos())
                    .sum();
                let c = 2.0 * s / n as f64;
                if k == 0 {
                    0.5 * c
                } else {
                    c
                }
            })
            .collect();
        Self::new(lo, hi, coeffs)
    }

    /// Interpolates values given at the Chebyshev–Lobatto points
    /// (ordered from `hi` down to `lo`, as [`lobatto_points`] returns them).
    pub fn from_lobatto_values(lo: f64, hi: f64, vals: &[f64]) -> Self {
        let n = vals.len() - 1;
        assert!(n >= 1, "need at least two Lobatto values");
        let coeffs = (0..=n)
            .map(|k| {
                let mut s = 0.0;
                for (j, v) in vals.iter().enumerate() {
                    let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                    s += w * v * (PI * (k * j) as f64 / n as f64).cos();
                }
                let c = 2.0 * s / n as f64;
                if k == 0 || k == n {
                    0.5 * c
                } else {
                    c
                }
            })
            .collect();
        Self::new(lo, hi, coeffs)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s = to_unit(self.lo, self.hi, x);
        let two_s = 2.0 * s;
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + two_s * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + s * b1 - b2
    }

    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        if n == 1 {
            return Self::zero(self.lo, self.hi);
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        let scale = 2.0 / (self.hi - self.lo);
        Self::new(self.lo, self.hi, d.into_iter().map(|c| c * scale).collect())
    }

    /// Antiderivative vanishing at `anchor`.
    pub fn integral(&self, anchor: f64) -> Self {
        let n = self.coeffs.len();
        let c = |k: usize| if k < n { self.coeffs[k] } else { 0.0 };
        let scale = 0.5 * (self.hi - self.lo);
        let mut out = vec![0.0; n + 1];
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            let prev = if k == 1 { 2.0 * c(0) } else { c(k - 1) };
            *slot = scale * (prev - c(k + 1)) / (2.0 * k as f64);
        }
        let mut series = Self::new(self.lo, self.hi, out);
        let shift = series.eval(anchor);
        series.coeffs[0] -= shift;
        series
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self::new(
            self.lo,
            self.hi,
            self.coeffs.iter().map(|c| c * lambda).collect(),
        )
    }

    /// `alpha * self + beta * other` on the same interval.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        assert!(
            self.lo == other.lo && self.hi == other.hi,
            "series live on different intervals"
        );
        let n = self.coeffs.len().max(other.coeffs.len());
        let at = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
        Self::new(
            self.lo,
            self.hi,
            (0..n)
                .map(|k| alpha * at(&self.coeffs, k) + beta * at(&other.coeffs, k))
                .collect(),
        )
    }

    /// Largest coefficient magnitude beyond index `k`.
    pub fn tail_max(&self, k: usize) -> f64 {
        self.coeffs
            .iter()
            .skip(k + 1)
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Drops trailing coefficients below `rel_tol·max|c_k|`. Rounding noise in
    /// high coefficients is amplified by `k⁴` in second derivatives.
    pub fn chopped(&self, rel_tol: f64) -> Self {
        let top = self
            .tail_max(0)
            .max(self.coeffs.first().map_or(0.0, |c| c.abs()));
        let keep = self
            .coeffs
            .iter()
            .rposition(|c| c.abs() > rel_tol * top)
            .map_or(1, |k| k + 1);
        ChebSeries::new(self.lo, self.hi, self.coeffs[..keep].to_vec())
    }
}

/// Chebyshev–Lobatto points `x_j = cos(j pi / n)` mapped to `[lo, hi]`,
/// `j = 0..=n`, so the first point is `hi`.
pub fn lobatto_points(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..=n)
        .map(|j| from_unit(lo, hi, (PI * j as f64 / n as f64).cos()))
        .collect()
}

/// Differentiation matrix on the Lobatto points of [`lobatto_points`],
/// row-major `(n+1) x (n+1)`.
pub fn lobatto_diff_matrix(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    let np = n + 1;
    let x: Vec<f64> = (0..np).map(|j| (PI * j as f64 / n as f64).cos()).collect();
    let c: Vec<f64> = (0..np)
        .map(|j| {
            let base = if j == 0 || j == n { 2.0 } else { 1.0 };
            if j % 2 == 0 {
                base
            } else {
                -base
            }
        })
        .collect();
    let mut d = vec![0.0; np * np];
    for i in 0..np {
        let mut row = 0.0;
        for j in 0..np {
            if i != j {
                let v = c[i] / c[j] / (x[i] - x[j]);
                d[i * np + j] = v;
                row += v;
            }
        }
        // negative-sum trick keeps constants in the null space
        d[i * np + i] = -row;
    }
    let scale = 2.0 / (hi - lo);
    d.iter_mut().for_each(|v| *v *= scale);
    d
}

fn to_unit(lo: f64, hi: f64, x: f64) -> f64 {
    (2.0 * x - lo - hi) / (hi - lo)
}

fn from_unit(lo: f64, hi: f64, s: f64) -> f64 {
    0.5 * (lo + hi) + 0.5 * (hi - lo) * s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_minus_x_squared_has_two_coefficients() {
        let s = ChebSeries::fit(-1.0, 1.0, 8, |x| 1.0 - x * x);
        assert!((s.coeffs()[0] - 0.5).abs() < 1e-15);
        assert!((s.coeffs()[2] + 0.5).abs() < 1e-15);
        assert!(s.coeffs()[1].abs() < 1e-15);
        assert!(s.tail_max(2) < 1e-15);
    }

    #[test]
    fn derivative_and_integral_on_shifted_interval() {
        let (lo, hi) = (0.5, 3.0);
        let s = ChebSeries::fit(lo, hi, 30, |x| (0.7 * x).sin() + x.powi(3));
        let d = s.derivative();
        let dd = d.derivative();
        for &x in &[0.5_f64, 1.1, 2.0, 2.9, 3.0] {
            let want = 0.7 * (0.7 * x).cos() + 3.0 * x * x;
            assert!((d.eval(x) - want).abs() < 1e-10, "x={x}");
            let want2 = -0.49 * (0.7 * x).sin() + 6.0 * x;
            assert!((dd.eval(x) - want2).abs() < 1e-8, "x={x}");
        }
        let i = s.integral(1.0);
        assert!(i.eval(1.0).abs() < 1e-15);
        let want =
            (-(0.7f64 * 2.5).cos() / 0.7 + 2.5f64.powi(4) / 4.0) - (-(0.7f64).cos() / 0.7 + 0.25);
        assert!((i.eval(2.5) - want).abs() < 1e-13);
    }

    #[test]
    fn lobatto_values_round_trip() {
        let (lo, hi) = (-2.0, 1.0);
        let pts = lobatto_points(16, lo, hi);
        let vals: Vec<f64> = pts.iter().map(|x| (x * 0.3).exp()).collect();
        let s = ChebSeries::from_lobatto_values(lo, hi, &vals);
        for (x, v) in pts.iter().zip(&vals) {
            assert!((s.eval(*x) - v).abs() < 1e-14);
        }
        assert!((s.eval(-0.3) - (-0.09f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn diff_matrix_differentiates_polynomials() {
        let n = 12;
        let (lo, hi) = (-1.0, 2.0);
        let pts = lobatto_points(n, lo, hi);
        let d = lobatto_diff_matrix(n, lo, hi);
        for i in 0..=n {
            let got: f64 = (0..=n).map(|j| d[i * (n + 1) + j] * pts[j].powi(5)).sum();
            assert!((got - 5.0 * pts[i].powi(4)).abs() < 1e-10);
        }
    }

    #[test]
    fn affine_constructor_matches_line() {
        let s = ChebSeries::affine(1.0, 4.0, 2.0, -0.5);
        for &x in &[1.0, 2.2, 4.0] {
            assert!((s.eval(x) - (2.0 - 0.5 * x)).abs() < 1e-15);
        }
    }
}

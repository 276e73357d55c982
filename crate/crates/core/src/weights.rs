//! Weight functions on a momentum polytope.
//!
//! Every family has closed-form value, gradient and Hessian. A common
//! multiplier `scale` is applied on top of the family, so `λ·w` is the
//! same family with `scale` multiplied by `λ`.

use thiserror::Error;

use crate::polytope::MomentumPolytope;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("weight is not positive on the polytope (minimum {min} at {at:?})")]
    NotPositiveOnP { min: f64, at: Vec<f64> },
    #[error("bad weight parameters: {0}")]
    BadParams(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightFamily {
    Constant(f64),
    /// `c + <b, p>`
    Affine {
        constant: f64,
        slope: Vec<f64>,
    },
    /// `exp<ξ, p>`
    Exponential {
        xi: Vec<f64>,
    },
    /// `(<ξ, p> + c)^α`; the base must stay positive on the polytope.
    Power {
        xi: Vec<f64>,
        c: f64,
        alpha: f64,
    },
    /// `Σ c_k p^k` on an interval.
    Polynomial(Vec<f64>),
    /// `Σ c x^i y^j` over `(i, j, c)` terms on a polygon.
    Polynomial2(Vec<(u32, u32, f64)>),
}

impl WeightFamily {
    pub fn name(&self) -> &'static str {
        match self {
            WeightFamily::Constant(_) => "constant",
            WeightFamily::Affine { .. } => "affine",
            WeightFamily::Exponential { .. } => "exponential",
            WeightFamily::Power { .. } => "power",
            WeightFamily::Polynomial(_) | WeightFamily::Polynomial2(_) => "polynomial",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    family: WeightFamily,
    scale: f64,
    dim: usize,
    positive: bool,
}

/// Value, gradient and Hessian at one point. Unused slots are zero in dimension one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightJet {
    pub value: f64,
    pub gradient: [f64; 2],
    pub hessian: [[f64; 2]; 2],
}

impl WeightFunction {
    /// Builds `scale * family` on `p`. With `require_positive` the weight must be
    /// positive at the vertices and the default interior quadrature nodes.
    pub fn new(
        family: WeightFamily,
        scale: f64,
        p: &MomentumPolytope,
        require_positive: bool,
    ) -> Result<Self, WeightError> {
        let dim = p.dim();
        validate(&family, scale, dim)?;
        if let WeightFamily::Power { xi, c, .. } = &family {
            for v in p.vertices() {
                let base = dot(xi, v) + c;
                if !(base > 0.0) {
                    return Err(WeightError::NotPositiveOnP {
                        min: base,
                        at: v.clone(),
                    });
                }
            }
        }
        let mut w = WeightFunction {
            family,
            scale,
            dim,
            positive: false,
        };
        let rule = p.default_quadrature();
        let (min, at) = rule
            .points()
            .map(|(q, _)| q.to_vec())
            .chain(p.vertices().iter().cloned())
            .map(|q| (w.value(&q), q))
            .fold((f64::INFINITY, Vec::new()), |acc, (val, q)| {
                if val < acc.0 {
                    (val, q)
                } else {
                    acc
                }
            });
        w.positive = min > 0.0;
        if require_positive && !w.positive {
            return Err(WeightError::NotPositiveOnP { min, at });
        }
        Ok(w)
    }

    pub fn constant(value: f64, p: &MomentumPolytope) -> Self {
        Self::new(WeightFamily::Constant(1.0), value, p, false).expect("constant weight")
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    /// Same family with the multiplier replaced by `lambda * scale`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let mut w = self.clone();
        w.scale *= lambda;
        w.positive = w.positive && lambda > 0.0;
        w
    }

    pub fn value(&self, p: &[f64]) -> f64 {
        self.jet(p).value
    }

    pub fn gradient(&self, p: &[f64]) -> [f64; 2] {
        self.jet(p).gradient
    }

    pub fn hessian(&self, p: &[f64]) -> [[f64; 2]; 2] {
        self.jet(p).hessian
    }

    /// `(w, w', w'')` on an interval.
    pub fn jet1(&self, x: f64) -> (f64, f64, f64) {
        let j = self.jet(&[x]);
        (j.value, j.gradient[0], j.hessian[0][0])
    }

    pub fn value1(&self, x: f64) -> f64 {
        self.jet1(x).0
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.jet1(x).1
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.jet1(x).2
    }

    pub fn jet(&self, p: &[f64]) -> WeightJet {
        let mut j = WeightJet {
            value: 0.0,
            gradient: [0.0; 2],
            hessian: [[0.0; 2]; 2],
        };
        match &self.family {
            WeightFamily::Constant(c) => j.value = *c,
            WeightFamily::Affine { constant, slope } => {
                j.value = constant + dot(slope, p);
                j.gradient[..slope.len()].copy_from_slice(slope);
            }
            WeightFamily::Exponential { xi } => {
                let e = dot(xi, p).exp();
                j.value = e;
                for a in 0..xi.len() {
                    j.gradient[a] = xi[a] * e;
                    for b in 0..xi.len() {
                        j.hessian[a][b] = xi[a] * xi[b] * e;
                    }
                }
            }
            WeightFamily::Power { xi, c, alpha } => {
                let base = dot(xi, p) + c;
                let v = base.powf(*alpha);
                let d = alpha * base.powf(alpha - 1.0);
                let dd = alpha * (alpha - 1.0) * base.powf(alpha - 2.0);
                j.value = v;
                for a in 0..xi.len() {
                    j.gradient[a] = xi[a] * d;
                    for b in 0..xi.len() {
                        j.hessian[a][b] = xi[a] * xi[b] * dd;
                    }
                }
            }
            WeightFamily::Polynomial(cs) => {
                let x = p[0];
                let (mut v, mut d, mut dd) = (0.0, 0.0, 0.0);
                for &c in cs.iter().rev() {
                    dd = dd * x + 2.0 * d;
                    d = d * x + v;
                    v = v * x + c;
                }
                j.value = v;
                j.gradient[0] = d;
                j.hessian[0][0] = dd;
            }
            WeightFamily::Polynomial2(terms) => {
                let (x, y) = (p[0], p[1]);
                for &(i, k, c) in terms {
                    let (xi, dxi, ddxi) = mono(x, i);
                    let (yk, dyk, ddyk) = mono(y, k);
                    j.value += c * xi * yk;
                    j.gradient[0] += c * dxi * yk;
                    j.gradient[1] += c * xi * dyk;
                    j.hessian[0][0] += c * ddxi * yk;
                    j.hessian[0][1] += c * dxi * dyk;
                    j.hessian[1][1] += c * xi * ddyk;
                }
                j.hessian[1][0] = j.hessian[0][1];
            }
        }
        j.value *= self.scale;
        for a in 0..2 {
            j.gradient[a] *= self.scale;
            for b in 0..2 {
                j.hessian[a][b] *= self.scale;
            }
        }
        j
    }
}

fn mono(x: f64, k: u32) -> (f64, f64, f64) {
    let k = k as i32;
    let v = x.powi(k);
    let d = if k >= 1 {
        k as f64 * x.powi(k - 1)
    } else {
        0.0
    };
    let dd = if k >= 2 {
        (k * (k - 1)) as f64 * x.powi(k - 2)
    } else {
        0.0
    };
    (v, d, dd)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn validate(family: &WeightFamily, scale: f64, dim: usize) -> Result<(), WeightError> {
    let bad = |m: String| Err(WeightError::BadParams(m));
    if !scale.is_finite() {
        return bad(format!("scale {scale} is not finite"));
    }
    let check_vec = |name: &str, v: &[f64]| -> Result<(), WeightError> {
        if v.len() != dim {
            return Err(WeightError::BadParams(format!(
                "{name} has length {} but the polytope has dimension {dim}",
                v.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(WeightError::BadParams(format!("{name} is not finite")));
        }
        Ok(())
    };
    match family {
        WeightFamily::Constant(c) if !c.is_finite() => bad("constant is not finite".into()),
        WeightFamily::Constant(_) => Ok(()),
        WeightFamily::Affine { constant, slope } => {
            if !constant.is_finite() {
                return bad("affine constant is not finite".into());
            }
            check_vec("slope", slope)
        }
        WeightFamily::Exponential { xi } => check_vec("xi", xi),
        WeightFamily::Power { xi, c, alpha } => {
            if !c.is_finite() || !alpha.is_finite() {
                return bad("power offset and exponent must be finite".into());
            }
            check_vec("xi", xi)
        }
        WeightFamily::Polynomial(cs) => {
            if dim != 1 {
                return bad("univariate polynomial needs an interval".into());
            }
            if cs.is_empty() || cs.iter().any(|c| !c.is_finite()) {
                return bad("polynomial coefficients must be finite and non-empty".into());
            }
            Ok(())
        }
        WeightFamily::Polynomial2(terms) => {
            if dim != 2 {
                return bad("bivariate polynomial needs a polygon".into());
            }
            if terms.is_empty() || terms.iter().any(|t| !t.2.is_finite()) {
                return bad("polynomial terms must be finite and non-empty".into());
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval() -> MomentumPolytope {
        MomentumPolytope::interval(-1.0, 1.0).unwrap()
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let w = WeightFunction::new(WeightFamily::Constant(1.0), 1.0, &interval(), true).unwrap();
        assert_eq!(w.jet1(0.3), (1.0, 0.0, 0.0));
        assert!(w.is_positive());
    }

    #[test]
    fn exponential_derivatives_equal_value() {
        let w = WeightFunction::new(
            WeightFamily::Exponential { xi: vec![1.0] },
            1.0,
            &interval(),
            true,
        )
        .unwrap();
        for &x in &[-1.0, -0.2, 0.7] {
            let (v, d, dd) = w.jet1(x);
            let e = f64::exp(x);
            assert_eq!((v, d, dd), (e, e, e));
        }
    }

    #[test]
    fn power_with_vanishing_base_is_rejected() {
        let err = WeightFunction::new(
            WeightFamily::Power {
                xi: vec![1.0],
                c: 0.5,
                alpha: 2.0,
            },
            1.0,
            &interval(),
            false,
        )
        .unwrap_err();
        assert!(matches!(err, WeightError::NotPositiveOnP { .. }));
    }

    #[test]
    fn sign_changing_weight_allowed_unless_positivity_requested() {
        let fam = WeightFamily::Affine {
            constant: 0.0,
            slope: vec![1.0],
        };
        let w = WeightFunction::new(fam.clone(), 1.0, &interval(), false).unwrap();
        assert!(!w.is_positive());
        assert!(WeightFunction::new(fam, 1.0, &interval(), true).is_err());
    }

    #[test]
    fn polynomial_horner_derivatives() {
        let w = WeightFunction::new(
            WeightFamily::Polynomial(vec![1.0, -2.0, 0.5, 3.0]),
            2.0,
            &interval(),
            false,
        )
        .unwrap();
        let x: f64 = 0.4;
        let (v, d, dd) = w.jet1(x);
        assert!((v - 2.0 * (1.0 - 2.0 * x + 0.5 * x * x + 3.0 * x.powi(3))).abs() < 1e-15);
        assert!((d - 2.0 * (-2.0 + x + 9.0 * x * x)).abs() < 1e-15);
        assert!((dd - 2.0 * (1.0 + 18.0 * x)).abs() < 1e-14);
    }

    #[test]
    fn bad_params() {
        assert!(matches!(
            WeightFunction::new(
                WeightFamily::Exponential { xi: vec![1.0, 2.0] },
                1.0,
                &interval(),
                false
            ),
            Err(WeightError::BadParams(_))
        ));
        assert!(matches!(
            WeightFunction::new(WeightFamily::Polynomial(vec![]), 1.0, &interval(), false),
            Err(WeightError::BadParams(_))
        ));
        assert!(matches!(
            WeightFunction::new(WeightFamily::Constant(1.0), f64::NAN, &interval(), false),
            Err(WeightError::BadParams(_))
        ));
    }

    #[test]
    fn bivariate_polynomial_on_square() {
        let sq = MomentumPolytope::build(vec![
            crate::polytope::Facet::new(vec![1, 0], 0.0),
            crate::polytope::Facet::new(vec![0, 1], 0.0),
            crate::polytope::Facet::new(vec![-1, 0], 1.0),
            crate::polytope::Facet::new(vec![0, -1], 1.0),
        ])
        .unwrap();
        let w = WeightFunction::new(
            WeightFamily::Polynomial2(vec![(0, 0, 1.0), (2, 1, 3.0)]),
            1.0,
            &sq,
            true,
        )
        .unwrap();
        let j = w.jet(&[0.5, 0.25]);
        assert!((j.value - (1.0 + 3.0 * 0.25 * 0.25)).abs() < 1e-15);
        assert!((j.gradient[0] - 6.0 * 0.5 * 0.25).abs() < 1e-15);
        assert!((j.gradient[1] - 3.0 * 0.25).abs() < 1e-15);
        assert!((j.hessian[0][1] - 6.0 * 0.5).abs() < 1e-15);
        assert!((j.hessian[0][0] - 6.0 * 0.25).abs() < 1e-15);
        assert_eq!(j.hessian[1][1], 0.0);
    }
}

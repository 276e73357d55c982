//! Torus-invariant Kähler metrics on the toric manifold over an interval.
//!
//! A metric is a symplectic potential `u = u_G + f` on `P = [a, b]`, where
//! `u_G` is the Guillemin potential and `f` a Chebyshev series. The momentum
//! profile is `H = 1/u''`. In the complex chart `x = u'(μ)` the reference
//! metric has momentum `μ_0(x) = u_G'^{-1}(x)`, so every chart point carries
//! the pair `(μ_0, μ)` of the two momenta.

mod legendre;
mod profile;

pub use legendre::{momentum_image_check, LegendreMap, MomentumImageReport};
pub use profile::{profile_from_relative_potential, MomentumProfile, ProfileJet};

use thiserror::Error;

use crate::cheb::ChebSeries;
use crate::gauss::GaussRule;
use crate::polytope::MomentumPolytope;

/// Default Chebyshev degree for relative potentials.
pub const DEFAULT_DEGREE: usize = 64;

const CONVEXITY_NODES: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("potential is not strictly convex: u'' factor {value} at mu = {at}")]
    NotConvex { at: f64, value: f64 },
    #[error("profile is not positive: H = {value} at mu = {at}")]
    NotPositive { at: f64, value: f64 },
    #[error("toric metrics need an interval, got a polytope of dimension {0}")]
    NotInterval(usize),
    #[error("series lives on [{0}, {1}], not on the polytope interval")]
    IntervalMismatch(f64, f64),
    #[error("{what} check failed with deviation {deviation:e}")]
    CheckFailed { what: String, deviation: f64 },
}

/// Closed forms attached to the Guillemin potential of `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guillemin {
    pub a: f64,
    pub b: f64,
}

impl Guillemin {
    pub fn new(a: f64, b: f64) -> Self {
        assert!(b > a, "empty interval [{a}, {b}]");
        Guillemin { a, b }
    }

    /// `H_G = 2(μ - a)(b - μ)/(b - a)`.
    pub fn h(&self, mu: f64) -> f64 {
        2.0 * (mu - self.a) * (self.b - mu) / (self.b - self.a)
    }

    pub fn dh(&self, mu: f64) -> f64 {
        2.0 * (self.a + self.b - 2.0 * mu) / (self.b - self.a)
    }

    pub fn ddh(&self) -> f64 {
        -4.0 / (self.b - self.a)
    }

    /// `u_G = ½((μ - a)log(μ - a) + (b - μ)log(b - μ))`.
    pub fn u(&self, mu: f64) -> f64 {
        0.5 * (xlogx(mu - self.a) + xlogx(self.b - mu))
    }

    pub fn du(&self, mu: f64) -> f64 {
        0.5 * ((mu - self.a) / (self.b - mu)).ln()
    }

    /// Inverse of `u_G'`: the reference momentum at chart point `y`.
    pub fn momentum(&self, y: f64) -> f64 {
        let len = self.b - self.a;
        if y < 0.0 {
            self.a + len * sigmoid(2.0 * y)
        } else {
            self.b - len * sigmoid(-2.0 * y)
        }
    }

    /// `H_G(μ_G(y)) / H_G(μ_G(x)) = cosh²x / cosh²y`, without overflow.
    pub fn chart_ratio(y: f64, x: f64) -> f64 {
        let (ax, ay) = (x.abs(), y.abs());
        let num = 1.0 + (-2.0 * ax).exp();
        let den = 1.0 + (-2.0 * ay).exp();
        (2.0 * (ax - ay)).exp() * (num / den).powi(2)
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.a + self.b)
    }
}

fn xlogx(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        t * t.ln()
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// A point of the complex chart seen from the reference and from `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub x: f64,
    pub mu0: f64,
    pub mu: f64,
    /// `dμ/dμ_0 = H(μ)/H_G(μ_0)`; equals `ω_φ/ω` at this point.
    pub jac: f64,
}

/// `u = u_G + f` on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticPotential {
    guillemin: Guillemin,
    f: ChebSeries,
    df: ChebSeries,
    d2f: ChebSeries,
    d3f: ChebSeries,
    d4f: ChebSeries,
    slope_bound: f64,
}

impl SymplecticPotential {
    pub fn new(f: ChebSeries) -> Result<Self, GeomError> {
        let g = Guillemin::new(f.lo(), f.hi());
        let df = f.derivative();
        let d2f = df.derivative();
        let d3f = d2f.derivative();
        let d4f = d3f.derivative();
        let slope_bound = df.coeffs().iter().map(|c| c.abs()).sum();
        let u = SymplecticPotential {
            guillemin: g,
            f,
            df,
            d2f,
            d3f,
            d4f,
            slope_bound,
        };
        u.check_convex()?;
        Ok(u)
    }

    pub fn guillemin(a: f64, b: f64) -> Self {
        Self::new(ChebSeries::zero(a, b)).expect("Guillemin potential is convex")
    }

    /// Potential on the interval polytope `p` from Chebyshev coefficients of `f`.
    pub fn from_coeffs(p: &MomentumPolytope, coeffs: Vec<f64>) -> Result<Self, GeomError> {
        let (a, b) = p.as_interval().ok_or(GeomError::NotInterval(p.dim()))?;
        Self::new(ChebSeries::new(a, b, coeffs))
    }

    fn check_convex(&self) -> Result<(), GeomError> {
        let (a, b) = self.interval();
        let rule = GaussRule::on_interval(CONVEXITY_NODES, a, b);
        let grid = crate::cheb::lobatto_points(128, a, b);
        for &mu in rule.nodes.iter().chain(&grid) {
            let d = self.convexity_factor(mu);
            if !(d > 0.0) {
                return Err(GeomError::NotConvex { at: mu, value: d });
            }
        }
        Ok(())
    }

    /// True when `f` is identically zero.
    pub fn is_reference(&self) -> bool {
        self.f.coeffs().iter().all(|&c| c == 0.0)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.guillemin.a, self.guillemin.b)
    }

    pub fn reference(&self) -> Guillemin {
        self.guillemin
    }

    pub fn relative(&self) -> &ChebSeries {
        &self.f
    }

    /// `f`, `f'`, `f''` at `μ`.
    pub fn f_jet(&self, mu: f64) -> (f64, f64, f64) {
        (self.f.eval(mu), self.df.eval(mu), self.d2f.eval(mu))
    }

    pub fn f_derivatives(&self, mu: f64) -> [f64; 5] {
        [
            self.f.eval(mu),
            self.df.eval(mu),
            self.d2f.eval(mu),
            self.d3f.eval(mu),
            self.d4f.eval(mu),
        ]
    }

    /// `D = 1 + H_G f'' = u'' H_G`, positive exactly when `u` is strictly convex.
    pub fn convexity_factor(&self, mu: f64) -> f64 {
        1.0 + self.guillemin.h(mu) * self.d2f.eval(mu)
    }

    pub fn u(&self, mu: f64) -> f64 {
        self.guillemin.u(mu) + self.f.eval(mu)
    }

    /// Chart coordinate `x = u'(μ)` of an interior momentum.
    pub fn chart(&self, mu: f64) -> f64 {
        self.guillemin.du(mu) + self.df.eval(mu)
    }

    /// Solves `u'(μ) = x`. Works in `y = u_G'(μ)` where the equation reads
    /// `y + f'(μ_G(y)) = x` with derivative `D > 0`; the root lies within
    /// `max|f'|` of `x`.
    pub fn momentum(&self, x: f64) -> f64 {
        self.solve_chart(x).0
    }

    fn solve_chart(&self, x: f64) -> (f64, f64) {
        let g = &self.guillemin;
        let (mut lo, mut hi) = (x - self.slope_bound - 1e-12, x + self.slope_bound + 1e-12);
        let mut y = x - self.df.eval(g.momentum(x));
        if !(y > lo && y < hi) {
            y = 0.5 * (lo + hi);
        }
        for _ in 0..200 {
            let mu = g.momentum(y);
            let r = y + self.df.eval(mu) - x;
            if r == 0.0 {
                break;
            }
            if r > 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            let slope = 1.0 + self.d2f.eval(mu) * g.h(mu);
            let mut next = y - r / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - y).abs();
            y = next;
            if step <= 4.0 * f64::EPSILON * (1.0 + y.abs())
                || hi - lo <= f64::EPSILON * (1.0 + y.abs())
            {
                break;
            }
        }
        (g.momentum(y), y)
    }

    /// The chart point whose reference momentum is `mu0`.
    pub fn at_reference(&self, mu0: f64) -> ChartPoint {
        let x = self.guillemin.du(mu0);
        self.at_chart_with(x, mu0)
    }

    pub fn at_chart(&self, x: f64) -> ChartPoint {
        self.at_chart_with(x, self.guillemin.momentum(x))
    }

    fn at_chart_with(&self, x: f64, mu0: f64) -> ChartPoint {
        if self.is_reference() {
            return ChartPoint {
                x,
                mu0,
                mu: mu0,
                jac: 1.0,
            };
        }
        let (mu, y) = self.solve_chart(x);
        let d = self.convexity_factor(mu);
        ChartPoint {
            x,
            mu0,
            mu,
            jac: Guillemin::chart_ratio(y, x) / d,
        }
    }

    /// `dμ/dμ_0` at the endpoints: `e^{-2f'(a)}` and `e^{2f'(b)}`.
    pub fn endpoint_jacobians(&self) -> (f64, f64) {
        let (a, b) = self.interval();
        (
            (-2.0 * self.df.eval(a)).exp(),
            (2.0 * self.df.eval(b)).exp(),
        )
    }

    /// Kähler potential `φ` of `u` relative to the reference at a chart point:
    /// the difference of the two Legendre transforms.
    pub fn kahler_potential(&self, p: &ChartPoint) -> f64 {
        let g = &self.guillemin;
        p.x * (p.mu - p.mu0) - (g.u(p.mu) - g.u(p.mu0)) - self.f.eval(p.mu)
    }

    /// `φ` at a momentum endpoint, where both momenta coincide.
    pub fn endpoint_potential(&self, mu: f64) -> f64 {
        -self.f.eval(mu)
    }

    /// Same metric with the affine part of `f` at the center removed,
    /// so `f(μ_c) = f'(μ_c) = 0`.
    pub fn gauged(&self) -> Self {
        let c = self.guillemin.center();
        let (f0, f1) = (self.f.eval(c), self.df.eval(c));
        let (a, b) = self.interval();
        let shift = ChebSeries::affine(a, b, f0 - f1 * c, f1);
        let mut out = self.clone();
        out.f = self.f.combine(1.0, &shift, -1.0);
        out.df = out.f.derivative();
        out.slope_bound = out.df.coeffs().iter().map(|c| c.abs()).sum();
        out
    }

    /// `(1 - t)·self + t·other` in symplectic potentials.
    pub fn interpolate(&self, other: &Self, t: f64) -> Self {
        let f = self.f.combine(1.0 - t, &other.f, t);
        let df = f.derivative();
        let d2f = df.derivative();
        let d3f = d2f.derivative();
        let d4f = d3f.derivative();
        let slope_bound = df.coeffs().iter().map(|c| c.abs()).sum();
        SymplecticPotential {
            guillemin: self.guillemin,
            f,
            df,
            d2f,
            d3f,
            d4f,
            slope_bound,
        }
    }

    pub fn profile(&self) -> MomentumProfile {
        MomentumProfile::from_potential(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pot(coeffs: Vec<f64>) -> SymplecticPotential {
        SymplecticPotential::new(ChebSeries::new(-1.0, 1.0, coeffs)).unwrap()
    }

    #[test]
    fn guillemin_closed_forms() {
        let g = Guillemin::new(-1.0, 1.0);
        assert!((g.h(0.3) - (1.0 - 0.09)).abs() < 1e-15);
        let g = Guillemin::new(0.0, 1.0);
        assert_eq!(g.h(0.5), 0.5);
        let g = Guillemin::new(2.0, 5.0);
        assert_eq!(g.dh(2.0), 2.0);
        assert_eq!(g.dh(5.0), -2.0);
    }

    #[test]
    fn guillemin_derivative_inverts_momentum() {
        let g = Guillemin::new(-0.5, 2.0);
        for &y in &[-30.0, -2.0, 0.0, 0.7, 25.0] {
            let mu = g.momentum(y);
            if mu > g.a && mu < g.b {
                assert!((g.du(mu) - y).abs() < 1e-9 * (1.0 + y.abs()), "y={y}");
            }
        }
    }

    #[test]
    fn chart_solve_round_trip() {
        let u = pot(vec![0.0, 0.1, 0.15, -0.05, 0.02]);
        for &mu in &[-0.999, -0.5, 0.0, 0.3, 0.99999] {
            let x = u.chart(mu);
            assert!((u.momentum(x) - mu).abs() < 1e-13, "mu={mu}");
        }
    }

    #[test]
    fn jacobian_matches_numerical_derivative() {
        let u = pot(vec![0.0, 0.1, 0.15, -0.05, 0.02]);
        let g = u.reference();
        for &mu0 in &[-0.8, 0.1, 0.6] {
            let p = u.at_reference(mu0);
            let fd = crate::numdiff::derivative(|m0| u.momentum(g.du(m0)), mu0, 1e-3);
            assert!((p.jac - fd).abs() < 1e-9, "mu0={mu0}");
            let want = u.profile().h(p.mu) / g.h(mu0);
            assert!((p.jac - want).abs() < 1e-12);
        }
    }

    #[test]
    fn endpoint_jacobian_is_limit() {
        let u = pot(vec![0.0, 0.2, 0.1]);
        let (ja, jb) = u.endpoint_jacobians();
        let near_a = u.at_reference(-1.0 + 1e-9).jac;
        let near_b = u.at_reference(1.0 - 1e-9).jac;
        assert!((near_a - ja).abs() < 1e-6);
        assert!((near_b - jb).abs() < 1e-6);
    }

    #[test]
    fn non_convex_potential_is_rejected() {
        // f = -μ², f'' = -2 makes u''(0) = 1 - 2 < 0
        let f = ChebSeries::fit(-1.0, 1.0, 4, |m| -m * m);
        let err = SymplecticPotential::new(f).unwrap_err();
        assert!(matches!(err, GeomError::NotConvex { .. }));
    }

    #[test]
    fn constant_shift_moves_kahler_potential() {
        let u = pot(vec![-0.7]);
        let p = u.at_reference(0.2);
        assert!((u.kahler_potential(&p) - 0.7).abs() < 1e-15);
        assert_eq!(u.endpoint_potential(1.0), 0.7);
    }

    #[test]
    fn gauge_removes_affine_part() {
        let u = pot(vec![0.3, 0.4, 0.1]);
        let g = u.gauged();
        let (f0, f1, f2) = g.f_jet(0.0);
        assert!(f0.abs() < 1e-15 && f1.abs() < 1e-15);
        assert!((f2 - u.f_jet(0.0).2).abs() < 1e-15);
    }
}

//! Energy functionals of invariant Kähler potentials on the interval.
//!
//! Potentials are compared through the complex chart: at each reference
//! momentum `μ_0` the chart point carries the momentum `μ` of `u` and the
//! density ratio `J = ω_φ/ω`. Integrals over `X` become `2π ∫ (..) dμ_0`.
//! Energies are evaluated in closed form over the chart; the `*_path_*`
//! functions integrate first variations along `t ↦ u_G + t f` instead and
//! serve as independent cross-checks.

use std::f64::consts::PI;

use nalgebra::DVector;
use thiserror::Error;

use crate::cheb::ChebSeries;
use crate::gauss::GaussRule;
use crate::polytope::{affine_moments, MomentumPolytope, PolytopeError, QuadratureRule};
use crate::toricgeom::{GeomError, Guillemin, MomentumProfile, SymplecticPotential};
use crate::weights::WeightFunction;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("weighted Gram matrix is singular (smallest eigenvalue {0:e})")]
    SingularGram(f64),
    #[error("the relative energy needs positive weights v and w")]
    NeedsPositiveWeights,
    #[error("c-constant of (v, l_ext w) is {0}, expected 1")]
    RelativeConstant(f64),
    #[error("c-constant mismatch: boundary formula {boundary}, curvature formula {curvature}")]
    ConstantMismatch { boundary: f64, curvature: f64 },
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyOptions {
    /// Gauss nodes in the reference momentum.
    pub chart_nodes: usize,
    /// Gauss nodes for the inner ε-integrals of the weight transforms.
    pub eps_nodes: usize,
    /// Gauss nodes in `t` for path oracles.
    pub path_steps: usize,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        EnergyOptions {
            chart_nodes: 256,
            eps_nodes: 32,
            path_steps: 64,
        }
    }
}

/// `p ↦ constant + <slope, p>`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFunction {
    pub constant: f64,
    pub slope: Vec<f64>,
}

impl AffineFunction {
    pub fn eval(&self, p: &[f64]) -> f64 {
        self.constant + self.slope.iter().zip(p).map(|(s, x)| s * x).sum::<f64>()
    }

    pub fn eval1(&self, x: f64) -> f64 {
        self.constant + self.slope[0] * x
    }
}

/// Reference Kähler form or reference Ricci form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theta {
    Kahler,
    Ricci,
}

impl Theta {
    /// Density of `θ` against `dμ_0 ∧ dθ` and its momentum, at `μ_0`.
    fn data(self, g: &Guillemin, mu0: f64) -> (f64, f64) {
        match self {
            Theta::Kahler => (1.0, mu0),
            Theta::Ricci => (-0.5 * g.ddh(), -0.5 * g.dh(mu0)),
        }
    }
}

/// `2∫_{∂P} v dσ / ∫_P w dμ`, or 1 when `w` has (numerically) zero mean.
pub fn c_constant(p: &MomentumPolytope, v: &WeightFunction, w: &WeightFunction) -> f64 {
    c_constant_with(&p.default_quadrature(), v, w)
}

fn c_constant_with(rule: &QuadratureRule, v: &WeightFunction, w: &WeightFunction) -> f64 {
    let total = rule.integrate(|q| w.value(q));
    let abs = rule.integrate(|q| w.value(q).abs());
    if total.abs() < 1e-12 * abs || abs == 0.0 {
        return 1.0;
    }
    2.0 * rule.integrate_boundary(|q| v.value(q)) / total
}

/// [`c_constant`] cross-checked against `∫ Scal_v(H) dμ / ∫ w dμ` for a profile.
pub fn c_constant_checked(
    p: &MomentumPolytope,
    v: &WeightFunction,
    w: &WeightFunction,
    h: &MomentumProfile,
) -> Result<f64, EnergyError> {
    let c = c_constant(p, v, w);
    let rule = p.default_quadrature();
    let total = rule.integrate(|q| w.value(q));
    let abs = rule.integrate(|q| w.value(q).abs());
    if total.abs() < 1e-12 * abs || abs == 0.0 {
        return Ok(c);
    }
    let scal = GaussRule::on_interval(256, h.interval().0, h.interval().1)
        .integrate(|mu| h.jet(mu).weighted_scalar_curvature(v.jet1(mu)));
    let curvature = scal / total;
    if (curvature - c).abs() > 1e-9 * (1.0 + c.abs()) {
        return Err(EnergyError::ConstantMismatch {
            boundary: c,
            curvature,
        });
    }
    Ok(c)
}

/// The affine `ℓ` with `∫ ℓ a w dμ = 2∫_{∂P} a v dσ` for every affine `a`.
pub fn extremal_affine(
    p: &MomentumPolytope,
    v: &WeightFunction,
    w: &WeightFunction,
) -> Result<AffineFunction, EnergyError> {
    let rule = p.default_quadrature();
    let d = p.dim();
    let rhs: Vec<f64> = (0..=d)
        .map(|i| {
            2.0 * rule.integrate_boundary(|q| if i == 0 { 1.0 } else { q[i - 1] } * v.value(q))
        })
        .collect();
    project_affine(&rule, |q| w.value(q), &rhs)
}

/// Solves the weighted Gram system `G c = rhs` over `{1, μ_1, .., μ_ℓ}`.
pub(crate) fn project_affine<F: FnMut(&[f64]) -> f64>(
    rule: &QuadratureRule,
    w: F,
    rhs: &[f64],
) -> Result<AffineFunction, EnergyError> {
    let m = affine_moments(rule, w);
    if m.singular {
        return Err(EnergyError::SingularGram(m.min_eigenvalue));
    }
    let sol = m
        .gram
        .clone()
        .lu()
        .solve(&DVector::from_column_slice(rhs))
        .ok_or(EnergyError::SingularGram(m.min_eigenvalue))?;
    Ok(AffineFunction {
        constant: sol[0],
        slope: sol.iter().skip(1).copied().collect(),
    })
}

/// Moments `∫ Scal_v(H)·a dμ` for `a ∈ {1, μ}` on an interval.
pub fn curvature_moments(h: &MomentumProfile, v: &WeightFunction) -> [f64; 2] {
    let (a, b) = h.interval();
    let rule = GaussRule::on_interval(256, a, b);
    let mut out = [0.0; 2];
    for (&mu, &wt) in rule.nodes.iter().zip(&rule.weights) {
        let s = h.jet(mu).weighted_scalar_curvature(v.jet1(mu));
        out[0] += wt * s;
        out[1] += wt * s * mu;
    }
    out
}

/// `ℓ` recovered by projecting `Scal_v(H)` onto affine functions in `L²(w dμ)`.
pub fn project_scalar_curvature(
    p: &MomentumPolytope,
    h: &MomentumProfile,
    v: &WeightFunction,
    w: &WeightFunction,
) -> Result<AffineFunction, EnergyError> {
    let rhs = curvature_moments(h, v);
    project_affine(&p.default_quadrature(), |q| w.value(q), &rhs)
}

/// Per-node data shared by the closed-form energies.
struct ChartNode {
    weight: f64,
    mu0: f64,
    mu: f64,
    jac: f64,
    phi: f64,
}

fn chart_nodes(u: &SymplecticPotential, opts: &EnergyOptions) -> Vec<ChartNode> {
    let (a, b) = u.interval();
    let rule = GaussRule::on_interval(opts.chart_nodes, a, b);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&mu0, &weight)| {
            let p = u.at_reference(mu0);
            ChartNode {
                weight,
                mu0,
                mu: p.mu,
                jac: p.jac,
                phi: u.kahler_potential(&p),
            }
        })
        .collect()
}

/// `∫_0^1 ε^k (1-ε)^j g(ε μ + (1-ε) μ_0) dε` for the two moments `(k, j) = (1, 0), (0, 1)`.
fn eps_moments<G: FnMut(f64) -> f64>(eps: &GaussRule, mu: f64, mu0: f64, mut g: G) -> (f64, f64) {
    let (mut m1, mut m0) = (0.0, 0.0);
    for (&e, &we) in eps.nodes.iter().zip(&eps.weights) {
        let val = we * g(e * mu + (1.0 - e) * mu0);
        m1 += e * val;
        m0 += (1.0 - e) * val;
    }
    (m1, m0)
}

fn ew_with<W: FnMut(f64) -> f64>(nodes: &[ChartNode], eps: &GaussRule, mut w: W) -> f64 {
    let mut total = 0.0;
    for n in nodes {
        let (w1, w0) = eps_moments(eps, n.mu, n.mu0, &mut w);
        total += n.weight * n.phi * (w1 * n.jac + w0);
    }
    TWO_PI * total
}

fn ev_theta_with(
    u: &SymplecticPotential,
    nodes: &[ChartNode],
    eps: &GaussRule,
    v: &WeightFunction,
    theta: Theta,
) -> f64 {
    let g = u.reference();
    let mut total = 0.0;
    for n in nodes {
        let (h, m) = theta.data(&g, n.mu0);
        let (v1, v0) = eps_moments(eps, n.mu, n.mu0, |s| v.value1(s));
        let (dv1, dv0) = eps_moments(eps, n.mu, n.mu0, |s| v.d1(s));
        total += n.weight * n.phi * ((v1 + v0) * h + m * (dv1 * n.jac + dv0));
    }
    TWO_PI * total
}

fn entropy_with(nodes: &[ChartNode], v: &WeightFunction) -> f64 {
    TWO_PI
        * nodes
            .iter()
            .map(|n| n.weight * n.jac.ln() * v.value1(n.mu) * n.jac)
            .sum::<f64>()
}

fn eps_rule(opts: &EnergyOptions) -> GaussRule {
    GaussRule::on_interval(opts.eps_nodes, 0.0, 1.0)
}

/// `E_w(φ) = ∫_X φ (w_{1,1}(m_φ) ω_φ + w_{0,1} ω)`.
pub fn energy_ew(u: &SymplecticPotential, w: &WeightFunction, opts: &EnergyOptions) -> f64 {
    ew_with(&chart_nodes(u, opts), &eps_rule(opts), |s| w.value1(s))
}

/// `E_v^θ(φ)` in closed form.
pub fn energy_ev_theta(
    u: &SymplecticPotential,
    v: &WeightFunction,
    theta: Theta,
    opts: &EnergyOptions,
) -> f64 {
    ev_theta_with(u, &chart_nodes(u, opts), &eps_rule(opts), v, theta)
}

/// `H_v(φ) = ∫_X log(ω_φ/ω) v(m_φ) ω_φ`.
pub fn entropy_hv(u: &SymplecticPotential, v: &WeightFunction, opts: &EnergyOptions) -> f64 {
    entropy_with(&chart_nodes(u, opts), v)
}

/// `d(u_0, u_1) = sqrt(2π ∫ (f_1 - f_0)² dμ)`.
pub fn mabuchi_distance(
    u0: &SymplecticPotential,
    u1: &SymplecticPotential,
    opts: &EnergyOptions,
) -> f64 {
    let (a, b) = u0.interval();
    let (f0, f1) = (u0.relative(), u1.relative());
    let s = GaussRule::on_interval(opts.chart_nodes, a, b).integrate(|mu| {
        let d = f1.eval(mu) - f0.eval(mu);
        d * d
    });
    (TWO_PI * s).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub h_v: f64,
    pub e_v_ric: f64,
    pub e_w: f64,
    pub c_vw: f64,
    /// `None` when the weighted Gram matrix is singular.
    pub ell: Option<AffineFunction>,
    pub mabuchi: f64,
    /// Relative energy `M_{v, ℓ w}`, when requested.
    pub mabuchi_rel: Option<f64>,
    pub vol_v: f64,
    pub vol: f64,
}

/// Chen–Tian assembly `M = H_v - 2E_v^Ric + c·E_w`, optionally with the relative energy.
pub fn mabuchi_energy(
    p: &MomentumPolytope,
    u: &SymplecticPotential,
    v: &WeightFunction,
    w: &WeightFunction,
    relative: bool,
    opts: &EnergyOptions,
) -> Result<EnergyReport, EnergyError> {
    let (a, b) = p.as_interval().ok_or(GeomError::NotInterval(p.dim()))?;
    let nodes = chart_nodes(u, opts);
    let eps = eps_rule(opts);
    let h_v = entropy_with(&nodes, v);
    let e_v_ric = ev_theta_with(u, &nodes, &eps, v, Theta::Ricci);
    let e_w = ew_with(&nodes, &eps, |s| w.value1(s));
    let c_vw = c_constant(p, v, w);
    let mabuchi = h_v - 2.0 * e_v_ric + c_vw * e_w;
    let ell = match extremal_affine(p, v, w) {
        Ok(l) => Some(l),
        Err(EnergyError::SingularGram(_)) if !relative => None,
        Err(e) => return Err(e),
    };
    let mabuchi_rel = if relative {
        if !(v.is_positive() && w.is_positive()) {
            return Err(EnergyError::NeedsPositiveWeights);
        }
        let l = ell.clone().expect("relative energy computed ell");
        let lw = |s: f64| l.eval1(s) * w.value1(s);
        let rule = p.default_quadrature();
        let c_rel = 2.0 * rule.integrate_boundary(|q| v.value(q)) / rule.integrate(|q| lw(q[0]));
        if (c_rel - 1.0).abs() > 1e-9 {
            return Err(EnergyError::RelativeConstant(c_rel));
        }
        Some(h_v - 2.0 * e_v_ric + ew_with(&nodes, &eps, lw))
    } else {
        None
    };
    let vol = TWO_PI * (b - a);
    let vol_v = TWO_PI * GaussRule::on_interval(opts.chart_nodes, a, b).integrate(|s| v.value1(s));
    Ok(EnergyReport {
        h_v,
        e_v_ric,
        e_w,
        c_vw,
        ell,
        mabuchi,
        mabuchi_rel,
        vol_v,
        vol,
    })
}

/// Relative energy `M_{v, ℓ_ext w}` alone.
pub fn relative_mabuchi(
    p: &MomentumPolytope,
    u: &SymplecticPotential,
    v: &WeightFunction,
    w: &WeightFunction,
    opts: &EnergyOptions,
) -> Result<f64, EnergyError> {
    Ok(mabuchi_energy(p, u, v, w, true, opts)?
        .mabuchi_rel
        .expect("relative requested"))
}

/// First variations at `u` in the direction `u + s·g`, i.e. `φ̇ = -g(m_φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstVariation {
    pub e_w: f64,
    pub e_v_omega: f64,
    pub e_v_ric: f64,
    pub mabuchi: f64,
}

pub fn first_variation(
    p: &MomentumPolytope,
    u: &SymplecticPotential,
    g: &ChebSeries,
    v: &WeightFunction,
    w: &WeightFunction,
    opts: &EnergyOptions,
) -> FirstVariation {
    let (a, b) = u.interval();
    let c = c_constant(p, v, w);
    let rule = GaussRule::on_interval(opts.chart_nodes, a, b);
    let prof = u.profile();
    let (mut e_w, mut mab) = (0.0, 0.0);
    for (&mu, &wt) in rule.nodes.iter().zip(&rule.weights) {
        let gv = g.eval(mu);
        let wv = w.value1(mu);
        e_w -= wt * gv * wv;
        let scal = prof.jet(mu).weighted_scalar_curvature(v.jet1(mu));
        mab += wt * gv * (scal - c * wv);
    }
    let reference = u.reference();
    let (mut om, mut ric) = (0.0, 0.0);
    for (&mu0, &wt) in rule.nodes.iter().zip(&rule.weights) {
        let pt = u.at_reference(mu0);
        let gv = g.eval(pt.mu);
        let (vv, dv, _) = v.jet1(pt.mu);
        let (h, m) = Theta::Kahler.data(&reference, mu0);
        om -= wt * gv * (vv * h + dv * m * pt.jac);
        let (h, m) = Theta::Ricci.data(&reference, mu0);
        ric -= wt * gv * (vv * h + dv * m * pt.jac);
    }
    FirstVariation {
        e_w: TWO_PI * e_w,
        e_v_omega: TWO_PI * om,
        e_v_ric: TWO_PI * ric,
        mabuchi: TWO_PI * mab,
    }
}

fn path_integral<F: FnMut(&SymplecticPotential) -> f64>(
    u: &SymplecticPotential,
    steps: usize,
    mut rate: F,
) -> f64 {
    let (a, b) = u.interval();
    let base = SymplecticPotential::guillemin(a, b);
    GaussRule::on_interval(steps, 0.0, 1.0).integrate(|t| rate(&base.interpolate(u, t)))
}

/// `M_{v,w}(u)` by Gauss quadrature in `t` of its first variation along `u_G + t f`.
pub fn mabuchi_path_oracle(
    p: &MomentumPolytope,
    u: &SymplecticPotential,
    v: &WeightFunction,
    w: &WeightFunction,
    steps: usize,
    opts: &EnergyOptions,
) -> f64 {
    let f = u.relative().clone();
    path_integral(u, steps, |ut| {
        first_variation(p, ut, &f, v, w, opts).mabuchi
    })
}

/// `E_v^θ(u)` by path quadrature of its first variation.
pub fn ev_theta_path_oracle(
    u: &SymplecticPotential,
    v: &WeightFunction,
    theta: Theta,
    steps: usize,
    opts: &EnergyOptions,
) -> f64 {
    let f = u.relative();
    let (a, b) = u.interval();
    let rule = GaussRule::on_interval(opts.chart_nodes, a, b);
    path_integral(u, steps, |ut| {
        let reference = ut.reference();
        let mut s = 0.0;
        for (&mu0, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let pt = ut.at_reference(mu0);
            let (vv, dv, _) = v.jet1(pt.mu);
            let (h, m) = theta.data(&reference, mu0);
            s -= wt * f.eval(pt.mu) * (vv * h + dv * m * pt.jac);
        }
        TWO_PI * s
    })
}

/// `E_w(u) = -2π ∫ w f dμ`: the first variation is constant along the path.
pub fn ew_path_oracle(u: &SymplecticPotential, w: &WeightFunction, opts: &EnergyOptions) -> f64 {
    let (a, b) = u.interval();
    let f = u.relative();
    -TWO_PI
        * GaussRule::on_interval(opts.chart_nodes, a, b).integrate(|mu| w.value1(mu) * f.eval(mu))
}

/// `H_v` recovered from the path oracles through the Chen–Tian relation.
pub fn entropy_path_oracle(
    p: &MomentumPolytope,
    u: &SymplecticPotential,
    v: &WeightFunction,
    w: &WeightFunction,
    steps: usize,
    opts: &EnergyOptions,
) -> f64 {
    let m = mabuchi_path_oracle(p, u, v, w, steps, opts);
    let ric = ev_theta_path_oracle(u, v, Theta::Ricci, steps, opts);
    m + 2.0 * ric - c_constant(p, v, w) * ew_path_oracle(u, w, opts)
}

//! Weighted extremal profiles on an interval.
//!
//! `Scal_v(H) = -(vH)''`, so the extremal equation `Scal_v(H) = ℓ w` is a
//! two-point problem for `vH` with `vH(a) = 0` and `(vH)'(a) = 2v(a)`. Once
//! `ℓ` solves the boundary moment equations, the right-end conditions
//! `vH(b) = 0` and `(vH)'(b) = -2v(b)` hold automatically.

use std::f64::consts::PI;

use thiserror::Error;

use crate::cheb::ChebSeries;
use crate::draws::Draws;
use crate::energy::{
    c_constant, mabuchi_distance, mabuchi_energy, project_affine, project_scalar_curvature,
    relative_mabuchi, AffineFunction, EnergyError, EnergyOptions,
};
use crate::gauss::GaussRule;
use crate::geodesic::{make_geodesic, GeodesicError};
use crate::polytope::{MomentumPolytope, PolytopeError, QuadratureRule};
use crate::toricgeom::{GeomError, MomentumProfile, SymplecticPotential};
use crate::weights::WeightFunction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtremalError {
    #[error("no invariant extremal metric for these weights: H = {value} at mu = {at}")]
    NotPositive { at: f64, value: f64 },
    #[error("extremal solving needs a positive weight v")]
    NeedsPositiveWeights,
    #[error("configurations {first} and {second} disagree by {diff:e}")]
    UniquenessViolated {
        first: usize,
        second: usize,
        diff: f64,
    },
    #[error("sub-slope inequality violated by {margin:e}")]
    InequalityViolated { margin: f64 },
    #[error("energy below the extremal value by {margin:e}")]
    MinimalityViolated { margin: f64 },
    #[error("the solved profile has no resolvable symplectic potential")]
    PotentialUnresolved,
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
}

/// Quadrature order for the moments and the τ-integrals, and Chebyshev
/// degree of the stored profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub quad_order: usize,
    pub degree: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            quad_order: 32,
            degree: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalSolution {
    pub profile: MomentumProfile,
    pub ell: AffineFunction,
    /// `|(vH)(b)|`
    pub r1: f64,
    /// `|(vH)'(b) + 2v(b)|`
    pub r2: f64,
    /// Minimum of `H` over interior nodes.
    pub positivity_margin: f64,
    /// `sup |Scal_v(H) - ℓ w|`.
    pub residual_sup: f64,
    /// Relative symplectic potential of the solution, gauged at the center.
    /// `None` when `f''` has a pole too close to an endpoint to be resolved
    /// at the maximal Chebyshev degree.
    pub potential: Option<SymplecticPotential>,
    pub config: SolverConfig,
}

/// `vH` and `(vH)'` at `μ` from the left-end data.
fn vh_from_left(
    a: f64,
    mu: f64,
    va: f64,
    ell: &AffineFunction,
    w: &WeightFunction,
    tau: &GaussRule,
) -> (f64, f64) {
    let len = mu - a;
    let (mut i0, mut i1) = (0.0, 0.0);
    for (&t, &wt) in tau.nodes.iter().zip(&tau.weights) {
        let s = a + len * t;
        let lw = ell.eval1(s) * w.value1(s);
        i0 += wt * lw;
        i1 += wt * (1.0 - t) * lw;
    }
    (2.0 * va * len - len * len * i1, 2.0 * va - len * i0)
}

/// `(vH)(μ)` for an arbitrary `ℓ`, with the two right-end residuals.
pub fn endpoint_residuals(
    a: f64,
    b: f64,
    ell: &AffineFunction,
    v: &WeightFunction,
    w: &WeightFunction,
    quad_order: usize,
) -> (f64, f64) {
    let tau = GaussRule::on_interval(quad_order, 0.0, 1.0);
    let (vh, dvh) = vh_from_left(a, b, v.value1(a), ell, w, &tau);
    (vh.abs(), (dvh + 2.0 * v.value1(b)).abs())
}

pub fn solve_extremal_profile(
    p: &MomentumPolytope,
    v: &WeightFunction,
    w: &WeightFunction,
    config: &SolverConfig,
) -> Result<ExtremalSolution, ExtremalError> {
    let (a, b) = p.as_interval().ok_or(GeomError::NotInterval(p.dim()))?;
    if !v.is_positive() {
        return Err(ExtremalError::NeedsPositiveWeights);
    }
    let rule = p.quadrature(config.quad_order)?;
    let ell = boundary_projection(&rule, v, w)?;
    let tau = GaussRule::on_interval(config.quad_order, 0.0, 1.0);
    let va = v.value1(a);
    let (r1, r2) = {
        let (vh, dvh) = vh_from_left(a, b, va, &ell, w, &tau);
        (vh.abs(), (dvh + 2.0 * v.value1(b)).abs())
    };

    let check = GaussRule::on_interval(256, a, b);
    let mut positivity_margin = f64::INFINITY;
    for &mu in &check.nodes {
        let h = vh_from_left(a, mu, va, &ell, w, &tau).0 / v.value1(mu);
        if !(h > 0.0) {
            return Err(ExtremalError::NotPositive { at: mu, value: h });
        }
        positivity_margin = positivity_margin.min(h);
    }
    // H is built from a fit of H'' so that second derivatives carry no
    // amplified interpolation noise; H(a) = H(b) = 0 fixes the affine part
    let ddh = adaptive_fit(a, b, config.degree, |mu| {
        let (vh, dvh) = vh_from_left(a, mu, va, &ell, w, &tau);
        let (vv, dv, ddv) = v.jet1(mu);
        let h = vh / vv;
        let dh = (dvh - dv * h) / vv;
        (-ell.eval1(mu) * w.value1(mu) - 2.0 * dv * dh - ddv * h) / vv
    });
    let g = ddh.integral(a).integral(a);
    let slope = -g.eval(b) / (b - a);
    let series = g.combine(1.0, &ChebSeries::affine(a, b, -slope * a, slope), 1.0);
    let profile = MomentumProfile::from_series(series)?;
    let residual_sup = check
        .nodes
        .iter()
        .map(|&mu| {
            let scal = profile.jet(mu).weighted_scalar_curvature(v.jet1(mu));
            (scal - ell.eval1(mu) * w.value1(mu)).abs()
        })
        .fold(0.0, f64::max);
    let potential = relative_potential(a, b, &ell, v, w, &tau, config.degree).ok();
    Ok(ExtremalSolution {
        profile,
        ell,
        r1,
        r2,
        positivity_margin,
        residual_sup,
        potential,
        config: *config,
    })
}

fn boundary_projection(
    rule: &QuadratureRule,
    v: &WeightFunction,
    w: &WeightFunction,
) -> Result<AffineFunction, EnergyError> {
    let rhs = [
        2.0 * rule.integrate_boundary(|q| v.value(q)),
        2.0 * rule.integrate_boundary(|q| q[0] * v.value(q)),
    ];
    project_affine(rule, |q| w.value(q), &rhs)
}

/// `f = u - u_G` of the solved profile. `f'' = v/(vH) - 1/H_G` is evaluated
/// in a form free of the endpoint cancellation: on each half of the interval
/// both terms are expanded around the nearer endpoint.
fn relative_potential(
    a: f64,
    b: f64,
    ell: &AffineFunction,
    v: &WeightFunction,
    w: &WeightFunction,
    tau: &GaussRule,
    degree: usize,
) -> Result<SymplecticPotential, GeomError> {
    // steep weights put a pole of f'' close to an endpoint
    let fpp = adaptive_fit(a, b, degree, |mu| stable_fpp(a, b, mu, ell, v, w, tau));
    let c = 0.5 * (a + b);
    SymplecticPotential::new(fpp.integral(c).integral(c))
}

const MAX_DEGREE: usize = 2048;

/// Chebyshev fit whose degree is doubled from `degree` until the top quarter
/// of the coefficients is at rounding level, then chopped.
fn adaptive_fit<F: FnMut(f64) -> f64>(a: f64, b: f64, degree: usize, mut f: F) -> ChebSeries {
    let mut n = degree.max(8);
    loop {
        let s = ChebSeries::fit(a, b, n, &mut f);
        let top = s.tail_max(0).max(s.coeffs()[0].abs());
        if s.tail_max(3 * n / 4) <= 1e-14 * top || n >= MAX_DEGREE {
            return s.chopped(1e-15);
        }
        n *= 2;
    }
}

fn stable_fpp(
    a: f64,
    b: f64,
    mu: f64,
    ell: &AffineFunction,
    v: &WeightFunction,
    w: &WeightFunction,
    tau: &GaussRule,
) -> f64 {
    let (va, vb) = (v.value1(a), v.value1(b));
    let mid = 0.5 * (a + b);
    {
        let (mut i_end, mut dv_mean) = (0.0, 0.0);
        if mu <= mid {
            let len = mu - a;
            for (&t, &wt) in tau.nodes.iter().zip(&tau.weights) {
                let s = a + len * t;
                i_end += wt * (1.0 - t) * ell.eval1(s) * w.value1(s);
                dv_mean += wt * v.d1(s);
            }
            let big_a = 2.0 * va - len * i_end;
            (2.0 * (b - mu) * dv_mean - 2.0 * va + (b - a) * i_end) / (2.0 * (b - mu) * big_a)
        } else {
            let len = b - mu;
            for (&t, &wt) in tau.nodes.iter().zip(&tau.weights) {
                let s = b - len * t;
                i_end += wt * (1.0 - t) * ell.eval1(s) * w.value1(s);
                dv_mean += wt * v.d1(s);
            }
            let big_b = 2.0 * vb - len * i_end;
            (-2.0 * (mu - a) * dv_mean - 2.0 * vb + (b - a) * i_end) / (2.0 * (mu - a) * big_b)
        }
    }
}

/// `(sup |Scal_v(H) - ℓ w|, ℓ)` with `ℓ` re-projected from `Scal_v(H)`.
pub fn verify_extremal(
    p: &MomentumPolytope,
    h: &MomentumProfile,
    v: &WeightFunction,
    w: &WeightFunction,
) -> Result<(f64, AffineFunction), ExtremalError> {
    let ell = project_scalar_curvature(p, h, v, w)?;
    let (a, b) = h.interval();
    let residual = GaussRule::on_interval(256, a, b)
        .nodes
        .iter()
        .map(|&mu| {
            let scal = h.jet(mu).weighted_scalar_curvature(v.jet1(mu));
            (scal - ell.eval1(mu) * w.value1(mu)).abs()
        })
        .fold(0.0, f64::max);
    Ok((residual, ell))
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    pub solutions: Vec<ExtremalSolution>,
    pub max_profile_diff: f64,
    pub max_ell_diff: f64,
}

/// Three solver configurations differing in quadrature order and degree.
pub fn default_configs() -> Vec<SolverConfig> {
    vec![
        SolverConfig {
            quad_order: 24,
            degree: 48,
        },
        SolverConfig {
            quad_order: 32,
            degree: 64,
        },
        SolverConfig {
            quad_order: 48,
            degree: 96,
        },
    ]
}

/// Solves with each configuration and compares profiles and `ℓ` pairwise.
pub fn uniqueness_probe(
    p: &MomentumPolytope,
    v: &WeightFunction,
    w: &WeightFunction,
    configs: &[SolverConfig],
) -> Result<UniquenessReport, ExtremalError> {
    let solutions = configs
        .iter()
        .map(|c| solve_extremal_profile(p, v, w, c))
        .collect::<Result<Vec<_>, _>>()?;
    let (a, b) = p.as_interval().ok_or(GeomError::NotInterval(p.dim()))?;
    let nodes = GaussRule::on_interval(200, a, b).nodes;
    let (mut max_profile_diff, mut max_ell_diff) = (0.0_f64, 0.0_f64);
    for i in 0..solutions.len() {
        for j in i + 1..solutions.len() {
            let (s, t) = (&solutions[i], &solutions[j]);
            let dh = nodes
                .iter()
                .chain(&[a, b])
                .map(|&mu| (s.profile.h(mu) - t.profile.h(mu)).abs())
                .fold(0.0, f64::max);
            let dl = (s.ell.constant - t.ell.constant)
                .abs()
                .max((s.ell.slope[0] - t.ell.slope[0]).abs());
            max_profile_diff = max_profile_diff.max(dh);
            max_ell_diff = max_ell_diff.max(dl);
            if dh > 1e-8 || dl > 1e-10 {
                return Err(ExtremalError::UniquenessViolated {
                    first: i,
                    second: j,
                    diff: dh.max(dl),
                });
            }
        }
    }
    Ok(UniquenessReport {
        solutions,
        max_profile_diff,
        max_ell_diff,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubslopeReport {
    /// `M(φ_1) - M(φ_0)`
    pub lhs: f64,
    /// `-d(φ_0, φ_1)·‖Scal_v(φ_0) - c w‖_{L²(ω_{φ_0})}`
    pub rhs: f64,
    /// Same bound with the norm taken without `c`.
    pub rhs_without_c: f64,
    /// `-d/vol_v · ‖Scal_v(φ_0) - c w‖` in the volume-normalized measure.
    pub rhs_normalized: f64,
    pub norm: f64,
    pub distance: f64,
    pub margin: f64,
    pub passed: bool,
}

impl SubslopeReport {
    pub fn check(&self) -> Result<(), ExtremalError> {
        if self.passed {
            Ok(())
        } else {
            Err(ExtremalError::InequalityViolated {
                margin: self.margin,
            })
        }
    }
}

/// Lower bound on the energy change from `u0` to `u1` by its slope at `u0`.
pub fn subslope_check(
    p: &MomentumPolytope,
    u0: &SymplecticPotential,
    u1: &SymplecticPotential,
    v: &WeightFunction,
    w: &WeightFunction,
    tol: f64,
    opts: &EnergyOptions,
) -> Result<SubslopeReport, ExtremalError> {
    let m0 = mabuchi_energy(p, u0, v, w, false, opts)?;
    let m1 = mabuchi_energy(p, u1, v, w, false, opts)?;
    let lhs = m1.mabuchi - m0.mabuchi;
    let c = c_constant(p, v, w);
    let (a, b) = u0.interval();
    let prof = u0.profile();
    let rule = GaussRule::on_interval(opts.chart_nodes, a, b);
    let (mut sq, mut sq_plain) = (0.0, 0.0);
    for (&mu, &wt) in rule.nodes.iter().zip(&rule.weights) {
        let scal = prof.jet(mu).weighted_scalar_curvature(v.jet1(mu));
        let wv = w.value1(mu);
        sq += wt * (scal - c * wv).powi(2);
        sq_plain += wt * (scal - wv).powi(2);
    }
    let norm = (2.0 * PI * sq).sqrt();
    let norm_plain = (2.0 * PI * sq_plain).sqrt();
    let distance = mabuchi_distance(u0, u1, opts);
    let rhs = -distance * norm;
    let rhs_normalized = -distance / m0.vol_v * norm / m0.vol.sqrt();
    let scale = 1.0_f64.max(m0.mabuchi.abs()).max(m1.mabuchi.abs());
    let margin = lhs - rhs;
    Ok(SubslopeReport {
        lhs,
        rhs,
        rhs_without_c: -distance * norm_plain,
        rhs_normalized,
        norm,
        distance,
        margin,
        passed: margin >= -tol * scale,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizationReport {
    pub value_at_solution: f64,
    /// `min_k M^rel(u_k) - M^rel(solution)` over the perturbations.
    pub min_margin: f64,
    /// Smallest second difference of `M^rel` along geodesics through the solution.
    pub min_second_difference: f64,
    /// Whether every geodesic scan attains its smallest value at the solution.
    pub minimum_at_solution: bool,
    /// Margin ratio for perturbation sizes `δ` and `δ/2`; near 4 at a critical point.
    pub quadratic_ratio: f64,
}

/// `M^rel` at the solution against random admissible perturbations, plus
/// geodesic scans through the solution.
#[allow(clippy::too_many_arguments)]
pub fn minimization_check(
    p: &MomentumPolytope,
    solution: &ExtremalSolution,
    v: &WeightFunction,
    w: &WeightFunction,
    samples: usize,
    draws: &mut Draws,
    tol: f64,
    opts: &EnergyOptions,
) -> Result<MinimizationReport, ExtremalError> {
    let base = solution
        .potential
        .as_ref()
        .ok_or(ExtremalError::PotentialUnresolved)?;
    let value_at_solution = relative_mabuchi(p, base, v, w, opts)?;
    let (a, b) = base.interval();
    let mut min_margin = f64::INFINITY;
    let mut perturbed = Vec::with_capacity(samples);
    for _ in 0..samples {
        let u = draws.perturb(base, 6, 0.3);
        min_margin = min_margin.min(relative_mabuchi(p, &u, v, w, opts)? - value_at_solution);
        perturbed.push(u);
    }

    // geodesics from 2·base - u to u pass through the solution at t = ½
    let mut min_second_difference = f64::INFINITY;
    let mut minimum_at_solution = true;
    let n = 11;
    for u in perturbed.iter().take(3) {
        let diff = u.relative().combine(1.0, base.relative(), -1.0);
        let mirror = match SymplecticPotential::new(base.relative().combine(1.0, &diff, -1.0)) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let path = make_geodesic(&mirror, u)?;
        let vals = (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                relative_mabuchi(
                    p,
                    &crate::geodesic::PotentialPath::potential(&path, t),
                    v,
                    w,
                    opts,
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        let dt = 1.0 / (n - 1) as f64;
        for i in 1..n - 1 {
            let d2 = (vals[i - 1] - 2.0 * vals[i] + vals[i + 1]) / (dt * dt);
            min_second_difference = min_second_difference.min(d2);
        }
        let mid = vals[n / 2];
        if vals.iter().any(|&x| x < mid - tol * (1.0 + mid.abs())) {
            minimum_at_solution = false;
        }
    }

    let probe = draws.series(a, b, 4, 0.2);
    let margin_at = |scale: f64| -> Result<f64, ExtremalError> {
        let u = SymplecticPotential::new(base.relative().combine(1.0, &probe, scale))?;
        Ok(relative_mabuchi(p, &u, v, w, opts)? - value_at_solution)
    };
    let quadratic_ratio = margin_at(0.1)? / margin_at(0.05)?;

    let report = MinimizationReport {
        value_at_solution,
        min_margin,
        min_second_difference,
        minimum_at_solution,
        quadratic_ratio,
    };
    if min_margin < -tol * (1.0 + value_at_solution.abs()) {
        return Err(ExtremalError::MinimalityViolated { margin: min_margin });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightFamily;

    fn interval() -> MomentumPolytope {
        MomentumPolytope::interval(-1.0, 1.0).unwrap()
    }

    fn weight(f: WeightFamily) -> WeightFunction {
        WeightFunction::new(f, 1.0, &interval(), true).unwrap()
    }

    #[test]
    fn round_sphere_is_recovered() {
        let one = weight(WeightFamily::Constant(1.0));
        let s = solve_extremal_profile(&interval(), &one, &one, &SolverConfig::default()).unwrap();
        let c = s.profile.series().unwrap().coeffs();
        assert!((c[0] - 0.5).abs() < 1e-12);
        assert!((c[2] + 0.5).abs() < 1e-12);
        assert!(c
            .iter()
            .enumerate()
            .all(|(k, x)| k == 0 || k == 2 || x.abs() < 1e-12));
        assert!((s.ell.constant - 2.0).abs() < 1e-14);
        assert!(s.ell.slope[0].abs() < 1e-14);
        assert!(s.r1 < 1e-12 && s.r2 < 1e-12);
        assert!(s
            .potential
            .as_ref()
            .unwrap()
            .relative()
            .coeffs()
            .iter()
            .all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn soliton_weights_solve_to_tolerance() {
        let v = weight(WeightFamily::Exponential { xi: vec![0.5] });
        let s = solve_extremal_profile(&interval(), &v, &v, &SolverConfig::default()).unwrap();
        assert!(s.residual_sup < 1e-9, "{}", s.residual_sup);
        assert!(s.r1 < 1e-10 && s.r2 < 1e-10);
        let (res, ell) = verify_extremal(&interval(), &s.profile, &v, &v).unwrap();
        assert!(res < 1e-9);
        assert!((ell.constant - s.ell.constant).abs() < 1e-10);
        assert!((ell.slope[0] - s.ell.slope[0]).abs() < 1e-10);
        // the converted potential reproduces the profile
        let h2 = s.potential.as_ref().unwrap().profile();
        for &mu in &[-0.99, -0.5, 0.0, 0.4, 0.97] {
            assert!((h2.h(mu) - s.profile.h(mu)).abs() < 1e-10);
        }
    }

    #[test]
    fn scaling_w_scales_ell_only() {
        let v = weight(WeightFamily::Exponential { xi: vec![0.3] });
        let w = weight(WeightFamily::Affine {
            constant: 1.0,
            slope: vec![0.2],
        });
        let s = solve_extremal_profile(&interval(), &v, &w, &SolverConfig::default()).unwrap();
        let s2 = solve_extremal_profile(&interval(), &v, &w.scaled(3.0), &SolverConfig::default())
            .unwrap();
        assert!((s2.ell.constant * 3.0 - s.ell.constant).abs() < 1e-13);
        assert!((s2.profile.h(0.3) - s.profile.h(0.3)).abs() < 1e-13);
    }

    #[test]
    fn perturbed_ell_breaks_endpoint_residuals() {
        let v = weight(WeightFamily::Exponential { xi: vec![0.5] });
        let s = solve_extremal_profile(&interval(), &v, &v, &SolverConfig::default()).unwrap();
        let mut bad = s.ell.clone();
        bad.slope[0] += 1e-3;
        let (r1, r2) = endpoint_residuals(-1.0, 1.0, &bad, &v, &v, 32);
        assert!(r1 > 1e-5 && r2 > 1e-5);
    }

    #[test]
    fn residual_grows_linearly_under_perturbation() {
        let one = weight(WeightFamily::Constant(1.0));
        let res = |d: f64| {
            let h = ChebSeries::fit(-1.0, 1.0, 8, |m| (1.0 - m * m) * (1.0 + d * m * m));
            verify_extremal(
                &interval(),
                &MomentumProfile::from_series(h).unwrap(),
                &one,
                &one,
            )
            .unwrap()
            .0
        };
        assert!(res(0.0) < 1e-12);
        let r = res(2e-3) / res(1e-3);
        assert!((r - 2.0).abs() < 0.05, "{r}");
    }

    #[test]
    fn infeasible_weights_are_reported() {
        // with w > 0 the profile is always positive on an interval; a
        // sign-changing w can make vH dip below zero
        let v = weight(WeightFamily::Constant(1.0));
        let w = WeightFunction::new(
            WeightFamily::Polynomial(vec![-0.2, 0.0, 1.0]),
            1.0,
            &interval(),
            false,
        )
        .unwrap();
        match solve_extremal_profile(&interval(), &v, &w, &SolverConfig::default()) {
            Err(ExtremalError::NotPositive { .. }) => {}
            other => panic!("expected NotPositive, got {other:?}"),
        }
    }
}

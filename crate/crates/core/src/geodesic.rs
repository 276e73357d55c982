//! Geodesics in the space of invariant Kähler potentials.
//!
//! On a toric manifold the geodesic between `u_0` and `u_1` is the straight
//! line `u_t = (1 - t) u_0 + t u_1` of symplectic potentials. At a fixed chart
//! point the Kähler potential then satisfies `φ̈ = H_t (f_1 - f_0)'(μ_t)²`,
//! which [`geodesic_residual`] checks by finite differences.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use crate::cheb::{lobatto_diff_matrix, lobatto_points, ChebSeries};
use crate::energy::{energy_ev_theta, mabuchi_energy, EnergyError, EnergyOptions, Theta};
use crate::gauss::GaussRule;
use crate::numdiff;
use crate::polytope::MomentumPolytope;
use crate::toricgeom::SymplecticPotential;
use crate::weights::WeightFunction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeodesicError {
    #[error("endpoints live on different intervals")]
    IntervalMismatch,
    #[error("{name} failed at t = {t}: {magnitude:e}")]
    VerdictFailed {
        name: String,
        t: f64,
        magnitude: f64,
    },
    #[error("Newton iteration did not converge (residuals {trace:?})")]
    NewtonDiverged { trace: Vec<f64> },
    #[error("fiber metric not positive at mu0 = {mu0}, t = {t}")]
    InadmissibleFiber { mu0: f64, t: f64 },
    #[error("bad grid or parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

/// A one-parameter family of potentials with its `t`-derivatives.
pub trait PotentialPath: Sync {
    fn potential(&self, t: f64) -> SymplecticPotential;
    /// `∂_t f` at `t`.
    fn velocity(&self, t: f64) -> ChebSeries;
}

/// `u_t = u_G + (1 - t) f_0 + t f_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    u0: SymplecticPotential,
    u1: SymplecticPotential,
    g: ChebSeries,
}

pub fn make_geodesic(
    u0: &SymplecticPotential,
    u1: &SymplecticPotential,
) -> Result<GeodesicPath, GeodesicError> {
    if u0.interval() != u1.interval() {
        return Err(GeodesicError::IntervalMismatch);
    }
    Ok(GeodesicPath {
        u0: u0.clone(),
        u1: u1.clone(),
        g: u1.relative().combine(1.0, u0.relative(), -1.0),
    })
}

impl GeodesicPath {
    pub fn start(&self) -> &SymplecticPotential {
        &self.u0
    }

    pub fn end(&self) -> &SymplecticPotential {
        &self.u1
    }

    pub fn reversed(&self) -> Self {
        make_geodesic(&self.u1, &self.u0).expect("same interval")
    }

    /// `f_1 - f_0`; the Kähler velocity is `φ̇ = -(f_1 - f_0)(m_{φ_t})`.
    pub fn direction(&self) -> &ChebSeries {
        &self.g
    }

    /// `∫_X φ̇² ω_{φ_t} = 2π ∫ (f_1 - f_0)(μ_t)² J_t dμ_0`.
    pub fn speed_squared(&self, t: f64, opts: &EnergyOptions) -> f64 {
        let u = self.potential(t);
        let (a, b) = u.interval();
        2.0 * PI
            * GaussRule::on_interval(opts.chart_nodes, a, b).integrate(|mu0| {
                let p = u.at_reference(mu0);
                let g = self.g.eval(p.mu);
                g * g * p.jac
            })
    }
}

impl PotentialPath for GeodesicPath {
    fn potential(&self, t: f64) -> SymplecticPotential {
        self.u0.interpolate(&self.u1, t)
    }

    fn velocity(&self, _t: f64) -> ChebSeries {
        self.g.clone()
    }
}

/// `u_t = u_0 + t² (f_1 - f_0)`: same endpoints, not a geodesic.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticPath {
    u0: SymplecticPotential,
    u1: SymplecticPotential,
    g: ChebSeries,
}

impl QuadraticPath {
    pub fn new(u0: &SymplecticPotential, u1: &SymplecticPotential) -> Result<Self, GeodesicError> {
        let p = make_geodesic(u0, u1)?;
        Ok(QuadraticPath {
            u0: p.u0,
            u1: p.u1,
            g: p.g,
        })
    }
}

impl PotentialPath for QuadraticPath {
    fn potential(&self, t: f64) -> SymplecticPotential {
        self.u0.interpolate(&self.u1, t * t)
    }

    fn velocity(&self, t: f64) -> ChebSeries {
        self.g.scaled(2.0 * t)
    }
}

/// Step for the second difference in `t`.
pub const RESIDUAL_STEP: f64 = 1e-3;

/// `sup |φ̈ - |dφ̇|²_{φ_t}|` over the sampled `t` and chart points.
pub fn geodesic_residual<P: PotentialPath>(path: &P, ts: &[f64], xs: &[f64]) -> f64 {
    ts.par_iter()
        .map(|&t| {
            let u = path.potential(t);
            let dg = path.velocity(t).derivative();
            let prof = u.profile();
            xs.iter()
                .map(|&x| {
                    let phi_tt = numdiff::second_derivative(
                        |s| {
                            let us = path.potential(s);
                            us.kahler_potential(&us.at_chart(x))
                        },
                        t,
                        RESIDUAL_STEP,
                    );
                    let mu = u.momentum(x);
                    let grad = prof.h(mu) * dg.eval(mu).powi(2);
                    (phi_tt - grad).abs()
                })
                .fold(0.0_f64, f64::max)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    /// Signed slack: non-negative when the check passes.
    pub margin: f64,
}

impl Verdict {
    pub fn new(name: &str, passed: bool, margin: f64) -> Self {
        Verdict {
            name: name.to_string(),
            passed,
            margin,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ScanRow {
    pub t: f64,
    pub e_w: f64,
    pub e_v_ric: f64,
    pub h_v: f64,
    pub mabuchi: f64,
    pub mabuchi_rel: Option<f64>,
    /// Second difference quotient of `M` at interior samples.
    pub d2m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyScan {
    pub rows: Vec<ScanRow>,
    pub verdicts: Vec<Verdict>,
    pub min_d2m: f64,
    pub min_d2m_at: f64,
    pub chord_deviation: f64,
    pub speed_deviation: f64,
    pub scale: f64,
}

impl EnergyScan {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    /// The first failing verdict as an error.
    pub fn check(&self) -> Result<(), GeodesicError> {
        match self.verdicts.iter().find(|v| !v.passed) {
            None => Ok(()),
            Some(v) => Err(GeodesicError::VerdictFailed {
                name: v.name.clone(),
                t: if v.name == "convexity" {
                    self.min_d2m_at
                } else {
                    f64::NAN
                },
                magnitude: v.margin,
            }),
        }
    }
}

/// Tolerances for [`scan_energies`], as multiples of the scan scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanTolerances {
    pub convexity: f64,
    pub chord: f64,
    pub speed: f64,
}

impl Default for ScanTolerances {
    fn default() -> Self {
        ScanTolerances {
            convexity: 1e-6,
            chord: 1e-8,
            speed: 1e-10,
        }
    }
}

/// Energies at `n` equally spaced `t` with convexity, affinity and speed verdicts.
/// The relative energy is included when both weights are positive.
pub fn scan_energies(
    p: &MomentumPolytope,
    path: &GeodesicPath,
    n: usize,
    v: &WeightFunction,
    w: &WeightFunction,
    tol: &ScanTolerances,
    opts: &EnergyOptions,
) -> Result<EnergyScan, GeodesicError> {
    if n < 5 {
        return Err(GeodesicError::BadParams(format!(
            "need at least 5 samples, got {n}"
        )));
    }
    let relative = v.is_positive() && w.is_positive();
    let ts: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let reports = ts
        .par_iter()
        .map(|&t| mabuchi_energy(p, &path.potential(t), v, w, relative, opts))
        .collect::<Result<Vec<_>, _>>()?;
    let dt = 1.0 / (n - 1) as f64;
    let mut rows: Vec<ScanRow> = ts
        .iter()
        .zip(&reports)
        .map(|(&t, r)| ScanRow {
            t,
            e_w: r.e_w,
            e_v_ric: r.e_v_ric,
            h_v: r.h_v,
            mabuchi: r.mabuchi,
            mabuchi_rel: r.mabuchi_rel,
            d2m: None,
        })
        .collect();
    let (mut min_d2m, mut min_d2m_at) = (f64::INFINITY, f64::NAN);
    for i in 1..n - 1 {
        let d2 = (rows[i - 1].mabuchi - 2.0 * rows[i].mabuchi + rows[i + 1].mabuchi) / (dt * dt);
        rows[i].d2m = Some(d2);
        if d2 < min_d2m {
            min_d2m = d2;
            min_d2m_at = rows[i].t;
        }
    }
    let scale = rows.iter().fold(1.0_f64, |m, r| m.max(r.mabuchi.abs()));
    let (ew0, ew1) = (rows[0].e_w, rows[n - 1].e_w);
    let ew_scale = rows.iter().fold(1.0_f64, |m, r| m.max(r.e_w.abs()));
    let chord_deviation = rows
        .iter()
        .map(|r| (r.e_w - ((1.0 - r.t) * ew0 + r.t * ew1)).abs())
        .fold(0.0, f64::max);
    let speeds: Vec<f64> = ts
        .par_iter()
        .map(|&t| path.speed_squared(t, opts))
        .collect();
    let d2 = crate::energy::mabuchi_distance(&path.u0, &path.u1, opts).powi(2);
    let speed_deviation = speeds.iter().map(|s| (s - d2).abs()).fold(0.0, f64::max);

    let conv_tol = tol.convexity * scale;
    let chord_tol = tol.chord * ew_scale;
    let speed_tol = tol.speed * (1.0 + d2);
    let verdicts = vec![
        Verdict::new("convexity", min_d2m >= -conv_tol, min_d2m + conv_tol),
        Verdict::new(
            "ew_affine",
            chord_deviation <= chord_tol,
            chord_tol - chord_deviation,
        ),
        Verdict::new(
            "constant_speed",
            speed_deviation <= speed_tol,
            speed_tol - speed_deviation,
        ),
    ];
    Ok(EnergyScan {
        rows,
        verdicts,
        min_d2m,
        min_d2m_at,
        chord_deviation,
        speed_deviation,
        scale,
    })
}

/// Closed-form and finite-difference values of `d²/dt² E_v^θ(u_t)`.
pub fn second_variation_check(
    path: &GeodesicPath,
    t: f64,
    v: &WeightFunction,
    theta: Theta,
    opts: &EnergyOptions,
) -> (f64, f64) {
    let u = path.potential(t);
    let (a, b) = u.interval();
    let g = u.reference();
    let dg = path.g.derivative();
    let prof = u.profile();
    let density = match theta {
        Theta::Kahler => 1.0,
        Theta::Ricci => -0.5 * g.ddh(),
    };
    let closed = 2.0
        * PI
        * GaussRule::on_interval(opts.chart_nodes, a, b).integrate(|mu0| {
            let mu = u.at_reference(mu0).mu;
            density * prof.h(mu) * dg.eval(mu).powi(2) * v.value1(mu)
        });
    let fd = numdiff::second_derivative(
        |s| energy_ev_theta(&path.potential(s), v, theta, opts),
        t,
        1e-2,
    );
    (closed, fd)
}

/// Grid sizes for [`epsilon_geodesic`]: Chebyshev–Lobatto intervals in `μ_0` and `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsGrid {
    pub mu_intervals: usize,
    pub t_intervals: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EpsGrid {
    fn default() -> Self {
        EpsGrid {
            mu_intervals: 32,
            t_intervals: 16,
            tol: 1e-10,
            max_iter: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsGeodesicSolution {
    pub eps: f64,
    /// Lobatto nodes in the reference momentum, from `b` down to `a`.
    pub mu_nodes: Vec<f64>,
    /// Lobatto nodes in `t`, from 1 down to 0.
    pub t_nodes: Vec<f64>,
    /// `values[i * t_nodes.len() + k] = Φ(mu_nodes[i], t_nodes[k])`.
    pub values: Vec<f64>,
    /// Sup-norm residual after each Newton step, starting from the initial guess.
    pub trace: Vec<f64>,
    /// Linear geodesic on the same grid.
    pub linear: Vec<f64>,
}

impl EpsGeodesicSolution {
    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.t_nodes.len() + k]
    }

    /// `sup |Φ^ε - Φ_lin|` over the grid.
    pub fn distance_to_linear(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.linear)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Kähler potential of `u` at the chart point with reference momentum `mu0`,
/// including the endpoint limits.
fn potential_at_reference(u: &SymplecticPotential, mu0: f64) -> f64 {
    let (a, b) = u.interval();
    if mu0 <= a || mu0 >= b {
        u.endpoint_potential(mu0.clamp(a, b))
    } else {
        u.kahler_potential(&u.at_reference(mu0))
    }
}

/// Solves the invariant ε-regularized geodesic equation
/// `(1 + (H_G Φ_μ)_μ) Φ_tt - H_G Φ_μt² = ε` on `[a, b] × [0, 1]` with
/// `Φ(·, 0) = φ_0`, `Φ(·, 1) = φ_1`. The coefficient `H_G` vanishes at the
/// momentum endpoints, so no boundary condition is imposed there. Collocation
/// on Chebyshev–Lobatto grids, damped Newton from the linear geodesic.
pub fn epsilon_geodesic(
    u0: &SymplecticPotential,
    u1: &SymplecticPotential,
    eps: f64,
    grid: &EpsGrid,
) -> Result<EpsGeodesicSolution, GeodesicError> {
    if !(eps > 0.0) {
        return Err(GeodesicError::BadParams(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if grid.mu_intervals < 16 || grid.t_intervals < 16 {
        return Err(GeodesicError::BadParams(
            "grid must be at least 16x16".into(),
        ));
    }
    let path = make_geodesic(u0, u1)?;
    let (a, b) = u0.interval();
    let g = u0.reference();
    let (nm, nt) = (grid.mu_intervals + 1, grid.t_intervals + 1);
    let mus = lobatto_points(grid.mu_intervals, a, b);
    let ts = lobatto_points(grid.t_intervals, 0.0, 1.0);
    let dm = DMatrix::from_row_slice(nm, nm, &lobatto_diff_matrix(grid.mu_intervals, a, b));
    let dt = DMatrix::from_row_slice(nt, nt, &lobatto_diff_matrix(grid.t_intervals, 0.0, 1.0));
    let dtt = &dt * &dt;
    let h0 = DVector::from_iterator(nm, mus.iter().map(|&m| g.h(m)));
    let a_op = &dm * DMatrix::from_diagonal(&h0) * &dm;

    // Φ is stored as an nm x nt matrix; column 0 is t = 1, column nt-1 is t = 0.
    let linear = DMatrix::from_fn(nm, nt, |i, k| {
        potential_at_reference(&path.potential(ts[k]), mus[i])
    });
    let mut phi = linear.clone();
    let interior: Vec<usize> = (1..nt - 1).collect();
    let unknowns = nm * interior.len();
    let col = |i: usize, kk: usize| i * interior.len() + kk;

    let residual = |phi: &DMatrix<f64>| -> DMatrix<f64> {
        let ptt = phi * dtt.transpose();
        let pmt = &dm * phi * dt.transpose();
        let jac = a_op.clone() * phi;
        DMatrix::from_fn(nm, interior.len(), |i, kk| {
            let k = interior[kk];
            (1.0 + jac[(i, k)]) * ptt[(i, k)] - h0[i] * pmt[(i, k)].powi(2) - eps
        })
    };
    let sup = |r: &DMatrix<f64>| r.iter().fold(0.0_f64, |m, x| m.max(x.abs()));

    let mut r = residual(&phi);
    let mut trace = vec![sup(&r)];
    let mut converged = trace[0] <= grid.tol;
    for _ in 0..grid.max_iter {
        if converged {
            break;
        }
        let ptt = &phi * dtt.transpose();
        let pmt = &dm * &phi * dt.transpose();
        let jac = a_op.clone() * &phi;
        let mut jm = DMatrix::<f64>::zeros(unknowns, unknowns);
        for i in 0..nm {
            for (kk, &k) in interior.iter().enumerate() {
                let row = col(i, kk);
                let jik = 1.0 + jac[(i, k)];
                for j in 0..nm {
                    jm[(row, col(j, kk))] += a_op[(i, j)] * ptt[(i, k)];
                }
                for (ll, &l) in interior.iter().enumerate() {
                    jm[(row, col(i, ll))] += jik * dtt[(k, l)];
                    let c = -2.0 * h0[i] * pmt[(i, k)] * dt[(k, l)];
                    if c != 0.0 {
                        for j in 0..nm {
                            jm[(row, col(j, ll))] += c * dm[(i, j)];
                        }
                    }
                }
            }
        }
        let rhs = DVector::from_iterator(
            unknowns,
            (0..nm)
                .flat_map(|i| (0..interior.len()).map(move |kk| (i, kk)))
                .map(|(i, kk)| -r[(i, kk)]),
        );
        let step = jm
            .lu()
            .solve(&rhs)
            .ok_or_else(|| GeodesicError::NewtonDiverged {
                trace: trace.clone(),
            })?;
        let current = *trace.last().unwrap();
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= 1.0 / 1024.0 {
            let mut trial = phi.clone();
            for i in 0..nm {
                for (kk, &k) in interior.iter().enumerate() {
                    trial[(i, k)] += lambda * step[col(i, kk)];
                }
            }
            let rt = residual(&trial);
            let s = sup(&rt);
            if s.is_finite() && (s < current || s <= grid.tol) {
                phi = trial;
                r = rt;
                trace.push(s);
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
        converged = *trace.last().unwrap() <= grid.tol;
    }
    if !converged {
        return Err(GeodesicError::NewtonDiverged { trace });
    }
    let fiber = a_op.clone() * &phi;
    for i in 0..nm {
        for k in 0..nt {
            if !(1.0 + fiber[(i, k)] > 0.0) {
                return Err(GeodesicError::InadmissibleFiber {
                    mu0: mus[i],
                    t: ts[k],
                });
            }
        }
    }
    let flat = |m: &DMatrix<f64>| -> Vec<f64> {
        (0..nm)
            .flat_map(|i| (0..nt).map(move |k| (i, k)))
            .map(|(i, k)| m[(i, k)])
            .collect()
    };
    Ok(EpsGeodesicSolution {
        eps,
        mu_nodes: mus,
        t_nodes: ts,
        values: flat(&phi),
        trace,
        linear: flat(&linear),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightFamily;

    fn pot(coeffs: Vec<f64>) -> SymplecticPotential {
        SymplecticPotential::new(ChebSeries::new(-1.0, 1.0, coeffs)).unwrap()
    }

    fn one() -> WeightFunction {
        WeightFunction::constant(1.0, &MomentumPolytope::interval(-1.0, 1.0).unwrap())
    }

    #[test]
    fn constant_path_has_zero_speed_and_residual() {
        let u = pot(vec![0.0, 0.1, 0.1]);
        let path = make_geodesic(&u, &u).unwrap();
        assert_eq!(path.speed_squared(0.3, &EnergyOptions::default()), 0.0);
        assert!(geodesic_residual(&path, &[0.5], &[-1.0, 0.0, 1.0]) < 1e-9);
    }

    #[test]
    fn linear_path_solves_geodesic_equation() {
        let path = make_geodesic(
            &pot(vec![0.0, 0.1, 0.1, -0.03]),
            &pot(vec![0.2, -0.1, 0.05, 0.02, 0.01]),
        )
        .unwrap();
        let r = geodesic_residual(&path, &[0.2, 0.5, 0.8], &[-2.0, -0.5, 0.0, 1.0, 3.0]);
        assert!(r < 1e-6, "{r}");
        let control = QuadraticPath::new(path.start(), path.end()).unwrap();
        let rc = geodesic_residual(&control, &[0.2, 0.5, 0.8], &[-2.0, -0.5, 0.0, 1.0, 3.0]);
        assert!(rc > 10.0 * 1e-6);
    }

    #[test]
    fn speed_is_constant_and_swap_keeps_distance() {
        let o = EnergyOptions::default();
        let path =
            make_geodesic(&pot(vec![0.0, 0.1, 0.1]), &pot(vec![0.1, 0.0, -0.1, 0.05])).unwrap();
        let s0 = path.speed_squared(0.0, &o);
        for t in [0.25, 0.5, 1.0] {
            assert!((path.speed_squared(t, &o) - s0).abs() < 1e-10);
        }
        let back = path.reversed();
        assert!((back.speed_squared(0.4, &o) - s0).abs() < 1e-10);
    }

    #[test]
    fn scan_on_round_sphere_passes() {
        let p = MomentumPolytope::interval(-1.0, 1.0).unwrap();
        let path = make_geodesic(
            &pot(vec![0.0, 0.1, 0.12, -0.03]),
            &pot(vec![0.05, -0.1, 0.06, 0.02]),
        )
        .unwrap();
        let scan = scan_energies(
            &p,
            &path,
            9,
            &one(),
            &one(),
            &ScanTolerances::default(),
            &EnergyOptions::default(),
        )
        .unwrap();
        assert!(scan.passed(), "{:?}", scan.verdicts);
        assert!(scan.rows.iter().all(|r| r.mabuchi_rel.is_some()));
    }

    #[test]
    fn second_variation_matches_finite_differences() {
        let path =
            make_geodesic(&pot(vec![0.0, 0.1, 0.1]), &pot(vec![0.1, 0.0, -0.1, 0.05])).unwrap();
        let v = WeightFunction::new(
            WeightFamily::Exponential { xi: vec![0.3] },
            1.0,
            &MomentumPolytope::interval(-1.0, 1.0).unwrap(),
            true,
        )
        .unwrap();
        for theta in [Theta::Kahler, Theta::Ricci] {
            let (closed, fd) =
                second_variation_check(&path, 0.4, &v, theta, &EnergyOptions::default());
            assert!(closed > 0.0);
            assert!(
                (closed - fd).abs() <= 1e-5 * closed,
                "{theta:?} {closed} {fd}"
            );
        }
    }

    #[test]
    fn eps_geodesic_with_zero_data_is_symmetric_and_negative() {
        let u = SymplecticPotential::guillemin(-1.0, 1.0);
        let grid = EpsGrid::default();
        let s = epsilon_geodesic(&u, &u, 0.1, &grid).unwrap();
        let nt = s.t_nodes.len();
        for i in 0..s.mu_nodes.len() {
            for k in 0..nt {
                assert!((s.value(i, k) - s.value(i, nt - 1 - k)).abs() < 1e-10);
                assert!(s.value(i, k) <= 1e-12);
            }
        }
        let s2 = epsilon_geodesic(&u, &u, 0.01, &grid).unwrap();
        assert!(s2.distance_to_linear() < s.distance_to_linear());
    }
}

//! One function per command. Each returns a report; nothing is written here.

use std::collections::BTreeMap;

use crate::draws::Draws;
use crate::energy::{
    c_constant, c_constant_checked, extremal_affine, mabuchi_distance, mabuchi_energy,
    mabuchi_path_oracle, EnergyOptions, Theta,
};
use crate::extremal::{
    default_configs, minimization_check, solve_extremal_profile, subslope_check, uniqueness_probe,
    verify_extremal, ExtremalError, SolverConfig,
};
use crate::geodesic::{
    epsilon_geodesic, geodesic_residual, make_geodesic, scan_energies, second_variation_check,
    EpsGrid, QuadraticPath, ScanTolerances, Verdict,
};
use crate::polytope::MomentumPolytope;
use crate::toricgeom::{MomentumProfile, SymplecticPotential};
use crate::weights::WeightFunction;
use crate::Error;

use super::config::ExperimentConfig;
use super::report::{num, opt, Table};

/// Everything a command needs besides its own parameters.
pub struct Context<'a> {
    pub cfg: &'a ExperimentConfig,
    pub p: MomentumPolytope,
    pub v: WeightFunction,
    pub w: WeightFunction,
    pub opts: EnergyOptions,
    pub draws: Draws,
    pub tol_scale: f64,
}

/// Scalars and tables produced by a command.
#[derive(Default)]
pub struct Outcome {
    pub c_vw: Option<f64>,
    pub ell: Option<crate::energy::AffineFunction>,
    pub residual_sup: Option<f64>,
    pub distance: Option<f64>,
    pub results: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    pub tables: Vec<Table>,
}

impl Outcome {
    fn set(&mut self, key: &str, value: f64) {
        self.results.insert(key.to_string(), value);
    }

    /// `value <= bound` as a verdict with margin `bound - value`.
    fn at_most(&mut self, name: &str, value: f64, bound: f64) {
        self.verdicts
            .push(Verdict::new(name, value <= bound, bound - value));
    }
}

impl Context<'_> {
    fn interval(&self) -> Result<(f64, f64), Error> {
        self.p
            .as_interval()
            .ok_or_else(|| Error::Config("this command needs an interval polytope".into()))
    }

    fn named_or_drawn(
        &mut self,
        name: &Option<String>,
        amplitude: f64,
    ) -> Result<SymplecticPotential, Error> {
        let (a, b) = self.interval()?;
        match name {
            Some(n) => self.cfg.potential(&self.p, n),
            None => Ok(self.draws.potential(a, b, 6, amplitude)),
        }
    }

    fn weights_positive(&self) -> bool {
        self.v.is_positive() && self.w.is_positive()
    }
}

pub fn polytope_info(ctx: &mut Context) -> Result<Outcome, Error> {
    let mut out = Outcome::default();
    let p = &ctx.p;
    out.set("dim", p.dim() as f64);
    out.set("volume", p.volume());
    out.set("facets", p.facets().len() as f64);
    out.set("vertices", p.vertices().len() as f64);
    let c = c_constant(p, &ctx.v, &ctx.w);
    out.c_vw = Some(c);
    out.ell = extremal_affine(p, &ctx.v, &ctx.w).ok();

    // rules of two orders agree on a polynomial of the lower rule's exact degree
    let order = ctx.cfg.polytope_info.quad_order;
    let lo = p.quadrature(order)?;
    let hi = p.quadrature(order + 8)?;
    let deg = lo.exact_degree as i32;
    let mono = |q: &[f64]| {
        let x = q[0] + 0.3;
        let y = q.get(1).copied().unwrap_or(0.0) - 0.2;
        x.powi(deg / 2) * y.powi(deg - deg / 2) + x.powi(deg) + 1.0
    };
    let quad_dev = (lo.integrate(mono) - hi.integrate(mono)).abs();
    let scale = 1.0_f64.max(hi.integrate(|q| mono(q).abs()));
    out.set("quadrature_exact_degree", deg as f64);
    out.at_most(
        "quadrature_exactness",
        quad_dev,
        1e-12 * scale * ctx.tol_scale,
    );
    let bdev = (lo.integrate_boundary(mono) - hi.integrate_boundary(mono)).abs();
    out.at_most(
        "boundary_quadrature_exactness",
        bdev,
        1e-12 * scale * ctx.tol_scale,
    );

    if let Some((a, b)) = p.as_interval() {
        // the boundary formula for c agrees with the curvature formula
        let checked = c_constant_checked(p, &ctx.v, &ctx.w, &MomentumProfile::guillemin(a, b));
        out.verdicts.push(Verdict::new(
            "c_consistency",
            checked.is_ok(),
            if checked.is_ok() { 0.0 } else { -1.0 },
        ));
    }

    let mut table = Table::new("polytope-info", &["index", "x", "y"]);
    for (i, vtx) in p.vertices().iter().enumerate() {
        table.push(vec![
            i.to_string(),
            num(vtx[0]),
            vtx.get(1).map(|&y| num(y)).unwrap_or_default(),
        ]);
    }
    out.tables.push(table);
    Ok(out)
}

pub fn extremal(ctx: &mut Context) -> Result<Outcome, Error> {
    let (a, b) = ctx.interval()?;
    let prm = &ctx.cfg.extremal;
    let config = SolverConfig {
        quad_order: prm.quad_order,
        degree: prm.degree,
    };
    let sol = solve_extremal_profile(&ctx.p, &ctx.v, &ctx.w, &config)?;
    let mut out = Outcome {
        c_vw: Some(c_constant(&ctx.p, &ctx.v, &ctx.w)),
        ell: Some(sol.ell.clone()),
        residual_sup: Some(sol.residual_sup),
        ..Outcome::default()
    };
    let scale = (0..=64)
        .map(|k| a + (b - a) * k as f64 / 64.0)
        .map(|mu| (sol.ell.eval1(mu) * ctx.w.value1(mu)).abs())
        .fold(1.0_f64, f64::max);
    let ts = ctx.tol_scale;
    out.set("r1", sol.r1);
    out.set("r2", sol.r2);
    out.set("positivity_margin", sol.positivity_margin);
    out.set("scale", scale);
    out.set(
        "profile_degree",
        sol.profile.series().map_or(0, |s| s.degree()) as f64,
    );
    out.at_most(
        "extremal_residual",
        sol.residual_sup,
        prm.residual_tol * scale * ts,
    );
    out.at_most(
        "endpoint_residuals",
        sol.r1.max(sol.r2),
        prm.endpoint_tol * scale * ts,
    );
    out.verdicts.push(Verdict::new(
        "positivity",
        sol.positivity_margin > 0.0,
        sol.positivity_margin,
    ));

    if ctx.w.is_positive() {
        let (_, reprojected) = verify_extremal(&ctx.p, &sol.profile, &ctx.v, &ctx.w)?;
        let dl = (reprojected.constant - sol.ell.constant)
            .abs()
            .max((reprojected.slope[0] - sol.ell.slope[0]).abs());
        out.set("ell_reprojection_deviation", dl);
        out.at_most("ell_reprojection", dl, 1e-9 * scale * ts);
        match uniqueness_probe(&ctx.p, &ctx.v, &ctx.w, &default_configs()) {
            Ok(r) => {
                out.set("uniqueness_profile_diff", r.max_profile_diff);
                out.set("uniqueness_ell_diff", r.max_ell_diff);
                out.verdicts
                    .push(Verdict::new("uniqueness", true, 1e-8 - r.max_profile_diff));
            }
            Err(ExtremalError::UniquenessViolated { diff, .. }) => {
                out.verdicts.push(Verdict::new("uniqueness", false, -diff));
            }
            Err(e) => return Err(e.into()),
        }
    }

    let mut table = Table::new("extremal", &["mu", "H", "Scal_v", "ell_w", "residual"]);
    let n = prm.samples.max(2);
    for k in 0..n {
        let mu = a + (b - a) * k as f64 / (n - 1) as f64;
        let scal = sol
            .profile
            .jet(mu)
            .weighted_scalar_curvature(ctx.v.jet1(mu));
        let lw = sol.ell.eval1(mu) * ctx.w.value1(mu);
        table.push(vec![
            num(mu),
            num(sol.profile.h(mu)),
            num(scal),
            num(lw),
            num((scal - lw).abs()),
        ]);
    }
    out.tables.push(table);
    Ok(out)
}

pub fn energies(ctx: &mut Context) -> Result<Outcome, Error> {
    let (a, b) = ctx.interval()?;
    let prm = ctx.cfg.energies.clone();
    let mut items: Vec<(String, SymplecticPotential)> = Vec::new();
    let names: Vec<String> = if prm.potentials.is_empty() {
        ctx.cfg.potentials.keys().cloned().collect()
    } else {
        prm.potentials.clone()
    };
    for n in names {
        items.push((n.clone(), ctx.cfg.potential(&ctx.p, &n)?));
    }
    for k in 0..prm.draws {
        items.push((format!("draw{k}"), ctx.draws.potential(a, b, 6, 0.4)));
    }
    if items.is_empty() {
        items.push(("guillemin".into(), SymplecticPotential::guillemin(a, b)));
    }
    let relative = ctx.weights_positive() && extremal_affine(&ctx.p, &ctx.v, &ctx.w).is_ok();
    let mut out = Outcome::default();
    let mut table = Table::new(
        "energies",
        &["name", "H_v", "E_vRic", "E_w", "M", "M_rel", "M_oracle"],
    );
    let mut worst: f64 = 0.0;
    for (name, u) in &items {
        let r = mabuchi_energy(&ctx.p, u, &ctx.v, &ctx.w, relative, &ctx.opts)?;
        let oracle = mabuchi_path_oracle(&ctx.p, u, &ctx.v, &ctx.w, ctx.opts.path_steps, &ctx.opts);
        worst = worst.max((oracle - r.mabuchi).abs() / (1.0 + r.mabuchi.abs()));
        out.c_vw = Some(r.c_vw);
        out.ell = r.ell.clone();
        table.push(vec![
            name.clone(),
            num(r.h_v),
            num(r.e_v_ric),
            num(r.e_w),
            num(r.mabuchi),
            opt(r.mabuchi_rel),
            num(oracle),
        ]);
    }
    out.set("potentials", items.len() as f64);
    out.set("oracle_deviation", worst);
    out.at_most("chen_tian", worst, prm.oracle_tol * ctx.tol_scale);
    out.tables.push(table);
    Ok(out)
}

fn chart_samples() -> Vec<f64> {
    (0..=12).map(|k| -3.0 + 0.5 * k as f64).collect()
}

pub fn geodesic_scan(ctx: &mut Context) -> Result<Outcome, Error> {
    let prm = ctx.cfg.geodesic_scan.clone();
    let u0 = ctx.named_or_drawn(&prm.start, 0.4)?;
    let u1 = ctx.named_or_drawn(&prm.end, 0.4)?;
    let path = make_geodesic(&u0, &u1)?;
    let ts = ctx.tol_scale;
    let tol = ScanTolerances {
        convexity: prm.convexity_tol * ts,
        chord: prm.chord_tol * ts,
        speed: prm.speed_tol * ts,
    };
    let scan = scan_energies(&ctx.p, &path, prm.samples, &ctx.v, &ctx.w, &tol, &ctx.opts)?;
    let d = mabuchi_distance(&u0, &u1, &ctx.opts);
    let mut out = Outcome {
        c_vw: Some(c_constant(&ctx.p, &ctx.v, &ctx.w)),
        ell: extremal_affine(&ctx.p, &ctx.v, &ctx.w).ok(),
        distance: Some(d),
        ..Outcome::default()
    };
    out.verdicts.extend(scan.verdicts.iter().cloned());
    out.set("min_d2M", scan.min_d2m);
    out.set("min_d2M_at", scan.min_d2m_at);
    out.set("chord_deviation", scan.chord_deviation);
    out.set("speed_deviation", scan.speed_deviation);
    out.set("scale", scan.scale);

    let t_samples = [0.25, 0.5, 0.75];
    let xs = chart_samples();
    let bound = prm.residual_tol * ts * (1.0 + d * d);
    let residual = geodesic_residual(&path, &t_samples, &xs);
    let control = geodesic_residual(&QuadraticPath::new(&u0, &u1)?, &t_samples, &xs);
    out.residual_sup = Some(residual);
    out.set("control_residual", control);
    out.at_most("geodesic_residual", residual, bound);
    out.verdicts.push(Verdict::new(
        "control_path_detected",
        control >= 10.0 * bound,
        control - 10.0 * bound,
    ));

    let mut table = Table::new(
        "geodesic-scan",
        &["t", "E_w", "E_vRic", "H_v", "M", "M_rel", "d2M"],
    );
    for r in &scan.rows {
        table.push(vec![
            num(r.t),
            num(r.e_w),
            num(r.e_v_ric),
            num(r.h_v),
            num(r.mabuchi),
            opt(r.mabuchi_rel),
            opt(r.d2m),
        ]);
    }
    out.tables.push(table);
    Ok(out)
}

pub fn convexity(ctx: &mut Context) -> Result<Outcome, Error> {
    let (a, b) = ctx.interval()?;
    let prm = ctx.cfg.convexity.clone();
    let ts = ctx.tol_scale;
    let tol = ScanTolerances {
        convexity: prm.convexity_tol * ts,
        chord: prm.chord_tol * ts,
        ..ScanTolerances::default()
    };
    let mut out = Outcome {
        c_vw: Some(c_constant(&ctx.p, &ctx.v, &ctx.w)),
        ell: extremal_affine(&ctx.p, &ctx.v, &ctx.w).ok(),
        ..Outcome::default()
    };
    let mut table = Table::new(
        "convexity",
        &[
            "draw",
            "min_d2M",
            "min_d2M_at",
            "scale",
            "chord_deviation",
            "d2Ev_closed",
            "d2Ev_fd",
        ],
    );
    let (mut conv_ok, mut chord_ok, mut pos_ok, mut fd_ok) = (true, true, true, true);
    let (mut worst_conv, mut worst_chord, mut worst_fd) = (f64::INFINITY, f64::INFINITY, 0.0_f64);
    let mut min_closed = f64::INFINITY;
    for k in 0..prm.geodesics {
        let u0 = ctx.draws.potential(a, b, 6, 0.4);
        let u1 = ctx.draws.potential(a, b, 6, 0.4);
        let path = make_geodesic(&u0, &u1)?;
        let scan = scan_energies(&ctx.p, &path, prm.samples, &ctx.v, &ctx.w, &tol, &ctx.opts)?;
        for v in &scan.verdicts {
            match v.name.as_str() {
                "convexity" => {
                    conv_ok &= v.passed;
                    worst_conv = worst_conv.min(v.margin);
                }
                "ew_affine" => {
                    chord_ok &= v.passed;
                    worst_chord = worst_chord.min(v.margin);
                }
                _ => {}
            }
        }
        let (closed, fd) = second_variation_check(&path, 0.5, &ctx.v, Theta::Kahler, &ctx.opts);
        let rel = (closed - fd).abs() / closed.abs().max(f64::MIN_POSITIVE);
        pos_ok &= closed > 0.0;
        min_closed = min_closed.min(closed);
        fd_ok &= rel <= prm.second_variation_tol * ts;
        worst_fd = worst_fd.max(rel);
        table.push(vec![
            k.to_string(),
            num(scan.min_d2m),
            num(scan.min_d2m_at),
            num(scan.scale),
            num(scan.chord_deviation),
            num(closed),
            num(fd),
        ]);
    }
    out.set("geodesics", prm.geodesics as f64);
    out.set("second_variation_deviation", worst_fd);
    out.verdicts
        .push(Verdict::new("convexity", conv_ok, worst_conv));
    out.verdicts
        .push(Verdict::new("ew_affine", chord_ok, worst_chord));
    out.verdicts.push(Verdict::new(
        "ev_omega_second_variation_positive",
        pos_ok,
        min_closed,
    ));
    out.verdicts.push(Verdict::new(
        "ev_omega_second_variation_fd",
        fd_ok,
        prm.second_variation_tol * ts - worst_fd,
    ));
    out.tables.push(table);
    Ok(out)
}

pub fn subslope(ctx: &mut Context) -> Result<Outcome, Error> {
    let (a, b) = ctx.interval()?;
    let prm = ctx.cfg.subslope.clone();
    let tol = prm.tol * ctx.tol_scale;
    let mut pairs = Vec::new();
    if prm.start.is_some() || prm.end.is_some() {
        pairs.push((
            ctx.named_or_drawn(&prm.start, 0.4)?,
            ctx.named_or_drawn(&prm.end, 0.4)?,
        ));
    }
    for _ in 0..prm.draws {
        pairs.push((
            ctx.draws.potential(a, b, 6, 0.4),
            ctx.draws.potential(a, b, 6, 0.4),
        ));
    }
    let mut out = Outcome {
        c_vw: Some(c_constant(&ctx.p, &ctx.v, &ctx.w)),
        ell: extremal_affine(&ctx.p, &ctx.v, &ctx.w).ok(),
        ..Outcome::default()
    };
    let mut table = Table::new(
        "subslope",
        &[
            "pair",
            "lhs",
            "rhs",
            "rhs_without_c",
            "rhs_normalized",
            "distance",
            "margin",
        ],
    );
    let (mut ok, mut worst) = (true, f64::INFINITY);
    let mut literal_violations = 0usize;
    for (k, (u0, u1)) in pairs.iter().enumerate() {
        let r = subslope_check(&ctx.p, u0, u1, &ctx.v, &ctx.w, tol, &ctx.opts)?;
        ok &= r.passed;
        worst = worst.min(r.margin);
        if r.lhs - r.rhs_normalized < -tol * (1.0 + r.lhs.abs()) {
            literal_violations += 1;
        }
        if k == 0 {
            out.distance = Some(r.distance);
        }
        table.push(vec![
            k.to_string(),
            num(r.lhs),
            num(r.rhs),
            num(r.rhs_without_c),
            num(r.rhs_normalized),
            num(r.distance),
            num(r.margin),
        ]);
    }
    out.set("pairs", pairs.len() as f64);
    out.set("normalized_form_violations", literal_violations as f64);
    out.verdicts.push(Verdict::new("subslope", ok, worst));

    if prm.minimization_draws > 0 && ctx.weights_positive() {
        let sol = solve_extremal_profile(&ctx.p, &ctx.v, &ctx.w, &SolverConfig::default())?;
        let rep = minimization_check(
            &ctx.p,
            &sol,
            &ctx.v,
            &ctx.w,
            prm.minimization_draws,
            &mut ctx.draws,
            tol,
            &ctx.opts,
        );
        match rep {
            Ok(r) => {
                out.set("relative_energy_at_solution", r.value_at_solution);
                out.set("minimization_margin", r.min_margin);
                out.set("quadratic_ratio", r.quadratic_ratio);
                out.verdicts
                    .push(Verdict::new("minimization", true, r.min_margin));
                out.verdicts.push(Verdict::new(
                    "geodesic_minimum_at_solution",
                    r.minimum_at_solution,
                    r.min_second_difference,
                ));
            }
            Err(ExtremalError::MinimalityViolated { margin }) => {
                out.verdicts
                    .push(Verdict::new("minimization", false, margin));
            }
            Err(e) => return Err(e.into()),
        }
    }
    out.tables.push(table);
    Ok(out)
}

pub fn epsgeo(ctx: &mut Context) -> Result<Outcome, Error> {
    let prm = ctx.cfg.epsgeo.clone();
    let u0 = ctx.named_or_drawn(&prm.start, 0.2)?;
    let u1 = ctx.named_or_drawn(&prm.end, 0.2)?;
    let grid = EpsGrid {
        mu_intervals: prm.mu_intervals,
        t_intervals: prm.t_intervals,
        tol: prm.newton_tol,
        ..EpsGrid::default()
    };
    let mut eps = prm.eps.clone();
    eps.sort_by(|x, y| y.total_cmp(x));
    let sols = eps
        .iter()
        .map(|&e| epsilon_geodesic(&u0, &u1, e, &grid))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Outcome {
        distance: Some(mabuchi_distance(&u0, &u1, &ctx.opts)),
        ..Outcome::default()
    };
    let scale = sols
        .iter()
        .flat_map(|s| s.values.iter())
        .fold(1.0_f64, |m, x| m.max(x.abs()));
    let tol = prm.monotone_tol * scale * ctx.tol_scale;
    // Φ^ε increases as ε decreases
    let mut worst_pointwise = f64::INFINITY;
    let mut worst_distance = f64::INFINITY;
    for pair in sols.windows(2) {
        let (big, small) = (&pair[0], &pair[1]);
        for (x, y) in big.values.iter().zip(&small.values) {
            worst_pointwise = worst_pointwise.min(y - x);
        }
        worst_distance = worst_distance.min(big.distance_to_linear() - small.distance_to_linear());
    }
    if sols.len() < 2 {
        worst_pointwise = 0.0;
        worst_distance = 0.0;
    }
    for s in &sols {
        out.set(
            &format!("distance_to_linear[{}]", num(s.eps)),
            s.distance_to_linear(),
        );
        out.set(
            &format!("newton_steps[{}]", num(s.eps)),
            (s.trace.len() - 1) as f64,
        );
    }
    out.residual_sup = sols
        .iter()
        .map(|s| *s.trace.last().unwrap())
        .reduce(f64::max);
    out.verdicts.push(Verdict::new(
        "eps_monotone",
        worst_pointwise >= -tol,
        worst_pointwise + tol,
    ));
    out.verdicts.push(Verdict::new(
        "eps_distance_monotone",
        worst_distance >= -tol,
        worst_distance + tol,
    ));

    let mut table = Table::new("epsgeo", &["eps", "mu0", "t", "phi", "phi_linear"]);
    for s in &sols {
        for (i, &mu) in s.mu_nodes.iter().enumerate() {
            for (k, &t) in s.t_nodes.iter().enumerate() {
                let idx = i * s.t_nodes.len() + k;
                table.push(vec![
                    num(s.eps),
                    num(mu),
                    num(t),
                    num(s.values[idx]),
                    num(s.linear[idx]),
                ]);
            }
        }
    }
    out.tables.push(table);
    Ok(out)
}

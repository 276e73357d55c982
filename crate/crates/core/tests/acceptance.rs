//! Acceptance gate: one pass/fail line per criterion, tolerances fixed here.
//! Runs without the libtest harness so the lines appear in order.

use std::process::ExitCode;
use std::time::Instant;

use wkgeom::cheb::ChebSeries;
use wkgeom::draws::{Draws, FamilyKind};
use wkgeom::energy::{
    c_constant, curvature_moments, energy_ev_theta, energy_ew, extremal_affine, first_variation,
    mabuchi_energy, mabuchi_path_oracle, project_scalar_curvature, relative_mabuchi, EnergyOptions,
    Theta,
};
use wkgeom::extremal::{
    default_configs, minimization_check, solve_extremal_profile, subslope_check, uniqueness_probe,
    verify_extremal, SolverConfig,
};
use wkgeom::gauss::GaussRule;
use wkgeom::geodesic::{
    epsilon_geodesic, geodesic_residual, make_geodesic, scan_energies, second_variation_check,
    EpsGrid, QuadraticPath, ScanTolerances,
};
use wkgeom::numdiff;
use wkgeom::polytope::MomentumPolytope;
use wkgeom::toricgeom::{momentum_image_check, MomentumProfile, SymplecticPotential};
use wkgeom::weights::{WeightFamily, WeightFunction};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn unit() -> MomentumPolytope {
    MomentumPolytope::interval(-1.0, 1.0).unwrap()
}

fn weight(p: &MomentumPolytope, f: WeightFamily) -> WeightFunction {
    WeightFunction::new(f, 1.0, p, true).unwrap()
}

fn opts() -> EnergyOptions {
    EnergyOptions::default()
}

fn fubini_study() -> Outcome {
    let p = unit();
    let one = weight(&p, WeightFamily::Constant(1.0));
    let s = solve_extremal_profile(&p, &one, &one, &SolverConfig::default()).unwrap();
    let c = s.profile.series().unwrap().coeffs();
    let expect = |k: usize| match k {
        0 => 0.5,
        2 => -0.5,
        _ => 0.0,
    };
    let coeff_err = c
        .iter()
        .enumerate()
        .map(|(k, x)| (x - expect(k)).abs())
        .fold(0.0, f64::max);
    let ell_err = (s.ell.constant - 2.0).abs().max(s.ell.slope[0].abs());
    outcome(
        coeff_err <= 1e-10 && ell_err <= 1e-10,
        format!("coefficient error {coeff_err:.2e}, ell error {ell_err:.2e}"),
    )
}

fn c_constant_branches() -> Outcome {
    let p = unit();
    let one = weight(&p, WeightFamily::Constant(1.0));
    let odd = WeightFunction::new(
        WeightFamily::Affine {
            constant: 0.0,
            slope: vec![1.0],
        },
        1.0,
        &p,
        false,
    )
    .unwrap();
    let zero_mean = c_constant(&p, &one, &odd);
    let unweighted = c_constant(&p, &one, &one);
    outcome(
        zero_mean == 1.0 && (unweighted - 2.0).abs() <= 1e-12,
        format!("zero-mean w gives {zero_mean}, v=w=1 gives {unweighted}"),
    )
}

fn chen_tian() -> Outcome {
    let mut d = Draws::new(8);
    let o = opts();
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let (a, b) = (d.range(-2.0, -0.5), d.range(0.5, 2.0));
        let p = MomentumPolytope::interval(a, b).unwrap();
        let v = d.weight(FamilyKind::ALL[k % 5], &p);
        let w = d.weight(FamilyKind::ALL[(k + 2) % 5], &p);
        let u = d.potential(a, b, 6, 0.4);
        let m = mabuchi_energy(&p, &u, &v, &w, false, &o).unwrap().mabuchi;
        let oracle = mabuchi_path_oracle(&p, &u, &v, &w, o.path_steps, &o);
        worst = worst.max((oracle - m).abs() / (1.0 + m.abs()));
    }
    outcome(
        worst <= 1e-7,
        format!("20 draws, worst relative gap {worst:.2e}"),
    )
}

fn convexity() -> Outcome {
    let mut d = Draws::new(4);
    let o = opts();
    let p = unit();
    let kinds = [
        FamilyKind::Constant,
        FamilyKind::Exponential,
        FamilyKind::Power,
    ];
    let tol = ScanTolerances::default();
    let (mut conv, mut chord) = (f64::INFINITY, f64::INFINITY);
    let (mut min_closed, mut fd_err) = (f64::INFINITY, 0.0_f64);
    let mut ok = true;
    for k in 0..50 {
        let kind = kinds[k % 3];
        let v = d.weight(kind, &p);
        let w = d.weight(kind, &p);
        let u0 = d.potential(-1.0, 1.0, 6, 0.4);
        let u1 = d.potential(-1.0, 1.0, 6, 0.4);
        let path = make_geodesic(&u0, &u1).unwrap();
        let scan = scan_energies(&p, &path, 21, &v, &w, &tol, &o).unwrap();
        for verdict in &scan.verdicts {
            match verdict.name.as_str() {
                "convexity" => {
                    ok &= verdict.passed;
                    conv = conv.min(verdict.margin);
                }
                "ew_affine" => {
                    ok &= verdict.passed;
                    chord = chord.min(verdict.margin);
                }
                _ => {}
            }
        }
        let t = d.range(0.2, 0.8);
        let (closed, fd) = second_variation_check(&path, t, &v, Theta::Kahler, &o);
        min_closed = min_closed.min(closed);
        fd_err = fd_err.max((closed - fd).abs() / closed.abs());
    }
    ok &= min_closed > 0.0 && fd_err <= 1e-5;
    outcome(
        ok,
        format!(
            "50 geodesics, convexity slack {conv:.2e}, chord slack {chord:.2e}, min d2E_v^omega {min_closed:.2e}, FD gap {fd_err:.2e}"
        ),
    )
}

fn geodesic_equation() -> Outcome {
    let mut d = Draws::new(5);
    let o = opts();
    let xs: Vec<f64> = (0..=12).map(|k| -3.0 + 0.5 * k as f64).collect();
    let ts = [0.2, 0.5, 0.8];
    let (mut worst_ratio, mut min_control_ratio) = (0.0_f64, f64::INFINITY);
    for _ in 0..5 {
        let u0 = d.potential(-1.0, 1.0, 6, 0.4);
        let u1 = d.potential(-1.0, 1.0, 6, 0.4);
        let path = make_geodesic(&u0, &u1).unwrap();
        let bound = 1e-6 * (1.0 + path.speed_squared(0.5, &o));
        let r = geodesic_residual(&path, &ts, &xs);
        let control = geodesic_residual(&QuadraticPath::new(&u0, &u1).unwrap(), &ts, &xs);
        worst_ratio = worst_ratio.max(r / bound);
        min_control_ratio = min_control_ratio.min(control / bound);
    }
    outcome(
        worst_ratio <= 1.0 && min_control_ratio >= 10.0,
        format!("residual/bound {worst_ratio:.2e}, control/bound {min_control_ratio:.2e}"),
    )
}

fn subslope() -> Outcome {
    let mut d = Draws::new(6);
    let o = opts();
    let p = unit();
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for k in 0..50 {
        let v = d.weight(FamilyKind::ALL[k % 5], &p);
        let w = d.weight(FamilyKind::ALL[(k + 1) % 5], &p);
        let u0 = d.potential(-1.0, 1.0, 6, 0.4);
        let u1 = d.potential(-1.0, 1.0, 6, 0.4);
        let r = subslope_check(&p, &u0, &u1, &v, &w, 1e-7, &o).unwrap();
        ok &= r.passed;
        worst = worst.min(r.margin);
    }
    let one = weight(&p, WeightFamily::Constant(1.0));
    let sol = solve_extremal_profile(&p, &one, &one, &SolverConfig::default()).unwrap();
    let fs = sol.potential.clone().unwrap();
    let probe = d.potential(-1.0, 1.0, 6, 0.4);
    let norm = subslope_check(&p, &fs, &probe, &one, &one, 1e-7, &o)
        .unwrap()
        .norm;
    let min = minimization_check(&p, &sol, &one, &one, 50, &mut d, 1e-9, &o);
    let min_margin = min
        .as_ref()
        .map(|r| r.min_margin)
        .unwrap_or(f64::NEG_INFINITY);
    ok &= norm <= 1e-9 && min_margin >= 0.0;
    outcome(
        ok,
        format!("50 pairs, worst margin {worst:.2e}; norm at solution {norm:.2e}, minimization margin {min_margin:.2e}"),
    )
}

fn uniqueness() -> Outcome {
    let p = unit();
    let mut d = Draws::new(9);
    let mut cases = vec![
        (
            weight(&p, WeightFamily::Constant(1.0)),
            weight(&p, WeightFamily::Constant(1.0)),
        ),
        (
            weight(&p, WeightFamily::Exponential { xi: vec![0.5] }),
            weight(&p, WeightFamily::Exponential { xi: vec![0.5] }),
        ),
    ];
    for k in 0..3 {
        cases.push((
            d.weight(FamilyKind::ALL[k + 1], &p),
            d.weight(FamilyKind::ALL[k + 2], &p),
        ));
    }
    let o = opts();
    let (mut dh, mut dl, mut gauge) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut ok = true;
    for (v, w) in &cases {
        match uniqueness_probe(&p, v, w, &default_configs()) {
            Ok(r) => {
                dh = dh.max(r.max_profile_diff);
                dl = dl.max(r.max_ell_diff);
            }
            Err(_) => ok = false,
        }
        let sol = solve_extremal_profile(&p, v, w, &SolverConfig::default()).unwrap();
        let u = sol.potential.clone().unwrap();
        let shifted = SymplecticPotential::new(u.relative().combine(
            1.0,
            &ChebSeries::affine(-1.0, 1.0, 0.3, -0.7),
            1.0,
        ))
        .unwrap();
        let (h0, h1) = (u.profile(), shifted.profile());
        let profile_shift = (0..=40)
            .map(|k| -1.0 + k as f64 / 20.0)
            .map(|mu| (h0.h(mu) - h1.h(mu)).abs())
            .fold(0.0, f64::max);
        let r0 = verify_extremal(&p, &h0, v, w).unwrap().0;
        let r1 = verify_extremal(&p, &h1, v, w).unwrap().0;
        let m0 = relative_mabuchi(&p, &u, v, w, &o).unwrap();
        let m1 = relative_mabuchi(&p, &shifted, v, w, &o).unwrap();
        gauge = gauge
            .max(profile_shift)
            .max((r0 - r1).abs())
            .max((m0 - m1).abs() / (1.0 + m0.abs()));
    }
    ok &= dh <= 1e-8 && dl <= 1e-10 && gauge <= 1e-9;
    outcome(
        ok,
        format!("5 weight pairs x 3 configs: profile diff {dh:.2e}, ell diff {dl:.2e}, gauge shift {gauge:.2e}"),
    )
}

fn eps_geodesics() -> Outcome {
    let mut d = Draws::new(10);
    let mut ok = true;
    let (mut worst_point, mut worst_dist) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..3 {
        let u0 = d.potential(-1.0, 1.0, 6, 0.2);
        let u1 = d.potential(-1.0, 1.0, 6, 0.2);
        let sols: Vec<_> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&e| epsilon_geodesic(&u0, &u1, e, &EpsGrid::default()).unwrap())
            .collect();
        let scale = sols
            .iter()
            .flat_map(|s| s.values.iter())
            .fold(1.0_f64, |m, x| m.max(x.abs()));
        for pair in sols.windows(2) {
            let gap = pair[0]
                .values
                .iter()
                .zip(&pair[1].values)
                .map(|(big, small)| small - big)
                .fold(f64::INFINITY, f64::min);
            let dist = pair[0].distance_to_linear() - pair[1].distance_to_linear();
            ok &= gap >= -1e-8 * scale && dist >= -1e-8 * scale;
            worst_point = worst_point.min(gap / scale);
            worst_dist = worst_dist.min(dist);
        }
    }
    outcome(
        ok,
        format!("3 endpoint pairs, min(Phi^eps2 - Phi^eps1)/scale {worst_point:.2e}, min distance decrease {worst_dist:.2e}"),
    )
}

fn invariance_suite() -> Outcome {
    let mut d = Draws::new(11);
    let o = opts();
    let p = unit();
    let (mut abreu, mut moments, mut proj, mut fd) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for k in 0..10 {
        let v = d.weight(FamilyKind::ALL[k % 5], &p);
        let w = d.weight(FamilyKind::ALL[(k + 3) % 5], &p);
        let u = d.potential(-1.0, 1.0, 6, 0.4);
        let h = u.profile();

        // I1: the weighted curvature sum against -(vH)'' by differences,
        // on nodes far enough inside for the stencil
        let nodes = GaussRule::on_interval(64, -0.99, 0.99).nodes;
        let mut sup_dd: f64 = 0.0;
        let mut gap: f64 = 0.0;
        for &mu in &nodes {
            let j = h.jet(mu);
            let (vv, dv, ddv) = v.jet1(mu);
            let sum = vv * j.scalar_curvature() + 2.0 * j.laplacian(dv, ddv) + ddv * j.h;
            let dd = numdiff::second_derivative(|s| v.value1(s) * h.h(s), mu, 1e-3);
            sup_dd = sup_dd.max(dd.abs());
            gap = gap.max((sum + dd).abs());
        }
        abreu = abreu.max(gap / (1.0 + sup_dd));

        // I5: curvature moments equal boundary moments for two profiles
        let boundary = [
            2.0 * (v.value1(-1.0) + v.value1(1.0)),
            2.0 * (v.value1(1.0) - v.value1(-1.0)),
        ];
        for prof in [&h, &MomentumProfile::guillemin(-1.0, 1.0)] {
            let m = curvature_moments(prof, &v);
            moments = moments
                .max((m[0] - boundary[0]).abs())
                .max((m[1] - boundary[1]).abs());
        }

        // I6/I15: projection of Scal_v(H) against the boundary solution
        let l0 = extremal_affine(&p, &v, &w).unwrap();
        let l1 = project_scalar_curvature(&p, &h, &v, &w).unwrap();
        proj = proj
            .max((l0.constant - l1.constant).abs())
            .max((l0.slope[0] - l1.slope[0]).abs());

        // I9: first variations against central differences
        let g = d.series(-1.0, 1.0, 5, 0.3);
        let fv = first_variation(&p, &u, &g, &v, &w, &o);
        let along = |s: f64| SymplecticPotential::new(u.relative().combine(1.0, &g, s)).unwrap();
        let checks = [
            (
                fv.e_w,
                numdiff::derivative(|s| energy_ew(&along(s), &w, &o), 0.0, 1e-3),
            ),
            (
                fv.e_v_omega,
                numdiff::derivative(
                    |s| energy_ev_theta(&along(s), &v, Theta::Kahler, &o),
                    0.0,
                    1e-3,
                ),
            ),
            (
                fv.e_v_ric,
                numdiff::derivative(
                    |s| energy_ev_theta(&along(s), &v, Theta::Ricci, &o),
                    0.0,
                    1e-3,
                ),
            ),
            (
                fv.mabuchi,
                numdiff::derivative(
                    |s| {
                        mabuchi_energy(&p, &along(s), &v, &w, false, &o)
                            .unwrap()
                            .mabuchi
                    },
                    0.0,
                    1e-3,
                ),
            ),
        ];
        for (exact, approx) in checks {
            fd = fd.max((exact - approx).abs() / exact.abs().max(1e-3));
        }
    }
    outcome(
        abreu <= 1e-8 && moments <= 1e-9 && proj <= 1e-9 && fd <= 1e-5,
        format!("I1 {abreu:.2e}, I5 {moments:.2e}, I6/I15 {proj:.2e}, I9 {fd:.2e}"),
    )
}

fn momentum_image() -> Outcome {
    let mut d = Draws::new(12);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for _ in 0..20 {
        let (a, b) = (d.range(-2.0, -0.5), d.range(0.5, 2.0));
        let u = d.potential(a, b, 6, 0.4);
        match momentum_image_check(&u, 1e-10) {
            Ok(r) => worst = worst.max(r.max_deviation),
            Err(_) => ok = false,
        }
    }
    outcome(
        ok && worst <= 1e-10,
        format!("20 potentials, worst deviation {worst:.2e}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("Fubini-Study closed form", fubini_study),
        ("c-constant branches", c_constant_branches),
        ("Chen-Tian identity", chen_tian),
        ("convexity along geodesics", convexity),
        ("geodesic equation", geodesic_equation),
        ("sub-slope inequality and minimization", subslope),
        ("uniqueness and gauge invariance", uniqueness),
        ("epsilon-geodesic monotonicity", eps_geodesics),
        ("invariance suite", invariance_suite),
        ("momentum polytope invariance", momentum_image),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = check();
        println!(
            "[{}] {:>2}. {name}: {} ({:.1}s)",
            if r.passed { "PASS" } else { "FAIL" },
            k + 1,
            r.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!r.passed);
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

use super::{GeomError, SymplecticPotential};

/// The correspondence `μ ↦ μ'` with `u_dst'(μ') = u_src'(μ)`, i.e. the two
/// momenta of one complex chart point. Both potentials are gauged at the
/// center first, so affine changes of either potential do not move the map.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreMap {
    src: SymplecticPotential,
    dst: SymplecticPotential,
}

impl LegendreMap {
    pub fn new(src: &SymplecticPotential, dst: &SymplecticPotential) -> Self {
        assert_eq!(
            src.interval(),
            dst.interval(),
            "potentials live on different intervals"
        );
        LegendreMap {
            src: src.gauged(),
            dst: dst.gauged(),
        }
    }

    pub fn map(&self, mu: f64) -> f64 {
        transfer(&self.src, &self.dst, mu)
    }

    pub fn inverse(&self, mu: f64) -> f64 {
        transfer(&self.dst, &self.src, mu)
    }

    pub fn source(&self) -> &SymplecticPotential {
        &self.src
    }

    pub fn destination(&self) -> &SymplecticPotential {
        &self.dst
    }
}

fn transfer(from: &SymplecticPotential, to: &SymplecticPotential, mu: f64) -> f64 {
    let (a, b) = from.interval();
    if mu <= a {
        a
    } else if mu >= b {
        b
    } else {
        to.momentum(from.chart(mu))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumImageReport {
    /// Distance of the far-chart momenta from the polytope endpoints.
    pub endpoint_deviation: f64,
    /// Largest gap between `dφ/dx` and `μ - μ_0` over the sampled chart points.
    pub potential_deviation: f64,
    pub max_deviation: f64,
}

/// Checks that the momentum image of `u` is the whole interval and that the
/// two momenta at each chart point differ by the chart derivative of the
/// Kähler potential.
pub fn momentum_image_check(
    u: &SymplecticPotential,
    tol: f64,
) -> Result<MomentumImageReport, GeomError> {
    let (a, b) = u.interval();
    let far = 60.0 + u.chart(0.5 * (a + b)).abs() + 2.0 * (b - a).max(1.0);
    let lo = u.momentum(-far);
    let hi = u.momentum(far);
    let endpoint_deviation = (lo - a).abs().max((hi - b).abs());

    let mut potential_deviation: f64 = 0.0;
    for k in 0..=32 {
        let x = -4.0 + 8.0 * k as f64 / 32.0;
        let p = u.at_chart(x);
        let dphi = crate::numdiff::derivative(|s| u.kahler_potential(&u.at_chart(s)), x, 0.02);
        potential_deviation = potential_deviation.max((dphi - (p.mu - p.mu0)).abs());
    }
    let max_deviation = endpoint_deviation.max(potential_deviation);
    let report = MomentumImageReport {
        endpoint_deviation,
        potential_deviation,
        max_deviation,
    };
    if max_deviation <= tol {
        Ok(report)
    } else {
        Err(GeomError::CheckFailed {
            what: "momentum image".into(),
            deviation: max_deviation,
        })
    }
}

use super::{GeomError, Guillemin, SymplecticPotential};
use crate::cheb::ChebSeries;
use crate::gauss::GaussRule;
use crate::polytope::MomentumPolytope;

const POSITIVITY_NODES: usize = 256;

/// `H` together with its first two derivatives at one momentum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileJet {
    pub h: f64,
    pub dh: f64,
    pub ddh: f64,
}

impl ProfileJet {
    /// `Scal = -H''`.
    pub fn scalar_curvature(&self) -> f64 {
        -self.ddh
    }

    /// `Δg = -(H g')'` from `g'` and `g''`.
    pub fn laplacian(&self, dg: f64, ddg: f64) -> f64 {
        -(self.dh * dg + self.h * ddg)
    }

    /// `m_Ric = -H'/2`.
    pub fn ricci_momentum(&self) -> f64 {
        -0.5 * self.dh
    }

    /// Density of the Ricci form against `dμ ∧ dθ`.
    pub fn ricci_density(&self) -> f64 {
        -0.5 * self.ddh
    }

    /// `v·Scal + 2Δv + v''·H` from the jet `(v, v', v'')`.
    pub fn weighted_scalar_curvature(&self, v: (f64, f64, f64)) -> f64 {
        v.0 * self.scalar_curvature() + 2.0 * self.laplacian(v.1, v.2) + v.2 * self.h
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Potential(SymplecticPotential),
    Series {
        h: ChebSeries,
        dh: ChebSeries,
        ddh: ChebSeries,
    },
}

/// The profile `H = 1/u''` of a torus-invariant metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumProfile {
    a: f64,
    b: f64,
    repr: Repr,
}

impl MomentumProfile {
    pub fn guillemin(a: f64, b: f64) -> Self {
        Self::from_potential(SymplecticPotential::guillemin(a, b))
    }

    pub fn guillemin_on(p: &MomentumPolytope) -> Result<Self, GeomError> {
        let (a, b) = p.as_interval().ok_or(GeomError::NotInterval(p.dim()))?;
        Ok(Self::guillemin(a, b))
    }

    pub(crate) fn from_potential(u: SymplecticPotential) -> Self {
        let (a, b) = u.interval();
        MomentumProfile {
            a,
            b,
            repr: Repr::Potential(u),
        }
    }

    /// A profile given directly by its Chebyshev series; must be positive inside.
    pub fn from_series(h: ChebSeries) -> Result<Self, GeomError> {
        let (a, b) = (h.lo(), h.hi());
        let rule = GaussRule::on_interval(POSITIVITY_NODES, a, b);
        for &mu in &rule.nodes {
            let v = h.eval(mu);
            if !(v > 0.0) {
                return Err(GeomError::NotPositive { at: mu, value: v });
            }
        }
        let dh = h.derivative();
        let ddh = dh.derivative();
        Ok(MomentumProfile {
            a,
            b,
            repr: Repr::Series { h, dh, ddh },
        })
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn potential(&self) -> Option<&SymplecticPotential> {
        match &self.repr {
            Repr::Potential(u) => Some(u),
            Repr::Series { .. } => None,
        }
    }

    pub fn series(&self) -> Option<&ChebSeries> {
        match &self.repr {
            Repr::Potential(_) => None,
            Repr::Series { h, .. } => Some(h),
        }
    }

    pub fn h(&self, mu: f64) -> f64 {
        self.jet(mu).h
    }

    pub fn jet(&self, mu: f64) -> ProfileJet {
        match &self.repr {
            Repr::Series { h, dh, ddh } => ProfileJet {
                h: h.eval(mu),
                dh: dh.eval(mu),
                ddh: ddh.eval(mu),
            },
            Repr::Potential(u) => {
                let g = u.reference();
                let [_, _, f2, f3, f4] = u.f_derivatives(mu);
                let (n, dn, ddn) = (g.h(mu), g.dh(mu), g.ddh());
                let d = 1.0 + n * f2;
                let dd = dn * f2 + n * f3;
                let ddd = ddn * f2 + 2.0 * dn * f3 + n * f4;
                let h = n / d;
                let dh = (dn * d - n * dd) / (d * d);
                let ddh =
                    (ddn * d - n * ddd) / (d * d) - 2.0 * dd * (dn * d - n * dd) / (d * d * d);
                ProfileJet { h, dh, ddh }
            }
        }
    }

    /// `(H(a), H(b), H'(a), H'(b))`; `(0, 0, 2, -2)` for a smooth compactification.
    pub fn boundary_values(&self) -> (f64, f64, f64, f64) {
        let ja = self.jet(self.a);
        let jb = self.jet(self.b);
        (ja.h, jb.h, ja.dh, jb.dh)
    }

    /// Relative potential of this profile by double integration of
    /// `1/H - 1/H_G`, gauged at the center.
    pub fn to_relative_potential(&self, degree: usize) -> Result<SymplecticPotential, GeomError> {
        if let Repr::Potential(u) = &self.repr {
            return Ok(u.gauged());
        }
        let g = Guillemin::new(self.a, self.b);
        let f = relative_from_second_derivative(self.a, self.b, degree, |mu| {
            1.0 / self.h(mu) - 1.0 / g.h(mu)
        });
        SymplecticPotential::new(f)
    }
}

/// Integrates `f''` twice with `f(μ_c) = f'(μ_c) = 0` at the center.
pub(crate) fn relative_from_second_derivative<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    degree: usize,
    fpp: F,
) -> ChebSeries {
    let c = 0.5 * (a + b);
    let s = ChebSeries::fit(a, b, degree, fpp);
    s.integral(c).integral(c)
}

/// `H = 1/(u_G'' + f'')` on the interval polytope `p`.
pub fn profile_from_relative_potential(
    p: &MomentumPolytope,
    f: ChebSeries,
) -> Result<MomentumProfile, GeomError> {
    let (a, b) = p.as_interval().ok_or(GeomError::NotInterval(p.dim()))?;
    if f.lo() != a || f.hi() != b {
        return Err(GeomError::IntervalMismatch(f.lo(), f.hi()));
    }
    Ok(SymplecticPotential::new(f)?.profile())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval() -> MomentumPolytope {
        MomentumPolytope::interval(-1.0, 1.0).unwrap()
    }

    #[test]
    fn zero_potential_gives_guillemin() {
        let h = profile_from_relative_potential(&interval(), ChebSeries::zero(-1.0, 1.0)).unwrap();
        for &mu in &[-1.0, -0.3, 0.5, 1.0] {
            assert!((h.h(mu) - (1.0 - mu * mu)).abs() < 1e-15);
        }
        assert_eq!(h.boundary_values(), (0.0, 0.0, 2.0, -2.0));
    }

    #[test]
    fn half_square_potential() {
        let f = ChebSeries::fit(-1.0, 1.0, 4, |m| 0.5 * m * m);
        let h = profile_from_relative_potential(&interval(), f).unwrap();
        for &mu in &[-0.9, 0.0, 0.4] {
            let want = (1.0 - mu * mu) / (2.0 - mu * mu);
            assert!((h.h(mu) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn concave_potential_is_not_convex() {
        let f = ChebSeries::fit(-1.0, 1.0, 4, |m| -m * m);
        assert!(matches!(
            profile_from_relative_potential(&interval(), f),
            Err(GeomError::NotConvex { .. })
        ));
    }

    #[test]
    fn guillemin_scalar_curvature_is_two() {
        let h = MomentumProfile::guillemin(-1.0, 1.0);
        for &mu in &[-1.0, 0.0, 0.77] {
            assert_eq!(h.jet(mu).scalar_curvature(), 2.0);
        }
    }

    #[test]
    fn cubic_profile_curvature() {
        let c = 0.3;
        let s = ChebSeries::fit(-1.0, 1.0, 6, |m| (1.0 - m * m) * (1.0 + c * m));
        let h = MomentumProfile::from_series(s).unwrap();
        for &mu in &[-0.5, 0.1, 0.9] {
            let got = h.jet(mu).scalar_curvature();
            assert!((got - (2.0 + 6.0 * c * mu)).abs() < 1e-13);
        }
    }

    #[test]
    fn affine_profile_jet_has_zero_curvature() {
        let j = ProfileJet {
            h: 0.4,
            dh: -1.0,
            ddh: 0.0,
        };
        assert_eq!(j.scalar_curvature(), 0.0);
    }

    #[test]
    fn laplacian_examples() {
        let h = MomentumProfile::guillemin(-1.0, 1.0);
        for &mu in &[-0.6, 0.2] {
            let j = h.jet(mu);
            assert_eq!(j.laplacian(0.0, 0.0), 0.0);
            assert!((j.laplacian(1.0, 0.0) - 2.0 * mu).abs() < 1e-15);
            assert!((j.laplacian(2.0 * mu, 2.0) - (6.0 * mu * mu - 2.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn ricci_momentum_examples() {
        let h = MomentumProfile::guillemin(-1.0, 1.0);
        assert!((h.jet(0.4).ricci_momentum() - 0.4).abs() < 1e-15);
        let (a, b) = (0.5, 3.0);
        let h = MomentumProfile::guillemin(a, b);
        let mu = 1.3;
        assert!((h.jet(mu).ricci_momentum() - (2.0 * mu - a - b) / (b - a)).abs() < 1e-15);
    }

    #[test]
    fn weighted_curvature_term_by_term() {
        let h = MomentumProfile::guillemin(-1.0, 1.0);
        let mu: f64 = 0.35;
        let j = h.jet(mu);
        let v = (1.0 + 0.5 * mu * mu, mu, 1.0);
        let got = j.weighted_scalar_curvature(v);
        assert!((got - (1.0 + 6.0 * mu * mu)).abs() < 1e-14);
        assert!((v.0 * j.scalar_curvature() - (2.0 + mu * mu)).abs() < 1e-14);
        assert!((2.0 * j.laplacian(v.1, v.2) - (-2.0 + 6.0 * mu * mu)).abs() < 1e-14);
        assert!((v.2 * j.h - (1.0 - mu * mu)).abs() < 1e-14);
    }

    #[test]
    fn profile_jet_matches_finite_differences() {
        let u =
            SymplecticPotential::new(ChebSeries::new(-1.0, 1.0, vec![0.0, 0.1, 0.2, 0.05, -0.03]))
                .unwrap();
        let h = u.profile();
        for &mu in &[-0.7, 0.0, 0.55] {
            let j = h.jet(mu);
            let d = crate::numdiff::derivative(|m| h.h(m), mu, 1e-2);
            let dd = crate::numdiff::derivative(|m| h.jet(m).dh, mu, 1e-2);
            assert!((j.dh - d).abs() < 1e-8);
            assert!((j.ddh - dd).abs() < 1e-7);
        }
    }

    #[test]
    fn series_round_trip_recovers_potential() {
        let u =
            SymplecticPotential::new(ChebSeries::new(-1.0, 1.0, vec![0.0, 0.0, 0.1, 0.05, -0.02]))
                .unwrap();
        let hs = ChebSeries::fit(-1.0, 1.0, 80, |m| u.profile().h(m));
        let h = MomentumProfile::from_series(hs).unwrap();
        let back = h.to_relative_potential(64).unwrap();
        let want = u.gauged();
        for &mu in &[-0.9, -0.2, 0.6] {
            assert!((back.f_jet(mu).0 - want.f_jet(mu).0).abs() < 1e-9);
        }
    }
}

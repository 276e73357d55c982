//! Seeded random draws of potentials and weights.
//!
//! The generator is ChaCha8 seeded with `seed_from_u64`. Uniform reals use
//! the top 53 bits of each `u64`: `(x >> 11) · 2^-53`, so a draw sequence is
//! fixed by the seed alone.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cheb::ChebSeries;
use crate::polytope::MomentumPolytope;
use crate::toricgeom::SymplecticPotential;
use crate::weights::{WeightFamily, WeightFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Constant,
    Affine,
    Exponential,
    Power,
    Polynomial,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 5] = [
        FamilyKind::Constant,
        FamilyKind::Affine,
        FamilyKind::Exponential,
        FamilyKind::Power,
        FamilyKind::Polynomial,
    ];
}

pub struct Draws {
    rng: ChaCha8Rng,
}

impl Draws {
    pub fn new(seed: u64) -> Self {
        Draws {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Chebyshev series on `[a, b]` with coefficients `amplitude·U(-1,1)/(k+1)²`.
    pub fn series(&mut self, a: f64, b: f64, degree: usize, amplitude: f64) -> ChebSeries {
        let coeffs = (0..=degree)
            .map(|k| amplitude * self.range(-1.0, 1.0) / ((k + 1) * (k + 1)) as f64)
            .collect();
        ChebSeries::new(a, b, coeffs)
    }

    /// A strictly convex potential `u_G + f`; the draw is halved until admissible.
    pub fn potential(
        &mut self,
        a: f64,
        b: f64,
        degree: usize,
        amplitude: f64,
    ) -> SymplecticPotential {
        let mut f = self.series(a, b, degree, amplitude);
        loop {
            if let Ok(u) = SymplecticPotential::new(f.clone()) {
                return u;
            }
            f = f.scaled(0.5);
        }
    }

    /// `base + δ` for a random perturbation `δ`, halved until admissible.
    pub fn perturb(
        &mut self,
        base: &SymplecticPotential,
        degree: usize,
        amplitude: f64,
    ) -> SymplecticPotential {
        let (a, b) = base.interval();
        let mut delta = self.series(a, b, degree, amplitude);
        loop {
            if let Ok(u) = SymplecticPotential::new(base.relative().combine(1.0, &delta, 1.0)) {
                return u;
            }
            delta = delta.scaled(0.5);
        }
    }

    /// A weight of the given family, positive on the interval `p`.
    pub fn weight(&mut self, kind: FamilyKind, p: &MomentumPolytope) -> WeightFunction {
        let (a, b) = p.as_interval().expect("random weights live on intervals");
        let len = b - a;
        loop {
            let scale = self.range(0.5, 2.0);
            let family = match kind {
                FamilyKind::Constant => WeightFamily::Constant(1.0),
                FamilyKind::Affine => {
                    let slope = self.range(-0.8, 0.8) / len;
                    let lo = (slope * a).min(slope * b);
                    WeightFamily::Affine {
                        constant: 1.0 - lo,
                        slope: vec![slope],
                    }
                }
                FamilyKind::Exponential => WeightFamily::Exponential {
                    xi: vec![self.range(-0.6, 0.6)],
                },
                FamilyKind::Power => {
                    let xi = self.range(-0.5, 0.5);
                    let lo = (xi * a).min(xi * b);
                    WeightFamily::Power {
                        xi: vec![xi],
                        c: self.range(0.5, 1.5) - lo,
                        alpha: self.range(-1.5, 2.5),
                    }
                }
                FamilyKind::Polynomial => {
                    let mid = 0.5 * (a + b);
                    let c1 = self.range(-0.3, 0.3);
                    let c2 = self.range(-0.2, 0.2);
                    // 1 + c1 s + c2 s² in s = (p - mid)/len, expanded in p
                    let (s1, s2) = (c1 / len, c2 / (len * len));
                    WeightFamily::Polynomial(vec![
                        1.0 - s1 * mid + s2 * mid * mid,
                        s1 - 2.0 * s2 * mid,
                        s2,
                    ])
                }
            };
            if let Ok(w) = WeightFunction::new(family, scale, p, true) {
                return w;
            }
        }
    }
}

//! Experiment configuration read from TOML.
//!
//! ```toml
//! seed = 7
//!
//! [polytope]
//! interval = [-1.0, 1.0]
//!
//! [weights.v]
//! family = "exponential"
//! xi = [0.5]
//!
//! [weights.w]
//! family = "constant"
//! value = 1.0
//!
//! [potentials]
//! f0 = [0.0, 0.0, 0.05]
//!
//! [geodesic-scan]
//! start = "f0"
//! samples = 41
//! ```
//!
//! Potentials are Chebyshev coefficients of `f = u - u_G` on the interval.
//! Each command reads its own optional table; unknown keys are rejected.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::polytope::{Facet, MomentumPolytope};
use crate::toricgeom::SymplecticPotential;
use crate::weights::{WeightFamily, WeightFunction};
use crate::Error;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub polytope: PolytopeSpec,
    #[serde(default)]
    pub weights: WeightSpecs,
    #[serde(default)]
    pub potentials: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default, rename = "polytope-info")]
    pub polytope_info: PolytopeInfoParams,
    #[serde(default)]
    pub extremal: ExtremalParams,
    #[serde(default)]
    pub energies: EnergiesParams,
    #[serde(default, rename = "geodesic-scan")]
    pub geodesic_scan: ScanParams,
    #[serde(default)]
    pub convexity: ConvexityParams,
    #[serde(default)]
    pub subslope: SubslopeParams,
    #[serde(default)]
    pub epsgeo: EpsParams,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PolytopeSpec {
    pub interval: Option<[f64; 2]>,
    pub facets: Option<Vec<FacetSpec>>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FacetSpec {
    pub normal: Vec<i64>,
    pub offset: f64,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WeightSpecs {
    pub v: Option<WeightSpec>,
    pub w: Option<WeightSpec>,
}

/// One weight: `family` selects which of the parameter keys are read.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub family: String,
    pub scale: Option<f64>,
    pub value: Option<f64>,
    pub constant: Option<f64>,
    pub slope: Option<Vec<f64>>,
    pub xi: Option<Vec<f64>>,
    pub c: Option<f64>,
    pub alpha: Option<f64>,
    pub coeffs: Option<Vec<f64>>,
    pub terms: Option<Vec<(u32, u32, f64)>>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub chart_nodes: usize,
    pub eps_nodes: usize,
    pub path_steps: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            chart_nodes: 256,
            eps_nodes: 32,
            path_steps: 64,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PolytopeInfoParams {
    pub quad_order: usize,
}

impl Default for PolytopeInfoParams {
    fn default() -> Self {
        PolytopeInfoParams { quad_order: 16 }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExtremalParams {
    pub degree: usize,
    pub quad_order: usize,
    pub samples: usize,
    pub residual_tol: f64,
    pub endpoint_tol: f64,
}

impl Default for ExtremalParams {
    fn default() -> Self {
        ExtremalParams {
            degree: 64,
            quad_order: 32,
            samples: 101,
            residual_tol: 1e-9,
            endpoint_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EnergiesParams {
    /// Named potentials to evaluate; all configured ones when empty.
    pub potentials: Vec<String>,
    /// Random potentials drawn in addition.
    pub draws: usize,
    pub oracle_tol: f64,
}

impl Default for EnergiesParams {
    fn default() -> Self {
        EnergiesParams {
            potentials: Vec::new(),
            draws: 0,
            oracle_tol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ScanParams {
    /// Endpoint potentials by name; random draws when absent.
    pub start: Option<String>,
    pub end: Option<String>,
    pub samples: usize,
    pub convexity_tol: f64,
    pub chord_tol: f64,
    pub speed_tol: f64,
    pub residual_tol: f64,
}

impl Default for ScanParams {
    fn default() -> Self {
        ScanParams {
            start: None,
            end: None,
            samples: 41,
            convexity_tol: 1e-6,
            chord_tol: 1e-8,
            speed_tol: 1e-10,
            residual_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ConvexityParams {
    pub geodesics: usize,
    pub samples: usize,
    pub convexity_tol: f64,
    pub chord_tol: f64,
    pub second_variation_tol: f64,
}

impl Default for ConvexityParams {
    fn default() -> Self {
        ConvexityParams {
            geodesics: 10,
            samples: 41,
            convexity_tol: 1e-6,
            chord_tol: 1e-8,
            second_variation_tol: 1e-5,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SubslopeParams {
    pub start: Option<String>,
    pub end: Option<String>,
    /// Random pairs checked in addition to a configured pair.
    pub draws: usize,
    pub tol: f64,
    /// Random perturbations for the minimization check; 0 skips it.
    pub minimization_draws: usize,
}

impl Default for SubslopeParams {
    fn default() -> Self {
        SubslopeParams {
            start: None,
            end: None,
            draws: 20,
            tol: 1e-7,
            minimization_draws: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EpsParams {
    pub start: Option<String>,
    pub end: Option<String>,
    pub eps: Vec<f64>,
    pub mu_intervals: usize,
    pub t_intervals: usize,
    pub newton_tol: f64,
    pub monotone_tol: f64,
}

impl Default for EpsParams {
    fn default() -> Self {
        EpsParams {
            start: None,
            end: None,
            eps: vec![1e-1, 1e-2, 1e-3],
            mu_intervals: 32,
            t_intervals: 16,
            newton_tol: 1e-10,
            monotone_tol: 1e-8,
        }
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn positive(name: &str, x: f64) -> Result<(), Error> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive, got {x}")))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), Error> {
        match (&self.polytope.interval, &self.polytope.facets) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(bad("polytope needs exactly one of `interval` or `facets`")),
        }
        let tols = [
            ("extremal.residual_tol", self.extremal.residual_tol),
            ("extremal.endpoint_tol", self.extremal.endpoint_tol),
            ("energies.oracle_tol", self.energies.oracle_tol),
            (
                "geodesic-scan.convexity_tol",
                self.geodesic_scan.convexity_tol,
            ),
            ("geodesic-scan.chord_tol", self.geodesic_scan.chord_tol),
            ("geodesic-scan.speed_tol", self.geodesic_scan.speed_tol),
            (
                "geodesic-scan.residual_tol",
                self.geodesic_scan.residual_tol,
            ),
            ("convexity.convexity_tol", self.convexity.convexity_tol),
            ("convexity.chord_tol", self.convexity.chord_tol),
            (
                "convexity.second_variation_tol",
                self.convexity.second_variation_tol,
            ),
            ("subslope.tol", self.subslope.tol),
            ("epsgeo.newton_tol", self.epsgeo.newton_tol),
            ("epsgeo.monotone_tol", self.epsgeo.monotone_tol),
        ];
        for (name, x) in tols {
            positive(name, x)?;
        }
        for &e in &self.epsgeo.eps {
            positive("epsgeo.eps", e)?;
        }
        if self.epsgeo.eps.is_empty() {
            return Err(bad("epsgeo.eps must not be empty"));
        }
        for name in self
            .energies
            .potentials
            .iter()
            .chain(self.geodesic_scan.start.iter())
            .chain(self.geodesic_scan.end.iter())
            .chain(self.subslope.start.iter())
            .chain(self.subslope.end.iter())
            .chain(self.epsgeo.start.iter())
            .chain(self.epsgeo.end.iter())
        {
            if !self.potentials.contains_key(name) {
                return Err(bad(format!("unknown potential `{name}`")));
            }
        }
        if let Some(v) = &self.weights.v {
            v.family()?;
        }
        if let Some(w) = &self.weights.w {
            w.family()?;
        }
        Ok(())
    }

    pub fn build_polytope(&self) -> Result<MomentumPolytope, Error> {
        Ok(match (&self.polytope.interval, &self.polytope.facets) {
            (Some([lo, hi]), _) => MomentumPolytope::interval(*lo, *hi)?,
            (_, Some(facets)) => MomentumPolytope::build(
                facets
                    .iter()
                    .map(|f| Facet::new(f.normal.clone(), f.offset))
                    .collect(),
            )?,
            _ => unreachable!("validated"),
        })
    }

    /// `v` and `w`, each defaulting to the constant 1.
    pub fn build_weights(
        &self,
        p: &MomentumPolytope,
    ) -> Result<(WeightFunction, WeightFunction), Error> {
        let make = |spec: &Option<WeightSpec>| -> Result<WeightFunction, Error> {
            match spec {
                None => Ok(WeightFunction::constant(1.0, p)),
                Some(s) => Ok(WeightFunction::new(
                    s.family()?,
                    s.scale.unwrap_or(1.0),
                    p,
                    true,
                )?),
            }
        };
        Ok((make(&self.weights.v)?, make(&self.weights.w)?))
    }

    pub fn potential(
        &self,
        p: &MomentumPolytope,
        name: &str,
    ) -> Result<SymplecticPotential, Error> {
        let coeffs = self
            .potentials
            .get(name)
            .ok_or_else(|| bad(format!("unknown potential `{name}`")))?;
        Ok(SymplecticPotential::from_coeffs(p, coeffs.clone())?)
    }
}

impl WeightSpec {
    pub fn family(&self) -> Result<WeightFamily, Error> {
        let given: Vec<&str> = [
            ("value", self.value.is_some()),
            ("constant", self.constant.is_some()),
            ("slope", self.slope.is_some()),
            ("xi", self.xi.is_some()),
            ("c", self.c.is_some()),
            ("alpha", self.alpha.is_some()),
            ("coeffs", self.coeffs.is_some()),
            ("terms", self.terms.is_some()),
        ]
        .into_iter()
        .filter(|(_, set)| *set)
        .map(|(k, _)| k)
        .collect();
        let allowed: &[&str] = match self.family.as_str() {
            "constant" => &["value"],
            "affine" => &["constant", "slope"],
            "exponential" => &["xi"],
            "power" => &["xi", "c", "alpha"],
            "polynomial" => &["coeffs"],
            "polynomial2" => &["terms"],
            other => return Err(bad(format!("unknown weight family `{other}`"))),
        };
        if let Some(k) = given.iter().find(|k| !allowed.contains(k)) {
            return Err(bad(format!(
                "key `{k}` does not apply to the {} family",
                self.family
            )));
        }
        if let Some(k) = allowed.iter().find(|k| !given.contains(k)) {
            return Err(bad(format!("{} weight needs `{k}`", self.family)));
        }
        if let Some(s) = self.scale {
            positive("weight scale", s)?;
        }
        Ok(match self.family.as_str() {
            "constant" => WeightFamily::Constant(self.value.unwrap()),
            "affine" => WeightFamily::Affine {
                constant: self.constant.unwrap(),
                slope: self.slope.clone().unwrap(),
            },
            "exponential" => WeightFamily::Exponential {
                xi: self.xi.clone().unwrap(),
            },
            "power" => WeightFamily::Power {
                xi: self.xi.clone().unwrap(),
                c: self.c.unwrap(),
                alpha: self.alpha.unwrap(),
            },
            "polynomial" => WeightFamily::Polynomial(self.coeffs.clone().unwrap()),
            _ => WeightFamily::Polynomial2(self.terms.clone().unwrap()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = ExperimentConfig::parse("[polytope]\ninterval = [-1.0, 1.0]\n").unwrap();
        assert_eq!(cfg.seed, None);
        assert_eq!(cfg.geodesic_scan.samples, 41);
        assert_eq!(cfg.epsgeo.eps, vec![1e-1, 1e-2, 1e-3]);
        let p = cfg.build_polytope().unwrap();
        let (v, w) = cfg.build_weights(&p).unwrap();
        assert_eq!(v.value1(0.3), 1.0);
        assert_eq!(w.value1(-0.3), 1.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = ExperimentConfig::parse("[polytope]\ninterval = [-1.0, 1.0]\nbogus = 1\n");
        assert!(matches!(e, Err(Error::Config(_))));
        let e = ExperimentConfig::parse(
            "[polytope]\ninterval = [-1.0, 1.0]\n[weights.v]\nfamily = \"constant\"\nvalue = 1.0\nxi = [1.0]\n",
        );
        assert!(matches!(e, Err(Error::Config(_))));
    }

    #[test]
    fn tolerances_must_be_positive() {
        let e =
            ExperimentConfig::parse("[polytope]\ninterval = [-1.0, 1.0]\n[subslope]\ntol = -1.0\n");
        assert!(matches!(e, Err(Error::Config(_))));
    }

    #[test]
    fn power_weight_positivity_is_checked() {
        let cfg = ExperimentConfig::parse(
            "[polytope]\ninterval = [-1.0, 1.0]\n[weights.v]\nfamily = \"power\"\nxi = [1.0]\nc = 0.5\nalpha = 2.0\n",
        )
        .unwrap();
        let p = cfg.build_polytope().unwrap();
        let e = cfg.build_weights(&p).unwrap_err();
        assert_eq!(e.exit_code(), crate::exit::INFEASIBLE);
    }
}

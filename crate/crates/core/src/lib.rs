//! Numerical laboratory for weighted toric Kähler geometry on intervals and
//! Delzant polygons: symplectic potentials, weighted scalar curvature,
//! weighted Mabuchi energy and its pieces, geodesics, and extremal profiles.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cheb;
pub mod cli;
pub mod draws;
pub mod energy;
pub mod extremal;
pub mod gauss;
pub mod geodesic;
pub mod numdiff;
pub mod polytope;
pub mod toricgeom;
pub mod weights;

use thiserror::Error;

use energy::EnergyError;
use extremal::ExtremalError;
use geodesic::GeodesicError;
use polytope::PolytopeError;
use toricgeom::GeomError;
use weights::WeightError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("PolytopeError: {0}")]
    Polytope(#[from] PolytopeError),
    #[error("WeightError: {0}")]
    Weight(#[from] WeightError),
    #[error("GeomError: {0}")]
    Geom(#[from] GeomError),
    #[error("EnergyError: {0}")]
    Energy(#[from] EnergyError),
    #[error("GeodesicError: {0}")]
    Geodesic(#[from] GeodesicError),
    #[error("ExtremalError: {0}")]
    Extremal(#[from] ExtremalError),
    #[error("ConfigError: {0}")]
    Config(String),
    #[error("IoError: {0}")]
    Io(#[from] std::io::Error),
}

/// Process exit codes of the command-line tool.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const VERDICT_FAILED: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const CONFIG: i32 = 4;
}

fn geom_infeasible(e: &GeomError) -> bool {
    matches!(
        e,
        GeomError::NotPositive { .. } | GeomError::NotConvex { .. }
    )
}

fn energy_code(e: &EnergyError) -> i32 {
    match e {
        EnergyError::Geom(g) if geom_infeasible(g) => exit::INFEASIBLE,
        EnergyError::Geom(_) | EnergyError::Polytope(_) => exit::CONFIG,
        _ => exit::VERDICT_FAILED,
    }
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Polytope(_) | Error::Config(_) => exit::CONFIG,
            Error::Weight(WeightError::NotPositiveOnP { .. }) => exit::INFEASIBLE,
            Error::Weight(WeightError::BadParams(_)) => exit::CONFIG,
            Error::Geom(g) if geom_infeasible(g) => exit::INFEASIBLE,
            Error::Geom(_) => exit::CONFIG,
            Error::Energy(e) => energy_code(e),
            Error::Geodesic(GeodesicError::Energy(e)) => energy_code(e),
            Error::Geodesic(GeodesicError::BadParams(_) | GeodesicError::IntervalMismatch) => {
                exit::CONFIG
            }
            Error::Geodesic(_) => exit::VERDICT_FAILED,
            Error::Extremal(e) => match e {
                ExtremalError::NotPositive { .. } => exit::INFEASIBLE,
                ExtremalError::Geom(g) if geom_infeasible(g) => exit::INFEASIBLE,
                ExtremalError::Energy(e) => energy_code(e),
                ExtremalError::Geodesic(GeodesicError::Energy(e)) => energy_code(e),
                ExtremalError::Geom(_) | ExtremalError::Polytope(_) => exit::CONFIG,
                ExtremalError::NeedsPositiveWeights => exit::CONFIG,
                _ => exit::VERDICT_FAILED,
            },
            Error::Io(_) => exit::IO,
        }
    }
}

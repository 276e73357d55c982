//! Command-line front end: configuration, command dispatch and reports.

pub mod config;
pub mod report;
pub mod run;

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

use crate::draws::Draws;
use crate::energy::EnergyOptions;
use crate::Error;

pub use config::ExperimentConfig;
pub use report::{Provenance, RunReport, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    PolytopeInfo,
    Extremal,
    Energies,
    GeodesicScan,
    Convexity,
    Subslope,
    Epsgeo,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::PolytopeInfo,
        Command::Extremal,
        Command::Energies,
        Command::GeodesicScan,
        Command::Convexity,
        Command::Subslope,
        Command::Epsgeo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::PolytopeInfo => "polytope-info",
            Command::Extremal => "extremal",
            Command::Energies => "energies",
            Command::GeodesicScan => "geodesic-scan",
            Command::Convexity => "convexity",
            Command::Subslope => "subslope",
            Command::Epsgeo => "epsgeo",
        }
    }
}

/// Runs `command` on the TOML text `config`. `seed` overrides the config's
/// seed (default 0); `tol_scale` multiplies every tolerance.
pub fn run(
    command: Command,
    config: &str,
    seed: Option<u64>,
    tol_scale: f64,
) -> Result<RunReport, Error> {
    if !(tol_scale > 0.0 && tol_scale.is_finite()) {
        return Err(Error::Config(format!(
            "tol-scale must be positive, got {tol_scale}"
        )));
    }
    let cfg = ExperimentConfig::parse(config)?;
    let p = cfg.build_polytope()?;
    let (v, w) = cfg.build_weights(&p)?;
    let seed = seed.or(cfg.seed).unwrap_or(0);
    let opts = EnergyOptions {
        chart_nodes: cfg.numerics.chart_nodes,
        eps_nodes: cfg.numerics.eps_nodes,
        path_steps: cfg.numerics.path_steps,
    };
    let mut quadrature = BTreeMap::new();
    quadrature.insert("chart_nodes".to_string(), opts.chart_nodes);
    quadrature.insert("eps_nodes".to_string(), opts.eps_nodes);
    quadrature.insert("path_steps".to_string(), opts.path_steps);
    quadrature.insert(
        "polytope_order".to_string(),
        match p.dim() {
            1 => crate::polytope::DEFAULT_ORDER_1D,
            _ => crate::polytope::DEFAULT_ORDER_2D,
        },
    );
    let mut ctx = run::Context {
        cfg: &cfg,
        p,
        v,
        w,
        opts,
        draws: Draws::new(seed),
        tol_scale,
    };
    let out = match command {
        Command::PolytopeInfo => run::polytope_info(&mut ctx),
        Command::Extremal => run::extremal(&mut ctx),
        Command::Energies => run::energies(&mut ctx),
        Command::GeodesicScan => run::geodesic_scan(&mut ctx),
        Command::Convexity => run::convexity(&mut ctx),
        Command::Subslope => run::subslope(&mut ctx),
        Command::Epsgeo => run::epsgeo(&mut ctx),
    }?;
    let digest = Sha256::digest(config.as_bytes());
    Ok(RunReport {
        c_vw: out.c_vw,
        ell: out.ell,
        residual_sup: out.residual_sup,
        distance: out.distance,
        results: out.results,
        verdicts: out.verdicts,
        tables: out.tables,
        provenance: Provenance {
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            version: env!("CARGO_PKG_VERSION"),
            command: command.name().to_string(),
            seed,
            tol_scale,
            quadrature,
        },
    })
}

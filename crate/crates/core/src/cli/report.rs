//! Run reports: scalar results, verdicts, tables and provenance, written as
//! a CSV table plus `summary.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::energy::AffineFunction;
use crate::geodesic::Verdict;
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Locale-free decimal rendering; exponent form outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_sha256: String,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub tol_scale: f64,
    pub quadrature: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub c_vw: Option<f64>,
    pub ell: Option<AffineFunction>,
    pub residual_sup: Option<f64>,
    pub distance: Option<f64>,
    pub results: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    pub tables: Vec<Table>,
    pub provenance: Provenance,
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn summary_json(&self) -> Value {
        let ell = self.ell.as_ref().map_or(Value::Null, |l| {
            let b = match l.slope.as_slice() {
                [s] => finite(*s),
                s => Value::Array(s.iter().map(|&x| finite(x)).collect()),
            };
            json!({ "a": finite(l.constant), "b": b })
        });
        let results: Map<String, Value> = self
            .results
            .iter()
            .map(|(k, &v)| (k.clone(), finite(v)))
            .collect();
        let verdicts: Vec<Value> = self
            .verdicts
            .iter()
            .map(|v| json!({ "name": v.name, "passed": v.passed, "margin": finite(v.margin) }))
            .collect();
        let p = &self.provenance;
        json!({
            "c_vw": self.c_vw.map_or(Value::Null, finite),
            "ell": ell,
            "residual_sup": self.residual_sup.map_or(Value::Null, finite),
            "distance": self.distance.map_or(Value::Null, finite),
            "results": results,
            "verdicts": verdicts,
            "passed": self.passed(),
            "provenance": {
                "config_sha256": p.config_sha256,
                "version": p.version,
                "command": p.command,
                "seed": p.seed,
                "tol_scale": p.tol_scale,
                "quadrature": p.quadrature,
            },
        })
    }

    /// Writes each table as `<name>.csv` and the summary as `summary.json`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, Error> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for table in &self.tables {
            let path = dir.join(format!("{}.csv", table.name));
            let mut out = csv::Writer::from_path(&path).map_err(csv_error)?;
            out.write_record(&table.header).map_err(csv_error)?;
            for row in &table.rows {
                out.write_record(row).map_err(csv_error)?;
            }
            out.flush()?;
            written.push(path);
        }
        let path = dir.join("summary.json");
        let mut text =
            serde_json::to_string_pretty(&self.summary_json()).expect("summary is plain JSON");
        text.push('\n');
        fs::write(&path, text)?;
        written.push(path);
        Ok(written)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_render_without_locale() {
        assert_eq!(num(2.0), "2");
        assert_eq!(num(-0.5), "-0.5");
        assert_eq!(num(1e-9), "1e-9");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(f64::NAN), "NaN");
    }
}

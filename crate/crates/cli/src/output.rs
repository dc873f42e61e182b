//! CSV tables and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use conewalk::{EstimateCI, Result};
use serde::Serialize;

use crate::config::Experiment;

/// Floats with 17 significant digits.
pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV table under construction.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> conewalk::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => conewalk::Error::Io(io),
        other => conewalk::Error::Input(format!("csv: {other:?}")),
    }
}

/// Header shared by survival-style estimates.
pub const ESTIMATE_HEADER: &[&str] = &["n", "estimate", "ci_half", "reps", "seed"];
/// Header of V estimates.
pub const V_HEADER: &[&str] = &["n", "estimate", "ci_half", "reps", "seed", "R"];

/// Header of the lattice DP table.
pub const DP_HEADER: &[&str] = &["n", "survival", "E_n", "ratio_2n", "pruned_mass"];

pub fn estimate_row(n: u64, e: &EstimateCI) -> Vec<String> {
    vec![n.to_string(), fmt_f(e.value), fmt_f(e.half_width), e.reps.to_string(), e.seed.to_string()]
}

pub fn v_row(n: u64, e: &EstimateCI, r: f64) -> Vec<String> {
    let mut row = estimate_row(n, e);
    row.push(fmt_f(r));
    row
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Summary written next to the CSVs. Field order is the key order on disk.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub version: String,
    pub experiment: Experiment,
    pub config: serde_json::Value,
    pub workers: usize,
    pub outputs: Vec<String>,
    pub assertions: Vec<Assertion>,
    pub notes: Vec<String>,
    pub error: Option<String>,
    pub passed: bool,
    pub wall_time_s: f64,
}

/// `v<crate version>`, or the build-time `CONEWALK_GIT_DESCRIBE` when set.
pub fn version_string() -> String {
    option_env!("CONEWALK_GIT_DESCRIBE")
        .map(str::to_string)
        .unwrap_or_else(|| format!("v{}", env!("CARGO_PKG_VERSION")))
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| conewalk::Error::Input(e.to_string()))?;
        fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

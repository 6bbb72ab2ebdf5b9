//! Machine-readable outputs: JSON reports and CSV tables.
//!
//! Maps are `BTreeMap`s and floats go through `serde_json`'s shortest
//! round-trip formatting, so equal inputs give byte-identical files.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub n: usize,
    #[serde(rename = "E_numeric")]
    pub e_numeric: f64,
    #[serde(rename = "E_analytic")]
    pub e_analytic: Option<f64>,
    pub abs_error: Option<f64>,
}

/// Observed decay of a residual under grid refinement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceNote {
    pub quantity: String,
    pub fine_points: usize,
    pub coarse_points: usize,
    pub fine: f64,
    pub coarse: f64,
    /// `fine / coarse` for a halving of `Δ`.
    pub ratio: f64,
    /// `log₂(coarse / fine)`
    pub observed_order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub command: String,
    pub mode: String,
    pub config: serde_json::Value,
    pub metric_condition: f64,
    pub range_dim: Option<usize>,
    pub ambient_dim: usize,
    pub versions: BTreeMap<String, String>,
    /// Seconds since the epoch, taken from `SOURCE_DATE_EPOCH`; absent
    /// otherwise so that reruns are byte-identical.
    pub timestamp: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub residuals: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, f64>,
    pub failed: Vec<String>,
    pub passed: bool,
    pub diagnostics: BTreeMap<String, f64>,
    pub convergence: Vec<ConvergenceNote>,
    pub spectrum: Vec<SpectrumRow>,
    pub metadata: Metadata,
}

impl Report {
    /// Compare every residual with its threshold and record the failures.
    pub fn grade(&mut self) {
        self.failed = self
            .thresholds
            .iter()
            .filter(|(name, &bar)| self.residuals.get(*name).is_none_or(|r| !(*r <= bar)))
            .map(|(name, _)| name.clone())
            .collect();
        self.passed = self.failed.is_empty();
    }
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([("etaspec".to_string(), env!("CARGO_PKG_VERSION").to_string())])
}

/// `SOURCE_DATE_EPOCH` when it is set to an integer.
pub fn timestamp() -> Option<u64> {
    std::env::var("SOURCE_DATE_EPOCH").ok()?.trim().parse().ok()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_spectrum_csv<W: Write>(out: W, rows: &[SpectrumRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "E_numeric", "E_analytic", "abs_error"])?;
    for r in rows {
        w.write_record([r.n.to_string(), num(r.e_numeric), opt(r.e_analytic), opt(r.abs_error)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub eta_norm: f64,
    pub ref_norm: f64,
    pub equiv_dev: f64,
}

pub fn write_trajectory_csv<W: Write>(out: W, rows: &[TrajectoryRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "eta_norm", "ref_norm", "equiv_dev"])?;
    for r in rows {
        w.write_record([num(r.t), num(r.eta_norm), num(r.ref_norm), num(r.equiv_dev)])?;
    }
    w.flush()?;
    Ok(())
}

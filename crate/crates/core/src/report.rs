//! CSV tables and the line-delimited record written for a run.
//!
//! Every file is written to a temporary sibling and renamed into place.
//! Floats use `{:.17e}`, which round-trips exactly; absent values are empty
//! cells.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::experiment::ExperimentRecord;

pub const SCAN_FILE: &str = "scan.csv";
pub const RESIDUALS_FILE: &str = "residuals.csv";
pub const RECORD_FILE: &str = "record.jsonl";
pub const SCAN_HEADER: &str = "f,formula_total,direct_total,schrodinger_total,f_star";
pub const SERIES_HEADER: &str = "t,h0_heisenberg,h0_schrodinger";
pub const RESIDUALS_HEADER: &str = "f,conjugation_residual,covariance_residual,picture_gap_appendix,\
picture_gap_formula,picture_gap_direct,closed_form_vs_ode,gauge_identity_residual,defect_integral,gap_bound";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    /// `scan.csv` and `residuals.csv`.
    Table,
    /// One time-series file per Heisenberg path and amplitude.
    Series,
    /// Tables, series and the record itself.
    #[default]
    All,
}

impl FromStr for ReportFormat {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "series" => Ok(ReportFormat::Series),
            "all" => Ok(ReportFormat::All),
            other => Err(LabError::Config(format!("unknown report format `{other}`"))),
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.17e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn scan_table(record: &ExperimentRecord) -> String {
    let mut out = format!("{SCAN_HEADER}\n");
    for p in &record.points {
        let d = &p.decomposition;
        let cells = [d.f, d.formula_total, d.direct_total, d.schrodinger_total, record.threshold.f_star].map(num);
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    out
}

pub fn residuals_table(record: &ExperimentRecord) -> String {
    let mut out = format!("{RESIDUALS_HEADER}\n");
    for p in &record.points {
        let Some(a) = &p.audit else { continue };
        let cells = [
            num(a.f),
            opt(a.conjugation_residual),
            opt(a.covariance_residual),
            opt(a.picture_gap_appendix),
            num(a.picture_gap_formula),
            num(a.picture_gap_direct),
            num(a.closed_form_vs_ode),
            num(a.gauge_identity_residual),
            num(a.defect_integral),
            num(a.gap_bound),
        ];
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    out
}

/// `(file name, contents)` for each Heisenberg path of every amplitude that
/// carries a time series.
pub fn series_tables(record: &ExperimentRecord) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for p in &record.points {
        let Some(series) = &p.series else { continue };
        for path in ["closed_form", "ode"] {
            let mut text = format!("{SERIES_HEADER}\n");
            for s in series {
                let h = if path == "ode" { s.h0_ode } else { s.h0_closed_form };
                writeln!(text, "{},{},{}", num(s.t), num(h), num(s.h0_schrodinger)).unwrap();
            }
            out.push((format!("series_{path}_f{}.csv", p.index), text));
        }
    }
    out
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LabError + '_ {
    move |source| LabError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    std::fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    std::fs::rename(&tmp, &target).map_err(io_err(&target))?;
    Ok(target)
}

/// Writes the requested files into `dir`, creating it if needed, and returns
/// their paths.
pub fn emit_report(record: &ExperimentRecord, dir: &Path, format: ReportFormat) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files = Vec::new();
    if matches!(format, ReportFormat::Table | ReportFormat::All) {
        files.push((SCAN_FILE.to_string(), scan_table(record)));
        files.push((RESIDUALS_FILE.to_string(), residuals_table(record)));
    }
    if matches!(format, ReportFormat::Series | ReportFormat::All) {
        files.extend(series_tables(record));
    }
    if format == ReportFormat::All {
        files.push((RECORD_FILE.to_string(), record.to_json_line()? + "\n"));
    }
    files.iter().map(|(name, text)| write_atomic(dir, name, text)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub f: f64,
    pub formula_total: f64,
    pub direct_total: f64,
    pub schrodinger_total: f64,
    pub f_star: f64,
}

pub fn parse_scan_table(text: &str) -> Result<Vec<ScanRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == SCAN_HEADER => {}
        other => return Err(LabError::Parse(format!("scan header {other:?}"))),
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let v: Vec<f64> = l
                .split(',')
                .map(|c| c.parse::<f64>().map_err(|e| LabError::Parse(format!("`{c}`: {e}"))))
                .collect::<Result<_>>()?;
            if v.len() != 5 {
                return Err(LabError::Parse(format!("scan row with {} cells", v.len())));
            }
            Ok(ScanRow {
                f: v[0],
                formula_total: v[1],
                direct_total: v[2],
                schrodinger_total: v[3],
                f_star: v[4],
            })
        })
        .collect()
}

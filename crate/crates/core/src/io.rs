//! Plot-ready CSV and JSON files for curves, trajectories and efficiency
//! tables.
//!
//! CSV files use ',' separators and '.' decimals. Leading '#' lines carry
//! `key: value` metadata; the first other line is the column header. Floats
//! are written in shortest round-trip form so reading a file back recovers
//! the exact values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::curve::{ScanCurve, ScanType};
use crate::error::{Error, Result};
use crate::sequence::{Trajectory, TRAJECTORY_COLUMNS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

/// Shortest round-trip representation; exponent form for very small or
/// very large magnitudes so tiny efficiencies stay readable.
fn number(v: f64) -> Result<String> {
    if v.is_finite() {
        let a = v.abs();
        if a != 0.0 && !(1e-5..1e16).contains(&a) {
            Ok(format!("{v:e}"))
        } else {
            Ok(format!("{v}"))
        }
    } else {
        Err(Error::Numerical(format!("cannot write non-finite value {v}")))
    }
}

fn write_row(out: &mut String, values: &[f64]) -> Result<()> {
    let cells = values.iter().map(|v| number(*v)).collect::<Result<Vec<_>>>()?;
    out.push_str(&cells.join(","));
    out.push('\n');
    Ok(())
}

fn write_comment(out: &mut String, key: &str, value: &str) {
    let _ = writeln!(out, "# {key}: {value}");
}

/// Header comments and data rows of a CSV document.
struct CsvDocument {
    comments: BTreeMap<String, String>,
    columns: Vec<String>,
    rows: Vec<(usize, Vec<f64>)>,
}

fn parse_csv(text: &str) -> Result<CsvDocument> {
    let mut comments = BTreeMap::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if columns.is_none() {
                if let Some((k, v)) = comment.split_once(':') {
                    comments.insert(k.trim().to_string(), v.trim().to_string());
                }
            }
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        match &columns {
            None => columns = Some(cells.iter().map(|c| c.to_string()).collect()),
            Some(cols) => {
                if cells.len() != cols.len() {
                    return Err(Error::Malformed(format!(
                        "line {line_no}: expected {} fields, found {}",
                        cols.len(),
                        cells.len()
                    )));
                }
                let values = cells
                    .iter()
                    .zip(cols)
                    .map(|(cell, col)| {
                        cell.parse::<f64>().map_err(|_| {
                            Error::Malformed(format!("line {line_no}: field `{col}`: invalid number '{cell}'"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push((line_no, values));
            }
        }
    }
    let columns = columns.ok_or_else(|| Error::Malformed("missing column header".into()))?;
    Ok(CsvDocument { comments, columns, rows })
}

pub fn curve_to_csv(curve: &ScanCurve) -> Result<String> {
    let mut out = String::new();
    let [xc, yc] = curve.scan_type.columns();
    write_comment(&mut out, "scan_type", curve.scan_type.name());
    let unit = match curve.scan_type {
        ScanType::Dip => "Hz",
        ScanType::Duration | ScanType::Evolve => "s",
        ScanType::Efficiency => "dimensionless",
    };
    write_comment(&mut out, "units", &format!("{xc} in {unit}; {yc} dimensionless"));
    write_comment(&mut out, "metadata", &serde_json::to_string(&curve.metadata)?);
    let _ = writeln!(out, "{xc},{yc}");
    for (x, y) in curve.x().iter().zip(curve.y()) {
        write_row(&mut out, &[*x, *y])?;
    }
    Ok(out)
}

pub fn curve_from_csv(text: &str) -> Result<ScanCurve> {
    let doc = parse_csv(text)?;
    let scan_type = match doc.comments.get("scan_type") {
        Some(name) => ScanType::from_name(name)?,
        None => [ScanType::Dip, ScanType::Duration, ScanType::Evolve, ScanType::Efficiency]
            .into_iter()
            .find(|t| doc.columns == t.columns())
            .ok_or_else(|| Error::Malformed("missing field `scan_type` and unrecognized column header".into()))?,
    };
    let expected = scan_type.columns();
    if doc.columns != expected {
        return Err(Error::Malformed(format!(
            "column header {:?} does not match scan_type `{}` (expected {expected:?})",
            doc.columns,
            scan_type.name()
        )));
    }
    let metadata: BTreeMap<String, Value> = match doc.comments.get("metadata") {
        Some(text) => serde_json::from_str(text)
            .map_err(|e| Error::Malformed(format!("field `metadata`: {e}")))?,
        None => BTreeMap::new(),
    };
    let (x, y) = doc.rows.iter().map(|(_, r)| (r[0], r[1])).unzip();
    let mut curve = ScanCurve::new(scan_type, x, y)?;
    curve.metadata = metadata;
    Ok(curve)
}

pub fn curve_to_json(curve: &ScanCurve) -> Result<String> {
    Ok(serde_json::to_string_pretty(curve)? + "\n")
}

pub fn curve_from_json(text: &str) -> Result<ScanCurve> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        Error::Malformed(format!("field `{path}`: {}", e.into_inner()))
    })
}

/// Parses a curve, detecting JSON by a leading '{'.
pub fn curve_from_str(text: &str) -> Result<ScanCurve> {
    if text.trim_start().starts_with('{') {
        curve_from_json(text)
    } else {
        curve_from_csv(text)
    }
}

pub fn read_curve(path: &Path) -> Result<ScanCurve> {
    curve_from_str(&std::fs::read_to_string(path)?)
}

pub fn curve_to_string(curve: &ScanCurve, format: Format) -> Result<String> {
    match format {
        Format::Csv => curve_to_csv(curve),
        Format::Json => curve_to_json(curve),
    }
}

pub fn trajectory_columns() -> Vec<&'static str> {
    std::iter::once("t_s").chain(TRAJECTORY_COLUMNS).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    #[serde(default)]
    pub metadata: BTreeMap<String, Value>,
}

impl TrajectoryTable {
    pub fn new(trajectory: &Trajectory, metadata: BTreeMap<String, Value>) -> Self {
        let rows = trajectory
            .samples
            .iter()
            .map(|s| std::iter::once(s.t).chain(s.values).collect())
            .collect();
        Self { columns: trajectory_columns().into_iter().map(String::from).collect(), rows, metadata }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        write_comment(&mut out, "units", "t_s in s; observables normalized to the post-90 degree transverse deviation");
        write_comment(&mut out, "metadata", &serde_json::to_string(&self.metadata)?);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            write_row(&mut out, row)?;
        }
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let doc = parse_csv(text)?;
        let metadata = match doc.comments.get("metadata") {
            Some(text) => serde_json::from_str(text)
                .map_err(|e| Error::Malformed(format!("field `metadata`: {e}")))?,
            None => BTreeMap::new(),
        };
        Ok(Self { columns: doc.columns, rows: doc.rows.into_iter().map(|(_, r)| r).collect(), metadata })
    }

    pub fn to_string(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub ts_over_t1: f64,
    #[serde(rename = "T1_dnu")]
    pub t1_dnu: f64,
    pub eff_m2s: f64,
    pub eff_slic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyTable {
    pub rows: Vec<EfficiencyRow>,
    #[serde(default)]
    pub metadata: BTreeMap<String, Value>,
}

pub const EFFICIENCY_COLUMNS: [&str; 4] = ["ts_over_t1", "T1_dnu", "eff_m2s", "eff_slic"];

impl EfficiencyTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        write_comment(&mut out, "units", "ts_over_t1 and T1_dnu dimensionless; efficiencies relative to the 0.5 ceiling");
        write_comment(&mut out, "metadata", &serde_json::to_string(&self.metadata)?);
        out.push_str(&EFFICIENCY_COLUMNS.join(","));
        out.push('\n');
        for r in &self.rows {
            write_row(&mut out, &[r.ts_over_t1, r.t1_dnu, r.eff_m2s, r.eff_slic])?;
        }
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let doc = parse_csv(text)?;
        if doc.columns != EFFICIENCY_COLUMNS {
            return Err(Error::Malformed(format!("unexpected efficiency columns {:?}", doc.columns)));
        }
        let rows = doc
            .rows
            .iter()
            .map(|(_, r)| EfficiencyRow { ts_over_t1: r[0], t1_dnu: r[1], eff_m2s: r[2], eff_slic: r[3] })
            .collect();
        Ok(Self { rows, metadata: BTreeMap::new() })
    }

    pub fn to_string(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
        }
    }
}

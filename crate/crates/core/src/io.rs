//! CSV and JSON output. Floats are written in shortest round-trip form.

use std::fs::File;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sweep::{KppComparison, Output, RunRecord};
use crate::wave::{CoupledSolution, Diagnostics};

fn format_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Format {
        path: path.into(),
        msg: e.to_string(),
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => format_err(path, format!("{other:?}")),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

/// One row of a profile file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub x: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "Qtilde")]
    pub qtilde: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub s_star: f64,
}

pub fn profile_rows(sol: &CoupledSolution) -> Vec<ProfileRow> {
    (0..sol.grid.len())
        .map(|i| ProfileRow {
            x: sol.grid.x(i),
            f: sol.profile.f[i],
            q: sol.value.q[i],
            qtilde: sol.value.qtilde[i],
            r: sol.coupling.r[i],
            s_star: sol.coupling.s_star[i],
        })
        .collect()
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = writer(path)?;
    if rows.is_empty() {
        w.write_record(header).map_err(|e| csv_err(path, e))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_profile_csv(path: &Path, rows: &[ProfileRow]) -> Result<()> {
    write_rows(path, &["x", "F", "Q", "Qtilde", "R", "s_star"], rows)
}

pub fn read_profile_csv(path: &Path) -> Result<Vec<ProfileRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| csv_err(path, e)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontRow {
    pub x: f64,
    #[serde(rename = "F")]
    pub f: f64,
}

/// Front-only profile, as produced by the pure KPP solve.
pub fn write_front_csv(path: &Path, rows: &[FrontRow]) -> Result<()> {
    write_rows(path, &["x", "F"], rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct PairRow {
    x: f64,
    #[serde(rename = "F_coupled")]
    f_coupled: f64,
    #[serde(rename = "F_kpp")]
    f_kpp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct SlopeRow {
    level: f64,
    slope_coupled: Option<f64>,
    slope_kpp: Option<f64>,
}

pub fn write_pair_csv(path: &Path, cmp: &KppComparison) -> Result<()> {
    let rows: Vec<PairRow> = (0..cmp.x.len())
        .map(|i| PairRow {
            x: cmp.x[i],
            f_coupled: cmp.f_coupled[i],
            f_kpp: cmp.f_kpp[i],
        })
        .collect();
    write_rows(path, &["x", "F_coupled", "F_kpp"], &rows)
}

pub fn write_slopes_csv(path: &Path, cmp: &KppComparison) -> Result<()> {
    let rows: Vec<SlopeRow> = cmp
        .slopes
        .iter()
        .map(|s| SlopeRow {
            level: s.level,
            slope_coupled: s.coupled,
            slope_kpp: s.kpp,
        })
        .collect();
    write_rows(path, &["level", "slope_coupled", "slope_kpp"], &rows)
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v:?}")).unwrap_or_default()
}

pub const PARAMETER_COLUMNS: [&str; 5] = ["kappa", "alpha", "rho", "a", "h"];

/// Header is the parameter columns, then `outputs`, then `status`.
pub fn write_sweep_csv(path: &Path, records: &[RunRecord], outputs: &[Output]) -> Result<()> {
    let mut w = writer(path)?;
    let mut header: Vec<&str> = PARAMETER_COLUMNS.to_vec();
    header.extend(outputs.iter().map(|o| o.name()));
    header.push("status");
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for r in records {
        let mut row: Vec<String> = [r.params.kappa, r.params.alpha, r.params.rho, r.a, r.h]
            .iter()
            .map(|v| cell(Some(*v)))
            .collect();
        row.extend(outputs.iter().map(|o| match o {
            Output::Iterations => r.iterations.map(|v| v.to_string()).unwrap_or_default(),
            _ => cell(r.get(*o)),
        }));
        row.push(r.status.to_string());
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn diagnostics_json(d: &Diagnostics) -> String {
    serde_json::to_string_pretty(d).expect("diagnostics serialize")
}

pub fn write_diagnostics_json(path: &Path, d: &Diagnostics) -> Result<()> {
    std::fs::write(path, diagnostics_json(d) + "\n").map_err(|e| Error::io(path, e))
}

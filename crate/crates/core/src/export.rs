//! Path files: `header.json`, `jumps.jsonl` (one `{"t": [..], "J": ..}` per
//! line) and `cells.csv` with one row per mesh cell.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indexing::{CellLayout, Domain, Point};
use crate::integral::{DriftMode, Integrand, SamplePathY};
use crate::levy::{CellField, JumpList, JumpRecord, LevyTriplet, SamplePath};
use crate::measure::Measure;

pub const HEADER_FILE: &str = "header.json";
pub const JUMPS_FILE: &str = "jumps.jsonl";
pub const CELLS_FILE: &str = "cells.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    X,
    Y,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathHeader {
    pub process: Process,
    pub domain: serde_json::Value,
    pub measure: Measure,
    pub triplet: LevyTriplet,
    pub level: u32,
    pub eps: f64,
    pub seed: u64,
    pub stream: u64,
    pub cells: usize,
    pub jumps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrand: Option<Integrand>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftMode>,
}

#[derive(Serialize, Deserialize)]
struct JumpLine {
    t: serde_json::Value,
    #[serde(rename = "J")]
    j: f64,
}

/// A path read back from disk.
#[derive(Clone, Debug)]
pub struct StoredPath {
    pub header: PathHeader,
    pub domain: Domain,
    pub field: CellField,
    pub jumps: JumpList,
    pub gaussian: Vec<f64>,
}

fn header_for(x: &SamplePath, process: Process, jumps: usize) -> PathHeader {
    PathHeader {
        process,
        domain: x.domain().to_json(),
        measure: *x.measure(),
        triplet: x.triplet().clone(),
        level: x.level(),
        eps: x.eps(),
        seed: x.seed(),
        stream: x.stream(),
        cells: x.cell_masses().len(),
        jumps,
        integrand: None,
        drift: None,
    }
}

pub fn write_x(dir: &Path, x: &SamplePath) -> Result<()> {
    let header = header_for(x, Process::X, x.jumps().len());
    write_files(
        dir,
        &header,
        x.domain(),
        x.jumps(),
        x.cell_masses(),
        x.gaussian_cells(),
        x.field(),
    )
}

pub fn write_y(dir: &Path, y: &SamplePathY) -> Result<()> {
    let x = y.x();
    let mut header = header_for(x, Process::Y, y.jumps().len());
    header.integrand = Some(y.integrand().clone());
    header.drift = Some(y.mode());
    write_files(
        dir,
        &header,
        x.domain(),
        y.jumps(),
        x.cell_masses(),
        y.gaussian_cells(),
        y.field(),
    )
}

fn write_files(
    dir: &Path,
    header: &PathHeader,
    domain: &Domain,
    jumps: &JumpList,
    masses: &[f64],
    gaussian: &[f64],
    field: &CellField,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut h = serde_json::to_string_pretty(header)?;
    h.push('\n');
    fs::write(dir.join(HEADER_FILE), h)?;

    let mut out = BufWriter::new(File::create(dir.join(JUMPS_FILE))?);
    for i in 0..jumps.len() {
        let line = JumpLine {
            t: serde_json::to_value(jumps.location(domain, i))?,
            j: jumps.sizes()[i],
        };
        serde_json::to_writer(&mut out, &line)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;

    let cells = field.cells();
    let mut w = csv::Writer::from_path(dir.join(CELLS_FILE))?;
    let mut head = vec!["cell".to_string()];
    match cells {
        CellLayout::Box(l) => head.extend((1..=l.p()).map(|i| format!("tip_{i}"))),
        CellLayout::Tree { .. } => head.push("node".into()),
    }
    head.extend(["mass", "gaussian", "increment"].map(String::from));
    w.write_record(&head)?;
    for i in 0..cells.len() {
        let mut row = vec![i.to_string()];
        match cells.tip(domain, i) {
            Point::Box(c) => row.extend(c.iter().map(f64::to_string)),
            t @ Point::Tree(_) => row.push(t.to_string()),
        }
        row.push(masses[i].to_string());
        row.push(gaussian[i].to_string());
        row.push(field.increments()[i].to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a path written by [`write_x`] or [`write_y`].
pub fn read_path(dir: &Path) -> Result<StoredPath> {
    let header: PathHeader = serde_json::from_str(&fs::read_to_string(dir.join(HEADER_FILE))?)?;
    let domain = Domain::from_json(&header.domain)?;

    let mut records = Vec::with_capacity(header.jumps);
    for line in BufReader::new(File::open(dir.join(JUMPS_FILE))?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let j: JumpLine = serde_json::from_str(&line)?;
        let raw: Vec<f64> = serde_json::from_value(j.t)?;
        records.push(JumpRecord {
            location: domain.point(&raw)?,
            size: j.j,
        });
    }
    if records.len() != header.jumps {
        return Err(Error::Format(format!(
            "{} jumps listed, header says {}",
            records.len(),
            header.jumps
        )));
    }
    let jumps = JumpList::from_records(&domain, header.level, &records)?;

    let mut r = csv::Reader::from_path(dir.join(CELLS_FILE))?;
    let cols = r.headers()?.len();
    let mut gaussian = Vec::with_capacity(header.cells);
    let mut increments = Vec::with_capacity(header.cells);
    for rec in r.records() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Format(format!("bad value in column {k} of {CELLS_FILE}")))
        };
        gaussian.push(num(cols - 2)?);
        increments.push(num(cols - 1)?);
    }
    if increments.len() != domain.cells(header.level).len() || increments.len() != header.cells {
        return Err(Error::Format(format!(
            "{} cell rows for level {}",
            increments.len(),
            header.level
        )));
    }
    let field = CellField::new(&domain, header.level, increments);
    Ok(StoredPath {
        header,
        domain,
        field,
        jumps,
        gaussian,
    })
}

// SPDX-License-Identifier: MIT OR Apache-2.0

//! CSV ingestion and export.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ads_changepoint::basis::{project, BasisSpec, FunctionalSample, TimeGrid};
use nalgebra::DMatrix;

use crate::CliError;

/// Round-trip float formatting: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_field(field: &str, line: usize, col: usize) -> Result<f64, CliError> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| CliError::parse(line, format!("column {col}: '{}' is not a number", field.trim())))?;
    if !v.is_finite() {
        return Err(CliError::parse(line, format!("column {col}: non-finite value")));
    }
    Ok(v)
}

fn records(path: &Path) -> Result<Vec<(usize, csv::StringRecord)>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            CliError::parse(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        out.push((line, rec));
    }
    if out.is_empty() {
        return Err(CliError::parse(1, "input file is empty"));
    }
    Ok(out)
}

/// Reads a coefficient CSV with header `c1,…,cD`.
pub fn read_coefficients(path: &Path) -> Result<FunctionalSample, CliError> {
    let recs = records(path)?;
    let (hline, header) = &recs[0];
    for (j, h) in header.iter().enumerate() {
        if h != format!("c{}", j + 1) {
            return Err(CliError::parse(
                *hline,
                format!("expected header c1..cD, found '{h}' in column {}", j + 1),
            ));
        }
    }
    let d = header.len();
    let body = &recs[1..];
    if body.is_empty() {
        return Err(CliError::parse(*hline, "no observations after the header"));
    }
    let mut coeffs = DMatrix::zeros(body.len(), d);
    for (i, (line, rec)) in body.iter().enumerate() {
        if rec.len() != d {
            return Err(CliError::parse(*line, format!("expected {d} fields, found {}", rec.len())));
        }
        for (j, f) in rec.iter().enumerate() {
            coeffs[(i, j)] = parse_field(f, *line, j + 1)?;
        }
    }
    let spec = BasisSpec::new(d).map_err(|e| CliError::parse(*hline, e.to_string()))?;
    Ok(FunctionalSample::new(coeffs, spec)?)
}

/// Curves observed on a shared grid.
#[derive(Debug, Clone)]
pub struct RawGrid {
    pub grid: TimeGrid,
    pub values: DMatrix<f64>,
}

/// Reads a raw-grid CSV: first row `t,t_1,…,t_m`, then one curve per row,
/// optionally preceded by a label, which is ignored. Times outside `[0, 1]`
/// are mapped onto it.
pub fn read_raw_grid(path: &Path) -> Result<RawGrid, CliError> {
    let recs = records(path)?;
    let (hline, header) = &recs[0];
    if header.get(0) != Some("t") {
        return Err(CliError::parse(*hline, "raw-grid header must start with 't'"));
    }
    let raw: Vec<f64> = header
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, f)| parse_field(f, *hline, j + 1))
        .collect::<Result<_, _>>()?;
    let grid = if raw.iter().all(|t| (0.0..=1.0).contains(t)) {
        TimeGrid::new(raw)
    } else {
        TimeGrid::rescaled(&raw)
    }
    .map_err(|e| CliError::parse(*hline, e.to_string()))?;
    let m = grid.len();
    let body = &recs[1..];
    if body.is_empty() {
        return Err(CliError::parse(*hline, "no observations after the grid row"));
    }
    let mut values = DMatrix::zeros(body.len(), m);
    for (i, (line, rec)) in body.iter().enumerate() {
        let skip = match rec.len() {
            n if n == m => 0,
            n if n == m + 1 => 1,
            n => return Err(CliError::parse(*line, format!("expected {m} values (plus optional label), found {n} fields"))),
        };
        for (j, f) in rec.iter().skip(skip).enumerate() {
            values[(i, j)] = parse_field(f, *line, j + 1 + skip)?;
        }
    }
    Ok(RawGrid { grid, values })
}

/// Loads a sample from either input form; `smooth` selects the raw-grid form
/// and the basis size of the least-squares projection.
pub fn load_sample(path: &Path, smooth: Option<usize>) -> Result<FunctionalSample, CliError> {
    match smooth {
        None => read_coefficients(path),
        Some(d) => {
            let raw = read_raw_grid(path)?;
            Ok(project(&raw.values, BasisSpec::new(d)?, &raw.grid)?)
        }
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes a numeric table with the given header.
pub fn write_matrix_csv(path: &Path, header: &[String], m: &DMatrix<f64>) -> Result<(), CliError> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "{}", header.join(",")).map_err(&err)?;
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        writeln!(w, "{}", line.join(",")).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

pub fn write_coefficients(path: &Path, sample: &FunctionalSample) -> Result<(), CliError> {
    let header: Vec<String> = (1..=sample.dim()).map(|j| format!("c{j}")).collect();
    write_matrix_csv(path, &header, sample.coeffs())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

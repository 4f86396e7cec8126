//! CSV/JSON artifact helpers shared by the library and the CLI.
//!
//! Reals are written with 17 significant digits so every value round-trips
//! exactly through text.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Error, Result};

/// Lossless decimal form of a real.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn parse_real(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("cannot parse '{s}' as a real number")))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Config(format!("{}: {other:?}", path.display())),
    }
}

/// Writes a header plus string rows.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        let row: Vec<String> = row.into_iter().collect();
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads every record after the header, checking the column count.
pub fn read_csv(path: &Path, columns: usize) -> Result<Vec<Vec<String>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() != columns {
            return Err(Error::Config(format!(
                "{}: expected {columns} columns, found {}",
                path.display(),
                rec.len()
            )));
        }
        out.push(rec.iter().map(str::to_owned).collect());
    }
    Ok(out)
}

/// Writes one `re,im` row per entry.
pub fn write_complex_csv<'a>(path: &Path, values: impl IntoIterator<Item = &'a Complex64>) -> Result<()> {
    write_csv(
        path,
        &["re", "im"],
        values.into_iter().map(|z| [fmt_real(z.re), fmt_real(z.im)]),
    )
}

pub fn read_complex_csv(path: &Path) -> Result<Vec<Complex64>> {
    read_csv(path, 2)?
        .iter()
        .map(|r| Ok(Complex64::new(parse_real(&r[0])?, parse_real(&r[1])?)))
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Creates `dir` if needed and refuses to clobber any of `files` unless `force`.
pub fn prepare_output(dir: &Path, files: &[&str], force: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths: Vec<PathBuf> = files.iter().map(|f| dir.join(f)).collect();
    if !force {
        if let Some(p) = paths.iter().find(|p| p.exists()) {
            return Err(Error::OutputExists(p.clone()));
        }
    }
    Ok(paths)
}

//! Report serialization with reproducible number formatting.
//!
//! Every float written to JSON or CSV uses 17 significant digits, so
//! identical runs produce byte-identical files.

use std::io::Write as IoWrite;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::modes::ComplexField;

/// 17-significant-digit representation; non-finite values spelled out for
/// CSV use.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.16e}")
}

struct Fmt17;

impl serde_json::ser::Formatter for Fmt17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize to a JSON string with fixed float formatting. Non-finite floats
/// become `null`.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Fmt17);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))?;
    String::from_utf8(out).map_err(|e| Error::Config(format!("invalid UTF-8 in report: {e}")))
}

/// Write a JSON report file.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(to_json_string(value)?.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Incremental CSV writer with fixed float formatting.
pub struct CsvFile {
    file: std::fs::File,
}

impl CsvFile {
    pub fn create(path: &Path, header: &[&str]) -> Result<CsvFile> {
        let mut file = std::fs::File::create(path)?;
        writeln!(file, "{}", header.join(","))?;
        Ok(CsvFile { file })
    }

    pub fn row(&mut self, cells: &[CsvCell]) -> Result<()> {
        let rendered: Vec<String> = cells.iter().map(CsvCell::render).collect();
        writeln!(self.file, "{}", rendered.join(","))?;
        Ok(())
    }
}

/// One CSV cell.
pub enum CsvCell {
    Str(String),
    Int(i64),
    Float(f64),
}

impl CsvCell {
    fn render(&self) -> String {
        match self {
            CsvCell::Str(s) => s.clone(),
            CsvCell::Int(i) => i.to_string(),
            CsvCell::Float(x) => fmt_f64(*x),
        }
    }
}

/// Write a mode function as CSV with columns `coordinate,re,im`.
pub fn write_field_csv(path: &Path, field: &ComplexField) -> Result<()> {
    let mut csv = CsvFile::create(path, &["coordinate", "re", "im"])?;
    for (&x, v) in field.grid().points().iter().zip(field.values()) {
        csv.row(&[CsvCell::Float(x), CsvCell::Float(v.re), CsvCell::Float(v.im)])?;
    }
    Ok(())
}

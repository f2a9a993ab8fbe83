//! Shared helpers for the header-checked CSV formats.

use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use csv::StringRecord;

use crate::error::{Error, Result};

pub(crate) fn open(path: &Path, expected: &[&str]) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header = rdr.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::parse(
            path,
            1,
            format!("header mismatch: expected `{}`, found `{}`", expected.join(","), header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    Ok(rdr)
}

pub(crate) fn create(path: &Path, header: &[&str]) -> Result<csv::Writer<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().from_writer(file);
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    Ok(w)
}

pub(crate) fn finish(path: &Path, mut w: csv::Writer<File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::parse(path, line, format!("{kind:?}")),
    }
}

/// Iterates `(line, record)` pairs.
pub(crate) fn records<'a>(path: &'a Path, rdr: &'a mut csv::Reader<File>) -> impl Iterator<Item = Result<(u64, StringRecord)>> + 'a {
    rdr.records().map(move |r| {
        let rec = r.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        Ok((line, rec))
    })
}

/// A parsed cell with errors naming the file, line and column.
pub(crate) fn cell<T: FromStr>(path: &Path, line: u64, rec: &StringRecord, idx: usize, column: &str) -> Result<T> {
    let raw = rec.get(idx).unwrap_or("");
    raw.trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("column `{column}`: cannot parse `{raw}`")))
}

pub(crate) fn text(rec: &StringRecord, idx: usize) -> String {
    rec.get(idx).unwrap_or("").to_string()
}

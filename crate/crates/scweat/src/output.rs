//! Output files: provenance headers, CSV/TSV bodies and atomic writes.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::error::{AppError, Result};

/// Who produced a file and with which settings. Rendered as `#` comment
/// lines at the top of every output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub command: String,
    /// Effective settings, sorted by key.
    pub config: Vec<(String, String)>,
    pub seed: u64,
    /// One-line statement of what a positive effect size means.
    pub sign: String,
    pub reproducible: bool,
}

impl Provenance {
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("command={}\n", self.command));
        for (k, v) in &self.config {
            h.update(format!("{k}={v}\n"));
        }
        h.finalize().iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# scweat {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# command: {}", self.command);
        let _ = writeln!(s, "# config_hash: sha256:{}", self.config_hash());
        let _ = writeln!(s, "# seed: {}", self.seed);
        let _ = writeln!(s, "# sign: {}", self.sign);
        for (k, v) in &self.config {
            let _ = writeln!(s, "# config: {k}={v}");
        }
        if !self.reproducible {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
            let _ = writeln!(s, "# generated_unix: {secs}");
        }
        s
    }
}

/// Delimited body with a header row. Fields are quoted only when needed.
pub fn delimited<I, R>(delimiter: u8, columns: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(Vec::new());
    let fail = |e: csv::Error| AppError::data(format!("cannot format output: {e}"));
    w.write_record(columns).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    w.into_inner().map_err(|e| AppError::data(format!("cannot format output: {e}")))
}

pub fn csv<I, R>(columns: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    delimited(b',', columns, rows)
}

pub fn tsv<I, R>(columns: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    delimited(b'\t', columns, rows)
}

/// Optional float as text; `None` becomes an empty field.
pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Writes `header` then `body` to `path`, or to standard output for `-`.
/// Files are written to a temporary sibling and renamed into place, so a
/// failed run never leaves a partial file behind.
pub fn emit(path: &Path, header: &str, body: &[u8]) -> Result<()> {
    if path == Path::new("-") {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(header.as_bytes())
            .and_then(|_| out.write_all(body))
            .and_then(|_| out.flush())
            .map_err(|e| AppError::data(format!("cannot write standard output: {e}")));
    }
    let fail = |e: std::io::Error| AppError::data(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new()
        .prefix(".scweat-")
        .tempfile_in(dir)
        .map_err(fail)?;
    tmp.write_all(header.as_bytes()).map_err(fail)?;
    tmp.write_all(body).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

//! CSV output with 17 significant digits, written atomically.

use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::CliError;

/// `{:.16e}` for finite values, `NaN`/`inf`/`-inf` otherwise.
pub fn real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

/// Header plus rows, collected before writing.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write_to<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut csv = csv::Writer::from_writer(w);
        let err = |e: csv::Error| CliError::Io(e.to_string());
        csv.write_record(&self.header).map_err(err)?;
        for r in &self.rows {
            csv.write_record(r).map_err(err)?;
        }
        csv.flush()?;
        Ok(())
    }

    /// Writes to `path` through a temporary file in the same directory,
    /// or to standard output when `path` is `None`.
    pub fn write(&self, path: Option<&Path>) -> Result<(), CliError> {
        match path {
            None => self.write_to(std::io::stdout().lock()),
            Some(p) => write_atomic(p, |f| self.write_to(f)),
        }
    }
}

/// Writes through a temporary sibling file that is renamed onto `path`.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<(), CliError>
where
    F: FnOnce(&mut NamedTempFile) -> Result<(), CliError>,
{
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    fill(&mut tmp)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

//! Atomic artifact writers.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::CliError;

/// Writes `bytes` to a temp file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// In-memory CSV table. Floats use shortest round-trip exponent form so
/// repeated runs are byte-identical.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    text: String,
    columns: usize,
    rows: usize,
}

impl Csv {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut text = header.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join(",");
        text.push('\n');
        Self {
            text,
            columns: header.len(),
            rows: 0,
        }
    }

    /// `None` cells are left empty.
    pub fn row(&mut self, cells: &[Option<f64>]) {
        assert_eq!(cells.len(), self.columns, "row width matches header");
        let line = cells
            .iter()
            .map(|c| c.map(|v| format!("{v:e}")).unwrap_or_default())
            .collect::<Vec<_>>()
            .join(",");
        self.text.push_str(&line);
        self.text.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_atomic(path, self.text.as_bytes())
    }
}

//! In-memory CSV tables with a fixed header.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem before the tag, e.g. `sweep_snr`.
    pub stem: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(stem: impl Into<String>, header: Vec<&'static str>) -> Self {
        Self {
            stem: stem.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self, tag: &str) -> String {
        format!("{}_{}.csv", self.stem, tag)
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }

    /// Writes `<dir>/<stem>_<tag>.csv` through a temporary file so a failed
    /// run never leaves a truncated table behind.
    pub fn write(&self, dir: &Path, tag: &str) -> Result<PathBuf, CliError> {
        fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name(tag));
        let tmp = dir.join(format!(".{}.tmp", self.file_name(tag)));
        fs::write(&tmp, self.to_csv_bytes()?)?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }
}

/// Shortest round-trip decimal form, `.` separator.
pub fn num(x: f64) -> String {
    format!("{x}")
}

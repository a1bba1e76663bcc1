//! Report emission: delimited series tables and structured summaries.
//!
//! Series files are CSV with a single header row, LF line endings and
//! floats printed with 17 significant digits, so identical runs produce
//! byte-identical files. Writes go through a temp file and rename.

use std::fmt::Write as _;
use std::path::Path;

use crate::Result;

/// One cell of a series table.
#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    I(i64),
    U(u64),
    B(bool),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // 17 significant digits round-trips f64 exactly.
            Cell::F(v) => format!("{v:.16e}"),
            Cell::I(v) => v.to_string(),
            Cell::U(v) => v.to_string(),
            Cell::B(v) => v.to_string(),
            Cell::S(v) => v.clone(),
        }
    }
}

/// A column-labelled numeric table.
#[derive(Debug, Clone)]
pub struct SeriesTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl SeriesTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    /// Render as CSV: header row, comma separators, LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    out.push(',');
                }
                let _ = write!(out, "{}", cell.render());
                first = false;
            }
            out.push('\n');
        }
        out
    }
}

/// Everything one pipeline run produces.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    /// TOML text mirroring the pipeline's summary structure.
    pub summary: String,
    pub series: SeriesTable,
    pub summary_name: String,
    pub series_name: String,
}

impl ReportBundle {
    /// Write both files under `out_dir` atomically (write-then-rename).
    pub fn write(&self, out_dir: &Path) -> Result<()> {
        std::fs::create_dir_all(out_dir)?;
        write_atomic(&out_dir.join(&self.summary_name), self.summary.as_bytes())?;
        write_atomic(
            &out_dir.join(&self.series_name),
            self.series.to_csv().as_bytes(),
        )?;
        Ok(())
    }
}

/// Write bytes to `path` via a sibling temp file and rename, so an
/// interrupted run never leaves a partial file at the final path.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rendering_is_stable() {
        let mut t = SeriesTable::new(&["g", "flag", "n"]);
        t.push(vec![Cell::F(0.1), Cell::B(true), Cell::I(3)]);
        t.push(vec![Cell::F(1.0 / 3.0), Cell::B(false), Cell::I(-1)]);
        let csv = t.to_csv();
        assert!(csv.starts_with("g,flag,n\n"));
        assert!(csv.contains("1.0000000000000001e-1,true,3\n"));
        assert!(!csv.contains('\r'));
        // Round-trip of the printed float recovers the bits.
        let printed: f64 = "3.3333333333333331e-1".parse().unwrap();
        assert_eq!(printed, 1.0 / 3.0);
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert!(!path.with_extension("csv.tmp").exists());
    }
}

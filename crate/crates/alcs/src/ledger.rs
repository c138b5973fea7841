//! CSV ledgers and the run sink.
//!
//! Every float is written as `{:.16e}`, which round-trips `f64` exactly, so
//! two identical runs give identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use alcs_core::diagnostics::EnergyRecord;
use alcs_core::dynamics::StateFields;
use alcs_core::integrator::Sink;

use crate::snapshot::{write_state, SnapshotIoError};

pub const ENERGY_CSV: &str = "energy.csv";
pub const TWIN_CSV: &str = "twin.csv";
pub const SWEEP_CSV: &str = "sweep_summary.csv";

pub const TWIN_COLUMNS: [&str; 7] = ["t", "dQ_l2", "dQ_h1", "du_l2", "total", "alpha", "envelope"];

pub const SWEEP_COLUMNS: [&str; 11] = [
    "value",
    "status",
    "max_h1_Q",
    "max_l2_u",
    "int_grad_u_sq",
    "int_lap_Q_sq",
    "max_eps_u_gradQ",
    "max_eps_grad_u",
    "max_E",
    "max_residual",
    "steps",
];

pub fn format_row(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 24);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&format!("{v:.16e}"));
    }
    s
}

pub fn energy_header() -> String {
    EnergyRecord::CSV_COLUMNS.join(",")
}

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("header mismatch: expected '{expected}', found '{found}'")]
    Header { expected: String, found: String },
}

/// Parses a numeric CSV with the given header; `NaN` cells are allowed.
pub fn parse_csv(text: &str, columns: &[&str]) -> Result<Vec<Vec<f64>>, CsvError> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or("");
    let expected = columns.join(",");
    if header != expected {
        return Err(CsvError::Header {
            expected,
            found: header.into(),
        });
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        let row = row.map_err(|e| CsvError::Parse {
            line: i + 2,
            message: e.to_string(),
        })?;
        if row.len() != columns.len() {
            return Err(CsvError::Parse {
                line: i + 2,
                message: format!("{} cells, expected {}", row.len(), columns.len()),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Streams records to `energy.csv` and snapshots to
/// `snapshots/snap_NNNNNN.bin`, keeping the records in memory as well.
pub struct RunSink {
    csv: BufWriter<File>,
    csv_path: PathBuf,
    snap_dir: PathBuf,
    snapshots_written: usize,
    pub records: Vec<EnergyRecord>,
}

fn io_err(path: &Path, e: std::io::Error) -> alcs_core::Error {
    alcs_core::Error::Sink(format!("{}: {e}", path.display()))
}

impl RunSink {
    pub fn create(out_dir: &Path) -> std::io::Result<RunSink> {
        std::fs::create_dir_all(out_dir)?;
        let csv_path = out_dir.join(ENERGY_CSV);
        let mut csv = BufWriter::new(File::create(&csv_path)?);
        writeln!(csv, "{}", energy_header())?;
        Ok(RunSink {
            csv,
            csv_path,
            snap_dir: out_dir.join("snapshots"),
            snapshots_written: 0,
            records: Vec::new(),
        })
    }

    pub fn snapshots_written(&self) -> usize {
        self.snapshots_written
    }

    pub fn flush(&mut self) -> std::io::Result<()> {
        self.csv.flush()
    }
}

impl Sink for RunSink {
    fn record(&mut self, rec: &EnergyRecord) -> alcs_core::Result<()> {
        writeln!(self.csv, "{}", format_row(&rec.csv_values()))
            .map_err(|e| io_err(&self.csv_path, e))?;
        self.records.push(rec.clone());
        Ok(())
    }

    fn snapshot(&mut self, state: &StateFields) -> alcs_core::Result<()> {
        if self.snapshots_written == 0 {
            std::fs::create_dir_all(&self.snap_dir).map_err(|e| io_err(&self.snap_dir, e))?;
        }
        let path = self
            .snap_dir
            .join(format!("snap_{:06}.bin", self.snapshots_written));
        write_state(&path, state).map_err(|e| match e {
            SnapshotIoError::Io { path, source } => io_err(&path, source),
            other => alcs_core::Error::Sink(other.to_string()),
        })?;
        self.snapshots_written += 1;
        Ok(())
    }
}

/// Writes a header and rows of numbers.
pub fn write_csv(path: &Path, columns: &[&str], rows: &[Vec<f64>]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", columns.join(","))?;
    for r in rows {
        writeln!(w, "{}", format_row(r))?;
    }
    w.flush()
}

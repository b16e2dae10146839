//! Writers for the run artifacts.
//!
//! CSV files carry a header row and RFC 4180 quoting; floats are written in
//! their shortest round-trip form, so parsing a cell gives back the same bits.
//! JSON objects keep insertion order.
//!
//! Snapshot layout (all integers and floats little-endian):
//!
//! | bytes | content |
//! |---|---|
//! | 6 | magic `BLMHD1` |
//! | 8 + 8 | `nx`, `ny` as `u64` |
//! | 8 + 8 + 8 | `y_max`, `stretch`, `time` as `f64` |
//! | `3 * nx * ny * 8` | shifted `rho`, `u`, `h` in turn, each row-major with `x` outer |

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use blmhd::State;

use crate::config::format_f64;

pub const SNAPSHOT_MAGIC: &[u8; 6] = b"BLMHD1";
pub const SNAPSHOT_FIELDS: [&str; 3] = ["rho", "u", "h"];
const HEADER_BYTES: usize = 6 + 5 * 8;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },

    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },

    #[error("{path}: not a snapshot: {message}")]
    Snapshot { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io { path: path.to_path_buf(), source }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Flag(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

pub fn create_dir(dir: &Path) -> Result<(), OutputError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Writes a header row followed by `rows`, each as long as the header.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> Result<(), OutputError> {
    let csv_err = |source| OutputError::Csv { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(BufWriter::new(file));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), OutputError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|source| OutputError::Json { path: path.to_path_buf(), source })?;
    w.write_all(b"\n").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// The shifted unknowns of one state with the grid header.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub nx: usize,
    pub ny: usize,
    pub y_max: f64,
    pub stretch: f64,
    pub time: f64,
    /// `rho`, `u`, `h`, each `nx * ny` values row-major.
    pub fields: [Vec<f64>; 3],
}

impl Snapshot {
    pub fn from_state(state: &State) -> Self {
        let spec = state.grid.spec();
        let flat = |f: &blmhd::Field| f.values().iter().copied().collect::<Vec<f64>>();
        Snapshot {
            nx: spec.nx,
            ny: spec.ny,
            y_max: spec.y_max,
            stretch: spec.stretch,
            time: state.time,
            fields: [flat(&state.rho), flat(&state.u), flat(&state.h)],
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_BYTES + 3 * self.nx * self.ny * 8);
        out.extend_from_slice(SNAPSHOT_MAGIC);
        out.extend_from_slice(&(self.nx as u64).to_le_bytes());
        out.extend_from_slice(&(self.ny as u64).to_le_bytes());
        for v in [self.y_max, self.stretch, self.time] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for field in &self.fields {
            for v in field {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, String> {
        if bytes.len() < HEADER_BYTES || &bytes[..6] != SNAPSHOT_MAGIC {
            return Err("missing BLMHD1 header".into());
        }
        let word = |k: usize| -> [u8; 8] { bytes[6 + 8 * k..14 + 8 * k].try_into().expect("8 bytes") };
        let nx = u64::from_le_bytes(word(0));
        let ny = u64::from_le_bytes(word(1));
        let n = nx.checked_mul(ny).and_then(|n| usize::try_from(n).ok()).ok_or("grid size overflows")?;
        let expected = n.checked_mul(24).and_then(|b| b.checked_add(HEADER_BYTES)).ok_or("grid size overflows")?;
        if bytes.len() != expected {
            return Err(format!("expected {expected} bytes for {nx} x {ny}, found {}", bytes.len()));
        }
        let body = &bytes[HEADER_BYTES..];
        let field = |k: usize| -> Vec<f64> {
            body[k * n * 8..(k + 1) * n * 8]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect()
        };
        Ok(Snapshot {
            nx: nx as usize,
            ny: ny as usize,
            y_max: f64::from_le_bytes(word(2)),
            stretch: f64::from_le_bytes(word(3)),
            time: f64::from_le_bytes(word(4)),
            fields: [field(0), field(1), field(2)],
        })
    }
}

pub fn write_snapshot(path: &Path, snapshot: &Snapshot) -> Result<(), OutputError> {
    std::fs::write(path, snapshot.to_bytes()).map_err(io_err(path))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, OutputError> {
    let mut bytes = Vec::new();
    File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(io_err(path))?;
    Snapshot::from_bytes(&bytes).map_err(|message| OutputError::Snapshot { path: path.to_path_buf(), message })
}

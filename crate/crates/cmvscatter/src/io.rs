//! JSON documents for sequences and scattering data, and CSV tables.
//!
//! Floats are written in shortest round-trip form, so parse then serialize
//! reproduces a document byte for byte.

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

use crate::cmv::{CmvError, VerblunskySequence};
use crate::direct::{DirectError, Mass, SMatrix, ScatteringData};
use crate::geometry::{ArcGeometry, GeometryError, QuadratureGrid, C64};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid sequence: {0}")]
    Sequence(#[from] CmvError),
    #[error("invalid scattering data: {0}")]
    Data(#[from] DirectError),
    #[error("invalid grid: {0}")]
    Grid(#[from] GeometryError),
    #[error("R_plus[{index}] has arg {found}, expected grid angle {expected}")]
    GridMismatch { index: usize, found: f64, expected: f64 },
    #[error("window_hi {found} does not match window_lo + len(values) - 1 = {expected}")]
    WindowMismatch { found: i64, expected: i64 },
    #[error("values[{index}] has index {found}, expected {expected}")]
    IndexMismatch { index: usize, found: i64, expected: i64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Parses JSON, reporting the field path of the first schema violation.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| IoError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("documents contain only finite numbers");
    s.push('\n');
    s
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    parse_json(&std::fs::read_to_string(path)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    std::fs::write(path, to_json(value))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceDoc {
    pub window_lo: i64,
    pub window_hi: i64,
    pub values: Vec<(i64, f64, f64)>,
    pub tail_left: [f64; 2],
    pub tail_right: [f64; 2],
}

impl From<&VerblunskySequence> for SequenceDoc {
    fn from(seq: &VerblunskySequence) -> Self {
        let lo = seq.window_lo();
        Self {
            window_lo: lo,
            window_hi: seq.window_hi(),
            values: seq.values().iter().enumerate().map(|(k, a)| (lo + k as i64, a.re, a.im)).collect(),
            tail_left: [seq.tail_left().re, seq.tail_left().im],
            tail_right: [seq.tail_right().re, seq.tail_right().im],
        }
    }
}

impl SequenceDoc {
    pub fn to_sequence(&self) -> Result<VerblunskySequence, IoError> {
        let expected = self.window_lo + self.values.len() as i64 - 1;
        if self.window_hi != expected {
            return Err(IoError::WindowMismatch { found: self.window_hi, expected });
        }
        for (k, v) in self.values.iter().enumerate() {
            let expected = self.window_lo + k as i64;
            if v.0 != expected {
                return Err(IoError::IndexMismatch { index: k, found: v.0, expected });
            }
        }
        let c = |p: [f64; 2]| C64::new(p[0], p[1]);
        Ok(VerblunskySequence::new(
            self.window_lo,
            self.values.iter().map(|v| C64::new(v.1, v.2)).collect(),
            c(self.tail_left),
            c(self.tail_right),
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringDoc {
    pub phase_c_plus: f64,
    #[serde(rename = "R_plus")]
    pub r_plus: Vec<[f64; 3]>,
    pub masses: Vec<[f64; 2]>,
    pub xi0: f64,
}

impl From<&ScatteringData> for ScatteringDoc {
    fn from(d: &ScatteringData) -> Self {
        Self {
            phase_c_plus: d.phase_c_plus,
            r_plus: d.r_plus.iter().enumerate().map(|(j, r)| [d.grid.angle(j), r.re, r.im]).collect(),
            masses: d.masses.iter().map(|m| [m.zeta, m.nu]).collect(),
            xi0: d.xi0,
        }
    }
}

impl ScatteringDoc {
    /// Rebuilds the midpoint grid from the sample count; stored angles must match it.
    pub fn to_data(&self) -> Result<ScatteringData, IoError> {
        let grid = QuadratureGrid::new(self.r_plus.len())?;
        for (j, s) in self.r_plus.iter().enumerate() {
            let expected = grid.angle(j);
            if (s[0] - expected).abs() > 1e-9 {
                return Err(IoError::GridMismatch { index: j, found: s[0], expected });
            }
        }
        Ok(ScatteringData::new(
            self.xi0,
            self.phase_c_plus,
            grid,
            self.r_plus.iter().map(|s| C64::new(s[1], s[2])).collect(),
            self.masses.iter().map(|m| Mass { zeta: m[0], nu: m[1] }).collect(),
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryDoc {
    pub xi0: f64,
    pub phase_c: f64,
    pub modulus: f64,
    pub kappa: [f64; 2],
    pub rho: f64,
}

impl From<&ArcGeometry> for GeometryDoc {
    fn from(g: &ArcGeometry) -> Self {
        Self { xi0: g.xi0, phase_c: g.phase_c, modulus: g.modulus(), kappa: [g.kappa.re, g.kappa.im], rho: g.rho }
    }
}

/// Shortest round-trip form; scientific below `1e−4` in magnitude.
fn format_float(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// Writes a CSV table with a one-line header.
pub fn write_csv<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| format_float(x)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), IoError> {
    write_csv(std::fs::File::create(path)?, header, rows)
}

pub const SMATRIX_HEADER: [&str; 9] =
    ["arg", "r_minus_re", "r_minus_im", "t_minus_re", "t_minus_im", "t_plus_re", "t_plus_im", "r_plus_re", "r_plus_im"];

/// One row per node: `arg τ` and the entries of `[[R₋, T₋], [T₊, R₊]]`, row-major.
pub fn smatrix_rows(s: &SMatrix) -> Vec<Vec<f64>> {
    (0..s.grid.len())
        .map(|j| {
            let m = s.matrix(j);
            let mut row = vec![s.grid.angle(j)];
            for z in [m[0][0], m[0][1], m[1][0], m[1][1]] {
                row.extend([z.re, z.im]);
            }
            row
        })
        .collect()
}

/// Reads a CSV table, checking the header.
pub fn read_csv(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>, IoError> {
    let mut r = csv::Reader::from_path(path)?;
    let found: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if found != header {
        return Err(IoError::Schema { path: "header".into(), message: format!("expected {header:?}, found {found:?}") });
    }
    r.records()
        .enumerate()
        .map(|(i, rec)| {
            rec?.iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|e| IoError::Schema { path: format!("row {i}"), message: e.to_string() })
                })
                .collect()
        })
        .collect()
}

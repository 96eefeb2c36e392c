//! Run configuration: JSON file defaults overridden by command-line flags.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::PathBuf;

use cmvscatter::cmv::VerblunskySequence;
use cmvscatter::fixtures;
use cmvscatter::geometry::{ArcGeometry, C64};
use cmvscatter::io::{read_json, SequenceDoc};

use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SequenceSpec {
    /// Empty window; the coefficient comes from `xi0` and `phase_c_plus` unless given.
    Constant { a: Option<[f64; 2]> },
    /// Seeded random window around the constant coefficient.
    Perturb { count: usize, seed: u64, amplitude: f64 },
    /// One-entry step whose left tail is rotated by `i`.
    Soliton,
    /// Real window `[0.5, 0.2, 0.8]` with `T` nonzero at both arc edges.
    EdgeResonant,
    File { path: PathBuf },
    Inline { doc: SequenceDoc },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub smatrix: f64,
    pub wronskian: f64,
    pub identity: f64,
    pub roundtrip: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { smatrix: 1e-8, wronskian: 1e-8, identity: 1e-4, roundtrip: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub xi0: f64,
    pub phase_c_plus: f64,
    pub sequence: SequenceSpec,
    pub grid: usize,
    pub basis: usize,
    pub shifts: usize,
    pub out: PathBuf,
    pub levels: usize,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            xi0: PI / 3.0,
            phase_c_plus: 0.0,
            sequence: SequenceSpec::Constant { a: None },
            grid: 2048,
            basis: 32,
            shifts: 12,
            out: PathBuf::from("out"),
            levels: 8,
            tolerances: Tolerances::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&PathBuf>) -> Result<Self, Failure> {
        match path {
            Some(p) => read_json(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
            None => Ok(Self::default()),
        }
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let bad = |m: String| Err(Failure::Input(m));
        if !(self.xi0 > 0.0 && self.xi0 < PI) {
            return bad(format!("xi0 = {} must lie in (0, pi)", self.xi0));
        }
        if self.grid < 8 || !self.grid.is_power_of_two() {
            return bad(format!("grid = {} must be a power of two, at least 8", self.grid));
        }
        if self.basis < 8 {
            return bad(format!("basis = {} must be at least 8", self.basis));
        }
        if self.shifts < 1 {
            return bad("shifts must be at least 1".into());
        }
        if self.levels < 3 {
            return bad(format!("levels = {} must be at least 3", self.levels));
        }
        Ok(())
    }

    pub fn geometry(&self) -> ArcGeometry {
        ArcGeometry::from_arc(self.xi0).expect("validated arc").with_phase(self.phase_c_plus)
    }

    pub fn sequence(&self) -> Result<VerblunskySequence, Failure> {
        let base = self.geometry().constant_coefficient();
        let input = |e: cmvscatter::cmv::CmvError| Failure::Input(e.to_string());
        match &self.sequence {
            SequenceSpec::Constant { a: None } => fixtures::constant(base).map_err(input),
            SequenceSpec::Constant { a: Some(a) } => fixtures::constant(C64::new(a[0], a[1])).map_err(input),
            SequenceSpec::Perturb { count, seed, amplitude } => {
                fixtures::random_window(base, *count, *seed, *amplitude).map_err(input)
            }
            SequenceSpec::Soliton => fixtures::step_with(base).map_err(input),
            SequenceSpec::EdgeResonant => Ok(fixtures::edge_resonant()),
            SequenceSpec::File { path } => read_json::<SequenceDoc>(path)
                .and_then(|d| d.to_sequence())
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
            SequenceSpec::Inline { doc } => doc.to_sequence().map_err(|e| Failure::Input(e.to_string())),
        }
    }
}

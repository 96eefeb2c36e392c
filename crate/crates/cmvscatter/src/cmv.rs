//! Two-sided CMV matrices built from eventually constant Verblunsky sequences.
//!
//! Index convention: `𝔄 = 𝔄₀𝔄₁`, where `𝔄₀` carries the block
//! `A_n = [[ā_n, ρ_n], [ρ_n, −a_n]]` on rows/columns `(n, n+1)` for even `n`, and
//! `𝔄₁` carries `A_n` on `(n, n+1)` for odd `n`. With this offset the
//! multiplication by `v` in the free basis `{𝔢_n}` is exactly the CMV matrix of the
//! constant sequence `a = e^{ic} sin(ξ0/2)`.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::geometry::{ArcGeometry, GeometryError, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CmvError {
    #[error("coefficient a_{index} = {value} is not inside the unit disk")]
    NotInDisk { index: i64, value: C64 },
    #[error("tail {0} must satisfy 0 < |a| < 1")]
    BadTail(C64),
    #[error("tails {0} and {1} have different moduli, so they produce different arcs")]
    MismatchedTails(C64, C64),
    #[error("window [{lo}, {hi}] is too small (need hi - lo >= 4)")]
    WindowTooSmall { lo: i64, hi: i64 },
    #[error("window start {0} must be even")]
    OddAlignment(i64),
    #[error("periodic truncation needs an even number of sites, got {0}")]
    OddPeriod(usize),
    #[error("cap {0} is not unimodular")]
    BadCap(C64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("eigenvalue solver failed: {0}")]
    EigenSolver(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Two-sided sequence, constant outside `[window_lo, window_lo + values.len())`.
#[derive(Debug, Clone, PartialEq)]
pub struct VerblunskySequence {
    window_lo: i64,
    values: Vec<C64>,
    tail_left: C64,
    tail_right: C64,
}

pub fn rho_of(a: C64) -> f64 {
    (1.0 - a.norm_sqr()).max(0.0).sqrt()
}

impl VerblunskySequence {
    /// Both tails must share a modulus: that modulus fixes the common arc `E`.
    pub fn new(
        window_lo: i64,
        values: Vec<C64>,
        tail_left: C64,
        tail_right: C64,
    ) -> Result<Self, CmvError> {
        for t in [tail_left, tail_right] {
            if !(t.norm() > 0.0 && t.norm() < 1.0) {
                return Err(CmvError::BadTail(t));
            }
        }
        if (tail_left.norm() - tail_right.norm()).abs() > 1e-12 {
            return Err(CmvError::MismatchedTails(tail_left, tail_right));
        }
        for (i, &a) in values.iter().enumerate() {
            if !(a.norm() < 1.0) {
                return Err(CmvError::NotInDisk { index: window_lo + i as i64, value: a });
            }
        }
        Ok(Self { window_lo, values, tail_left, tail_right })
    }

    pub fn constant(a: C64) -> Result<Self, CmvError> {
        Self::new(0, Vec::new(), a, a)
    }

    pub fn window_lo(&self) -> i64 {
        self.window_lo
    }

    /// Last window index; `window_lo − 1` for an empty window.
    pub fn window_hi(&self) -> i64 {
        self.window_lo + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn tail_left(&self) -> C64 {
        self.tail_left
    }

    pub fn tail_right(&self) -> C64 {
        self.tail_right
    }

    pub fn get(&self, n: i64) -> C64 {
        if n < self.window_lo {
            self.tail_left
        } else if n > self.window_hi() {
            self.tail_right
        } else {
            self.values[(n - self.window_lo) as usize]
        }
    }

    pub fn rho(&self, n: i64) -> f64 {
        rho_of(self.get(n))
    }

    /// `c₊ = arg a_{+∞}`.
    pub fn phase_plus(&self) -> f64 {
        self.tail_right.arg()
    }

    /// `c₋ = arg(−ā_{−∞})`, the phase of the involuted right tail.
    pub fn phase_minus(&self) -> f64 {
        (-self.tail_left.conj()).arg()
    }

    /// Arc geometry of the tails, carrying the phase `c₊`.
    pub fn geometry(&self) -> ArcGeometry {
        ArcGeometry::from_modulus(self.tail_right.norm())
            .expect("tails validated at construction")
            .with_phase(self.phase_plus())
    }

    /// `n ↦ −ā_{−n−2}`.
    pub fn involute(&self) -> Self {
        let values: Vec<C64> = self.values.iter().rev().map(|a| -a.conj()).collect();
        Self {
            window_lo: -self.window_hi() - 2,
            values,
            tail_left: -self.tail_right.conj(),
            tail_right: -self.tail_left.conj(),
        }
    }
}

/// How a finite section treats the blocks that straddle its edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryMode {
    /// Plain restriction of the infinite matrix (not unitary near the edges).
    Restricted,
    /// The straddling coefficients `a_{lo−1}` and `a_hi` are replaced by the
    /// unimodular values `left` and `right`, which decouples the section.
    UnimodularCap { left: C64, right: C64 },
    /// The block `A_hi` wraps around and couples `hi` to `lo`.
    PeriodicFree,
}

/// Finite section of a CMV matrix, stored as five diagonals per row.
///
/// `band[r][d]` is the entry in row `lo + r`, column `lo + (r + d − 2) mod N`.
/// Outside periodic mode out-of-range columns hold zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CmvWindow {
    pub lo: i64,
    pub hi: i64,
    pub mode: BoundaryMode,
    band: Vec<[C64; 5]>,
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Entry `(i, j)` of the 2x2 block `A_n` living on `(n, n+1)`.
fn block_entry(a: C64, rho: f64, i_first: bool, j_first: bool) -> C64 {
    match (i_first, j_first) {
        (true, true) => a.conj(),
        (false, false) => -a,
        _ => C64::new(rho, 0.0),
    }
}

pub fn assemble_cmv(
    seq: &VerblunskySequence,
    lo: i64,
    hi: i64,
    mode: BoundaryMode,
) -> Result<CmvWindow, CmvError> {
    if hi - lo < 4 {
        return Err(CmvError::WindowTooSmall { lo, hi });
    }
    if lo.rem_euclid(2) != 0 {
        return Err(CmvError::OddAlignment(lo));
    }
    let n = (hi - lo + 1) as usize;
    if let BoundaryMode::UnimodularCap { left, right } = mode {
        for c in [left, right] {
            if (c.norm() - 1.0).abs() > 1e-12 {
                return Err(CmvError::BadCap(c));
            }
        }
    }
    if mode == BoundaryMode::PeriodicFree && n % 2 == 1 {
        return Err(CmvError::OddPeriod(n));
    }
    // Coefficient for block k, after applying the boundary mode.
    let coef = |k: i64| -> (C64, f64) {
        match mode {
            BoundaryMode::UnimodularCap { left, .. } if k == lo - 1 => (left, 0.0),
            BoundaryMode::UnimodularCap { right, .. } if k == hi => (right, 0.0),
            _ => (seq.get(k), seq.rho(k)),
        }
    };
    let wrap = |k: i64| -> i64 {
        if mode == BoundaryMode::PeriodicFree {
            lo + (k - lo).rem_euclid(n as i64)
        } else {
            k
        }
    };
    // Factor entry (row i, column j) for the factor owning blocks of parity `par`.
    let factor = |par: i64, i: i64, j: i64| -> C64 {
        // Block containing row i in this factor starts at s.
        let s = if (i - par).rem_euclid(2) == 0 { i } else { i - 1 };
        let (s0, s1, j0) = (wrap(s), wrap(s + 1), wrap(j));
        let (a, r) = if mode == BoundaryMode::PeriodicFree { coef(s0) } else { coef(s) };
        if j0 != s0 && j0 != s1 {
            return zero();
        }
        block_entry(a, r, wrap(i) == s0, j0 == s0)
    };
    let in_window = |k: i64| mode == BoundaryMode::PeriodicFree || (lo..=hi).contains(&k);
    let mut band = vec![[zero(); 5]; n];
    for (r, row) in band.iter_mut().enumerate() {
        let i = lo + r as i64;
        for (d, slot) in row.iter_mut().enumerate() {
            let j = i + d as i64 - 2;
            if !in_window(j) {
                continue;
            }
            let mut acc = zero();
            // Intermediate indices may leave the window: a capped block has
            // ρ = 0 there, and a plain restriction needs the true entries.
            for k in i - 1..=i + 1 {
                acc += factor(0, i, wrap(k)) * factor(1, wrap(k), wrap(j));
            }
            *slot = acc;
        }
    }
    Ok(CmvWindow { lo, hi, mode, band })
}

impl CmvWindow {
    pub fn dim(&self) -> usize {
        self.band.len()
    }

    fn col(&self, r: usize, d: usize) -> Option<usize> {
        let n = self.dim() as i64;
        let c = r as i64 + d as i64 - 2;
        if self.mode == BoundaryMode::PeriodicFree {
            Some(c.rem_euclid(n) as usize)
        } else if (0..n).contains(&c) {
            Some(c as usize)
        } else {
            None
        }
    }

    /// Entry at absolute indices `(i, j)`.
    pub fn entry(&self, i: i64, j: i64) -> C64 {
        let r = (i - self.lo) as usize;
        let mut out = zero();
        for d in 0..5 {
            if self.col(r, d).map(|c| self.lo + c as i64) == Some(j) {
                out += self.band[r][d];
            }
        }
        out
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>, CmvError> {
        self.check_dim(x)?;
        Ok((0..self.dim())
            .map(|r| {
                (0..5).filter_map(|d| self.col(r, d).map(|c| self.band[r][d] * x[c])).sum()
            })
            .collect())
    }

    pub fn apply_adjoint(&self, x: &[C64]) -> Result<Vec<C64>, CmvError> {
        self.check_dim(x)?;
        let mut y = vec![zero(); self.dim()];
        for r in 0..self.dim() {
            for d in 0..5 {
                if let Some(c) = self.col(r, d) {
                    y[c] += self.band[r][d].conj() * x[r];
                }
            }
        }
        Ok(y)
    }

    fn check_dim(&self, x: &[C64]) -> Result<(), CmvError> {
        if x.len() != self.dim() {
            return Err(CmvError::Dimension { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for r in 0..n {
            for d in 0..5 {
                if let Some(c) = self.col(r, d) {
                    m[(r, c)] += self.band[r][d];
                }
            }
        }
        m
    }

    /// Number of diagonals (offsets −2..=2) holding a nonzero entry.
    pub fn occupied_diagonals(&self) -> usize {
        (0..5).filter(|&d| self.band.iter().any(|row| row[d] != zero())).count()
    }
}

/// Eigenvalues of a unitary truncation, sorted by argument in `(−π, π]`.
pub fn truncation_spectrum(window: &CmvWindow) -> Result<Vec<C64>, CmvError> {
    let dense = window.to_dense();
    let schur = nalgebra::linalg::Schur::try_new(dense, 1e-15, 10_000)
        .ok_or_else(|| CmvError::EigenSolver("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    let mut ev: Vec<C64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    ev.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
    Ok(ev)
}

/// Largest residual of the two three-term relations for `f(n) = values[n − n0]`
/// with the CMV operator replaced by multiplication by `w`.
///
/// Relation 1: `w{f(2m−1)ρ_{2m−1} − f(2m)ā_{2m−1}} = f(2m)ā_{2m} + f(2m+1)ρ_{2m}`.
/// Relation 2: `w⁻¹{f(2m)ρ_{2m} − f(2m+1)a_{2m}} = f(2m+1)a_{2m+1} + f(2m+2)ρ_{2m+1}`.
pub fn three_term_residual(seq: &VerblunskySequence, n0: i64, values: &[C64], w: C64) -> f64 {
    let n1 = n0 + values.len() as i64 - 1;
    let f = |n: i64| values[(n - n0) as usize];
    let mut worst = 0.0f64;
    for j in n0..=n1 - 2 {
        let lhs;
        let rhs;
        if j.rem_euclid(2) == 1 {
            let (a1, a2) = (seq.get(j), seq.get(j + 1));
            lhs = w * (f(j) * seq.rho(j) - f(j + 1) * a1.conj());
            rhs = f(j + 1) * a2.conj() + f(j + 2) * seq.rho(j + 1);
        } else {
            let (a0, a1) = (seq.get(j), seq.get(j + 1));
            lhs = (f(j) * seq.rho(j) - f(j + 1) * a0) / w;
            rhs = f(j + 1) * a1 + f(j + 2) * seq.rho(j + 1);
        }
        worst = worst.max((lhs - rhs).norm());
    }
    worst
}

//! Schur functions with eventually constant parameters.
//!
//! A function is stored as finitely many leading parameters followed by a constant
//! tail. The constant-tail function is evaluated in closed form through the arc
//! geometry of `|a|`: with `ζ = v⁻¹(w)`, `θ(w) = (a/|a|)(1 − ζκ̄)/(1 − ζκ)`. Every
//! value is rational in `w`, so boundary values on `|w| = 1` need no limiting
//! procedure.

use nalgebra::Matrix2;
use thiserror::Error;

use crate::cmv::{rho_of, VerblunskySequence};
use crate::geometry::{ArcGeometry, QuadratureGrid, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchurError {
    #[error("parameter {0} is not inside the unit disk")]
    NotInDisk(C64),
    #[error("|f(0)| = 1: the Schur algorithm terminates")]
    Terminating,
    #[error("I - vA*D is singular near v = {0}: spectral point proximity")]
    SpectralProximity(C64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchurFunction {
    head: Vec<C64>,
    tail: C64,
}

/// Value at `w` of the Schur function whose parameters all equal `a`.
///
/// This is the root of `w ā θ² + (1 − w) θ − a = 0` that is continuous from
/// `θ(0) = a`; on the gap of the arc of `|a|` it is unimodular.
pub fn constant_tail_value(a: C64, w: C64) -> C64 {
    let m = a.norm();
    if m == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let geom = ArcGeometry::from_modulus(m).expect("0 < |a| < 1");
    let z = geom.preimage_closed(w);
    let k = geom.kappa;
    (a / m) * (1.0 - z * k.conj()) / (1.0 - z * k)
}

impl SchurFunction {
    pub fn new(head: Vec<C64>, tail: C64) -> Result<Self, SchurError> {
        for &a in head.iter().chain(std::iter::once(&tail)) {
            if !(a.norm() < 1.0) {
                return Err(SchurError::NotInDisk(a));
            }
        }
        Ok(Self { head, tail })
    }

    /// `θ ≡ a0`, i.e. parameters `{a0, 0, 0, ...}`.
    pub fn constant(a0: C64) -> Result<Self, SchurError> {
        Self::new(vec![a0], C64::new(0.0, 0.0))
    }

    pub fn head(&self) -> &[C64] {
        &self.head
    }

    pub fn tail(&self) -> C64 {
        self.tail
    }

    /// The `k`-th Schur parameter.
    pub fn parameter(&self, k: usize) -> C64 {
        self.head.get(k).copied().unwrap_or(self.tail)
    }

    pub fn eval(&self, w: C64) -> C64 {
        let mut theta = constant_tail_value(self.tail, w);
        for &a in self.head.iter().rev() {
            theta = (a + w * theta) / (1.0 + w * a.conj() * theta);
        }
        theta
    }

    /// `(θ(0), θ^{(1)})` with `θ^{(1)}(w) = (θ(w) − a0)/(w(1 − ā0 θ(w)))`.
    pub fn step_down(&self) -> Result<(C64, SchurFunction), SchurError> {
        let a0 = self.parameter(0);
        if a0.norm() >= 1.0 {
            return Err(SchurError::Terminating);
        }
        let rest = if self.head.is_empty() {
            self.clone()
        } else {
            Self { head: self.head[1..].to_vec(), tail: self.tail }
        };
        Ok((a0, rest))
    }

    /// Inverse of `step_down`.
    pub fn step_up(a0: C64, f1: &SchurFunction) -> Result<SchurFunction, SchurError> {
        if !(a0.norm() < 1.0) {
            return Err(SchurError::NotInDisk(a0));
        }
        let mut head = Vec::with_capacity(f1.head.len() + 1);
        head.push(a0);
        head.extend_from_slice(&f1.head);
        Ok(Self { head, tail: f1.tail })
    }
}

/// `θ₊ ∼ {a_0, a_1, ...}`.
pub fn theta_plus_from(seq: &VerblunskySequence) -> SchurFunction {
    let head = (0..=seq.window_hi().max(-1)).map(|n| seq.get(n)).collect();
    SchurFunction { head, tail: seq.tail_right() }
}

/// `θ₋ ∼ {−ā_{−1}, −ā_{−2}, ...}`.
pub fn theta_minus_from(seq: &VerblunskySequence) -> SchurFunction {
    let depth = (-seq.window_lo()).max(0);
    let head = (1..=depth).map(|k| -seq.get(-k).conj()).collect();
    SchurFunction { head, tail: -seq.tail_left().conj() }
}

/// `θ₋^{(1)} ∼ {−ā_{−2}, −ā_{−3}, ...}`.
pub fn theta_minus_shifted(seq: &VerblunskySequence) -> SchurFunction {
    theta_minus_from(seq).step_down().expect("parameters inside the disk").1
}

/// `𝓡(w) = (I + wA*D)(I − wA*D)⁻¹` with `D = diag(θ₋^{(1)}(w), θ₊(w))` and
/// `A = [[ā, ρ], [ρ, −a]]` built from `a = a_{−1}`.
pub fn resolvent_r(
    theta_plus: &SchurFunction,
    theta_minus_shifted: &SchurFunction,
    a_minus1: C64,
    w: C64,
) -> Result<Matrix2<C64>, SchurError> {
    resolvent_from_values(theta_plus.eval(w), theta_minus_shifted.eval(w), a_minus1, w)
}

fn resolvent_from_values(
    tp: C64,
    tm1: C64,
    a: C64,
    w: C64,
) -> Result<Matrix2<C64>, SchurError> {
    let r = C64::new(rho_of(a), 0.0);
    let a_star = Matrix2::new(a, r, r, -a.conj());
    let d = Matrix2::new(tm1, C64::new(0.0, 0.0), C64::new(0.0, 0.0), tp);
    let x = a_star * d * w;
    let id = Matrix2::identity();
    let den = id - x;
    if den.determinant().norm() < 1e-13 {
        return Err(SchurError::SpectralProximity(w));
    }
    Ok((id + x) * den.try_inverse().expect("determinant checked"))
}

/// `(1 + wθ₊θ₋)/(1 − wθ₊θ₋)`.
pub fn r_diagonal(theta_plus: &SchurFunction, theta_minus: &SchurFunction, w: C64) -> C64 {
    let p = w * theta_plus.eval(w) * theta_minus.eval(w);
    (1.0 + p) / (1.0 - p)
}

/// Samples of the 2x2 spectral density on `E` at `t = v(τ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    pub taus: Vec<C64>,
    pub points: Vec<C64>,
    pub values: Vec<Matrix2<C64>>,
    /// `(1 − |θ₋^{(1)}|²)(1 − |θ₊|²)` at each point.
    pub defect_products: Vec<f64>,
}

/// `W = ((I + 𝓡*)/2) diag(1 − |θ₋^{(1)}|², 1 − |θ₊|²) ((I + 𝓡)/2)` at every grid
/// node, using the boundary values at `t = v(τ)`.
pub fn spectral_density_w(
    theta_plus: &SchurFunction,
    theta_minus_shifted: &SchurFunction,
    a_minus1: C64,
    geom: &ArcGeometry,
    grid: &QuadratureGrid,
) -> Result<SpectralDensity, SchurError> {
    let mut out = SpectralDensity {
        taus: Vec::with_capacity(grid.len()),
        points: Vec::with_capacity(grid.len()),
        values: Vec::with_capacity(grid.len()),
        defect_products: Vec::with_capacity(grid.len()),
    };
    for &tau in grid.nodes() {
        let t = geom.v(tau);
        let t = t / t.norm();
        let tp = theta_plus.eval(t);
        let tm1 = theta_minus_shifted.eval(t);
        let r = resolvent_from_values(tp, tm1, a_minus1, t)?;
        let id = Matrix2::<C64>::identity();
        let half = (id + r) * C64::new(0.5, 0.0);
        let d1 = (1.0 - tm1.norm_sqr()).max(0.0);
        let d2 = (1.0 - tp.norm_sqr()).max(0.0);
        let diag = Matrix2::new(
            C64::new(d1, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(d2, 0.0),
        );
        out.taus.push(tau);
        out.points.push(t);
        out.values.push(half.adjoint() * diag * half);
        out.defect_products.push(d1 * d2);
    }
    Ok(out)
}

/// Values below this floor are treated as zeros of the density.
pub const LOG_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SzegoEstimate {
    /// `∫ log det W(v(τ)) dm(τ)`.
    pub log_det_w: f64,
    /// `∫ log[(1 − |θ₋^{(1)}|²)(1 − |θ₊|²)] dm(τ)`.
    pub defect_variant: f64,
    pub clamped_fraction: f64,
    /// False when more than 1% of the nodes hit the floor.
    pub finite: bool,
}

pub fn szego_integral(density: &SpectralDensity) -> SzegoEstimate {
    let n = density.values.len() as f64;
    let mut clamped = 0usize;
    let mut log_clamped = |x: f64| {
        if x < LOG_FLOOR {
            clamped += 1;
            LOG_FLOOR.ln()
        } else {
            x.ln()
        }
    };
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for (w, &d) in density.values.iter().zip(&density.defect_products) {
        s1 += log_clamped(w.determinant().re);
        s2 += log_clamped(d);
    }
    let clamped_fraction = clamped as f64 / (2.0 * n);
    SzegoEstimate {
        log_det_w: s1 / n,
        defect_variant: s2 / n,
        clamped_fraction,
        finite: clamped_fraction <= 0.01,
    }
}

/// Taylor coefficients `c_0..c_{n−1}` of `f` at 0 from samples on `|w| = radius`.
pub fn taylor_coefficients(f: impl Fn(C64) -> C64, radius: f64, n: usize) -> Vec<C64> {
    let m = (4 * n).max(64).next_power_of_two();
    let samples: Vec<C64> = (0..m)
        .map(|j| f(C64::from_polar(radius, 2.0 * std::f64::consts::PI * j as f64 / m as f64)))
        .collect();
    (0..n)
        .map(|k| {
            let s: C64 = samples
                .iter()
                .enumerate()
                .map(|(j, &x)| {
                    x * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (j * k) as f64 / m as f64)
                })
                .sum();
            s / (m as f64 * radius.powi(k as i32))
        })
        .collect()
}

/// Classical Schur algorithm on a truncated power series. Each step consumes one
/// coefficient, so at most `coeffs.len()` parameters come back.
pub fn schur_parameters_from_taylor(coeffs: &[C64], count: usize) -> Vec<C64> {
    let mut f = coeffs.to_vec();
    let mut out = Vec::new();
    while out.len() < count && !f.is_empty() {
        let a = f[0];
        out.push(a);
        if a.norm() >= 1.0 || f.len() == 1 {
            break;
        }
        // (f − a)/w divided by (1 − ā f), as power series.
        let num: Vec<C64> = f[1..].to_vec();
        let den: Vec<C64> = f
            .iter()
            .enumerate()
            .map(|(j, &c)| if j == 0 { 1.0 - a.conj() * c } else { -a.conj() * c })
            .collect();
        let mut q = vec![C64::new(0.0, 0.0); num.len()];
        for j in 0..num.len() {
            let mut s = num[j];
            for i in 1..=j {
                s -= den[i] * q[j - i];
            }
            q[j] = s / den[0];
        }
        f = q;
    }
    out
}

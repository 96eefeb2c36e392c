//! Conformal geometry of a single spectral arc.
//!
//! The arc is `E = {e^{iξ} : ξ0 ≤ ξ ≤ 2π − ξ0}`. The map `v = b_κ / b_κ̄` sends the
//! unit disk onto the complement of `E`, with `v(κ) = 0` and `v(κ̄) = ∞`. The upper
//! and lower semicircles both cover `E` (`v(τ̄) = v(τ)` on `|τ| = 1`), and the real
//! diameter covers the gap `T \ E`.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Tolerance used to decide that a value sits on the unit circle.
const CIRCLE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("opening angle {0} is outside (0, pi)")]
    DegenerateArc(f64),
    #[error("coefficient modulus {0} is outside (0, 1)")]
    BadModulus(f64),
    #[error("point {0} is a pole")]
    Pole(C64),
    #[error("point {0} is not in the open unit disk")]
    OutsideDisk(C64),
    #[error("value {0} lies on the spectral arc")]
    OnArc(C64),
    #[error("grid size {0} is not a power of two >= 8")]
    GridSize(usize),
}

/// Geometry of the arc `E` and its uniformizing point `κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcGeometry {
    pub xi0: f64,
    pub kappa: C64,
    pub rho: f64,
    /// Phase `c` of the free basis; `e^{ic}` multiplies the even elements.
    pub phase_c: f64,
}

impl ArcGeometry {
    pub fn from_arc(xi0: f64) -> Result<Self, GeometryError> {
        if !(xi0 > 0.0 && xi0 < PI) {
            return Err(GeometryError::DegenerateArc(xi0));
        }
        let t = ((PI - xi0) / 4.0).tan();
        Ok(Self { xi0, kappa: C64::new(0.0, -t), rho: (xi0 / 2.0).cos(), phase_c: 0.0 })
    }

    /// Geometry of the constant sequence with `|a| = modulus`.
    pub fn from_modulus(modulus: f64) -> Result<Self, GeometryError> {
        if !(modulus > 0.0 && modulus < 1.0) {
            return Err(GeometryError::BadModulus(modulus));
        }
        Self::from_arc(2.0 * modulus.asin())
    }

    pub fn with_phase(mut self, c: f64) -> Self {
        self.phase_c = c;
        self
    }

    /// `|a| = sin(ξ0/2)` of the constant sequence producing this arc.
    pub fn modulus(&self) -> f64 {
        (self.xi0 / 2.0).sin()
    }

    /// Constant Verblunsky coefficient `e^{ic} sin(ξ0/2)`.
    pub fn constant_coefficient(&self) -> C64 {
        C64::from_polar(self.modulus(), self.phase_c)
    }

    pub fn kappa_bar(&self) -> C64 {
        self.kappa.conj()
    }

    /// `b_κ(z) = −i (z − κ)/(1 − z κ̄)`, normalized by `b_κ(κ̄) > 0`.
    pub fn b_kappa(&self, z: C64) -> C64 {
        let k = self.kappa;
        -I * (z - k) / (1.0 - z * k.conj())
    }

    /// `b_κ̄(z) = i (z − κ̄)/(1 − z κ)`, normalized by `b_κ̄(κ) > 0`.
    pub fn b_kappa_bar(&self, z: C64) -> C64 {
        let k = self.kappa;
        I * (z - k.conj()) / (1.0 - z * k)
    }

    /// `b_κ b_κ̄`; real and positive on `(−1, 1)`, unimodular on the circle.
    pub fn bb(&self, z: C64) -> C64 {
        self.b_kappa(z) * self.b_kappa_bar(z)
    }

    /// The uniformizing map. Returns an infinite value at `κ̄`.
    pub fn v(&self, z: C64) -> C64 {
        let den = self.b_kappa_bar(z);
        if den == C64::new(0.0, 0.0) {
            return C64::new(f64::INFINITY, 0.0);
        }
        self.b_kappa(z) / den
    }

    /// Whether `w` lies on `E` (to within `CIRCLE_TOL` radially).
    pub fn on_arc(&self, w: C64) -> bool {
        (w.norm() - 1.0).abs() <= CIRCLE_TOL && w.re <= self.xi0.cos() + CIRCLE_TOL
    }

    /// Preimage of `w` under `v` in the open disk.
    pub fn v_inverse(&self, w: C64) -> Result<C64, GeometryError> {
        if self.on_arc(w) {
            return Err(GeometryError::OnArc(w));
        }
        Ok(self.preimage_closed(w))
    }

    /// Preimage in the closed disk; on `E` it returns the lower-semicircle point,
    /// which is the boundary value seen from `|w| < 1`.
    pub fn preimage_closed(&self, w: C64) -> C64 {
        if w.is_infinite() {
            return self.kappa_bar();
        }
        let k = self.kappa;
        let kb = k.conj();
        // v(ζ) = w is the palindromic quadratic A ζ² + B ζ + A = 0.
        let a = -(w * kb + k);
        let b = w * (1.0 + kb * kb) + 1.0 + k * k;
        let s = (b * b - 4.0 * a * a).sqrt();
        let d1 = -b - s;
        let d2 = -b + s;
        let den = if d1.norm() >= d2.norm() { d1 } else { d2 };
        // Roots multiply to 1, so 2A/den is the one of smaller modulus.
        let z = 2.0 * a / den;
        if z.norm() > 1.0 - 1e-9 {
            // Both roots unimodular: pick the lower semicircle.
            let zn = z / z.norm();
            return if zn.im <= 0.0 { zn } else { zn.conj() };
        }
        z
    }

    /// Green function of `Ω` with pole at `v(z0)`, pulled back to the disk.
    pub fn green(&self, z: C64, z0: C64) -> Result<f64, GeometryError> {
        for p in [z, z0] {
            if p.norm() >= 1.0 {
                return Err(GeometryError::OutsideDisk(p));
            }
        }
        let b = blaschke_factor(z0, z, Some(0.0))?;
        if b.norm() == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(-b.norm().ln())
    }

    /// Free orthonormal basis element `𝔢_{n,c}(z)`.
    pub fn free_basis(&self, n: i64, z: C64) -> C64 {
        let m = n.div_euclid(2) as i32;
        let bb = self.bb(z);
        let q = (1.0 - self.kappa.norm_sqr()).sqrt();
        if n.rem_euclid(2) == 0 {
            // K_{κ̄}(z) = q/(1 − z κ).
            bb.powi(m) * (q / (1.0 - z * self.kappa)) * C64::from_polar(1.0, self.phase_c)
        } else {
            bb.powi(m) * self.b_kappa_bar(z) * (q / (1.0 - z * self.kappa.conj()))
        }
    }

    /// `free_basis` with pole detection for negative indices.
    pub fn free_basis_checked(&self, n: i64, z: C64) -> Result<C64, GeometryError> {
        if n < 0 {
            let m = n.div_euclid(2);
            let at_k = (z - self.kappa).norm() < 1e-14;
            let at_kb = (z - self.kappa_bar()).norm() < 1e-14;
            let pole_k = m < 0 && at_k;
            let pole_kb = at_kb && (if n % 2 == 0 { m < 0 } else { m + 1 < 0 });
            if pole_k || pole_kb {
                return Err(GeometryError::Pole(z));
            }
        }
        Ok(self.free_basis(n, z))
    }

    /// `d log v / d log τ` on the circle, equal to `P_κ(τ) − P_κ̄(τ)`.
    ///
    /// Negative on the upper semicircle, positive on the lower one, zero at `±1`.
    pub fn dlogv(&self, tau: C64) -> f64 {
        let q = 1.0 - self.kappa.norm_sqr();
        q / (tau - self.kappa).norm_sqr() - q / (tau - self.kappa_bar()).norm_sqr()
    }

    /// `(log v)'(z)`.
    pub fn log_v_derivative(&self, z: C64) -> C64 {
        let k = self.kappa;
        let kb = k.conj();
        let q = 1.0 - k.norm_sqr();
        q / ((z - k) * (1.0 - z * kb)) - q / ((z - kb) * (1.0 - z * k))
    }

    /// `(1/v)'(z)`.
    pub fn v_inv_derivative(&self, z: C64) -> C64 {
        -self.log_v_derivative(z) / self.v(z)
    }

    /// Real `x ∈ [−2, 2]` on the straightened arc for a circle point `τ`.
    pub fn straighten(&self, z: C64) -> C64 {
        z + 1.0 / z
    }
}

/// Blaschke factor vanishing at `zeta0`.
///
/// With `phase = Some(c)` the factor is `e^{ic}(ζ − ζ0)/(1 − ζ ζ̄0)`. With `None`
/// the default normalization applies: `b(ζ̄0) > 0` for non-real `ζ0`,
/// `(|ζ0|/ζ0)(ζ0 − ζ)/(1 − ζ ζ0)` for real nonzero `ζ0`, and `ζ` for `ζ0 = 0`.
pub fn blaschke_factor(zeta0: C64, zeta: C64, phase: Option<f64>) -> Result<C64, GeometryError> {
    if zeta0.norm() >= 1.0 {
        return Err(GeometryError::OutsideDisk(zeta0));
    }
    let den = 1.0 - zeta * zeta0.conj();
    if den.norm() < 1e-300 {
        return Err(GeometryError::Pole(zeta));
    }
    let core = (zeta - zeta0) / den;
    let unit = match phase {
        Some(c) => C64::from_polar(1.0, c),
        None if zeta0.norm() == 0.0 => C64::new(1.0, 0.0),
        None if zeta0.im == 0.0 => C64::new(-zeta0.re.signum(), 0.0),
        None => {
            // Fix the phase so that the value at ζ̄0 is positive.
            let at = (zeta0.conj() - zeta0) / (1.0 - zeta0.conj() * zeta0.conj());
            at.conj() / at.norm()
        }
    };
    Ok(unit * core)
}

/// `K(ζ, ζ0) = sqrt(1 − |ζ0|²)/(1 − ζ ζ̄0)`, the unit-norm Szegő kernel.
pub fn normalized_kernel(zeta0: C64, zeta: C64) -> C64 {
    (1.0 - zeta0.norm_sqr()).sqrt() / (1.0 - zeta * zeta0.conj())
}

/// Finite Blaschke product over real zeros, with the `|ζ_k|/ζ_k` convention.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlaschkeProductSpec {
    pub zeros: Vec<f64>,
    pub includes_zero_factor: bool,
}

impl BlaschkeProductSpec {
    pub fn new(zeros: Vec<f64>) -> Result<Self, GeometryError> {
        let mut nonzero = Vec::with_capacity(zeros.len());
        let mut includes_zero_factor = false;
        for z in zeros {
            if !(z.abs() < 1.0) {
                return Err(GeometryError::OutsideDisk(C64::new(z, 0.0)));
            }
            if z == 0.0 {
                includes_zero_factor = true;
            } else {
                nonzero.push(z);
            }
        }
        Ok(Self { zeros: nonzero, includes_zero_factor })
    }

    fn factor(zk: f64, z: C64) -> C64 {
        zk.signum() * (zk - z) / (1.0 - z * zk)
    }

    pub fn eval(&self, z: C64) -> Result<C64, GeometryError> {
        let mut out = if self.includes_zero_factor { z } else { C64::new(1.0, 0.0) };
        for &zk in &self.zeros {
            if (1.0 - z * zk).norm() < 1e-300 {
                return Err(GeometryError::Pole(z));
            }
            out *= Self::factor(zk, z);
        }
        Ok(out)
    }

    /// `B'(ζ_j)` at one of the zeros.
    pub fn derivative_at_zero(&self, zeta: f64) -> C64 {
        let z = C64::new(zeta, 0.0);
        let mut out = C64::new(1.0, 0.0);
        let mut found = false;
        if self.includes_zero_factor {
            if zeta == 0.0 {
                found = true;
            } else {
                out *= z;
            }
        }
        for &zk in &self.zeros {
            if !found && zk == zeta {
                // d/dz of sign(zk)(zk − z)/(1 − z zk) at z = zk.
                out *= -zk.signum() / (1.0 - zk * zk);
                found = true;
            } else {
                out *= Self::factor(zk, z);
            }
        }
        out
    }
}

/// Midpoint grid `τ_j = exp(2πi(j + ½)/M)`. It avoids `±1` and is closed under
/// conjugation: `conj(τ_j) = τ_{M−1−j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<C64>,
}

impl QuadratureGrid {
    pub fn new(m: usize) -> Result<Self, GeometryError> {
        if m < 8 || !m.is_power_of_two() {
            return Err(GeometryError::GridSize(m));
        }
        let nodes = (0..m)
            .map(|j| C64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / m as f64))
            .collect();
        Ok(Self { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    pub fn conj_index(&self, j: usize) -> usize {
        self.nodes.len() - 1 - j
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * (j as f64 + 0.5) / self.nodes.len() as f64
    }

    /// Samples of `f` at every node.
    pub fn sample(&self, f: impl Fn(C64) -> C64) -> Vec<C64> {
        self.nodes.iter().map(|&t| f(t)).collect()
    }

    /// `g(τ̄_j)` for samples `g(τ_j)`.
    pub fn reflect(&self, values: &[C64]) -> Vec<C64> {
        values.iter().rev().copied().collect()
    }

    pub fn mean(&self, values: &[C64]) -> C64 {
        values.iter().sum::<C64>() / values.len() as f64
    }

    /// Standard circle inner product `∫ f ḡ dm`.
    pub fn inner(&self, f: &[C64], g: &[C64]) -> C64 {
        f.iter().zip(g).map(|(a, b)| a * b.conj()).sum::<C64>() / f.len() as f64
    }

    pub fn norm(&self, f: &[C64]) -> f64 {
        self.inner(f, f).re.max(0.0).sqrt()
    }
}

/// Multiplication by `v` in the free basis: `M_{mn} = ⟨v 𝔢_n, 𝔢_m⟩` for
/// `m, n ∈ [n_lo, n_hi]`, returned row-major with `M[m − n_lo][n − n_lo]`.
pub fn multiplication_matrix(
    geom: &ArcGeometry,
    n_lo: i64,
    n_hi: i64,
    grid: &QuadratureGrid,
) -> Vec<Vec<C64>> {
    let basis: Vec<Vec<C64>> =
        (n_lo..=n_hi).map(|n| grid.sample(|t| geom.free_basis(n, t))).collect();
    let vb: Vec<Vec<C64>> = basis
        .iter()
        .map(|b| b.iter().zip(grid.nodes()).map(|(x, &t)| x * geom.v(t)).collect())
        .collect();
    basis.iter().map(|em| vb.iter().map(|ven| grid.inner(ven, em)).collect()).collect()
}

/// Mean of `f` over the circle `|z − z0| = r` with `n` equispaced points.
pub fn cauchy_mean(f: impl Fn(C64) -> C64, z0: C64, r: f64, n: usize) -> C64 {
    (0..n).map(|j| f(z0 + C64::from_polar(r, 2.0 * PI * j as f64 / n as f64))).sum::<C64>()
        / n as f64
}

/// `f'(z0)` from the first Fourier coefficient on the circle `|z − z0| = r`.
pub fn cauchy_derivative(f: impl Fn(C64) -> C64, z0: C64, r: f64, n: usize) -> C64 {
    (0..n)
        .map(|j| {
            let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
            f(z0 + r * e) * e.conj()
        })
        .sum::<C64>()
        / (n as f64 * r)
}

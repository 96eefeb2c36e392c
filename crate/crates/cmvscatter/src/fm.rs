//! The weighted space `L²_{α₊}` built from scattering data, its polynomial
//! reproducing kernels, the duality map to `L²_{α₋}`, and the kernel identities.
//!
//! The circle part of the norm is `½∫ [f̄, τ f̄(τ̄)] [[1, R̄₊], [R₊, 1]] [f, τ̄ f(τ̄)]ᵀ`,
//! which for symmetric `R₊` reduces to `∫|f|² + ∫ τ R₊ f(τ) conj f(τ̄)`. Kernels are
//! computed on the span of `1, ζ, …, ζ^D` from the Gram matrix
//! `G_{jk} = δ_{jk} + r_{j+k+1} + Σ ν ζ_k^{j+k}`, `r_m = ∫ R₊ τ^m`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rustfft::FftPlanner;
use thiserror::Error;

use crate::direct::{JostSolver, Mass, ScatteringData};
use crate::geometry::{ArcGeometry, BlaschkeProductSpec, QuadratureGrid, C64, I};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FmError {
    #[error("Gram condition number {0:e} exceeds 1e12")]
    IllConditioned(f64),
    #[error("Gram matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("expected {expected} mass-point values, got {got}")]
    MissingMassValues { expected: usize, got: usize },
    #[error("|T_-| = {0:e} at a grid node")]
    SmallTransmission(f64),
    #[error("invalid data: {0}")]
    InvalidData(String),
}

pub const MAX_CONDITION: f64 = 1e12;
pub const DEFAULT_DIM: usize = 32;

/// A function on `𝕋 ∪ 𝒵`: grid samples and values at the mass points.
#[derive(Debug, Clone, PartialEq)]
pub struct FmFunction {
    pub grid: Vec<C64>,
    pub masses: Vec<C64>,
}

impl FmFunction {
    pub fn zip_with(&self, other: &FmFunction, op: impl Fn(C64, C64) -> C64) -> FmFunction {
        FmFunction {
            grid: self.grid.iter().zip(&other.grid).map(|(&a, &b)| op(a, b)).collect(),
            masses: self.masses.iter().zip(&other.masses).map(|(&a, &b)| op(a, b)).collect(),
        }
    }

    pub fn max_difference(&self, other: &FmFunction) -> f64 {
        self.grid
            .iter()
            .zip(&other.grid)
            .chain(self.masses.iter().zip(&other.masses))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct FmContext {
    geom: ArcGeometry,
    grid: QuadratureGrid,
    r: Vec<C64>,
    masses: Vec<Mass>,
    dim: usize,
    gram: DMatrix<C64>,
    chol: Cholesky<C64, Dyn>,
    condition: f64,
}

fn eval_poly(coef: &DVector<C64>, z: C64) -> C64 {
    coef.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

impl FmContext {
    /// `dim` is the top degree `D`; the basis has `D + 1` monomials.
    pub fn new(
        geom: ArcGeometry,
        grid: QuadratureGrid,
        r: Vec<C64>,
        masses: Vec<Mass>,
        dim: usize,
    ) -> Result<Self, FmError> {
        if r.len() != grid.len() {
            return Err(FmError::InvalidData("reflection samples do not match the grid".into()));
        }
        let n = dim + 1;
        // r_m for m = 1..=2D+1, accumulated with running powers per node.
        let mut moments = vec![C64::new(0.0, 0.0); 2 * n];
        for (&tau, &rv) in grid.nodes().iter().zip(&r) {
            let mut p = rv * tau;
            for mom in moments.iter_mut().skip(1) {
                *mom += p;
                p *= tau;
            }
        }
        let scale = 1.0 / grid.len() as f64;
        let mut gram = DMatrix::from_fn(n, n, |j, k| {
            let d = if j == k { 1.0 } else { 0.0 };
            moments[j + k + 1] * scale + d
        });
        for m in &masses {
            let pw: Vec<f64> = (0..n).map(|j| m.zeta.powi(j as i32)).collect();
            for j in 0..n {
                for k in 0..n {
                    gram[(j, k)] += m.nu * pw[j] * pw[k];
                }
            }
        }
        // Symmetric R makes every moment real; enforce exact Hermitian symmetry.
        let gram = (&gram + gram.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
        let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        if !(lo > 0.0) {
            return Err(FmError::NotPositive(lo));
        }
        let condition = hi / lo;
        if condition > MAX_CONDITION {
            return Err(FmError::IllConditioned(condition));
        }
        let chol = Cholesky::new(gram.clone()).ok_or(FmError::NotPositive(lo))?;
        Ok(Self { geom, grid, r, masses, dim, gram, chol, condition })
    }

    pub fn from_data(data: &ScatteringData, dim: usize) -> Result<Self, FmError> {
        Self::new(data.geometry(), data.grid.clone(), data.r_plus.clone(), data.masses.clone(), dim)
    }

    /// Data multiplied by `(b_κ b_κ̄)^n`: `R ↦ (b_κ b_κ̄)^n R`, `ν ↦ (b_κ b_κ̄)^n ν`.
    pub fn shifted(&self, n: i32) -> Result<Self, FmError> {
        let g = &self.geom;
        let r = self.r.iter().zip(self.grid.nodes()).map(|(&x, &t)| x * g.bb(t).powi(n)).collect();
        let masses = self
            .masses
            .iter()
            .map(|m| Mass { zeta: m.zeta, nu: m.nu * g.bb(C64::new(m.zeta, 0.0)).re.powi(n) })
            .collect();
        Self::new(self.geom, self.grid.clone(), r, masses, self.dim)
    }

    pub fn geometry(&self) -> &ArcGeometry {
        &self.geom
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn reflection(&self) -> &[C64] {
        &self.r
    }

    pub fn masses(&self) -> &[Mass] {
        &self.masses
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gram(&self) -> &DMatrix<C64> {
        &self.gram
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn sample(&self, f: impl Fn(C64) -> C64) -> FmFunction {
        FmFunction {
            grid: self.grid.sample(&f),
            masses: self.masses.iter().map(|m| f(C64::new(m.zeta, 0.0))).collect(),
        }
    }

    /// Inner product from the literal 2x2 weight form plus the point masses.
    pub fn inner(&self, f: &FmFunction, g: &FmFunction) -> Result<C64, FmError> {
        for h in [f, g] {
            if h.masses.len() != self.masses.len() {
                return Err(FmError::MissingMassValues { expected: self.masses.len(), got: h.masses.len() });
            }
        }
        let nodes = self.grid.nodes();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..self.grid.len() {
            let jr = self.grid.conj_index(j);
            let tb = nodes[j].conj();
            let (f0, f1) = (f.grid[j], tb * f.grid[jr]);
            let (g0, g1) = (g.grid[j], tb * g.grid[jr]);
            let r = self.r[j];
            acc += g0.conj() * (f0 + r.conj() * f1) + g1.conj() * (r * f0 + f1);
        }
        let mut out = 0.5 * acc / self.grid.len() as f64;
        for ((m, fv), gv) in self.masses.iter().zip(&f.masses).zip(&g.masses) {
            out += fv * gv.conj() * m.nu;
        }
        Ok(out)
    }

    pub fn norm_sq(&self, f: &FmFunction) -> Result<f64, FmError> {
        Ok(self.inner(f, f)?.re)
    }

    /// Coefficients `c` of `k(·, p) = Σ c_j ζ^j`, from `G c = (p̄^j)`.
    pub fn kernel_coefficients(&self, p: C64) -> DVector<C64> {
        let rhs = DVector::from_fn(self.dim + 1, |j, _| p.conj().powi(j as i32));
        self.chol.solve(&rhs)
    }

    pub fn kernel(&self, z: C64, p: C64) -> C64 {
        eval_poly(&self.kernel_coefficients(p), z)
    }

    /// `k(p, p) = ‖k(·, p)‖²`.
    pub fn kernel_diag(&self, p: C64) -> f64 {
        self.kernel(p, p).re
    }

    /// `k(·, p)` as a closure with the coefficients solved once.
    pub fn kernel_fn(&self, p: C64) -> impl Fn(C64) -> C64 {
        let c = self.kernel_coefficients(p);
        move |z| eval_poly(&c, z)
    }

    /// `k(·, p)/sqrt(k(p, p))`.
    pub fn normalized_kernel_fn(&self, p: C64) -> impl Fn(C64) -> C64 {
        let c = self.kernel_coefficients(p);
        let s = eval_poly(&c, p).re.sqrt();
        move |z| eval_poly(&c, z) / s
    }
}

/// Access to `T₋` and `(1/T₋)'` at bound states, from the direct problem or from data.
pub trait Transmission {
    fn t_minus(&self, z: C64) -> C64;
    fn t_plus(&self, z: C64) -> C64;
    fn inv_t_minus_derivative(&self, zeta: f64) -> C64;
}

impl Transmission for JostSolver {
    fn t_minus(&self, z: C64) -> C64 {
        JostSolver::t_minus(self, z)
    }

    fn t_plus(&self, z: C64) -> C64 {
        JostSolver::t_plus(self, z)
    }

    fn inv_t_minus_derivative(&self, zeta: f64) -> C64 {
        C64::from_polar(1.0, self.phase_minus() - self.phase_plus())
            * self.inv_t_plus_derivative(C64::new(zeta, 0.0))
    }
}

/// `T₋` reconstructed from `{R₊, ν₊, c₊}` alone:
/// `T₋ = u·O/B` with `|O|² = 1 − |R₊|²` on the circle, `B` the Blaschke product over
/// the bound states and the unimodular `u` fixed by `T₋(κ) = −i e^{ic₊}|T₋(κ)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterTransmission {
    /// Powers of `(1 − ζ)` and `(1 + ζ)` split off before the Fourier transform.
    pub endpoint_exponents: (i32, i32),
    ghat: Vec<C64>,
    blaschke: BlaschkeProductSpec,
    unit: C64,
    pub phase_c_plus: f64,
    pub phase_c_minus: f64,
}

impl OuterTransmission {
    pub fn from_data(data: &ScatteringData) -> Result<Self, FmError> {
        let grid = &data.grid;
        let m = grid.len();
        let g: Vec<f64> = data.r_plus.iter().map(|r| 1.0 - r.norm_sqr()).collect();
        if g.iter().any(|&x| !(x > 0.0)) {
            return Err(FmError::InvalidData("|R_plus| reaches 1 on the grid".into()));
        }
        // Nodes 0, 1 sit at angles π/M, 3π/M from 1 (and M/2, M/2+1 from −1), so a
        // zero of order 2p of |O|² shows as the ratio 3^{2p}.
        let order = |a: usize, b: usize| ((g[b] / g[a]).ln() / 3f64.ln() / 2.0).round() as i32;
        let (p1, p2) = (order(0, 1), order(m / 2, m / 2 + 1));
        let nodes = grid.nodes();
        let mut buf: Vec<C64> = (0..m)
            .map(|j| {
                let t = nodes[j];
                let v = 0.5 * g[j].ln() - p1 as f64 * (1.0 - t).norm().ln() - p2 as f64 * (1.0 + t).norm().ln();
                C64::new(v, 0.0)
            })
            .collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        // ĝ_k = ∫ h τ̄^k with τ_j = e^{2πi(j+½)/M}.
        let ghat: Vec<C64> = (0..m / 2)
            .map(|k| buf[k] * C64::from_polar(1.0, -std::f64::consts::PI * k as f64 / m as f64) / m as f64)
            .collect();
        let blaschke = BlaschkeProductSpec::new(data.masses.iter().map(|x| x.zeta).collect())
            .map_err(|e| FmError::InvalidData(e.to_string()))?;
        let mut out = Self {
            endpoint_exponents: (p1, p2),
            ghat,
            blaschke,
            unit: C64::new(1.0, 0.0),
            phase_c_plus: data.phase_c_plus,
            phase_c_minus: 0.0,
        };
        let kappa = data.geometry().kappa;
        let raw = out.t_minus(kappa);
        out.unit = -I * C64::from_polar(1.0, data.phase_c_plus) * raw.norm() / raw;
        // T₊(κ) = −i e^{ic₋}|T₊(κ)| fixes c₋.
        out.phase_c_minus = (I * out.t_plus(kappa)).arg();
        Ok(out)
    }

    pub fn outer(&self, z: C64) -> C64 {
        let (p1, p2) = self.endpoint_exponents;
        let series = self.ghat.iter().skip(1).rev().fold(C64::new(0.0, 0.0), |acc, &c| (acc + c) * z);
        (1.0 - z).powi(p1) * (1.0 + z).powi(p2) * (self.ghat[0] + 2.0 * series).exp()
    }

    /// Reflection coefficient on the other side: `R₋(τ) = −T₋(τ)/T₋(τ̄)·conj R₊(τ)`.
    pub fn r_minus(&self, data: &ScatteringData) -> Vec<C64> {
        let nodes = data.grid.nodes();
        (0..nodes.len())
            .map(|j| -self.t_minus(nodes[j]) / self.t_minus(nodes[j].conj()) * data.r_plus[j].conj())
            .collect()
    }

    /// `ν₋ = 1/(ν₊ |(1/T)'(ζ_k)|²)`.
    pub fn masses_minus(&self, data: &ScatteringData) -> Vec<Mass> {
        data.masses
            .iter()
            .map(|m| Mass { zeta: m.zeta, nu: 1.0 / (m.nu * self.inv_t_minus_derivative(m.zeta).norm_sqr()) })
            .collect()
    }

    /// The left data `{R₋, ν₋}` with phase `c₋`.
    pub fn dual_data(&self, data: &ScatteringData) -> ScatteringData {
        ScatteringData {
            xi0: data.xi0,
            phase_c_plus: self.phase_c_minus,
            grid: data.grid.clone(),
            r_plus: self.r_minus(data),
            masses: self.masses_minus(data),
        }
    }
}

impl Transmission for OuterTransmission {
    fn t_minus(&self, z: C64) -> C64 {
        self.unit * self.outer(z) / self.blaschke.eval(z).unwrap_or(C64::new(0.0, 0.0))
    }

    /// `T₊(ζ) = conj T₋(ζ̄)`.
    fn t_plus(&self, z: C64) -> C64 {
        self.t_minus(z.conj()).conj()
    }

    fn inv_t_minus_derivative(&self, zeta: f64) -> C64 {
        let z = C64::new(zeta, 0.0);
        self.blaschke.derivative_at_zero(zeta) / (self.unit * self.outer(z))
    }
}

/// `f⁻` from `f⁺`: `T₋f⁻(τ) = R₊f⁺(τ) + τ̄f⁺(τ̄)` on the circle and
/// `f⁻(ζ_k) = −(1/T₋)'(ζ_k)ν₊(ζ_k)f⁺(ζ_k)` at the masses.
pub fn duality_map(ctx: &FmContext, t: &impl Transmission, f: &FmFunction) -> Result<FmFunction, FmError> {
    if f.masses.len() != ctx.masses.len() {
        return Err(FmError::MissingMassValues { expected: ctx.masses.len(), got: f.masses.len() });
    }
    let grid = &ctx.grid;
    let mut out = Vec::with_capacity(grid.len());
    for (j, &tau) in grid.nodes().iter().enumerate() {
        let tm = t.t_minus(tau);
        if tm.norm() < 1e-12 {
            return Err(FmError::SmallTransmission(tm.norm()));
        }
        out.push((ctx.r[j] * f.grid[j] + tau.conj() * f.grid[grid.conj_index(j)]) / tm);
    }
    let masses = ctx
        .masses
        .iter()
        .zip(&f.masses)
        .map(|(m, &v)| -t.inv_t_minus_derivative(m.zeta) * m.nu * v)
        .collect();
    Ok(FmFunction { grid: out, masses })
}

/// Commutativity of multiplication by `w = b_κ` with the two duality maps:
/// `(w f)⁻` computed in `L²_{α₊}` against `f⁻/w_*` computed in the data shifted
/// by `w w_* = b_κ b_κ̄`. Returns the largest pointwise difference.
pub fn lemma_diagram_check(ctx: &FmContext, t: &impl Transmission, f: &FmFunction) -> Result<f64, FmError> {
    let g = ctx.geom;
    let shifted = ctx.shifted(1)?;
    let at_masses = |h: &dyn Fn(C64) -> C64| -> Vec<C64> {
        ctx.masses.iter().map(|m| h(C64::new(m.zeta, 0.0))).collect()
    };
    let w_grid: Vec<C64> = ctx.grid.sample(|z| g.b_kappa(z));
    let w_mass = at_masses(&|z| g.b_kappa(z));
    let wf = FmFunction {
        grid: f.grid.iter().zip(&w_grid).map(|(a, b)| a * b).collect(),
        masses: f.masses.iter().zip(&w_mass).map(|(a, b)| a * b).collect(),
    };
    let route_a = duality_map(ctx, t, &wf)?;
    let fm = duality_map(&shifted, t, f)?;
    let ws_grid = ctx.grid.sample(|z| g.b_kappa_bar(z));
    let ws_mass = at_masses(&|z| g.b_kappa_bar(z));
    let route_b = FmFunction {
        grid: fm.grid.iter().zip(&ws_grid).map(|(a, b)| a / b).collect(),
        masses: fm.masses.iter().zip(&ws_mass).map(|(a, b)| a / b).collect(),
    };
    Ok(route_a.max_difference(&route_b))
}

/// `|ǩ_{α₊}(κ,κ) k̂_{α₋^{−1}}(κ̄,κ̄) |T₋(κ̄)|² (1−|κ|²)² − 1|`.
pub fn duality_identity_check(plus: &FmContext, minus: &FmContext, t: &impl Transmission) -> Result<f64, FmError> {
    let k = plus.geom.kappa;
    let q = 1.0 - k.norm_sqr();
    let a = plus.kernel_diag(k);
    let b = minus.shifted(-1)?.kernel_diag(k.conj());
    Ok((a * b * t.t_minus(k.conj()).norm_sqr() * q * q - 1.0).abs())
}

/// Residuals of `ǩ_{α±}(κ,κ) ǩ_{α∓^{−1}}(κ̄,κ̄) |T±(κ)|² (1−|κ|²)² = 1`, as `(+, −)`.
pub fn uniqueness_check(
    plus: &FmContext,
    minus: &FmContext,
    t: &impl Transmission,
) -> Result<(f64, f64), FmError> {
    let k = plus.geom.kappa;
    let q = 1.0 - k.norm_sqr();
    let rp = plus.kernel_diag(k) * minus.shifted(-1)?.kernel_diag(k.conj()) * t.t_plus(k).norm_sqr() * q * q;
    let rm = minus.kernel_diag(k) * plus.shifted(-1)?.kernel_diag(k.conj()) * t.t_minus(k).norm_sqr() * q * q;
    Ok(((rp - 1.0).abs(), (rm - 1.0).abs()))
}

/// The pair `e₁, e₂` spanning the defect spaces of multiplication by `v`, built from
/// the kernels of the data shifted by `(b_κ b_κ̄)^{−1}`, and their duals from `α₋`.
pub struct DefectPair {
    geom: ArcGeometry,
    c1: DVector<C64>,
    c2: DVector<C64>,
    s1: f64,
    s2: f64,
    d1: DVector<C64>,
    d2: DVector<C64>,
    u1: C64,
    u2: C64,
}

impl DefectPair {
    pub fn new(plus: &FmContext, minus: &FmContext, t: &impl Transmission) -> Result<Self, FmError> {
        let geom = plus.geom;
        let (k, kb) = (geom.kappa, geom.kappa.conj());
        let m1 = plus.shifted(-1)?;
        let (c1, c2) = (m1.kernel_coefficients(kb), m1.kernel_coefficients(k));
        let s1 = eval_poly(&c1, kb).re.sqrt();
        let s2 = eval_poly(&c2, k).re.sqrt();
        let d1 = minus.kernel_coefficients(k);
        let d2 = minus.kernel_coefficients(kb);
        let u1 = -I * t.t_plus(kb) / t.t_plus(kb).norm() / eval_poly(&d1, k).re.sqrt();
        let u2 = I * t.t_plus(k) / t.t_plus(k).norm() / eval_poly(&d2, kb).re.sqrt();
        Ok(Self { geom, c1, c2, s1, s2, d1, d2, u1, u2 })
    }

    pub fn e1(&self, z: C64) -> C64 {
        eval_poly(&self.c1, z) / (self.geom.b_kappa_bar(z) * self.s1)
    }

    pub fn e2(&self, z: C64) -> C64 {
        eval_poly(&self.c2, z) / (self.geom.b_kappa(z) * self.s2)
    }

    /// `e₁⁻ = −i (T₊(κ̄)/|T₊(κ̄)|) k̂_{α₋}(·,κ)/sqrt(k̂_{α₋}(κ,κ))`.
    pub fn e1_dual(&self, z: C64) -> C64 {
        self.u1 * eval_poly(&self.d1, z)
    }

    /// `e₂⁻ = i (T₊(κ)/|T₊(κ)|) k̂_{α₋}(·,κ̄)/sqrt(k̂_{α₋}(κ̄,κ̄))`.
    pub fn e2_dual(&self, z: C64) -> C64 {
        self.u2 * eval_poly(&self.d2, z)
    }
}

/// Interior sample for the kernel identities: a 10x10 lattice on `[−0.6, 0.6]²`
/// kept at distance `> 0.2` from `κ, κ̄` and `> 0.05` from the real axis.
pub fn interior_sample(geom: &ArcGeometry) -> Vec<C64> {
    let (k, kb) = (geom.kappa, geom.kappa.conj());
    let xs: Vec<f64> = (0..10).map(|j| -0.6 + 1.2 * j as f64 / 9.0).collect();
    let mut out = Vec::new();
    for &x in &xs {
        for &y in &xs {
            let z = C64::new(x, y);
            if (z - k).norm() > 0.2 && (z - kb).norm() > 0.2 && y.abs() > 0.05 {
                out.push(z);
            }
        }
    }
    out
}

/// Largest relative difference between the Gram kernel and
/// `((v e₂)(ζ) conj (v e₂)(ζ₀) − e₁(ζ) conj e₁(ζ₀))/(1 − v(ζ) conj v(ζ₀))`
/// over the interior sample, skipping pairs with `|1 − v conj v₀| < 0.05`.
pub fn kernel_formula_check(plus: &FmContext, pair: &DefectPair, points: &[C64]) -> f64 {
    let g = &plus.geom;
    let mut worst = 0.0f64;
    for &z0 in points.iter().step_by(7) {
        let kf = plus.kernel_fn(z0);
        let (v0, a0, b0) = (g.v(z0), pair.e1(z0), pair.e2(z0));
        for &z in points {
            let v = g.v(z);
            let den = 1.0 - v * v0.conj();
            if den.norm() < 0.05 {
                continue;
            }
            let rhs = (v * pair.e2(z) * (v0 * b0).conj() - pair.e1(z) * a0.conj()) / den;
            let lhs = kf(z);
            worst = worst.max((lhs - rhs).norm() / lhs.norm());
        }
    }
    worst
}

/// `max_τ ||e₂|² − |e₁|² − d log v/d log τ|`.
pub fn wif8_residual(pair: &DefectPair, grid: &QuadratureGrid) -> f64 {
    grid.nodes()
        .iter()
        .map(|&t| (pair.e2(t).norm_sqr() - pair.e1(t).norm_sqr() - pair.geom.dlogv(t)).abs())
        .fold(0.0, f64::max)
}

/// `max |T₋(e₂⁻e₁ − e₁⁻e₂) + (log v)'|` at interior points.
pub fn wif2_residual(pair: &DefectPair, t: &impl Transmission, points: &[C64]) -> f64 {
    points
        .iter()
        .map(|&z| {
            let det = t.t_minus(z) * (pair.e2_dual(z) * pair.e1(z) - pair.e1_dual(z) * pair.e2(z));
            (det + pair.geom.log_v_derivative(z)).norm()
        })
        .fold(0.0, f64::max)
}

/// Largest difference on the grid between `T₋e_i⁻` from the dual kernels and
/// `R₊e_i(τ) + τ̄e_i(τ̄)`, for `i = 1, 2`.
pub fn defect_dual_route_check(plus: &FmContext, pair: &DefectPair, t: &impl Transmission) -> (f64, f64) {
    let grid = &plus.grid;
    let nodes = grid.nodes();
    let mut out = (0.0f64, 0.0f64);
    for (j, &tau) in nodes.iter().enumerate() {
        let tr = nodes[grid.conj_index(j)];
        let tm = t.t_minus(tau);
        let r = plus.r[j];
        let a = r * pair.e1(tau) + tau.conj() * pair.e1(tr) - tm * pair.e1_dual(tau);
        let b = r * pair.e2(tau) + tau.conj() * pair.e2(tr) - tm * pair.e2_dual(tau);
        out = (out.0.max(a.norm()), out.1.max(b.norm()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmv::VerblunskySequence;
    use crate::direct::direct_scattering;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn perturbed() -> VerblunskySequence {
        VerblunskySequence::new(0, vec![c(0.55, 0.08), c(0.42, -0.11), c(0.6, 0.05)], c(0.5, 0.0), c(0.5, 0.0))
            .unwrap()
    }

    fn step() -> VerblunskySequence {
        VerblunskySequence::new(0, vec![c(0.5, 0.0)], c(0.0, 0.5), c(0.5, 0.0)).unwrap()
    }

    fn free_ctx(d: usize) -> FmContext {
        let g = ArcGeometry::from_arc(std::f64::consts::PI / 3.0).unwrap();
        let grid = QuadratureGrid::new(512).unwrap();
        FmContext::new(g, grid, vec![c(0.0, 0.0); 512], vec![], d).unwrap()
    }

    #[test]
    fn free_kernel_is_szego() {
        let ctx = free_ctx(32);
        for (z, p) in [(c(0.3, 0.1), c(-0.2, 0.4)), (c(0.0, 0.5), c(0.5, 0.0))] {
            assert!((ctx.kernel(z, p) - 1.0 / (1.0 - z * p.conj())).norm() < 1e-8);
        }
        assert!((ctx.condition() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_matches_literal_inner_product() {
        let d = direct_scattering(&step(), 512).unwrap();
        let ctx = FmContext::from_data(&d.data, 8).unwrap();
        let mono: Vec<FmFunction> = (0..9).map(|j| ctx.sample(|z| z.powi(j))).collect();
        for j in 0..9 {
            for k in 0..9 {
                let x = ctx.inner(&mono[k], &mono[j]).unwrap();
                assert!((x - ctx.gram()[(j, k)]).norm() < 1e-12, "{j} {k}");
            }
        }
    }

    #[test]
    fn kernel_reproduces_polynomials() {
        let d = direct_scattering(&step(), 1024).unwrap();
        let ctx = FmContext::from_data(&d.data, 24).unwrap();
        let p = c(0.2, -0.3);
        let kf = ctx.sample(ctx.kernel_fn(p));
        let poly = |z: C64| 1.0 + z * c(0.3, -0.7) + z.powi(5) * 0.25;
        let f = ctx.sample(poly);
        assert!((ctx.inner(&f, &kf).unwrap() - poly(p)).norm() < 1e-8);
    }

    #[test]
    fn positivity_near_unimodular_reflection() {
        let g = ArcGeometry::from_arc(1.0).unwrap();
        let grid = QuadratureGrid::new(1024).unwrap();
        let r = grid.sample(|t| 0.9 * t * t);
        let ctx = FmContext::new(g, grid, r, vec![], 32).unwrap();
        assert!(SymmetricEigen::new(ctx.gram().clone()).eigenvalues.min() > 0.0);
    }

    #[test]
    fn mass_decreases_kernel_diagonal() {
        let g = ArcGeometry::from_arc(1.0).unwrap();
        let grid = QuadratureGrid::new(512).unwrap();
        let r = grid.sample(|t| 0.3 * t);
        let a = FmContext::new(g, grid.clone(), r.clone(), vec![], 24).unwrap();
        let b = FmContext::new(g, grid, r, vec![Mass { zeta: 0.4, nu: 0.7 }], 24).unwrap();
        let p = c(0.1, 0.2);
        assert!(b.kernel_diag(p) < a.kernel_diag(p));
    }

    #[test]
    fn ill_conditioning_is_refused() {
        let g = ArcGeometry::from_arc(1.0).unwrap();
        let grid = QuadratureGrid::new(256).unwrap();
        let r = grid.sample(|t| -t.conj());
        assert!(matches!(
            FmContext::new(g, grid, r, vec![], 32),
            Err(FmError::IllConditioned(_)) | Err(FmError::NotPositive(_))
        ));
    }

    #[test]
    fn norm_splits_over_transmission() {
        let d = direct_scattering(&perturbed(), 1024).unwrap();
        let ctx = FmContext::from_data(&d.data, 16).unwrap();
        let f = ctx.sample(|z| (z - 0.3).exp() + z.powi(3));
        let grid = &d.data.grid;
        let tp: Vec<C64> = f.grid.iter().zip(&d.smatrix.t_plus).map(|(a, b)| a * b).collect();
        let tm: Vec<C64> = (0..grid.len())
            .map(|j| d.data.r_plus[j] * f.grid[j] + grid.nodes()[j].conj() * f.grid[grid.conj_index(j)])
            .collect();
        let rhs = (grid.norm(&tp).powi(2) + grid.norm(&tm).powi(2)) / 2.0;
        assert!((ctx.norm_sq(&f).unwrap() - rhs).abs() < 1e-8);
    }

    #[test]
    fn duality_is_isometric() {
        let d = direct_scattering(&step(), 1024).unwrap();
        let plus = FmContext::from_data(&d.data, 16).unwrap();
        let outer = OuterTransmission::from_data(&d.data).unwrap();
        let minus = FmContext::from_data(&outer.dual_data(&d.data), 16).unwrap();
        for j in 0..5 {
            let f = plus.sample(|z| z.powi(j) * (1.0 + 0.3 * z).exp());
            let fm_direct = duality_map(&plus, &d.solver, &f).unwrap();
            let fm_outer = duality_map(&plus, &outer, &f).unwrap();
            let n = plus.norm_sq(&f).unwrap();
            assert!((minus.norm_sq(&fm_direct).unwrap() - n).abs() < 1e-8);
            assert!(fm_direct.max_difference(&fm_outer) < 1e-6);
        }
    }

    #[test]
    fn outer_transmission_matches_direct() {
        for seq in [perturbed(), step()] {
            let d = direct_scattering(&seq, 2048).unwrap();
            let outer = OuterTransmission::from_data(&d.data).unwrap();
            let grid = &d.data.grid;
            let worst = (0..grid.len())
                .map(|j| (outer.t_minus(grid.nodes()[j]) - d.smatrix.t_minus[j]).norm())
                .fold(0.0, f64::max);
            assert!(worst < 1e-8, "{worst}");
            let dphase = (C64::from_polar(1.0, outer.phase_c_minus - d.solver.phase_minus())).arg();
            assert!(dphase.abs() < 1e-8);
            let rm = outer.r_minus(&d.data);
            let diff = rm.iter().zip(&d.smatrix.r_minus).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-8);
            for (mm, nc) in outer.masses_minus(&d.data).iter().zip(&d.norming) {
                assert!((mm.nu - nc.nu_minus).abs() < 1e-6 * nc.nu_minus);
            }
        }
    }

    #[test]
    fn lemma_diagram_commutes() {
        let d = direct_scattering(&step(), 1024).unwrap();
        let ctx = FmContext::from_data(&d.data, 16).unwrap();
        let f = ctx.sample(|z| C64::new(1.0, 0.5) + z * z);
        assert!(lemma_diagram_check(&ctx, &d.solver, &f).unwrap() < 1e-9);
    }

    #[test]
    fn free_identities_are_exact() {
        let seq = VerblunskySequence::constant(c(0.5, 0.0)).unwrap();
        let d = direct_scattering(&seq, 512).unwrap();
        // Degree 64 keeps the truncation |ζζ₀|^65 below 1e−9 on the sample.
        let plus = FmContext::from_data(&d.data, 64).unwrap();
        let outer = OuterTransmission::from_data(&d.data).unwrap();
        let minus = FmContext::from_data(&outer.dual_data(&d.data), 64).unwrap();
        assert!(duality_identity_check(&plus, &minus, &outer).unwrap() < 1e-8);
        let (a, b) = uniqueness_check(&plus, &minus, &outer).unwrap();
        assert!(a < 1e-8 && b < 1e-8);
        let pair = DefectPair::new(&plus, &minus, &outer).unwrap();
        let pts = interior_sample(plus.geometry());
        assert!(kernel_formula_check(&plus, &pair, &pts) < 1e-8);
        assert!(wif8_residual(&pair, &d.data.grid) < 1e-8);
    }

    #[test]
    fn perturbed_identities() {
        let d = direct_scattering(&perturbed(), 2048).unwrap();
        let plus = FmContext::from_data(&d.data, 32).unwrap();
        let outer = OuterTransmission::from_data(&d.data).unwrap();
        let minus = FmContext::from_data(&outer.dual_data(&d.data), 32).unwrap();
        assert!(duality_identity_check(&plus, &minus, &d.solver).unwrap() < 1e-4);
        let (a, b) = uniqueness_check(&plus, &minus, &d.solver).unwrap();
        assert!(a < 1e-4 && b < 1e-4, "{a} {b}");
        let pair = DefectPair::new(&plus, &minus, &d.solver).unwrap();
        let pts = interior_sample(plus.geometry());
        assert!(kernel_formula_check(&plus, &pair, &pts) < 1e-4);
        assert!(wif8_residual(&pair, &d.data.grid) < 1e-4);
        let (r1, r2) = defect_dual_route_check(&plus, &pair, &d.solver);
        assert!(r1 < 1e-4 && r2 < 1e-4, "{r1} {r2}");
        assert!(wif2_residual(&pair, &d.solver, &pts[..20]) < 1e-4);
    }
}

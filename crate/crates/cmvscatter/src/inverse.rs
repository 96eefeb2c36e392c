//! Recovery of Verblunsky coefficients from scattering data.
//!
//! Shifting the data by `(b_κ b_κ̄)^n` gives the space `α^n`; its two normalized
//! kernels `K(·,κ)`, `K(·,κ̄)` determine one Schur parameter
//! `a(α) = k(κ,κ̄)/sqrt(k(κ,κ) k(κ̄,κ̄))`. Each shift is an independent Gram solve.
//!
//! | quantity              | value                 |
//! |-----------------------|-----------------------|
//! | CMV entry `a_n`       | `e^{ic₊} a(α₊^n)`     |
//! | `ρ_n`                 | `sqrt(1 − |a(α₊^n)|²)`|
//! | right tail            | `e^{ic₊}|a|`, `|a|` fixed by the arc |
//! | left tail             | `−|a| e^{−ic₋}`, `c₋` from the outer `T₋` |

use thiserror::Error;

use crate::cmv::VerblunskySequence;
use crate::direct::{Mass, ScatteringData};
use crate::fm::{FmContext, FmError, FmFunction, OuterTransmission};
use crate::geometry::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InverseError {
    #[error("kernel solve failed at shift {n}: {source}")]
    Kernel { n: i64, source: FmError },
    #[error("|a| = {modulus} at shift {n}: discretization failure")]
    NotContractive { n: i64, modulus: f64 },
    #[error("{0}")]
    Fm(#[from] FmError),
    #[error("invalid sequence: {0}")]
    Sequence(String),
}

/// Data multiplied by `(b_κ b_κ̄)^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedData {
    pub n: i64,
    pub data: ScatteringData,
}

pub fn shift_data(data: &ScatteringData, n: i64) -> ShiftedData {
    let g = data.geometry();
    let k = n as i32;
    let r_plus = data.r_plus.iter().zip(data.grid.nodes()).map(|(&r, &t)| r * g.bb(t).powi(k)).collect();
    let masses = data
        .masses
        .iter()
        .map(|m| Mass { zeta: m.zeta, nu: m.nu * g.bb(C64::new(m.zeta, 0.0)).re.powi(k) })
        .collect();
    ShiftedData { n, data: ScatteringData { r_plus, masses, ..data.clone() } }
}

/// `(a(α), ρ(α))` from the kernels of one context.
pub fn schur_param(ctx: &FmContext) -> (C64, f64) {
    let k = ctx.geometry().kappa;
    let kb = k.conj();
    let a = ctx.kernel(k, kb) / (ctx.kernel_diag(kb) * ctx.kernel_diag(k)).sqrt();
    (a, (1.0 - a.norm_sqr()).max(0.0).sqrt())
}

/// Per-shift record of the recovery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftRecord {
    pub n: i64,
    pub a: C64,
    pub schur: C64,
    pub condition: f64,
}

/// `a_n = e^{ic₊} a(α₊^n)` for `n ∈ [n_lo, n_hi]`.
pub fn recover_range(
    data: &ScatteringData,
    n_lo: i64,
    n_hi: i64,
    dim: usize,
) -> Result<Vec<ShiftRecord>, InverseError> {
    let base = FmContext::from_data(data, dim)?;
    let unit = C64::from_polar(1.0, data.phase_c_plus);
    (n_lo..=n_hi)
        .map(|n| {
            let ctx = base.shifted(n as i32).map_err(|source| InverseError::Kernel { n, source })?;
            let (schur, _) = schur_param(&ctx);
            if schur.norm() >= 1.0 {
                return Err(InverseError::NotContractive { n, modulus: schur.norm() });
            }
            Ok(ShiftRecord { n, a: unit * schur, schur, condition: ctx.condition() })
        })
        .collect()
}

/// `a_0, …, a_L`.
pub fn recover_verblunsky(data: &ScatteringData, l: usize, dim: usize) -> Result<Vec<C64>, InverseError> {
    Ok(recover_range(data, 0, l as i64, dim)?.into_iter().map(|r| r.a).collect())
}

/// A full sequence: the recovered window plus both constant tails.
pub fn recover_sequence(
    data: &ScatteringData,
    n_lo: i64,
    n_hi: i64,
    dim: usize,
) -> Result<VerblunskySequence, InverseError> {
    let values = recover_range(data, n_lo, n_hi, dim)?.into_iter().map(|r| r.a).collect();
    let geom = data.geometry();
    let modulus = geom.modulus();
    let outer = OuterTransmission::from_data(data)?;
    let tail_right = geom.constant_coefficient();
    let tail_left = -modulus * C64::from_polar(1.0, -outer.phase_c_minus);
    VerblunskySequence::new(n_lo, values, tail_left, tail_right).map_err(|e| InverseError::Sequence(e.to_string()))
}

/// Residuals of
/// `K(·,κ̄) = a K(·,κ) + ρ b_κ K₁(·,κ̄)` and `K(·,κ) = ā K(·,κ̄) + ρ b_κ̄ K₁(·,κ)`
/// at `points`, with `K₁` the kernels of the data shifted once more; also
/// `|ρ − b_κ(κ̄) K₁(κ̄,κ̄)/K(κ̄,κ̄)|`.
pub fn kernel_recurrence_check(ctx: &FmContext, ctx1: &FmContext, points: &[C64]) -> (f64, f64) {
    let g = ctx.geometry();
    let (k, kb) = (g.kappa, g.kappa.conj());
    let (a, rho) = schur_param(ctx);
    let (kk, kkb) = (ctx.normalized_kernel_fn(k), ctx.normalized_kernel_fn(kb));
    let (k1, k1b) = (ctx1.normalized_kernel_fn(k), ctx1.normalized_kernel_fn(kb));
    let mut worst = 0.0f64;
    for &z in points {
        let l1 = kkb(z) - (a * kk(z) + rho * g.b_kappa(z) * k1b(z));
        let l2 = kk(z) - (a.conj() * kkb(z) + rho * g.b_kappa_bar(z) * k1(z));
        worst = worst.max(l1.norm()).max(l2.norm());
    }
    let rho_alt = g.b_kappa(kb) * k1b(kb) / kkb(kb);
    (worst, (rho_alt - rho).norm())
}

/// Projections of `v K_α(·,κ̄)` onto
/// `[K_{α^{−2}}(·,κ̄)/(b_κ b_κ̄), K_{α^{−1}}(·,κ)/b_κ, K_α(·,κ̄), b_κ̄ K_{α¹}(·,κ)]`
/// against the CMV column `[ρ₋₁ρ₋₂, −ρ₋₁a₋₂, −a₋₁ā₀, −a₋₁ρ₀]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CmvEntryCheck {
    pub coefficients: [C64; 4],
    pub predicted: [C64; 4],
    pub residual: f64,
    /// `|Σ|c_i|² − 1|`.
    pub column_defect: f64,
    /// `max |⟨φ_i, φ_j⟩ − δ_ij|` for the four basis functions.
    pub orthonormality_defect: f64,
}

pub fn cmv_entry_check(ctx: &FmContext) -> Result<CmvEntryCheck, InverseError> {
    let g = *ctx.geometry();
    let (k, kb) = (g.kappa, g.kappa.conj());
    let m2 = ctx.shifted(-2)?;
    let m1 = ctx.shifted(-1)?;
    let p1 = ctx.shifted(1)?;
    let (a2, r2) = schur_param(&m2);
    let (a1, r1) = schur_param(&m1);
    let (a0, r0) = schur_param(ctx);
    let f0 = m2.normalized_kernel_fn(kb);
    let f1 = m1.normalized_kernel_fn(k);
    let f2 = ctx.normalized_kernel_fn(kb);
    let f3 = p1.normalized_kernel_fn(k);
    let basis: [FmFunction; 4] = [
        ctx.sample(|z| f0(z) / g.bb(z)),
        ctx.sample(|z| f1(z) / g.b_kappa(z)),
        ctx.sample(&f2),
        ctx.sample(|z| g.b_kappa_bar(z) * f3(z)),
    ];
    let target = ctx.sample(|z| g.v(z) * f2(z));
    let mut coefficients = [C64::new(0.0, 0.0); 4];
    for (c, b) in coefficients.iter_mut().zip(&basis) {
        *c = ctx.inner(&target, b)?;
    }
    let predicted = [C64::new(r1 * r2, 0.0), -r1 * a2, -a1 * a0.conj(), -a1 * r0];
    let residual = coefficients.iter().zip(&predicted).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let column_defect = (coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs();
    let mut orthonormality_defect = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let d = if i == j { 1.0 } else { 0.0 };
            orthonormality_defect = orthonormality_defect.max((ctx.inner(&basis[i], &basis[j])? - d).norm());
        }
    }
    Ok(CmvEntryCheck { coefficients, predicted, residual, column_defect, orthonormality_defect })
}

/// `max_{p ∈ {κ, κ̄}} |k_{α^n}(p,p) − 1/(1 − |p|²)|` for `n = 0..=n_max`.
pub fn basis_asymptotics_check(data: &ScatteringData, n_max: usize, dim: usize) -> Result<Vec<f64>, InverseError> {
    let base = FmContext::from_data(data, dim)?;
    let k = base.geometry().kappa;
    let free = 1.0 / (1.0 - k.norm_sqr());
    (0..=n_max as i64)
        .map(|n| {
            let ctx = base.shifted(n as i32).map_err(|source| InverseError::Kernel { n, source })?;
            Ok((ctx.kernel_diag(k) - free).abs().max((ctx.kernel_diag(k.conj()) - free).abs()))
        })
        .collect()
}

//! Direct scattering for compact perturbations of a constant sequence.
//!
//! Jost solutions are rational in `ζ`: `e⁺(n)` equals the free basis `𝔢_{n,c₊}` for
//! `n > window_hi` and is continued downward through the three-term relations;
//! `f(k) = e⁻(−k−1)` equals `𝔢_{−k−1,c₋}` for `k ≤ window_lo` and is continued
//! upward through the same relations. The phases are `c₊ = arg a_{+∞}` and
//! `c₋ = arg(−ā_{−∞})`.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::cmv::VerblunskySequence;
use crate::geometry::{cauchy_derivative, cauchy_mean, ArcGeometry, QuadratureGrid, C64, I};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DirectError {
    #[error("|Delta| = {0:e} at {1}: too close to a bound state")]
    BoundStateProximity(f64, C64),
    #[error("reflection coefficient differs by {0:e} between index pairs")]
    InconsistentReflection(f64),
    #[error("suspected double root of 1/T near {0}")]
    DoubleRoot(f64),
    #[error("nonpositive norming constant at {0}")]
    NonpositiveMass(f64),
    #[error("invalid scattering data: {0}")]
    InvalidData(String),
}

/// Radius and node count of the circle used to evaluate `T` near `κ` and `κ̄`,
/// where the recursion meets `v = 0` or `v = ∞`.
const CAUCHY_RADIUS: f64 = 1e-2;
const CAUCHY_NODES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct JostSolver {
    seq: VerblunskySequence,
    geom_plus: ArcGeometry,
    geom_minus: ArcGeometry,
}

impl JostSolver {
    pub fn new(seq: &VerblunskySequence) -> Self {
        let geom_plus = seq.geometry();
        let geom_minus = geom_plus.with_phase(seq.phase_minus());
        Self { seq: seq.clone(), geom_plus, geom_minus }
    }

    pub fn sequence(&self) -> &VerblunskySequence {
        &self.seq
    }

    pub fn geometry(&self) -> &ArcGeometry {
        &self.geom_plus
    }

    pub fn phase_plus(&self) -> f64 {
        self.geom_plus.phase_c
    }

    pub fn phase_minus(&self) -> f64 {
        self.geom_minus.phase_c
    }

    /// `e⁺(n, z)` for `n ∈ [n_lo, n_hi]`.
    pub fn plus_at(&self, z: C64, n_lo: i64, n_hi: i64) -> Vec<C64> {
        let s = &self.seq;
        let g = &self.geom_plus;
        let top = (s.window_hi() + 1).max(n_lo);
        let end = n_hi.max(top + 1);
        let mut e = vec![C64::new(0.0, 0.0); (end - n_lo + 1) as usize];
        let idx = |n: i64| (n - n_lo) as usize;
        for n in top..=end {
            e[idx(n)] = g.free_basis(n, z);
        }
        let w = g.v(z);
        for j in (n_lo..top).rev() {
            let (aj, aj1) = (s.get(j), s.get(j + 1));
            let (e1, e2) = (e[idx(j + 1)], e[idx(j + 2)]);
            let num = if j.rem_euclid(2) == 0 {
                e1 * aj + w * (e1 * aj1 + e2 * s.rho(j + 1))
            } else {
                e1 * aj.conj() + (e1 * aj1.conj() + e2 * s.rho(j + 1)) / w
            };
            e[idx(j)] = num / s.rho(j);
        }
        e.truncate((n_hi - n_lo + 1) as usize);
        e
    }

    /// `f(k) = e⁻(−k−1, z)` for `k ∈ [k_lo, k_hi]`.
    pub fn f_at(&self, z: C64, k_lo: i64, k_hi: i64) -> Vec<C64> {
        let s = &self.seq;
        let g = &self.geom_minus;
        let bot = s.window_lo().min(k_hi);
        let start = k_lo.min(bot - 1);
        let mut f = vec![C64::new(0.0, 0.0); (k_hi.max(bot) - start + 1) as usize];
        let idx = |k: i64| (k - start) as usize;
        for k in start..=bot {
            f[idx(k)] = g.free_basis(-k - 1, z);
        }
        let w = g.v(z);
        for j in bot - 1..k_hi - 1 {
            let (aj, aj1) = (s.get(j), s.get(j + 1));
            let (f0, f1) = (f[idx(j)], f[idx(j + 1)]);
            let num = if j.rem_euclid(2) == 0 {
                (f0 * s.rho(j) - f1 * aj) / w - f1 * aj1
            } else {
                w * (f0 * s.rho(j) - f1 * aj.conj()) - f1 * aj1.conj()
            };
            f[idx(j + 2)] = num / s.rho(j + 1);
        }
        f[idx(k_lo)..=idx(k_hi)].to_vec()
    }

    /// `e⁻(n, z)` for `n ∈ [n_lo, n_hi]`.
    pub fn minus_at(&self, z: C64, n_lo: i64, n_hi: i64) -> Vec<C64> {
        let mut f = self.f_at(z, -n_hi - 1, -n_lo - 1);
        f.reverse();
        f
    }

    /// `Δ = e⁺(−1)e⁻(−1) − e⁺(0)e⁻(0)`. Its real zeros are the bound states.
    pub fn delta(&self, z: C64) -> C64 {
        let e = self.plus_at(z, -1, 0);
        let f = self.f_at(z, -1, 0);
        e[0] * f[1] - e[1] * f[0]
    }

    /// `Δ` recovered from the pair `(n, n+1)`: `ρ_n W_n` is `ρ₋₁Δ` for odd `n` and
    /// `−v ρ₋₁Δ` for even `n`, with `W_n = e⁺(n)f(n+1) − e⁺(n+1)f(n)`.
    pub fn delta_from_pair(&self, z: C64, n: i64) -> C64 {
        let e = self.plus_at(z, n, n + 1);
        let f = self.f_at(z, n, n + 1);
        let wn = (e[0] * f[1] - e[1] * f[0]) * self.seq.rho(n) / self.seq.rho(-1);
        if n.rem_euclid(2) == 1 {
            wn
        } else {
            -wn / self.geom_plus.v(z)
        }
    }

    fn raw_inv_t_plus(&self, z: C64) -> C64 {
        let g = &self.geom_plus;
        -self.seq.rho(-1) * self.delta(z)
            / (C64::from_polar(1.0, self.phase_minus()) * g.v_inv_derivative(z))
    }

    fn near_singular_point(&self, z: C64) -> bool {
        let k = self.geom_plus.kappa;
        (z - k).norm() < 0.5 * CAUCHY_RADIUS || (z - k.conj()).norm() < 0.5 * CAUCHY_RADIUS
    }

    /// `1/T₊(z) = −ρ₋₁Δ/(e^{ic₋}(v⁻¹)')`; analytic in the disk.
    pub fn inv_t_plus(&self, z: C64) -> C64 {
        if self.near_singular_point(z) {
            return cauchy_mean(|x| self.raw_inv_t_plus(x), z, CAUCHY_RADIUS, CAUCHY_NODES);
        }
        self.raw_inv_t_plus(z)
    }

    pub fn t_plus(&self, z: C64) -> C64 {
        if self.near_singular_point(z) {
            return cauchy_mean(|x| 1.0 / self.raw_inv_t_plus(x), z, CAUCHY_RADIUS, CAUCHY_NODES);
        }
        1.0 / self.raw_inv_t_plus(z)
    }

    /// `T₋ = e^{i(c₊−c₋)} T₊`.
    pub fn t_minus(&self, z: C64) -> C64 {
        C64::from_polar(1.0, self.phase_plus() - self.phase_minus()) * self.t_plus(z)
    }

    /// `(1/T₊)'(z)` from a Cauchy integral (1/T₊ is analytic in the disk).
    pub fn inv_t_plus_derivative(&self, z: C64) -> C64 {
        cauchy_derivative(|x| self.inv_t_plus(x), z, 1e-3, 64)
    }

    /// `e^{−i(c₊−c₋)/2}/T₊(x)`, which is real for real `x`.
    pub fn rotated_inv_t(&self, x: f64) -> C64 {
        C64::from_polar(1.0, -(self.phase_plus() - self.phase_minus()) / 2.0)
            * self.inv_t_plus(C64::new(x, 0.0))
    }
}

/// Which Jost family a sampled set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// Grid samples of `e^±(n, τ)`, stored as `samples[n − n_lo][node]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JostFamily {
    pub side: Side,
    pub n_lo: i64,
    pub n_hi: i64,
    pub samples: Vec<Vec<C64>>,
}

impl JostFamily {
    pub fn at(&self, n: i64) -> &[C64] {
        &self.samples[(n - self.n_lo) as usize]
    }
}

/// Both Jost families on the grid for `n ∈ [n_min, n_max]`.
pub fn jost_solutions(
    solver: &JostSolver,
    grid: &QuadratureGrid,
    n_min: i64,
    n_max: i64,
) -> (JostFamily, JostFamily) {
    let count = (n_max - n_min + 1) as usize;
    let mut plus = vec![Vec::with_capacity(grid.len()); count];
    let mut minus = vec![Vec::with_capacity(grid.len()); count];
    for &tau in grid.nodes() {
        let e = solver.plus_at(tau, n_min, n_max);
        let m = solver.minus_at(tau, n_min, n_max);
        for i in 0..count {
            plus[i].push(e[i]);
            minus[i].push(m[i]);
        }
    }
    (
        JostFamily { side: Side::Plus, n_lo: n_min, n_hi: n_max, samples: plus },
        JostFamily { side: Side::Minus, n_lo: n_min, n_hi: n_max, samples: minus },
    )
}

/// Grid samples of `S = [[R₋, T₋], [T₊, R₊]]` with construction diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SMatrix {
    pub grid: QuadratureGrid,
    pub r_minus: Vec<C64>,
    pub t_minus: Vec<C64>,
    pub t_plus: Vec<C64>,
    pub r_plus: Vec<C64>,
    pub phase_plus: f64,
    pub phase_minus: f64,
    /// Largest difference of `R₊` solved at `n = 0` and `n = 1`.
    pub reflection_consistency: f64,
    /// Largest difference between this construction and the independent 2x2
    /// solve of both relations at `n = −1, 0`.
    pub dual_route_defect: f64,
}

impl SMatrix {
    pub fn matrix(&self, j: usize) -> [[C64; 2]; 2] {
        [[self.r_minus[j], self.t_minus[j]], [self.t_plus[j], self.r_plus[j]]]
    }

    /// `max_τ ‖S*S − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.grid.len() {
            let s = self.matrix(j);
            for a in 0..2 {
                for b in 0..2 {
                    let mut x = C64::new(0.0, 0.0);
                    for k in 0..2 {
                        x += s[k][a].conj() * s[k][b];
                    }
                    let target = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((x - target).norm());
                }
            }
        }
        worst
    }

    /// `max_τ ‖S*(τ̄) − S(τ)‖_max`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.grid.len() {
            let s = self.matrix(j);
            let r = self.matrix(self.grid.conj_index(j));
            for a in 0..2 {
                for b in 0..2 {
                    worst = worst.max((r[b][a].conj() - s[a][b]).norm());
                }
            }
        }
        worst
    }

    /// `max_τ ||O|² + |R₊|² − 1|` with `|O| = |T₊|`, plus `max ||T₊| − |T₋||`.
    pub fn modulus_defects(&self) -> (f64, f64) {
        let mut a = 0.0f64;
        let mut b = 0.0f64;
        for j in 0..self.grid.len() {
            a = a.max((self.t_plus[j].norm_sqr() + self.r_plus[j].norm_sqr() - 1.0).abs());
            b = b.max((self.t_plus[j].norm() - self.t_minus[j].norm()).abs());
        }
        (a, b)
    }
}

/// Solves `T₋ f(n) − R₊ e(n) = τ̄ e(n, τ̄)` for `R₊` using `T₋` from `Δ`.
pub fn reflection_and_smatrix(
    solver: &JostSolver,
    grid: &QuadratureGrid,
) -> Result<SMatrix, DirectError> {
    let (ep, em) = jost_solutions(solver, grid, -2, 1);
    let f = |n: i64| em.at(-n - 1);
    let e = |n: i64| ep.at(n);
    let m = grid.len();
    let dp = C64::from_polar(1.0, solver.phase_plus() - solver.phase_minus());
    let mut out = SMatrix {
        grid: grid.clone(),
        r_minus: Vec::with_capacity(m),
        t_minus: Vec::with_capacity(m),
        t_plus: Vec::with_capacity(m),
        r_plus: Vec::with_capacity(m),
        phase_plus: solver.phase_plus(),
        phase_minus: solver.phase_minus(),
        reflection_consistency: 0.0,
        dual_route_defect: 0.0,
    };
    for j in 0..m {
        let tau = grid.nodes()[j];
        let jr = grid.conj_index(j);
        let tb = tau.conj();
        let delta = e(-1)[j] * f(0)[j] - e(0)[j] * f(-1)[j];
        if delta.norm() < 1e-14 {
            return Err(DirectError::BoundStateProximity(delta.norm(), tau));
        }
        let tp = 1.0 / solver.raw_inv_t_plus(tau);
        let tm = dp * tp;
        let r_at = |n: i64| (tm * f(n)[j] - tb * e(n)[jr]) / e(n)[j];
        let (r0, r1) = (r_at(0), r_at(1));
        out.reflection_consistency = out.reflection_consistency.max((r0 - r1).norm());
        // Least-squares combination of both index pairs.
        let mut num = C64::new(0.0, 0.0);
        let mut den = 0.0;
        for n in [0, 1] {
            num += e(n)[j].conj() * (tm * f(n)[j] - tb * e(n)[jr]);
            den += e(n)[j].norm_sqr();
        }
        let rp = num / den;
        let rm = -(tm / tp.conj()) * rp.conj();

        // Independent route: both unknowns from the 2x2 systems at n = −1, 0.
        let solve = |a0: C64, b0: C64, c0: C64, a1: C64, b1: C64, c1: C64| {
            let det = a0 * b1 - a1 * b0;
            ((c0 * b1 - c1 * b0) / det, (a0 * c1 - a1 * c0) / det)
        };
        let (tm2, rp2) = solve(
            f(-1)[j],
            -e(-1)[j],
            tb * e(-1)[jr],
            f(0)[j],
            -e(0)[j],
            tb * e(0)[jr],
        );
        let (tp2, rm2) = solve(
            e(-1)[j],
            -f(-1)[j],
            tb * f(-1)[jr],
            e(0)[j],
            -f(0)[j],
            tb * f(0)[jr],
        );
        let dual = [(tm2 - tm).norm(), (rp2 - rp).norm(), (tp2 - tp).norm(), (rm2 - rm).norm()];
        out.dual_route_defect = dual.iter().fold(out.dual_route_defect, |a, &b| a.max(b));

        out.r_minus.push(rm);
        out.t_minus.push(tm);
        out.t_plus.push(tp);
        out.r_plus.push(rp);
    }
    if out.reflection_consistency > 1e-8 {
        return Err(DirectError::InconsistentReflection(out.reflection_consistency));
    }
    Ok(out)
}

/// Mesh step of the sign scan for bound states.
pub const SCAN_STEP: f64 = 1e-3;

/// Real zeros of `1/T₊` on `(−1, 1)`: sign scan on a `1e−3` mesh, then bisection
/// to `1e−12`.
pub fn bound_states(solver: &JostSolver) -> Result<Vec<f64>, DirectError> {
    let f = |x: f64| solver.rotated_inv_t(x).re;
    let n = (2.0 / SCAN_STEP) as usize;
    let xs: Vec<f64> = (0..n).map(|j| -1.0 + (j as f64 + 0.5) * SCAN_STEP).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let scale = vals.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut roots = Vec::new();
    for j in 0..n - 1 {
        let (fa, fb) = (vals[j], vals[j + 1]);
        if fa == 0.0 {
            roots.push(xs[j]);
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        let (mut a, mut b, mut fa) = (xs[j], xs[j + 1], fa);
        while b - a > 1e-12 {
            let mid = 0.5 * (a + b);
            let fm = f(mid);
            if fm.signum() == fa.signum() {
                a = mid;
                fa = fm;
            } else {
                b = mid;
            }
        }
        let root = 0.5 * (a + b);
        let h = 1e-6;
        let slope = (f(root + h) - f(root - h)) / (2.0 * h);
        if slope.abs() < 1e-8 * scale.max(1.0) {
            return Err(DirectError::DoubleRoot(root));
        }
        roots.push(root);
    }
    Ok(roots)
}

/// Norming constants and the identities tying them together at one bound state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormingConstants {
    pub zeta: f64,
    pub nu_plus: f64,
    pub nu_minus: f64,
    /// `e⁺(n, ζ_k) = λ e⁻(−n−1, ζ_k)` for every `n`.
    pub lambda: C64,
    pub inv_t_derivative: C64,
    /// `|1/(ν₊ν₋) − |(1/T)'|²| / |(1/T)'|²`.
    pub product_defect: f64,
    /// Relative deviation of `e⁺` from `λ e⁻(−n−1)` over the window.
    pub proportionality_defect: f64,
    /// `|λ − (−(1/T₊)' ν₋)| / |λ|`.
    pub collinearity_defect: f64,
}

/// `Σ_{j ≥ j0} |𝔢_j(x)|²` for real `x`, summed in closed form.
fn free_tail_norm_sq(g: &ArcGeometry, j0: i64, x: C64) -> f64 {
    let q = g.bb(x).norm();
    (g.free_basis(j0, x).norm_sqr() + g.free_basis(j0 + 1, x).norm_sqr()) / (1.0 - q * q)
}

pub fn norming_constants(solver: &JostSolver, zeta: f64) -> Result<NormingConstants, DirectError> {
    let s = solver.sequence();
    let z = C64::new(zeta, 0.0);
    let lo = s.window_lo().min(-1);
    let hi = s.window_hi().max(0) + 1;
    let e = solver.plus_at(z, lo, hi);
    let f = solver.f_at(z, lo, hi);
    let idx = |n: i64| (n - lo) as usize;
    // Ratio taken where f is largest.
    let best = (lo..=hi).max_by(|&a, &b| f[idx(a)].norm().total_cmp(&f[idx(b)].norm())).unwrap();
    let lambda = e[idx(best)] / f[idx(best)];
    let emax = e.iter().fold(0.0f64, |a, x| a.max(x.norm()));
    let proportionality_defect =
        (lo..=hi).map(|n| (e[idx(n)] - lambda * f[idx(n)]).norm()).fold(0.0, f64::max) / emax;

    let gp = solver.geom_plus;
    let gm = solver.geom_minus;
    // n ≤ lo − 1: e⁺(n) = λ f(n) = λ 𝔢_{−n−1,c₋}; n ≥ hi + 1: e⁺ is free.
    let left_free = free_tail_norm_sq(&gm, -lo, z);
    let right_free = free_tail_norm_sq(&gp, hi + 1, z);
    let mid_e: f64 = (lo..=hi).map(|n| e[idx(n)].norm_sqr()).sum();
    let mid_f: f64 = (lo..=hi).map(|n| f[idx(n)].norm_sqr()).sum();
    let l2 = lambda.norm_sqr();
    let inv_nu_plus = mid_e + right_free + l2 * left_free;
    let inv_nu_minus = mid_f + left_free + right_free / l2;
    if !(inv_nu_plus > 0.0 && inv_nu_minus > 0.0 && inv_nu_plus.is_finite()) {
        return Err(DirectError::NonpositiveMass(zeta));
    }
    let (nu_plus, nu_minus) = (1.0 / inv_nu_plus, 1.0 / inv_nu_minus);
    let d = solver.inv_t_plus_derivative(z);
    let product_defect = ((1.0 / (nu_plus * nu_minus)) - d.norm_sqr()).abs() / d.norm_sqr();
    let collinearity_defect = (lambda + d * nu_minus).norm() / lambda.norm();
    Ok(NormingConstants {
        zeta,
        nu_plus,
        nu_minus,
        lambda,
        inv_t_derivative: d,
        product_defect,
        proportionality_defect,
        collinearity_defect,
    })
}

/// `(L_κ̄(n, ·), L_κ(n, ·))`: the Jost solution with the `b`-prefactors removed.
pub fn l_functions(
    solver: &JostSolver,
    family: &JostFamily,
    grid: &QuadratureGrid,
    n: i64,
) -> (Vec<C64>, Vec<C64>) {
    let g = solver.geometry();
    let s = solver.sequence();
    let (a, r) = (s.get(n), s.rho(n));
    let ec = C64::from_polar(1.0, -solver.phase_plus());
    let m = n.div_euclid(2) as i32;
    let (cur, next) = (family.at(n), family.at(n + 1));
    let mut lkb = Vec::with_capacity(grid.len());
    let mut lk = Vec::with_capacity(grid.len());
    for (j, &tau) in grid.nodes().iter().enumerate() {
        let p = g.bb(tau).powi(m);
        if n.rem_euclid(2) == 0 {
            lkb.push(ec * cur[j] / p);
            lk.push((r * next[j] + a.conj() * cur[j]) / p);
        } else {
            let den = p * g.b_kappa_bar(tau);
            lk.push(cur[j] / den);
            lkb.push(ec * (r * next[j] + a * cur[j]) / den);
        }
    }
    (lkb, lk)
}

/// Residuals of the Wronskian identity
/// `L_κ̄(τ̄)L_κ(τ) − L_κ(τ̄)L_κ̄(τ) = d log v/d log τ` and of `|L_κ|² − |L_κ̄|²`.
pub fn wronskian_residual(geom: &ArcGeometry, grid: &QuadratureGrid, lkb: &[C64], lk: &[C64]) -> (f64, f64) {
    let mut det = 0.0f64;
    let mut modulus = 0.0f64;
    for (j, &tau) in grid.nodes().iter().enumerate() {
        let jr = grid.conj_index(j);
        let d = geom.dlogv(tau);
        det = det.max((lkb[jr] * lk[j] - lk[jr] * lkb[j] - d).norm());
        modulus = modulus.max((lk[j].norm_sqr() - lkb[j].norm_sqr() - d).abs());
    }
    (det, modulus)
}

/// Residual of `L_κ̄(n) = e^{−ic}a_n L_κ(n) + ρ_n b_κ L_κ̄(n+1)` and its partner.
pub fn l_recurrence_residual(
    solver: &JostSolver,
    family: &JostFamily,
    grid: &QuadratureGrid,
    n: i64,
) -> f64 {
    let g = solver.geometry();
    let s = solver.sequence();
    let c = solver.phase_plus();
    let (kb0, k0) = l_functions(solver, family, grid, n);
    let (kb1, k1) = l_functions(solver, family, grid, n + 1);
    let (a, r) = (s.get(n), s.rho(n));
    let mut worst = 0.0f64;
    for (j, &tau) in grid.nodes().iter().enumerate() {
        let l1 = C64::from_polar(1.0, -c) * a * k0[j] + r * g.b_kappa(tau) * kb1[j];
        let l2 = C64::from_polar(1.0, c) * a.conj() * kb0[j] + r * g.b_kappa_bar(tau) * k1[j];
        worst = worst.max((l1 - kb0[j]).norm()).max((l2 - k0[j]).norm());
    }
    worst
}

/// Finite section of the transformation operator `M_{l,n} = ⟨e⁺(n), 𝔢_{l,c₊}⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlmSection {
    pub n_lo: i64,
    pub matrix: DMatrix<C64>,
    pub norm: f64,
    /// Largest entry above the diagonal (zero up to quadrature error).
    pub upper_defect: f64,
}

pub fn glm_sections(
    solver: &JostSolver,
    grid: &QuadratureGrid,
    n_lo: i64,
    size: usize,
) -> GlmSection {
    let g = solver.geometry();
    let n_hi = n_lo + size as i64 - 1;
    let (plus, _) = jost_solutions(solver, grid, n_lo, n_hi);
    let free: Vec<Vec<C64>> = (n_lo..=n_hi).map(|l| grid.sample(|t| g.free_basis(l, t))).collect();
    let matrix = DMatrix::from_fn(size, size, |l, n| grid.inner(plus.at(n_lo + n as i64), &free[l]));
    let mut upper_defect = 0.0f64;
    for l in 0..size {
        for n in l + 1..size {
            upper_defect = upper_defect.max(matrix[(l, n)].norm());
        }
    }
    let norm = matrix.singular_values().max();
    GlmSection { n_lo, matrix, norm, upper_defect }
}

/// `‖T₊e⁺(−n−1) − (τ̄𝔢_{n,c₋}(τ̄) + R₋𝔢_{n,c₋})‖` on the grid, for `n ≥ 0`.
pub fn reflected_asymptotic_defect(
    solver: &JostSolver,
    smatrix: &SMatrix,
    n: i64,
) -> f64 {
    let grid = &smatrix.grid;
    let gm = solver.geometry().with_phase(solver.phase_minus());
    let mut diff = Vec::with_capacity(grid.len());
    for (j, &tau) in grid.nodes().iter().enumerate() {
        let e = solver.plus_at(tau, -n - 1, -n - 1)[0];
        let expect = tau.conj() * gm.free_basis(n, tau.conj()) + smatrix.r_minus[j] * gm.free_basis(n, tau);
        diff.push(smatrix.t_plus[j] * e - expect);
    }
    grid.norm(&diff)
}

/// `−i e^{ic}|T(κ)|` phase check value: returns `arg T₊(κ) − (c₋ − π/2)` wrapped.
pub fn normalization_phase_error(solver: &JostSolver) -> f64 {
    let t = solver.t_plus(solver.geometry().kappa);
    let expect = -I * C64::from_polar(1.0, solver.phase_minus());
    (t / t.norm() / expect).arg().abs()
}

/// A point mass `ν₊` at a real bound state `ζ_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mass {
    pub zeta: f64,
    pub nu: f64,
}

/// Right scattering data `{R₊, ν₊}` together with `e^{ic₊}` and the arc.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringData {
    pub xi0: f64,
    pub phase_c_plus: f64,
    pub grid: QuadratureGrid,
    pub r_plus: Vec<C64>,
    pub masses: Vec<Mass>,
}

impl ScatteringData {
    pub fn new(
        xi0: f64,
        phase_c_plus: f64,
        grid: QuadratureGrid,
        r_plus: Vec<C64>,
        masses: Vec<Mass>,
    ) -> Result<Self, DirectError> {
        let data = Self { xi0, phase_c_plus, grid, r_plus, masses };
        data.validate()?;
        Ok(data)
    }

    pub fn geometry(&self) -> ArcGeometry {
        ArcGeometry::from_arc(self.xi0)
            .expect("arc validated at construction")
            .with_phase(self.phase_c_plus)
    }

    /// `max |R₊(τ̄) − conj R₊(τ)|`.
    pub fn symmetry_defect(&self) -> f64 {
        (0..self.grid.len())
            .map(|j| (self.r_plus[self.grid.conj_index(j)] - self.r_plus[j].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Quadrature of `log(1 − |R₊|²)`; `−∞` when some node has `|R₊| = 1`.
    pub fn szego_log_integral(&self) -> f64 {
        self.r_plus.iter().map(|r| (1.0 - r.norm_sqr()).ln()).sum::<f64>() / self.grid.len() as f64
    }

    pub fn validate(&self) -> Result<(), DirectError> {
        let bad = |m: &str| Err(DirectError::InvalidData(m.to_string()));
        if ArcGeometry::from_arc(self.xi0).is_err() {
            return bad("arc parameter outside (0, pi)");
        }
        if self.r_plus.len() != self.grid.len() {
            return bad("R_plus length differs from the grid size");
        }
        if self.r_plus.iter().any(|r| !(r.norm() <= 1.0 + 1e-12)) {
            return bad("|R_plus| exceeds 1");
        }
        if self.symmetry_defect() > 1e-8 {
            return bad("R_plus(conj tau) differs from conj R_plus(tau)");
        }
        if !self.szego_log_integral().is_finite() {
            return bad("log(1 - |R_plus|^2) is not integrable");
        }
        for m in &self.masses {
            if !(m.zeta.abs() < 1.0) || !(m.nu > 0.0) {
                return bad("mass outside (-1, 1) or with nonpositive weight");
            }
        }
        Ok(())
    }
}

/// Everything the direct problem produces for one sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectResult {
    pub solver: JostSolver,
    pub smatrix: SMatrix,
    pub norming: Vec<NormingConstants>,
    pub data: ScatteringData,
}

pub fn direct_scattering(seq: &VerblunskySequence, grid_size: usize) -> Result<DirectResult, DirectError> {
    let grid = QuadratureGrid::new(grid_size).map_err(|e| DirectError::InvalidData(e.to_string()))?;
    let solver = JostSolver::new(seq);
    let smatrix = reflection_and_smatrix(&solver, &grid)?;
    let norming = bound_states(&solver)?
        .into_iter()
        .map(|z| norming_constants(&solver, z))
        .collect::<Result<Vec<_>, _>>()?;
    let masses = norming.iter().map(|n| Mass { zeta: n.zeta, nu: n.nu_plus }).collect();
    let data = ScatteringData::new(
        solver.geometry().xi0,
        solver.phase_plus(),
        grid,
        smatrix.r_plus.clone(),
        masses,
    )?;
    Ok(DirectResult { solver, smatrix, norming, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmv::{assemble_cmv, three_term_residual, truncation_spectrum, BoundaryMode};

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

    #[test]
    fn free_sequence_is_free() {
        let seq = VerblunskySequence::constant(C64::from_polar(0.5, 0.3)).unwrap();
        let s = JostSolver::new(&seq);
        let g = s.geometry();
        let z = c(0.2, -0.3);
        let e = s.plus_at(z, -5, 5);
        for (i, n) in (-5..=5).enumerate() {
            assert!((e[i] - g.free_basis(n, z)).norm() < 1e-13);
        }
        let grid = QuadratureGrid::new(256).unwrap();
        let sm = reflection_and_smatrix(&s, &grid).unwrap();
        for j in 0..grid.len() {
            assert!(sm.r_plus[j].norm() < 1e-12);
            assert!((sm.t_plus[j].norm() - 1.0).abs() < 1e-12);
        }
        assert!(bound_states(&s).unwrap().is_empty());
    }

    #[test]
    fn locality_of_the_recursion() {
        let seq = VerblunskySequence::new(0, vec![c(0.1, 0.2)], c(0.5, 0.0), c(0.5, 0.0)).unwrap();
        let s = JostSolver::new(&seq);
        let g = s.geometry();
        let z = C64::from_polar(1.0, 2.0);
        let e = s.plus_at(z, -3, 4);
        for (i, n) in (-3..=4).enumerate() {
            let d = (e[i] - g.free_basis(n, z)).norm();
            if n >= 1 {
                assert_eq!(d, 0.0);
            } else {
                assert!(d > 1e-6, "n = {n}");
            }
        }
    }

    #[test]
    fn jost_solutions_satisfy_three_term_relations() {
        let seq = perturbed();
        let s = JostSolver::new(&seq);
        for z in [C64::from_polar(1.0, 2.5), c(0.3, 0.4), c(-0.2, -0.1)] {
            let w = s.geometry().v(z);
            let e = s.plus_at(z, -6, 8);
            assert!(three_term_residual(&seq, -6, &e, w) < 1e-10);
            let f = s.f_at(z, -6, 8);
            assert!(three_term_residual(&seq, -6, &f, w) < 1e-10);
        }
    }

    #[test]
    fn delta_pairs_and_symmetry() {
        let seq = perturbed();
        let s = JostSolver::new(&seq);
        let z = c(0.3, 0.25);
        let d = s.delta(z);
        for n in -4..5 {
            assert!((s.delta_from_pair(z, n) - d).norm() < 1e-9 * d.norm(), "n = {n}");
        }
    }

    #[test]
    fn rotated_inverse_transmission_is_real_symmetric() {
        // e^{−i(c₊−c₋)/2}/T₊ is real on (−1, 1), hence Schwarz-symmetric.
        let seq = perturbed();
        let s = JostSolver::new(&seq);
        let rot = |z: C64| C64::from_polar(1.0, -(s.phase_plus() - s.phase_minus()) / 2.0) * s.inv_t_plus(z);
        for z in [c(0.3, 0.25), c(-0.6, 0.1), c(0.05, -0.7)] {
            assert!((rot(z.conj()) - rot(z).conj()).norm() < 1e-12 * rot(z).norm());
        }
        for x in [-0.7, 0.1, 0.6] {
            assert!(s.rotated_inv_t(x).im.abs() < 1e-12 * s.rotated_inv_t(x).norm());
        }
    }

    #[test]
    fn smatrix_laws() {
        let seq = perturbed();
        let s = JostSolver::new(&seq);
        let grid = QuadratureGrid::new(512).unwrap();
        let sm = reflection_and_smatrix(&s, &grid).unwrap();
        assert!(sm.unitarity_defect() < 1e-10);
        assert!(sm.symmetry_defect() < 1e-10);
        let (o, t) = sm.modulus_defects();
        assert!(o < 1e-10 && t < 1e-12);
        assert!(sm.dual_route_defect < 1e-9);
        assert!(normalization_phase_error(&s) < 1e-9);
    }

    #[test]
    fn step_fixture_has_one_bound_state() {
        let seq = step();
        let s = JostSolver::new(&seq);
        let b = bound_states(&s).unwrap();
        assert_eq!(b.len(), 1);
        assert!((b[0] - 0.3728246932726953).abs() < 1e-10);
        // Off-arc eigenvalue of a capped 256-site section.
        let cap = BoundaryMode::UnimodularCap { left: c(1.0, 0.0), right: c(1.0, 0.0) };
        let w = assemble_cmv(&seq, -128, 127, cap).unwrap();
        let target = s.geometry().v(c(b[0], 0.0));
        let ev = truncation_spectrum(&w).unwrap();
        let d = ev.iter().map(|e| (e - target).norm()).fold(f64::INFINITY, f64::min);
        assert!(d < 1e-4);
        // The real part of the rotated 1/T is the whole value.
        assert!(s.rotated_inv_t(0.1).im.abs() < 1e-12);
    }

    #[test]
    fn norming_constant_identities() {
        let seq = step();
        let s = JostSolver::new(&seq);
        let zk = bound_states(&s).unwrap()[0];
        let nc = norming_constants(&s, zk).unwrap();
        assert!((nc.nu_plus - 0.59321491).abs() < 1e-7);
        assert!((nc.nu_minus - 0.26778684).abs() < 1e-7);
        assert!(nc.product_defect < 1e-6);
        assert!(nc.proportionality_defect < 1e-8);
        assert!(nc.collinearity_defect < 1e-8);
    }

    #[test]
    fn bound_states_follow_the_involution() {
        let seq = step();
        let a = bound_states(&JostSolver::new(&seq)).unwrap();
        let b = bound_states(&JostSolver::new(&seq.involute())).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn wronskian_identity() {
        let seq = perturbed();
        let s = JostSolver::new(&seq);
        let grid = QuadratureGrid::new(512).unwrap();
        let (plus, _) = jost_solutions(&s, &grid, -7, 11);
        for n in -6..=9 {
            let (lkb, lk) = l_functions(&s, &plus, &grid, n);
            let (a, b) = wronskian_residual(s.geometry(), &grid, &lkb, &lk);
            assert!(a < 1e-10 && b < 1e-10, "n = {n}: {a} {b}");
            assert!(l_recurrence_residual(&s, &plus, &grid, n) < 1e-10);
        }
    }

    #[test]
    fn glm_section_structure() {
        let seq = perturbed();
        let s = JostSolver::new(&seq);
        let grid = QuadratureGrid::new(512).unwrap();
        let sec = glm_sections(&s, &grid, -4, 12);
        assert!(sec.upper_defect < 1e-12);
        // Free tail: exact identity columns beyond the window.
        for n in 7..12 {
            for l in 0..12 {
                let expect = if l == n { 1.0 } else { 0.0 };
                assert!((sec.matrix[(l, n)] - expect).norm() < 1e-12);
            }
        }
        let free = JostSolver::new(&VerblunskySequence::constant(c(0.5, 0.0)).unwrap());
        let sec = glm_sections(&free, &grid, -4, 8);
        assert!((sec.matrix.clone() - DMatrix::identity(8, 8)).norm() < 1e-12);
    }

    #[test]
    fn reflected_asymptotics_decay() {
        let seq = perturbed();
        let s = JostSolver::new(&seq);
        let grid = QuadratureGrid::new(512).unwrap();
        let sm = reflection_and_smatrix(&s, &grid).unwrap();
        let d: Vec<f64> = (0..8).map(|n| reflected_asymptotic_defect(&s, &sm, n)).collect();
        assert!(d[7] < 1e-10, "{d:?}");
    }
}

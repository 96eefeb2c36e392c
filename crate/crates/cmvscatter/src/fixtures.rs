//! Reproducible test sequences: constant, seeded random windows, a one-bound-state
//! step, and a window designed so that `T` stays nonzero at both arc edges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::cmv::{CmvError, VerblunskySequence};
use crate::conditions::WeightOnInterval;
use crate::direct::JostSolver;
use crate::geometry::C64;

/// Amplitude of the seeded window perturbation.
pub const PERTURB_AMPLITUDE: f64 = 0.15;

pub fn constant(a: C64) -> Result<VerblunskySequence, CmvError> {
    VerblunskySequence::constant(a)
}

/// `a_n = a + amplitude·u·e^{2πiφ}` for `n = 0..count`, with `(u, φ)` uniform from
/// ChaCha8 seeded by `seed`; tails equal `a`.
pub fn random_window(a: C64, count: usize, seed: u64, amplitude: f64) -> Result<VerblunskySequence, CmvError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let phi: f64 = rng.random();
            a + C64::from_polar(amplitude * u, 2.0 * PI * phi)
        })
        .collect();
    VerblunskySequence::new(0, values, a, a)
}

/// The three-entry perturbation of `a = 0.5` with seed 7.
pub fn perturbed() -> VerblunskySequence {
    random_window(C64::new(0.5, 0.0), 3, 7, PERTURB_AMPLITUDE).expect("window inside the disk")
}

/// `a_0 = a` between tails `ia` (left) and `a` (right).
pub fn step_with(a: C64) -> Result<VerblunskySequence, CmvError> {
    VerblunskySequence::new(0, vec![a], C64::new(0.0, 1.0) * a, a)
}

/// [`step_with`] at `a = 0.5`: one bound state.
pub fn step() -> VerblunskySequence {
    step_with(C64::new(0.5, 0.0)).expect("valid step")
}

/// Frozen output of [`design_edge_resonant`] for `a_0 = 0.5`, `a_1 = 0.2`, confirmed
/// by an independent Jost evaluation.
pub const EDGE_RESONANT_WINDOW: [f64; 3] = [0.5, 0.2, 0.8];

/// Real window `[0.5, 0.2, a_2]` between tails 0.5 with `T` nonzero at both arc edges.
pub fn edge_resonant() -> VerblunskySequence {
    real_window(&EDGE_RESONANT_WINDOW)
}

fn real_window(values: &[f64]) -> VerblunskySequence {
    let a = C64::new(0.5, 0.0);
    VerblunskySequence::new(0, values.iter().map(|&x| C64::new(x, 0.0)).collect(), a, a).expect("window inside the disk")
}

/// `Re(Δ(±1)e^{∓iξ0})`. `Δ(±1)` has the fixed phase `∓(π − ξ0)`, so this is a signed
/// modulus whose zero makes `T` nonzero at the edge. For real windows both entries
/// coincide.
fn edge_residual(window: &[f64]) -> [f64; 2] {
    let seq = real_window(window);
    let xi0 = seq.geometry().xi0;
    let s = JostSolver::new(&seq);
    [
        (s.delta(C64::new(1.0, 0.0)) * C64::from_polar(1.0, -xi0)).re,
        (s.delta(C64::new(-1.0, 0.0)) * C64::from_polar(1.0, xi0)).re,
    ]
}

/// Secant iteration on the last entry of a real window (tails 0.5) for the edge
/// condition; `None` when it leaves the disk.
pub fn design_edge_resonant(a0: f64, a1: f64, start: f64) -> Option<[f64; 3]> {
    let r = |x: f64| edge_residual(&[a0, a1, x])[0];
    let (mut x0, mut x1) = (start, start + 1e-3);
    let (mut f0, mut f1) = (r(x0), r(x1));
    for _ in 0..60 {
        if f1 == f0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !(x2.abs() < 0.99) {
            return None;
        }
        (x0, f0, x1) = (x1, f1, x2);
        f1 = r(x1);
        if (x1 - x0).abs() < 1e-15 {
            break;
        }
    }
    Some([a0, a1, x1])
}

/// `|x|^α` on `[−2, 2]`; in A2 exactly for `α ∈ (−1, 1)`.
pub fn power_weight(alpha: f64) -> WeightOnInterval {
    WeightOnInterval::new(-2.0, 2.0, move |x: f64| x.abs().powf(alpha))
}

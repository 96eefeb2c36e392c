//! Property tests for the structural invariants.

use proptest::prelude::*;

use cmvscatter::cmv::{assemble_cmv, BoundaryMode, VerblunskySequence};
use cmvscatter::conditions::{a2_at_level, a2_study, carleson_box, modified_a2_reflection, DiscreteDiskMeasure, WeightOnInterval};
use cmvscatter::direct::direct_scattering;
use cmvscatter::geometry::{QuadratureGrid, C64};
use cmvscatter::inverse::shift_data;
use cmvscatter::io::{parse_json, to_json, SequenceDoc};
use cmvscatter::schur::SchurFunction;

fn disk_point(max: f64) -> impl Strategy<Value = C64> {
    (0.0..max, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

/// A window of 1 to 4 entries near the tail `a`, tails of modulus 0.5.
fn sequence() -> impl Strategy<Value = VerblunskySequence> {
    (0.0..std::f64::consts::TAU, prop::collection::vec(disk_point(0.2), 1..5), -3i64..3).prop_map(|(phase, dv, lo)| {
        let a = C64::from_polar(0.5, phase);
        VerblunskySequence::new(lo, dv.into_iter().map(|d| a + d).collect(), a, a).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn periodic_section_is_unitary(seq in sequence()) {
        let w = assemble_cmv(&seq, -8, 9, BoundaryMode::PeriodicFree).unwrap();
        let m = w.to_dense();
        let defect = (m.adjoint() * &m - nalgebra::DMatrix::<C64>::identity(18, 18)).norm();
        prop_assert!(defect < 1e-12, "{defect}");
    }

    #[test]
    fn smatrix_is_unitary_and_symmetric(seq in sequence()) {
        let d = direct_scattering(&seq, 256).unwrap();
        prop_assert!(d.smatrix.unitarity_defect() < 1e-8);
        prop_assert!(d.smatrix.symmetry_defect() < 1e-8);
        prop_assert!(d.data.symmetry_defect() < 1e-8);
    }

    #[test]
    fn sequence_json_is_byte_stable(seq in sequence()) {
        let text = to_json(&SequenceDoc::from(&seq));
        let doc: SequenceDoc = parse_json(&text).unwrap();
        prop_assert_eq!(to_json(&doc), text);
        prop_assert_eq!(doc.to_sequence().unwrap(), seq);
    }

    #[test]
    fn shifts_compose_additively(seq in sequence(), a in -3i64..3, b in -3i64..3) {
        let d = direct_scattering(&seq, 128).unwrap().data;
        let two = shift_data(&shift_data(&d, a).data, b).data;
        let one = shift_data(&d, a + b).data;
        for (x, y) in two.r_plus.iter().zip(&one.r_plus) {
            prop_assert!((x - y).norm() < 1e-13);
        }
        for (x, y) in two.masses.iter().zip(&one.masses) {
            prop_assert!((x.nu - y.nu).abs() < 1e-12 * y.nu && x.nu > 0.0);
        }
    }

    #[test]
    fn schur_steps_invert(head in prop::collection::vec(disk_point(0.95), 1..6), tail in disk_point(0.9), w in disk_point(0.99)) {
        let f = SchurFunction::new(head, tail).unwrap();
        let (a0, rest) = f.step_down().unwrap();
        let g = SchurFunction::step_up(a0, &rest).unwrap();
        prop_assert_eq!(&g, &f);
        prop_assert!(f.eval(w).norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn a2_is_symmetric_and_monotone(p in -0.9f64..0.9, q in 0.1f64..2.0, level in 0usize..5) {
        let w = WeightOnInterval::new(-2.0, 2.0, move |x: f64| x.abs().powf(p) + q);
        let wi = WeightOnInterval::new(-2.0, 2.0, move |x: f64| 1.0 / (x.abs().powf(p) + q));
        let (a, b) = (a2_at_level(&w, level).unwrap(), a2_at_level(&wi, level).unwrap());
        prop_assert!((a - b).abs() <= 1e-13 * a && a >= 1.0 - 1e-12);
        let s = a2_study(&w, 5).unwrap();
        prop_assert!(s.values.windows(2).all(|v| v[1] >= v[0]));
    }

    #[test]
    fn carleson_box_is_homogeneous(
        pts in prop::collection::vec((disk_point(0.99), 0.01f64..2.0), 1..6),
        k in prop::sample::select(vec![0.5, 2.0, 4.0, 0.25]),
    ) {
        let mu = DiscreteDiskMeasure { points: pts.iter().map(|p| p.0).collect(), masses: pts.iter().map(|p| p.1).collect() };
        let scaled = DiscreteDiskMeasure { points: mu.points.clone(), masses: mu.masses.iter().map(|m| k * m).collect() };
        prop_assert_eq!(carleson_box(&scaled), k * carleson_box(&mu));
    }

    #[test]
    fn modified_a2_sign_invariant(c0 in disk_point(0.3), c1 in disk_point(0.3), c2 in disk_point(0.3)) {
        let grid = QuadratureGrid::new(256).unwrap();
        let r = grid.sample(|t| c0 + c1 * t + c2 * t.conj() * t.conj());
        let neg: Vec<C64> = r.iter().map(|x| -x).collect();
        let a = modified_a2_reflection(&r, 0.0).unwrap();
        prop_assert_eq!(a, modified_a2_reflection(&neg, 0.0).unwrap());
        prop_assert!(a >= 1.0 - 1e-12);
    }
}

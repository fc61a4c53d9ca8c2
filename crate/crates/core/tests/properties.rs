//! Property tests for the structural invariants: selection rules, weight
//! normalization, symplecticity, purity, formula equivalences, classifier
//! stability, and the mirror symmetry of the coupling graph.

use std::sync::OnceLock;

use proptest::prelude::*;

use opo_steering::coupling::{coupling_matrix, mode_label, pump_weights, PumpSetting};
use opo_steering::gaussian::{covariance, propagate, Bipartition, CovarianceMatrix};
use opo_steering::hg::{calibrated_overlap_table, overlap, HgLabel, OverlapTable, WaistConfig};
use opo_steering::steering::{
    classify_pair, classify_values, genuine_pentapartite, log_negativity, steer_1p1, steer_multi,
    Direction, QuadScale, SteeringClass,
};

fn table() -> &'static OverlapTable {
    static TABLE: OnceLock<OverlapTable> = OnceLock::new();
    TABLE.get_or_init(|| calibrated_overlap_table(&WaistConfig::default()).unwrap())
}

fn sigma_at(b: f64, c: f64, theta: f64, t: f64) -> CovarianceMatrix {
    let g = coupling_matrix(&PumpSetting::new(b, c, theta).unwrap(), table());
    covariance(&propagate(&g, t).unwrap())
}

/// Mirror permutation 1↔2, 3↔4, 5↔5 induced by the x↔y relabeling.
fn mirror(m: usize) -> usize {
    match m {
        1 => 2,
        2 => 1,
        3 => 4,
        4 => 3,
        m => m,
    }
}

fn knob() -> impl Strategy<Value = f64> {
    0.0..=1.0f64
}

fn angle() -> impl Strategy<Value = f64> {
    0.0..std::f64::consts::FRAC_PI_2
}

fn time() -> impl Strategy<Value = f64> {
    0.0..=0.6f64
}

fn pair() -> impl Strategy<Value = Vec<usize>> {
    proptest::sample::subsequence(vec![1usize, 2, 3, 4, 5], 2)
}

proptest! {
    #[test]
    fn overlap_parity_selection(
        pm in 0..=3u32, pn in 0..=3u32,
        sm in 0..=3u32, sn in 0..=3u32,
        im in 0..=3u32, inn in 0..=3u32,
    ) {
        let cfg = WaistConfig::default();
        let v = overlap(
            HgLabel::new(pm, pn),
            HgLabel::new(sm, sn),
            HgLabel::new(im, inn),
            &cfg,
        ).unwrap();
        if (pm + sm + im) % 2 == 1 || (pn + sn + inn) % 2 == 1 {
            prop_assert!(v.abs() < 1e-12, "odd-parity overlap {v} nonzero");
        }
        // x↔y swap of all three labels leaves the integral unchanged.
        let swapped = overlap(
            HgLabel::new(pn, pm),
            HgLabel::new(sn, sm),
            HgLabel::new(inn, im),
            &cfg,
        ).unwrap();
        prop_assert!((v - swapped).abs() < 1e-10);
    }

    #[test]
    fn weights_stay_normalized(b in knob(), c in knob(), theta in -10.0..10.0f64) {
        let p = PumpSetting::new(b, c, theta).unwrap();
        let sum: f64 = pump_weights(&p).iter().map(|w| w * w).sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coupling_zero_structure(b in knob(), c in knob(), theta in angle()) {
        let g = coupling_matrix(&PumpSetting::new(b, c, theta).unwrap(), table());
        for m in 1..=5 {
            prop_assert_eq!(g.get(m, m), 0.0);
        }
        prop_assert_eq!(g.get(1, 2), 0.0);
        for (m, n) in [(3, 4), (3, 5), (4, 5)] {
            prop_assert_eq!(g.get(m, n), 0.0);
            prop_assert_eq!(g.get(n, m), 0.0);
        }
        for m in 1..=5 {
            for n in 1..=5 {
                prop_assert_eq!(g.get(m, n), g.get(n, m));
            }
        }
    }

    #[test]
    fn coupling_mirror_symmetry(b in knob(), c in knob(), theta in angle(), t in time()) {
        let g1 = coupling_matrix(&PumpSetting::new(b, c, theta).unwrap(), table());
        let bm = (1.0 - b * b).sqrt();
        let cm = (1.0 - c * c).sqrt();
        let g2 = coupling_matrix(&PumpSetting::new(bm, cm, theta).unwrap(), table());
        for m in 1..=5 {
            for n in 1..=5 {
                prop_assert!((g2.get(mirror(m), mirror(n)) - g1.get(m, n)).abs() < 1e-9);
            }
        }
        let s1 = sigma_at(b, c, theta, t);
        let s2 = sigma_at(bm, cm, theta, t);
        let pos = |m: usize| m - 1;
        for m in 1..=5 {
            for n in 1..=5 {
                let a = s1.matrix()[(pos(m), pos(n))];
                let bb = s2.matrix()[(pos(mirror(m)), pos(mirror(n)))];
                prop_assert!((a - bb).abs() < 1e-8, "sigma mirror at ({m},{n}): {a} vs {bb}");
                let ay = s1.matrix()[(5 + pos(m), 5 + pos(n))];
                let by = s2.matrix()[(5 + pos(mirror(m)), 5 + pos(mirror(n)))];
                prop_assert!((ay - by).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn propagator_symplectic_and_state_pure(b in knob(), c in knob(), theta in angle(), t in time()) {
        let g = coupling_matrix(&PumpSetting::new(b, c, theta).unwrap(), table());
        let s = propagate(&g, t).unwrap();
        let m = s.matrix();
        let mut omega = nalgebra::SMatrix::<f64, 10, 10>::zeros();
        for i in 0..5 {
            omega[(i, 5 + i)] = 1.0;
            omega[(5 + i, i)] = -1.0;
        }
        let resid = m * omega * m.transpose() - omega;
        prop_assert!(resid.iter().all(|v| v.abs() < 1e-10));
        let cm = covariance(&s);
        prop_assert!((cm.matrix().determinant() - 2f64.powi(-10)).abs() < 1e-11);
        for nu in cm.check_bona_fide().unwrap() {
            prop_assert!((nu - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn propagation_composes(b in knob(), c in knob(), theta in angle(),
                            t1 in 0.0..=0.3f64, t2 in 0.0..=0.3f64) {
        let g = coupling_matrix(&PumpSetting::new(b, c, theta).unwrap(), table());
        let lhs = propagate(&g, t2).unwrap().matrix() * propagate(&g, t1).unwrap().matrix();
        let rhs = propagate(&g, t1 + t2).unwrap();
        let resid = lhs - rhs.matrix();
        prop_assert!(resid.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn reduction_commutes(b in knob(), c in knob(), theta in angle(), t in time(),
                          keep in proptest::sample::subsequence(vec![1usize, 2, 3, 4, 5], 2..=4),
                          inner_len in 1usize..=2) {
        let cm = sigma_at(b, c, theta, t);
        let inner: Vec<usize> = keep.iter().copied().take(inner_len.min(keep.len())).collect();
        let two_step = cm.reduce(&keep).unwrap().reduce(&inner).unwrap();
        let direct = cm.reduce(&inner).unwrap();
        prop_assert_eq!(two_step.matrix(), direct.matrix());
    }

    #[test]
    fn multi_equals_two_mode(b in knob(), c in knob(), theta in angle(), t in time(),
                             modes in pair()) {
        let cm = sigma_at(b, c, theta, t);
        let red = cm.reduce(&modes).unwrap();
        let part = Bipartition::new(vec![modes[0]], vec![modes[1]]).unwrap();
        for dir in [Direction::AToB, Direction::BToA] {
            let multi = steer_multi(&red, &part, dir).unwrap();
            let two = steer_1p1(&red, dir).unwrap();
            prop_assert!((multi - two).abs() < 1e-9, "{multi} vs {two}");
        }
    }

    #[test]
    fn steering_implies_entanglement(b in knob(), c in knob(), theta in angle(), t in time(),
                                     modes in pair()) {
        let red = sigma_at(b, c, theta, t).reduce(&modes).unwrap();
        let g_ab = steer_1p1(&red, Direction::AToB).unwrap();
        let g_ba = steer_1p1(&red, Direction::BToA).unwrap();
        if g_ab.max(g_ba) > 1e-9 {
            let en = log_negativity(&red).unwrap();
            prop_assert!(en > 0.0, "steerable ({g_ab}, {g_ba}) but E_N = {en}");
        }
    }

    #[test]
    fn enlarging_steered_party_never_hurts(b in knob(), c in knob(), theta in angle(), t in time(),
                                           steerer in 1usize..=5,
                                           extra in proptest::sample::subsequence(vec![1usize, 2, 3, 4, 5], 1..=2)) {
        let steered: Vec<usize> = (1..=5).filter(|&m| m != steerer && !extra.contains(&m)).collect();
        prop_assume!(!steered.is_empty());
        let cm = sigma_at(b, c, theta, t);
        let small_modes: Vec<usize> = std::iter::once(steerer).chain(steered.iter().copied()).collect();
        let small = steer_multi(
            &cm.reduce(&small_modes).unwrap(),
            &Bipartition::new(vec![steerer], steered.clone()).unwrap(),
            Direction::AToB,
        ).unwrap();
        let grown: Vec<usize> = steered.iter().chain(extra.iter().filter(|&&m| m != steerer)).copied().collect();
        let big_modes: Vec<usize> = std::iter::once(steerer).chain(grown.iter().copied()).collect();
        let big = steer_multi(
            &cm.reduce(&big_modes).unwrap(),
            &Bipartition::new(vec![steerer], grown).unwrap(),
            Direction::AToB,
        ).unwrap();
        prop_assert!(big >= small - 1e-9, "grew steered party: {small} -> {big}");
    }

    #[test]
    fn full_split_presence_is_symmetric(b in knob(), c in knob(), theta in angle(), t in time(),
                                        a_side in proptest::sample::subsequence(vec![1usize, 2, 3, 4, 5], 1..=4)) {
        let b_side: Vec<usize> = (1..=5).filter(|m| !a_side.contains(m)).collect();
        let cm = sigma_at(b, c, theta, t);
        let part = Bipartition::new(a_side.clone(), b_side).unwrap();
        let fwd = steer_multi(&cm, &part, Direction::AToB).unwrap();
        let back = steer_multi(&cm, &part, Direction::BToA).unwrap();
        prop_assert_eq!(fwd > 1e-9, back > 1e-9,
            "pure-state split {:?}: {} vs {}", a_side, fwd, back);
    }

    #[test]
    fn classifier_is_exhaustive_and_tol_stable(g_ab in 0.0..0.5f64, g_ba in 0.0..0.5f64,
                                               tol in 1e-4..1e-2f64) {
        let base = classify_values(g_ab, g_ba, tol);
        prop_assert!(SteeringClass::ALL.contains(&base));
        for factor in [0.9, 1.1] {
            let perturbed = classify_values(g_ab, g_ba, tol * factor);
            if perturbed != base {
                let symmetric_band = [
                    SteeringClass::TwoWaySymmetric,
                    SteeringClass::TwoWayADominant,
                    SteeringClass::TwoWayBDominant,
                ];
                prop_assert!(symmetric_band.contains(&base) && symmetric_band.contains(&perturbed),
                    "{base:?} -> {perturbed:?} outside the symmetric band");
            }
        }
    }

    #[test]
    fn classify_pair_matches_raw_values(b in knob(), c in knob(), theta in angle(), t in time(),
                                        modes in pair()) {
        let red = sigma_at(b, c, theta, t).reduce(&modes).unwrap();
        let report = classify_pair(&red, 1e-3).unwrap();
        prop_assert_eq!(report.class, classify_values(report.g_a_to_b, report.g_b_to_a, 1e-3));
        prop_assert!(report.g_a_to_b >= 0.0 && report.g_b_to_a >= 0.0);
        prop_assert!(report.e_n.unwrap() >= 0.0);
    }

    #[test]
    fn genuine_scales_relate(b in knob(), c in knob(), theta in angle(), t in time()) {
        let cm = sigma_at(b, c, theta, t);
        let unit = genuine_pentapartite(&cm, QuadScale::Unit).unwrap();
        let half = genuine_pentapartite(&cm, QuadScale::Half).unwrap();
        prop_assert!((unit.total - 2.0 * half.total).abs() < 1e-10);
        let sum: f64 = unit.s_values.iter().sum();
        prop_assert!((unit.total - sum).abs() < 1e-12);
        prop_assert_eq!(unit.violated, unit.total < 2.0);
        for s in unit.s_values {
            prop_assert!(s >= 0.0);
        }
    }

    #[test]
    fn mode_labels_are_fixed(m in 1usize..=5) {
        let expect = [(1, 0), (0, 1), (2, 0), (0, 2), (1, 1)][m - 1];
        let label = mode_label(m);
        prop_assert_eq!((label.m, label.n), expect);
    }
}

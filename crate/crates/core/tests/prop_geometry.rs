mod common;

use common::*;
use proptest::prelude::*;
use spectral_intervals::IntervalUnion;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn reflection_is_an_involution(omega in union_strategy(5)) {
        let minus = omega.reflect();
        prop_assert!((minus.measure() - omega.measure()).abs() < 1e-12);
        prop_assert_eq!(minus.reflect(), omega.clone());
        for i in 0..omega.len() {
            prop_assert_eq!(minus.length(omega.len() - 1 - i), omega.length(i));
        }
    }

    #[test]
    fn moves_preserve_measure(omega in union_strategy(4), a in 0usize..4, b in 0usize..4) {
        let n = omega.len();
        prop_assume!(n >= 2);
        let (moved, anchor) = (a % n, b % n);
        prop_assume!(moved != anchor);
        if let Ok(m) = omega.move_interval(moved, anchor) {
            prop_assert_eq!(m.len(), n - 1);
            prop_assert!((m.measure() - omega.measure()).abs() < 1e-12);
        }
    }

    #[test]
    fn lattice_tiles_are_detected(lengths in prop::collection::vec(0.2..1.0f64, 1..5), shifts in prop::collection::vec(-3i32..3, 5)) {
        // cut (0, L) into pieces and translate each by a multiple of L
        let l: f64 = lengths.iter().sum();
        let mut pos = 0.0;
        let mut pairs = Vec::new();
        for (len, k) in lengths.iter().zip(&shifts) {
            let off = *k as f64 * 2.0 * l + pairs.len() as f64 * l * 10.0;
            pairs.push((pos + off, pos + len + off));
            pos += len;
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let omega = IntervalUnion::new(&pairs).unwrap();
        let cert = omega.tiles_by_lattice(l, 1e-9).unwrap();
        prop_assert!(cert.tiles, "{:?}", cert);
        prop_assert!(omega.translation_congruence_to_interval(l, 1e-9).unwrap().is_some());
        prop_assert!(!omega.tiles_by_lattice(l * 0.9, 1e-9).unwrap().tiles);
    }

    #[test]
    fn gap_decompositions_sum_to_the_gap(omega in union_strategy(3), k in prop::collection::vec(0usize..3, 3)) {
        let lengths = omega.lengths();
        let gap: f64 = k.iter().zip(&lengths).map(|(&m, &l)| m as f64 * l).sum();
        prop_assume!(gap > 0.0);
        let found = omega.gap_decomposition(gap, 1e-9).unwrap();
        prop_assert!(!found.is_empty());
        for combo in found {
            prop_assert!((combo.iter().sum::<f64>() - gap).abs() <= 1e-9 * combo.len().max(1) as f64);
        }
    }
}

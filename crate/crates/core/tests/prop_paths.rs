mod common;

use common::*;
use proptest::prelude::*;
use spectral_intervals::paths::{aggregate_equal_length, enumerate_paths, path_count_estimate, Direction};
use spectral_intervals::BoundaryMatrix;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn probability_is_conserved((omega, b) in problem_strategy(4), u in 0.0..1.0f64, t in -4.0..4.0f64) {
        let x = point_in(&omega, u);
        let paths = enumerate_paths(&omega, &b, x, t).unwrap();
        let total: f64 = paths.iter().map(|p| p.weight.norm_sqr()).sum();
        prop_assert!((total - 1.0).abs() < 1e-10, "sum |b_w|^2 = {}", total);
        prop_assert!((paths.len() as f64) <= path_count_estimate(&omega, t));
    }

    #[test]
    fn every_path_spends_exactly_t((omega, b) in problem_strategy(3), u in 0.0..1.0f64, t in -3.0..3.0f64) {
        let x = point_in(&omega, u);
        for p in enumerate_paths(&omega, &b, x, t).unwrap() {
            let k = p.last();
            prop_assert!(p.remainder >= 0.0 && p.remainder <= omega.length(k) + 1e-12);
            if p.word.len() == 1 {
                prop_assert_eq!(p.end, x + t);
                continue;
            }
            let i = p.word[0];
            let exit = match p.direction {
                Direction::Forward => omega.beta(i) - x,
                Direction::Backward => x - omega.alpha(i),
            };
            let inner: f64 = p.word[1..p.word.len() - 1].iter().map(|&j| omega.length(j)).sum();
            prop_assert!((exit + inner + p.remainder - t.abs()).abs() < 1e-12 * omega.scale().max(t.abs()) * 10.0);
            let end = match p.direction {
                Direction::Forward => omega.alpha(k) + p.remainder,
                Direction::Backward => omega.beta(k) - p.remainder,
            };
            prop_assert_eq!(p.end, end);
        }
    }

    #[test]
    fn path_coefficients_are_rows_of_powers(
        omega in equal_union_strategy(3),
        seed in any::<u64>(),
        p in 1u32..=4,
        u in 0.05..0.95f64,
        v in 0.05..0.95f64,
    ) {
        let ell = omega.common_length().unwrap();
        let b = BoundaryMatrix::random_haar(omega.len(), &mut rng(seed));
        for i in 0..omega.len() {
            let x = omega.alpha(i) + u * ell;
            // t - (beta_i - x) strictly inside ((p - 1) l, p l)
            let t = (omega.beta(i) - x) + (p as f64 - 1.0 + v) * ell;
            let report = aggregate_equal_length(&omega, &b, x, t, p).unwrap();
            prop_assert!(report.max_difference < 1e-12, "row {} p {} diff {}", i, p, report.max_difference);
        }
    }
}

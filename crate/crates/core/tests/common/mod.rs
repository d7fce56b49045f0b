#![allow(dead_code)]

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_intervals::{BoundaryMatrix, IntervalUnion, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn spectral_pair() -> (IntervalUnion, BoundaryMatrix) {
    let omega = IntervalUnion::new(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
    let b = BoundaryMatrix::from_rows(&[vec![c(0.5, 0.5), c(0.5, -0.5)], vec![c(0.5, -0.5), c(0.5, 0.5)]]).unwrap();
    (omega, b)
}

pub fn unit_interval() -> (IntervalUnion, BoundaryMatrix) {
    (IntervalUnion::new(&[(0.0, 1.0)]).unwrap(), BoundaryMatrix::identity(1))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unions of `1..=max_n` intervals with lengths in `[0.3, 1.5]` and gaps in `[0, 1.5]`.
pub fn union_strategy(max_n: usize) -> impl Strategy<Value = IntervalUnion> {
    (1..=max_n, -2.0..2.0f64)
        .prop_flat_map(|(n, start)| {
            (Just(start), prop::collection::vec(0.3..1.5f64, n), prop::collection::vec(prop_oneof![Just(0.0), 0.05..1.5f64], n))
        })
        .prop_map(|(start, lengths, gaps)| {
            let mut pos = start;
            let mut pairs = Vec::new();
            for (l, g) in lengths.iter().zip(&gaps) {
                pairs.push((pos, pos + l));
                pos += l + g;
            }
            IntervalUnion::new(&pairs).unwrap()
        })
}

/// Equal-length unions with `n` in `1..=max_n`.
pub fn equal_union_strategy(max_n: usize) -> impl Strategy<Value = IntervalUnion> {
    (1..=max_n, 0.3..1.2f64, -1.0..1.0f64)
        .prop_flat_map(|(n, ell, start)| (Just(ell), Just(start), prop::collection::vec(prop_oneof![Just(0.0), 0.05..1.5f64], n)))
        .prop_map(|(ell, start, gaps)| {
            let mut pos = start;
            let mut pairs = Vec::new();
            for g in gaps {
                pairs.push((pos, pos + ell));
                pos += ell + g;
            }
            IntervalUnion::new(&pairs).unwrap()
        })
}

/// A union paired with a Haar unitary of matching size.
pub fn problem_strategy(max_n: usize) -> impl Strategy<Value = (IntervalUnion, BoundaryMatrix)> {
    (union_strategy(max_n), any::<u64>()).prop_map(|(omega, seed)| {
        let b = BoundaryMatrix::random_haar(omega.len(), &mut rng(seed));
        (omega, b)
    })
}

/// A point well inside `Omega` from a fraction in `[0, 1)`.
pub fn point_in(omega: &IntervalUnion, u: f64) -> f64 {
    let mut acc = u * omega.measure();
    for i in 0..omega.len() {
        let l = omega.length(i);
        if acc < l || i + 1 == omega.len() {
            return omega.alpha(i) + (acc / l).clamp(0.01, 0.99) * l;
        }
        acc -= l;
    }
    unreachable!()
}

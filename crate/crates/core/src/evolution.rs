//! Exact evolution `U(t) f` for piecewise exponential polynomials.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::boundary::{cis_turns, BoundaryMatrix};
use crate::error::{Error, Result};
use crate::expoly::{self, accumulate, Atom, Piece, PiecewiseExpPoly};
use crate::geometry::IntervalUnion;
use crate::linalg::{self, CMatrix, C64};
use crate::par::{self, Execution};
use crate::paths::{self, enumerate_paths_capped, path_count_estimate};
use crate::spectrum::{eigen_residual, SpectrumReport};

/// Guard on the number of distinct length sums used for breakpoints.
const SUM_CAP: usize = 1_000_000;

/// `||B f(alpha) - f(beta)|| < tol`.
pub fn boundary_condition_check(b: &BoundaryMatrix, f: &PiecewiseExpPoly, tol: f64) -> bool {
    boundary_defect(b, f) < tol
}

/// `||B f(alpha) - f(beta)||`.
pub fn boundary_defect(b: &BoundaryMatrix, f: &PiecewiseExpPoly) -> f64 {
    if b.size() != f.interval_count() {
        return f64::INFINITY;
    }
    linalg::norm(&linalg::sub(&b.matrix().mul_vec(&f.left_values()), &f.right_values()))
}

/// Path bookkeeping for one sub-piece of the result.
#[derive(Debug, Clone, Serialize)]
pub struct PieceStats {
    pub interval: usize,
    pub start: f64,
    pub end: f64,
    pub paths: usize,
    pub longest_word: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionResult {
    pub t: f64,
    pub function: PiecewiseExpPoly,
    /// Interior breakpoints per interval.
    pub refinement: Vec<Vec<f64>>,
    pub pieces: Vec<PieceStats>,
    pub total_paths: usize,
}

/// Distinct sums of multisets of `lengths` not exceeding `bound`, including 0.
fn length_sums(lengths: &[f64], bound: f64, tol: f64) -> Result<Vec<f64>> {
    let mut distinct: Vec<f64> = lengths.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup_by(|a, b| (*a - *b).abs() <= tol);
    let mut sums = vec![0.0];
    let mut seen = std::collections::BTreeSet::from([0f64.to_bits()]);
    let mut frontier = vec![0.0];
    // breadth-first over the number of summands keeps sums sorted per layer
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &s in &frontier {
            for &l in &distinct {
                let v = s + l;
                if v <= bound + tol {
                    next.push(v);
                }
            }
        }
        next.sort_by(f64::total_cmp);
        next.dedup_by(|a, b| (*a - *b).abs() <= tol);
        // sums are non-negative, so bit patterns sort like the values
        next.retain(|&v| seen.range((v - tol).max(0.0).to_bits()..=(v + tol).to_bits()).next().is_none());
        seen.extend(next.iter().map(|v| v.to_bits()));
        sums.extend_from_slice(&next);
        if sums.len() > SUM_CAP {
            return Err(Error::GuardExceeded {
                what: "breakpoint length sums",
                count: sums.len(),
                cap: SUM_CAP,
                estimate: (bound / distinct[0]).ceil().powi(distinct.len() as i32),
            });
        }
        frontier = next;
    }
    Ok(sums)
}

fn sorted_cuts(mut cuts: Vec<f64>, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
    cuts.retain(|&x| x > lo + tol && x < hi - tol);
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= tol);
    let last = cuts.len() - 1;
    cuts[0] = lo;
    cuts[last] = hi;
    cuts
}

/// `U(t) f` by the path formula, exact on every piece where the path set is
/// constant. The cap comes from [`paths::path_cap`].
pub fn apply_u_paths(omega: &IntervalUnion, b: &BoundaryMatrix, t: f64, f: &PiecewiseExpPoly) -> Result<EvolutionResult> {
    apply_u_paths_capped(omega, b, t, f, paths::path_cap())
}

pub fn apply_u_paths_capped(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    t: f64,
    f: &PiecewiseExpPoly,
    cap: usize,
) -> Result<EvolutionResult> {
    if f.interval_count() != omega.len() {
        return Err(Error::DimensionMismatch { what: "function intervals", got: f.interval_count(), expected: omega.len() });
    }
    if b.size() != omega.len() {
        return Err(Error::DimensionMismatch { what: "boundary matrix", got: b.size(), expected: omega.len() });
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t = {t} is not finite")));
    }
    if t == 0.0 {
        let refinement = (0..omega.len()).map(|i| f.breakpoints(i)).collect();
        let pieces = (0..omega.len())
            .flat_map(|i| f.pieces(i).iter().map(move |p| PieceStats { interval: i, start: p.start, end: p.end, paths: 1, longest_word: 1 }))
            .collect::<Vec<_>>();
        let total_paths = pieces.len();
        return Ok(EvolutionResult { t, function: f.clone(), refinement, pieces, total_paths });
    }
    paths::precheck_cap(omega, t, cap)?;
    let estimate = path_count_estimate(omega, t);
    let tol = 1e-12 * omega.scale();
    let tau = t.abs();
    let sums = length_sums(&omega.lengths(), tau, tol)?;

    let mut all_pieces = Vec::with_capacity(omega.len());
    let mut stats = Vec::new();
    let mut total_paths = 0usize;
    for i in 0..omega.len() {
        let (lo, hi) = (omega.alpha(i), omega.beta(i));
        let coarse: Vec<f64> =
            sums.iter().map(|&s| if t > 0.0 { hi - tau + s } else { lo + tau - s }).collect();
        let coarse = sorted_cuts(coarse, lo, hi, tol);

        let mut cuts = coarse.clone();
        for w in coarse.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            for p in enumerate_paths_capped(omega, b, mid, t, cap)? {
                let shift = p.end - mid;
                for e in f.breakpoints(p.last()) {
                    let x = e - shift;
                    if x > w[0] && x < w[1] {
                        cuts.push(x);
                    }
                }
            }
        }
        let cuts = sorted_cuts(cuts, lo, hi, tol);

        let mut list = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let found = enumerate_paths_capped(omega, b, mid, t, cap)?;
            let mut atoms: Vec<Atom> = Vec::new();
            for p in &found {
                let shift = p.end - mid;
                let k = p.last();
                let source = f.pieces(k);
                let idx = source.partition_point(|q| q.end <= p.end).min(source.len() - 1);
                for atom in &source[idx].atoms {
                    accumulate(&mut atoms, &atom.shifted(shift), p.weight);
                }
            }
            total_paths += found.len();
            if total_paths > cap.saturating_mul(64) {
                return Err(Error::GuardExceeded { what: "paths over all sub-pieces", count: total_paths, cap: cap.saturating_mul(64), estimate });
            }
            stats.push(PieceStats {
                interval: i,
                start: w[0],
                end: w[1],
                paths: found.len(),
                longest_word: found.iter().map(|p| p.word.len()).max().unwrap_or(0),
            });
            list.push(Piece { start: w[0], end: w[1], atoms });
        }
        all_pieces.push(list);
    }
    let function = PiecewiseExpPoly::from_pieces(omega, all_pieces)?;
    let refinement = (0..omega.len()).map(|i| function.breakpoints(i)).collect();
    Ok(EvolutionResult { t, function, refinement, pieces: stats, total_paths })
}

/// `[U(t) f](x) = sum_omega b_omega f(End(x, t, omega))`.
pub fn evaluate_u_at(omega: &IntervalUnion, b: &BoundaryMatrix, t: f64, f: &PiecewiseExpPoly, x: f64) -> Result<C64> {
    let found = enumerate_paths_capped(omega, b, x, t, paths::path_cap())?;
    Ok(found.iter().map(|p| p.weight * f.eval_in(p.last(), p.end)).sum())
}

/// `a e^{2 pi i lambda x} c_i` on interval `i`, an eigenfunction of `D_B`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenTerm {
    pub lambda: f64,
    pub vector: Vec<C64>,
    pub coeff: C64,
}

impl EigenTerm {
    /// Term built from basis vector `basis` of spectrum point `index`.
    pub fn from_report(report: &SpectrumReport, index: usize, basis: usize, coeff: C64) -> Option<Self> {
        let p = report.points.get(index)?;
        Some(EigenTerm { lambda: p.lambda, vector: p.basis.get(basis)?.clone(), coeff })
    }
}

fn check_terms(omega: &IntervalUnion, b: &BoundaryMatrix, terms: &[EigenTerm]) -> Result<()> {
    for (k, term) in terms.iter().enumerate() {
        if term.vector.len() != omega.len() {
            return Err(Error::DimensionMismatch { what: "eigenvector", got: term.vector.len(), expected: omega.len() });
        }
        let scale = linalg::norm(&term.vector).max(1.0);
        let r = eigen_residual(omega, b, term.lambda, &term.vector);
        if !(r <= 1e-8 * scale) {
            return Err(Error::NotEigenCombination(format!("term {k} at lambda = {} has residual {r:.3e}", term.lambda)));
        }
    }
    Ok(())
}

fn terms_to_function(omega: &IntervalUnion, terms: &[EigenTerm], t: f64) -> Result<PiecewiseExpPoly> {
    let mut per_interval: Vec<Vec<Atom>> = vec![Vec::new(); omega.len()];
    for term in terms {
        let phase = term.coeff * cis_turns(term.lambda * t);
        for (i, atoms) in per_interval.iter_mut().enumerate() {
            accumulate(atoms, &Atom::exponential(term.lambda, term.vector[i]), phase);
        }
    }
    PiecewiseExpPoly::new(omega, per_interval)
}

/// `sum_k a_k phi_k` for eigenfunctions `phi_k`, validated against `B`.
pub fn eigen_combination(omega: &IntervalUnion, b: &BoundaryMatrix, terms: &[EigenTerm]) -> Result<PiecewiseExpPoly> {
    check_terms(omega, b, terms)?;
    terms_to_function(omega, terms, 0.0)
}

/// `U(t) sum_k a_k phi_k = sum_k a_k e^{2 pi i lambda_k t} phi_k`.
pub fn apply_u_spectral(omega: &IntervalUnion, b: &BoundaryMatrix, terms: &[EigenTerm], t: f64) -> Result<PiecewiseExpPoly> {
    check_terms(omega, b, terms)?;
    terms_to_function(omega, terms, t)
}

/// Settings for random test functions.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomFunctionOptions {
    /// Frequencies to draw from, typically a computed spectrum; when empty,
    /// frequencies are uniform in `[-3, 3]`.
    pub frequencies: Vec<f64>,
    /// Standard deviation of the perturbation added to half of the drawn
    /// frequencies.
    pub perturbation: f64,
    pub max_atoms: usize,
    pub max_degree: usize,
}

impl Default for RandomFunctionOptions {
    fn default() -> Self {
        RandomFunctionOptions { frequencies: Vec::new(), perturbation: 0.3, max_atoms: 3, max_degree: 2 }
    }
}

fn normal_c64(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// A random exp-poly satisfying `B f(alpha) = f(beta)`.
///
/// A random `g` is corrected by a linear function on each interval taking the
/// values `u_i` at `alpha_i` and `v_i` at `beta_i`, with `u` random and
/// `v = B (g(alpha) + u) - g(beta)`.
pub fn random_domain_function(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    rng: &mut impl Rng,
    opts: &RandomFunctionOptions,
) -> Result<PiecewiseExpPoly> {
    let n = omega.len();
    let mut per_interval = Vec::with_capacity(n);
    for _ in 0..n {
        let count = rng.random_range(1..=opts.max_atoms.max(1));
        let mut atoms = Vec::new();
        for _ in 0..count {
            let freq = if opts.frequencies.is_empty() {
                rng.random_range(-3.0..3.0)
            } else {
                let base = opts.frequencies[rng.random_range(0..opts.frequencies.len())];
                if rng.random_bool(0.5) {
                    base + opts.perturbation * rng.sample::<f64, _>(StandardNormal)
                } else {
                    base
                }
            };
            let deg = rng.random_range(0..=opts.max_degree.min(expoly::MAX_DEGREE - 1));
            let poly = (0..=deg).map(|_| normal_c64(rng)).collect();
            accumulate(&mut atoms, &Atom::new(freq, poly), C64::new(1.0, 0.0));
        }
        per_interval.push(atoms);
    }
    let g = PiecewiseExpPoly::new(omega, per_interval)?;
    let ga = g.left_values();
    let gb = g.right_values();
    let u: Vec<C64> = (0..n).map(|_| normal_c64(rng)).collect();
    let shifted: Vec<C64> = ga.iter().zip(&u).map(|(a, b)| a + b).collect();
    let v = linalg::sub(&b.matrix().mul_vec(&shifted), &gb);
    let mut pieces = g.into_pieces();
    for (i, list) in pieces.iter_mut().enumerate() {
        let (a, l) = (omega.alpha(i), omega.length(i));
        let slope = (v[i] - u[i]) / l;
        let line = Atom::new(0.0, vec![u[i] - slope * a, slope]);
        accumulate(&mut list[0].atoms, &line, C64::new(1.0, 0.0));
    }
    PiecewiseExpPoly::from_pieces(omega, pieces)
}

/// Independent per-trial seeds drawn sequentially from `seed`.
pub fn trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| master.next_u64()).collect()
}

/// A point of `Omega` drawn uniformly.
pub fn sample_point(omega: &IntervalUnion, rng: &mut impl Rng) -> f64 {
    let mut u = rng.random_range(0.0..omega.measure());
    for i in 0..omega.len() {
        let l = omega.length(i);
        if u < l || i + 1 == omega.len() {
            let frac = (u / l).clamp(1e-6, 1.0 - 1e-6);
            return omega.alpha(i) + frac * l;
        }
        u -= l;
    }
    unreachable!("measure is positive")
}

#[derive(Debug, Clone, Serialize)]
pub struct TranslationWitness {
    pub trial: usize,
    pub x: f64,
    pub t: f64,
    pub evolved: C64,
    pub translated: C64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalTranslationOutcome {
    pub trials: usize,
    pub failures: usize,
    pub max_error: f64,
    pub pass: bool,
    /// First failing trial, or the worst trial when all pass.
    pub witness: Option<TranslationWitness>,
}

/// Random trials of `[U(t) f](x) = f(x + t)` with `x, x + t` in `Omega` and
/// `f` in the domain of `D_B`.
pub fn local_translation_test(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    trials: usize,
    tol: f64,
    seed: u64,
    exec: Execution,
) -> Result<LocalTranslationOutcome> {
    local_translation_test_with(omega, b, trials, tol, seed, exec, &RandomFunctionOptions::default())
}

pub fn local_translation_test_with(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    trials: usize,
    tol: f64,
    seed: u64,
    exec: Execution,
    opts: &RandomFunctionOptions,
) -> Result<LocalTranslationOutcome> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let seeds: Vec<(usize, u64)> = trial_seeds(seed, trials).into_iter().enumerate().collect();
    let results = par::try_map(exec, &seeds, |&(trial, s)| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let f = random_domain_function(omega, b, &mut rng, opts)?;
        let x = sample_point(omega, &mut rng);
        let y = sample_point(omega, &mut rng);
        let t = y - x;
        let evolved = evaluate_u_at(omega, b, t, &f, x)?;
        let translated = f.eval(y).expect("y lies in Omega");
        let error = (evolved - translated).norm();
        Ok::<_, Error>(TranslationWitness { trial, x, t, evolved, translated, error })
    })?;
    let failures = results.iter().filter(|w| !(w.error < tol)).count();
    let max_error = results.iter().map(|w| w.error).fold(0.0, f64::max);
    let witness = results
        .iter()
        .find(|w| !(w.error < tol))
        .or_else(|| results.iter().max_by(|a, b| a.error.total_cmp(&b.error)))
        .cloned();
    Ok(LocalTranslationOutcome { trials, failures, max_error, pass: failures == 0, witness })
}

/// The boundary matrix of `-Omega` with intervals re-sorted: `P B^* P` where
/// `P` reverses the interval order.
pub fn reflected_matrix(b: &BoundaryMatrix) -> BoundaryMatrix {
    let n = b.size();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = b.entry(n - 1 - j, n - 1 - i).conj();
        }
    }
    BoundaryMatrix::with_tolerance(m, 1e-9).expect("adjoint of a unitary matrix")
}

#[derive(Debug, Clone, Serialize)]
pub struct ReflectionReport {
    pub t: f64,
    pub max_error: f64,
    pub probes: usize,
    pub pass: bool,
}

/// Compares `U_{B*}(t) J f` on `-Omega` with `J U_B(-t) f` on a probe grid.
pub fn reflection_consistency(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    t: f64,
    f: &PiecewiseExpPoly,
    tol: f64,
) -> Result<ReflectionReport> {
    let minus = omega.reflect();
    let b_star = reflected_matrix(b);
    let lhs = apply_u_paths(&minus, &b_star, t, &f.reflect())?.function;
    let rhs = apply_u_paths(omega, b, -t, f)?.function.reflect();
    let probes = expoly::probe_points(&minus, &[&lhs, &rhs]).len();
    let max_error = expoly::max_difference(&minus, &lhs, &rhs);
    Ok(ReflectionReport { t, max_error, probes, pass: max_error < tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expoly::{inner_product, max_difference, norm};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn spectral_b() -> BoundaryMatrix {
        BoundaryMatrix::from_rows(&[vec![c(0.5, 0.5), c(0.5, -0.5)], vec![c(0.5, -0.5), c(0.5, 0.5)]]).unwrap()
    }

    fn two() -> IntervalUnion {
        IntervalUnion::new(&[(0.0, 1.0), (2.0, 3.0)]).unwrap()
    }

    fn unit() -> IntervalUnion {
        IntervalUnion::new(&[(0.0, 1.0)]).unwrap()
    }

    #[test]
    fn boundary_checks() {
        let f = PiecewiseExpPoly::exponential(&two(), 0.25);
        assert!(boundary_condition_check(&spectral_b(), &f, 1e-12));
        let bump = PiecewiseExpPoly::new(
            &two(),
            vec![vec![Atom::new(0.0, vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)])], vec![]],
        )
        .unwrap();
        assert!(boundary_condition_check(&spectral_b(), &bump, 1e-12));
        assert!(boundary_condition_check(&BoundaryMatrix::permutation(&[1, 0]).unwrap(), &bump, 1e-12));
        let ramp = PiecewiseExpPoly::new(&unit(), vec![vec![Atom::new(0.0, vec![c(0.0, 0.0), c(1.0, 0.0)])]]).unwrap();
        assert!(!boundary_condition_check(&BoundaryMatrix::identity(1), &ramp, 1e-3));
    }

    #[test]
    fn single_interval_wraps() {
        let omega = unit();
        let f = PiecewiseExpPoly::new(&omega, vec![vec![Atom::new(0.7, vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.5)])]]).unwrap();
        let r = apply_u_paths(&omega, &BoundaryMatrix::identity(1), 0.3, &f).unwrap();
        assert_eq!(r.refinement, vec![vec![0.7]]);
        for k in 0..100 {
            let x = (k as f64 + 0.5) / 100.0;
            let want = if x < 0.7 { f.eval(x + 0.3) } else { f.eval(x + 0.3 - 1.0) }.unwrap();
            assert!((r.function.eval(x).unwrap() - want).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let f = PiecewiseExpPoly::exponential(&two(), 0.3);
        assert_eq!(apply_u_paths(&two(), &spectral_b(), 0.0, &f).unwrap().function, f);
    }

    #[test]
    fn eigenfunction_phase() {
        // e_{1/4} is an eigenfunction with eigenvalue 1/4, so U(2) multiplies it by e^{i pi} = -1
        let f = PiecewiseExpPoly::exponential(&two(), 0.25);
        let r = apply_u_paths(&two(), &spectral_b(), 2.0, &f).unwrap();
        assert!(max_difference(&two(), &r.function, &f.scaled(c(-1.0, 0.0))) < 1e-12);
    }

    #[test]
    fn spectral_oracle_agrees_with_paths() {
        let omega = two();
        let b = spectral_b();
        let terms = vec![
            EigenTerm { lambda: 0.25, vector: vec![c(1.0, 0.0); 2], coeff: c(0.3, -1.2) },
            EigenTerm { lambda: -0.75, vector: vec![c(1.0, 0.0); 2], coeff: c(1.1, 0.4) },
            EigenTerm { lambda: 1.0, vector: vec![c(1.0, 0.0); 2], coeff: c(-0.2, 0.5) },
        ];
        let f = eigen_combination(&omega, &b, &terms).unwrap();
        for &t in &[2.0, -1.3, 0.4, 3.7] {
            let paths = apply_u_paths(&omega, &b, t, &f).unwrap().function;
            let spectral = apply_u_spectral(&omega, &b, &terms, t).unwrap();
            assert!(max_difference(&omega, &paths, &spectral) < 1e-10, "t = {t}");
        }
        let bad = vec![EigenTerm { lambda: 0.5, vector: vec![c(1.0, 0.0); 2], coeff: c(1.0, 0.0) }];
        assert!(matches!(apply_u_spectral(&omega, &b, &bad, 1.0), Err(Error::NotEigenCombination(_))));
    }

    #[test]
    fn unitarity_group_law_domain() {
        let omega = two();
        let b = spectral_b();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let f = random_domain_function(&omega, &b, &mut rng, &RandomFunctionOptions::default()).unwrap();
            assert!(boundary_condition_check(&b, &f, 1e-10));
            let s: f64 = rng.random_range(-2.5..2.5);
            let t: f64 = rng.random_range(-2.5..2.5);
            let ut = apply_u_paths(&omega, &b, t, &f).unwrap().function;
            assert!((norm(&ut) - norm(&f)).abs() < 1e-9);
            assert!(boundary_condition_check(&b, &ut, 1e-8));
            let ust = apply_u_paths(&omega, &b, s, &ut).unwrap().function;
            let direct = apply_u_paths(&omega, &b, s + t, &f).unwrap().function;
            assert!(max_difference(&omega, &ust, &direct) < 1e-9);
        }
    }

    #[test]
    fn norms_preserved_for_general_unitary() {
        let omega = IntervalUnion::new(&[(0.0, 0.7), (1.0, 2.1), (2.5, 3.0)]).unwrap();
        let s = 1.0 / 3.0_f64.sqrt();
        let w = cis_turns(1.0 / 3.0);
        let b = BoundaryMatrix::from_rows(&[
            vec![c(s, 0.0), c(s, 0.0), c(s, 0.0)],
            vec![c(s, 0.0), w * s, w * w * s],
            vec![c(s, 0.0), w * w * s, w * s],
        ])
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_domain_function(&omega, &b, &mut rng, &RandomFunctionOptions::default()).unwrap();
        for &t in &[0.35, 1.9, -1.2] {
            let ut = apply_u_paths(&omega, &b, t, &f).unwrap().function;
            assert!((norm(&ut) - norm(&f)).abs() < 1e-9 * norm(&f).max(1.0));
            assert!(boundary_condition_check(&b, &ut, 1e-8));
            let back = apply_u_paths(&omega, &b, -t, &ut).unwrap().function;
            assert!(max_difference(&omega, &back, &f) < 1e-9);
            let ip = inner_product(&ut, &f).unwrap();
            assert!(ip.norm() <= norm(&f).powi(2) + 1e-9);
        }
    }

    #[test]
    fn local_translations() {
        let ok = local_translation_test(&two(), &spectral_b(), 200, 1e-9, 11, Execution::Parallel).unwrap();
        assert!(ok.pass, "{ok:?}");
        let swap = BoundaryMatrix::permutation(&[1, 0]).unwrap();
        let bad = local_translation_test(&two(), &swap, 200, 1e-9, 11, Execution::Sequential).unwrap();
        assert!(!bad.pass && bad.witness.is_some());
    }

    #[test]
    fn seeded_trials_are_reproducible() {
        let a = local_translation_test(&two(), &spectral_b(), 50, 1e-9, 5, Execution::Sequential).unwrap();
        let b = local_translation_test(&two(), &spectral_b(), 50, 1e-9, 5, Execution::Parallel).unwrap();
        assert_eq!(a.max_error, b.max_error);
    }

    #[test]
    fn reflection_identity() {
        let omega = unit();
        let f = PiecewiseExpPoly::new(&omega, vec![vec![Atom::new(1.3, vec![c(1.0, 0.0), c(0.0, 2.0)])]]).unwrap();
        assert!(reflection_consistency(&omega, &BoundaryMatrix::identity(1), 0.0, &f, 1e-12).unwrap().pass);
        assert!(reflection_consistency(&omega, &BoundaryMatrix::identity(1), 0.3, &f, 1e-10).unwrap().pass);
        let g = PiecewiseExpPoly::exponential(&two(), 0.1);
        assert!(reflection_consistency(&two(), &spectral_b(), 2.0, &g, 1e-10).unwrap().pass);
        let omega = IntervalUnion::new(&[(0.0, 0.5), (1.0, 2.0)]).unwrap();
        let b = BoundaryMatrix::from_rows(&[vec![c(0.6, 0.0), c(0.0, 0.8)], vec![c(0.0, 0.8), c(0.6, 0.0)]]).unwrap();
        let r = reflection_consistency(&omega, &b, -1.3, &PiecewiseExpPoly::exponential(&omega, 0.7), 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn interior_translation_is_exact() {
        let omega = two();
        let f = PiecewiseExpPoly::exponential(&omega, 0.37);
        let v = evaluate_u_at(&omega, &spectral_b(), 0.2, &f, 0.5).unwrap();
        assert_eq!(v, f.eval_in(0, 0.7));
    }

    #[test]
    fn sums_of_lengths() {
        let s = length_sums(&[1.0, 0.5], 2.0, 1e-12).unwrap();
        assert_eq!(s, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }
}

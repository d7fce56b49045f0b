//! Orthogonality and completeness evidence for candidate spectra, and the
//! structural consequences of spectrality.

use serde::Serialize;

use crate::boundary::{self, cis_turns, is_full_cycle, jumps_outside_lattice, matrix_from_spectrum, BoundaryMatrix, MatrixStructure};
use crate::error::{Error, Result};
use crate::expoly::{self, Atom, PiecewiseExpPoly};
use crate::geometry::{CongruenceMap, IntervalUnion, TilingCertificate};
use crate::linalg::{CMatrix, C64};
use crate::paths::aggregate_equal_length;
use crate::spectrum::{spectral_matrix_check, spectrum, MatrixVerdict, ScanOptions, SpectrumReport};

/// Off-diagonal Gram modulus below which two computed frequencies count as
/// orthogonal. Root errors of `1e-10` move Gram entries by roughly
/// `2 pi diam(Omega) L 1e-10`.
pub const ORTHOGONALITY_TOL: f64 = 1e-6;

/// Symmetric window holding about `10 n` spectrum points.
pub fn default_window(omega: &IntervalUnion) -> (f64, f64) {
    let half = 5.0 * omega.len() as f64 / omega.measure();
    (-half, half)
}

/// `int_Omega e^{2 pi i s x} dx`.
pub fn exp_integral(omega: &IntervalUnion, s: f64) -> C64 {
    (0..omega.len())
        .map(|i| {
            let (a, b) = (omega.alpha(i), omega.beta(i));
            let l = b - a;
            let u = s * l;
            let sinc = if u.abs() < 1e-8 { 1.0 - (std::f64::consts::PI * u).powi(2) / 6.0 } else {
                (std::f64::consts::PI * u).sin() / (std::f64::consts::PI * u)
            };
            cis_turns(0.5 * s * (a + b)) * (l * sinc)
        })
        .sum()
}

/// `G[k][l] = <e_{lambda_k}, e_{lambda_l}>` on `L^2(Omega)`.
pub fn exp_gram(omega: &IntervalUnion, lambdas: &[f64]) -> CMatrix {
    let m = lambdas.len();
    let mut g = CMatrix::zeros(m, m);
    for k in 0..m {
        g[(k, k)] = C64::new(omega.measure(), 0.0);
        for l in k + 1..m {
            let v = exp_integral(omega, lambdas[k] - lambdas[l]);
            g[(k, l)] = v;
            g[(l, k)] = v.conj();
        }
    }
    g
}

/// Largest off-diagonal modulus and where it occurs.
fn max_off_diagonal(g: &CMatrix) -> (f64, Option<(usize, usize)>) {
    let mut best = (0.0, None);
    for k in 0..g.rows() {
        for l in k + 1..g.cols() {
            let v = g[(k, l)].norm();
            if v > best.0 {
                best = (v, Some((k, l)));
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// One named pass/fail result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
    /// Named numbers supporting the outcome.
    pub witness: Vec<(String, f64)>,
}

impl Check {
    pub fn new(name: &'static str, pass: bool, detail: impl Into<String>) -> Self {
        let status = if pass { CheckStatus::Pass } else { CheckStatus::Fail };
        Check { name, status, detail: detail.into(), witness: Vec::new() }
    }

    pub fn skipped(name: &'static str, reason: impl Into<String>) -> Self {
        Check { name, status: CheckStatus::Skipped, detail: reason.into(), witness: Vec::new() }
    }

    pub fn with(mut self, key: impl Into<String>, value: f64) -> Self {
        self.witness.push((key.into(), value));
        self
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }
}

pub fn find<'a>(checks: &'a [Check], name: &str) -> Option<&'a Check> {
    checks.iter().find(|c| c.name == name)
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralVerdict {
    pub window: (f64, f64),
    pub points: usize,
    pub orthogonal_on_window: bool,
    pub max_off_diagonal: f64,
    /// `#(Lambda ∩ window) / (L |window|)`.
    pub density_ratio: f64,
    /// Worst relative `(||f||^2 - sum |<f, e_lambda>|^2 / L) / ||f||^2` over
    /// the probes. Only meaningful relative to the window size.
    pub parseval_residual: f64,
    pub parseval_residuals: Vec<f64>,
    pub structural_flags: Vec<Check>,
}

fn bump_atom(omega: &IntervalUnion, i: usize) -> Atom {
    let (a, b) = (omega.alpha(i), omega.beta(i));
    let left = expoly::poly_mul(&[C64::new(-a, 0.0), C64::new(1.0, 0.0)], &[C64::new(-a, 0.0), C64::new(1.0, 0.0)]);
    let right = expoly::poly_mul(&[C64::new(b, 0.0), C64::new(-1.0, 0.0)], &[C64::new(b, 0.0), C64::new(-1.0, 0.0)]);
    Atom::new(0.0, expoly::poly_mul(&left, &right))
}

/// `(x - alpha_i)^2 (beta_i - x)^2` on every interval. It vanishes at all
/// endpoints, so it lies in the domain for every `B`.
pub fn bump(omega: &IntervalUnion) -> PiecewiseExpPoly {
    PiecewiseExpPoly::new(omega, (0..omega.len()).map(|k| vec![bump_atom(omega, k)]).collect()).expect("degree 4 atoms")
}

/// The bump on each interval in turn, plus [`bump`] itself.
pub fn default_probes(omega: &IntervalUnion) -> Result<Vec<PiecewiseExpPoly>> {
    let mut probes = Vec::new();
    for i in 0..omega.len() {
        let atoms = (0..omega.len()).map(|k| if k == i { vec![bump_atom(omega, k)] } else { Vec::new() }).collect();
        probes.push(PiecewiseExpPoly::new(omega, atoms)?);
    }
    if omega.len() > 1 {
        probes.push(bump(omega));
    }
    Ok(probes)
}

/// Finite-window evidence that `lambdas` is a spectrum for `Omega`.
///
/// Empty `probes` selects [`default_probes`].
pub fn spectral_pair_evidence(
    omega: &IntervalUnion,
    window: (f64, f64),
    lambdas: &[f64],
    probes: &[PiecewiseExpPoly],
    tol: f64,
) -> Result<SpectralVerdict> {
    let (lo, hi) = window;
    if !(hi > lo) {
        return Err(Error::InvalidArgument(format!("window [{lo}, {hi}] is empty")));
    }
    let mut inside: Vec<f64> = lambdas.iter().copied().filter(|&l| l >= lo && l <= hi).collect();
    inside.sort_by(f64::total_cmp);
    let l = omega.measure();
    let gram = exp_gram(omega, &inside);
    let (max_off, at) = max_off_diagonal(&gram);
    let orthogonal = max_off < tol;
    let density_ratio = inside.len() as f64 / (l * (hi - lo));

    let defaults;
    let probes = if probes.is_empty() {
        defaults = default_probes(omega)?;
        &defaults[..]
    } else {
        probes
    };
    let exps: Vec<PiecewiseExpPoly> = inside.iter().map(|&lam| PiecewiseExpPoly::exponential(omega, lam)).collect();
    let mut raw = Vec::with_capacity(probes.len());
    for f in probes {
        let total = expoly::norm(f).powi(2);
        let mut captured = 0.0;
        for e in &exps {
            captured += expoly::inner_product(f, e)?.norm_sqr() / l;
        }
        raw.push(if total > 0.0 { (total - captured) / total } else { 0.0 });
    }
    // an orthogonal family never captures more than the norm
    let bessel_excess = raw.iter().copied().fold(0.0, |m: f64, r| m.max(-r));
    let residuals: Vec<f64> = raw.iter().map(|r| r.max(0.0)).collect();
    let parseval = residuals.iter().copied().fold(0.0, f64::max);

    let mut orth = Check::new(
        "orthogonality",
        orthogonal,
        format!("max off-diagonal Gram modulus {max_off:.3e} (tolerance {tol:.1e})"),
    )
    .with("max_off_diagonal", max_off);
    if let Some((k, m)) = at {
        orth = orth.with("lambda_k", inside[k]).with("lambda_l", inside[m]);
    }
    // boundary effects can cost up to n points at each window edge
    let slack = omega.len() as f64 + 1.0;
    let expected = l * (hi - lo);
    let density = Check::new(
        "density",
        (inside.len() as f64 - expected).abs() <= slack,
        format!("{} points against L * width = {expected:.3}", inside.len()),
    )
    .with("density_ratio", density_ratio);
    let pars = Check::new(
        "parseval",
        bessel_excess <= 1e-9,
        format!(
            "worst relative Parseval residual {parseval:.3e} over {} probes on this window; Bessel excess {bessel_excess:.3e}",
            probes.len()
        ),
    )
    .with("parseval_residual", parseval)
    .with("bessel_excess", bessel_excess);

    Ok(SpectralVerdict {
        window,
        points: inside.len(),
        orthogonal_on_window: orthogonal,
        max_off_diagonal: max_off,
        density_ratio,
        parseval_residual: parseval,
        parseval_residuals: residuals,
        structural_flags: vec![orth, density, pars],
    })
}

/// One step of the chain carrying `Omega` onto `(alpha_1, alpha_1 + L)`: the
/// interval placed at the running right end and its total shift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStep {
    pub interval: usize,
    pub shift: f64,
    /// `shift / L`.
    pub multiple: f64,
    pub in_lattice: bool,
    pub image: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CongruenceChain {
    pub steps: Vec<ChainStep>,
    pub final_interval: (f64, f64),
    pub final_measure: f64,
    /// All intervals were visited, so the images tile `final_interval`.
    pub covers_all: bool,
    pub shifts_in_lattice: bool,
}

impl CongruenceChain {
    pub fn holds(&self) -> bool {
        self.covers_all && self.shifts_in_lattice
    }
}

/// Places `sigma(1), sigma^2(1), ...` after interval 1 in turn.
pub fn congruence_chain(omega: &IntervalUnion, sigma: &[usize], tol: f64) -> CongruenceChain {
    let l = omega.measure();
    let tol = tol.max(omega.tol());
    let lattice = |shift: f64| {
        let m = shift / l;
        (m, (m - m.round()).abs() * l <= tol)
    };
    let mut steps = vec![ChainStep { interval: 0, shift: 0.0, multiple: 0.0, in_lattice: true, image: (omega.alpha(0), omega.beta(0)) }];
    let mut end = omega.beta(0);
    let mut k = sigma.first().copied().unwrap_or(0);
    while k != 0 && steps.len() < sigma.len() {
        let shift = end - omega.alpha(k);
        let (multiple, in_lattice) = lattice(shift);
        let image = (end, end + omega.length(k));
        steps.push(ChainStep { interval: k, shift, multiple, in_lattice, image });
        end = image.1;
        k = sigma[k];
    }
    let covers_all = steps.len() == omega.len() && k == 0;
    CongruenceChain {
        shifts_in_lattice: steps.iter().all(|s| s.in_lattice),
        final_interval: (omega.alpha(0), end),
        final_measure: end - omega.alpha(0),
        covers_all,
        steps,
    }
}

/// Comparison of computed frequencies with `period * (Z + offset)` on a window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeMatch {
    pub period: f64,
    pub offset: f64,
    pub expected: usize,
    pub found: usize,
    pub max_error: f64,
    pub matches: bool,
}

/// Matches `lambdas` against `{period * (k + offset)}` inside `window`, ignoring
/// lattice points within `edge` of the window ends.
pub fn match_lattice(lambdas: &[f64], period: f64, offset: f64, window: (f64, f64), tol: f64) -> LatticeMatch {
    let edge = 1e-7;
    let (lo, hi) = window;
    let k0 = (lo / period - offset).floor() as i64 - 1;
    let k1 = (hi / period - offset).ceil() as i64 + 1;
    let mut expected = 0;
    let mut max_error: f64 = 0.0;
    let mut matches = true;
    let mut used = vec![false; lambdas.len()];
    for k in k0..=k1 {
        let p = period * (k as f64 + offset);
        if p < lo - edge || p > hi + edge {
            continue;
        }
        let near_edge = (p - lo).abs() <= edge || (p - hi).abs() <= edge;
        let hit = lambdas
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .min_by(|a, b| (a.1 - p).abs().total_cmp(&(b.1 - p).abs()));
        match hit {
            Some((i, &lam)) if (lam - p).abs() <= tol => {
                used[i] = true;
                max_error = max_error.max((lam - p).abs());
                expected += 1;
            }
            _ if near_edge => {}
            _ => {
                expected += 1;
                matches = false;
            }
        }
    }
    if used.iter().any(|u| !u) {
        matches = false;
    }
    LatticeMatch { period, offset, expected, found: lambdas.len(), max_error, matches }
}

/// Every positive gap `alpha_j - beta_i` must be a sum of interval lengths,
/// whatever `B` is. A failure rules out spectrality for every boundary matrix.
pub fn gap_criterion(omega: &IntervalUnion, tol: f64) -> Result<Check> {
    let n = omega.len();
    let len_tol = tol.max(omega.tol());
    let mut bad_gap = None;
    let mut gaps = 0;
    for i in 0..n {
        for j in 0..n {
            let gap = omega.alpha(j) - omega.beta(i);
            if i == j || gap <= len_tol {
                continue;
            }
            gaps += 1;
            if omega.gap_decomposition(gap, len_tol)?.is_empty() && bad_gap.is_none() {
                bad_gap = Some((i, j, gap));
            }
        }
    }
    Ok(match bad_gap {
        None => Check::new("gap_criterion", true, format!("all {gaps} positive gaps are sums of interval lengths")),
        Some((i, j, gap)) => Check::new(
            "gap_criterion",
            false,
            format!("gap alpha_{} - beta_{} = {gap} is not a sum of interval lengths; Omega is not spectral for any B", j + 1, i + 1),
        )
        .with("gap", gap)
        .with("min_length", omega.min_length()),
    })
}

fn unimodular(z: C64, tol: f64) -> bool {
    (z.norm() - 1.0).abs() < tol
}

fn not_spectral(verdict: &MatrixVerdict, detail: String) -> Error {
    let witness = verdict.witness().unwrap_or(f64::NAN);
    let detail = match verdict {
        MatrixVerdict::Undecided { reason } => format!("{reason}; {detail}"),
        MatrixVerdict::NotSpectral { dimension, .. } => format!("eigenspace of dimension {dimension} is not spanned by constants; {detail}"),
        _ => detail,
    };
    Error::NotSpectral { witness, detail }
}

/// Necessary conditions on `(Omega, B)` implied by spectrality, each reported
/// by name. `spectrum` and `verdict` come from the spectrum solver for the
/// same pair. Checks that assume spectrality are skipped when `verdict` is not
/// spectral.
pub fn structure_suite(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    spectrum: &SpectrumReport,
    verdict: &MatrixVerdict,
    tol: f64,
) -> Result<Vec<Check>> {
    if b.size() != omega.len() {
        return Err(Error::DimensionMismatch { what: "boundary matrix", got: b.size(), expected: omega.len() });
    }
    let n = omega.len();
    let len_tol = tol.max(omega.tol());
    let lambdas = spectrum.lambdas();
    let spectral = verdict.is_spectral();
    let skip = |name| Check::skipped(name, "boundary matrix is not spectral");
    let mut checks = Vec::new();

    checks.push(gap_criterion(omega, len_tol)?);

    let adjacent: Vec<usize> = (0..n.saturating_sub(1)).filter(|&i| (omega.alpha(i + 1) - omega.beta(i)).abs() <= len_tol).collect();
    checks.push(if !spectral {
        skip("adjacency")
    } else if adjacent.is_empty() {
        Check::skipped("adjacency", "no two intervals share an endpoint")
    } else {
        let mut worst: f64 = 0.0;
        for &i in &adjacent {
            for k in 0..n {
                let want = if k == i + 1 { 1.0 } else { 0.0 };
                worst = worst.max((b.entry(i, k) - want).norm());
                if k != i {
                    worst = worst.max(b.entry(k, i + 1).norm());
                }
            }
        }
        Check::new("adjacency", worst < tol, format!("{} shared endpoints; deviation from the forced pattern {worst:.3e}", adjacent.len()))
            .with("max_deviation", worst)
    });

    let lmin = omega.min_length();
    let minimal: Vec<usize> = (0..n.saturating_sub(1)).filter(|&i| (omega.alpha(i + 1) - omega.beta(i) - lmin).abs() <= len_tol).collect();
    checks.push(if !spectral {
        skip("minimal_gap")
    } else if minimal.is_empty() {
        Check::skipped("minimal_gap", "no gap equals the minimal length")
    } else {
        let mut worst: f64 = 0.0;
        for &i in &minimal {
            let mut sum = C64::new(0.0, 0.0);
            for j in 0..n {
                if (omega.length(j) - lmin).abs() <= len_tol {
                    sum += b.entry(i, j) * b.entry(j, i + 1);
                } else {
                    worst = worst.max(b.entry(i, j).norm()).max(b.entry(j, i + 1).norm());
                }
            }
            worst = worst.max((sum - C64::new(1.0, 0.0)).norm());
        }
        Check::new("minimal_gap", worst < tol, format!("{} gaps equal to l_min; worst deviation {worst:.3e}", minimal.len()))
            .with("max_deviation", worst)
    });

    checks.push(if !spectral {
        skip("diagonal")
    } else if n < 2 {
        Check::skipped("diagonal", "needs at least two intervals")
    } else {
        let (k, m) = (0..n).map(|k| (k, b.entry(k, k).norm())).max_by(|a, b| a.1.total_cmp(&b.1)).expect("n >= 2");
        Check::new("diagonal", m < 1.0 - tol, format!("largest |b_kk| = {m:.6} at k = {}", k + 1)).with("max_diagonal_modulus", m)
    });

    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| i != j && unimodular(b.entry(i, j), tol)).collect();
    checks.push(if !spectral {
        skip("unimodular_entry")
    } else if pairs.iter().all(|&(i, j)| (omega.alpha(j) - omega.beta(i)).abs() <= len_tol) {
        Check::skipped("unimodular_entry", "no unimodular off-diagonal entry across a gap")
    } else {
        let mut worst: f64 = 0.0;
        let mut witness = (f64::NAN, 0, 0);
        let mut overlapping = None;
        for &(i, j) in &pairs {
            let a = omega.alpha(j) - omega.beta(i);
            if a.abs() <= len_tol {
                continue;
            }
            let theta0 = b.entry(i, j).arg() / std::f64::consts::TAU;
            for &lam in &lambdas {
                let v = lam * a + theta0;
                let d = (v - v.round()).abs();
                if d > worst {
                    worst = d;
                    witness = (lam, i, j);
                }
            }
            if !omega.translates_disjoint(a)? && overlapping.is_none() {
                overlapping = Some(a);
            }
        }
        let pass = worst < tol.max(ORTHOGONALITY_TOL) && overlapping.is_none();
        let mut c = Check::new(
            "unimodular_entry",
            pass,
            match overlapping {
                Some(a) => format!("translates of Omega by multiples of {a} overlap"),
                None => format!("spectrum lies on the predicted lattices to {worst:.3e}"),
            },
        )
        .with("max_lattice_distance", worst);
        if worst > 0.0 {
            c = c.with("lambda", witness.0).with("row", (witness.1 + 1) as f64).with("col", (witness.2 + 1) as f64);
        }
        c
    });

    checks.push(if !spectral {
        skip("interval_move")
    } else if pairs.is_empty() {
        Check::skipped("interval_move", "no unimodular off-diagonal entry")
    } else {
        interval_move_check(omega, &pairs, spectrum)?
    });

    let structure = b.classify_structure(tol.max(boundary::UNITARY_TOL)).structure;
    checks.push(match (spectral, structure.sigma()) {
        (false, _) => skip("congruence_chain"),
        (true, None) => Check::skipped("congruence_chain", "matrix is not a (weighted) permutation"),
        (true, Some(sigma)) => {
            let chain = congruence_chain(omega, sigma, tol);
            Check::new(
                "congruence_chain",
                chain.holds(),
                format!(
                    "{} steps, shifts in L Z: {}, final interval ({}, {})",
                    chain.steps.len(),
                    chain.shifts_in_lattice,
                    chain.final_interval.0,
                    chain.final_interval.1
                ),
            )
            .with("final_measure", chain.final_measure)
        }
    });
    Ok(checks)
}

fn interval_move_check(omega: &IntervalUnion, pairs: &[(usize, usize)], report: &SpectrumReport) -> Result<Check> {
    let lambdas = report.lambdas();
    let mut worst_gram: f64 = 0.0;
    let mut worst_spec: f64 = 0.0;
    let mut moves = 0;
    for &(i, j) in pairs {
        let moved = match omega.move_interval(j, i) {
            Ok(m) => m,
            Err(Error::MoveCollision { hit, .. }) => {
                return Ok(Check::new(
                    "interval_move",
                    false,
                    format!("moving interval {} after interval {} hits interval {}", j + 1, i + 1, hit + 1),
                ));
            }
            Err(e) => return Err(e),
        };
        moves += 1;
        worst_gram = worst_gram.max(max_off_diagonal(&exp_gram(&moved, &lambdas)).0);
        let b_moved = match matrix_from_spectrum(&moved, &lambdas, ORTHOGONALITY_TOL) {
            Ok(bm) => bm,
            Err(e) => {
                return Ok(Check::new(
                    "interval_move",
                    false,
                    format!("no boundary matrix on the moved set fits the spectrum: {e}"),
                ));
            }
        };
        let again = spectrum(&moved, &b_moved, report.window, &ScanOptions::default())?;
        let m = match_lattice_set(&again.lambdas(), &lambdas, report.window);
        worst_spec = worst_spec.max(m);
    }
    Ok(Check::new(
        "interval_move",
        worst_gram < ORTHOGONALITY_TOL && worst_spec < ORTHOGONALITY_TOL,
        format!("{moves} moves; Gram off-diagonal {worst_gram:.3e}, spectrum round-trip error {worst_spec:.3e}"),
    )
    .with("max_off_diagonal", worst_gram)
    .with("spectrum_error", worst_spec))
}

/// Hausdorff distance between two frequency sets, ignoring points near the
/// window ends.
fn match_lattice_set(a: &[f64], b: &[f64], window: (f64, f64)) -> f64 {
    let edge = 1e-7;
    let inner = |x: &f64| *x > window.0 + edge && *x < window.1 - edge;
    let dist = |x: f64, set: &[f64]| set.iter().map(|y| (x - y).abs()).fold(f64::INFINITY, f64::min);
    let ab = a.iter().filter(|x| inner(x)).map(|&x| dist(x, b)).fold(0.0, f64::max);
    let ba = b.iter().filter(|x| inner(x)).map(|&x| dist(x, a)).fold(0.0, f64::max);
    ab.max(ba)
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiplicativeReport {
    pub sigma: Vec<usize>,
    pub full_cycle: bool,
    pub spectrum: LatticeMatch,
    pub tiling: TilingCertificate,
    pub chain: CongruenceChain,
    pub congruence: Option<CongruenceMap>,
    pub pass: bool,
}

fn require_spectral(omega: &IntervalUnion, b: &BoundaryMatrix, window: (f64, f64), opts: &ScanOptions, extra: impl FnOnce() -> String) -> Result<()> {
    let verdict = spectral_matrix_check(omega, b, window, opts)?;
    if verdict.is_spectral() {
        Ok(())
    } else {
        Err(not_spectral(&verdict, extra()))
    }
}

/// For a spectral permutation matrix: `sigma` is an `n`-cycle, the spectrum is
/// `(1/L) Z`, `Omega` tiles by `L Z`, and the interval chain reaches
/// `(alpha_1, alpha_1 + L)` with shifts in `L Z`.
pub fn multiplicative_spectral_suite(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    window: (f64, f64),
    opts: &ScanOptions,
    tol: f64,
) -> Result<MultiplicativeReport> {
    let sigma = match b.classify_structure(tol.max(boundary::UNITARY_TOL)).structure {
        MatrixStructure::Permutation { sigma } => sigma,
        other => return Err(Error::WrongStructure(format!("expected a permutation matrix, found {}", kind(&other)))),
    };
    let l = omega.measure();
    require_spectral(omega, b, window, opts, || {
        let chain = congruence_chain(omega, &sigma, tol);
        format!("{} jumps outside L Z; chain covers all intervals: {}", jumps_outside_lattice(&sigma, omega, tol.max(omega.tol())).len(), chain.covers_all)
    })?;
    let report = spectrum(omega, b, window, opts)?;
    let matched = match_lattice(&report.lambdas(), 1.0 / l, 0.0, window, 1e-8);
    let tiling = omega.tiles_by_lattice(l, tol.max(omega.tol()))?;
    let chain = congruence_chain(omega, &sigma, tol);
    let congruence = omega.translation_congruence_to_interval(l, tol.max(omega.tol()))?;
    let full_cycle = is_full_cycle(&sigma);
    let pass = full_cycle && matched.matches && tiling.tiles && chain.holds();
    Ok(MultiplicativeReport { sigma, full_cycle, spectrum: matched, tiling, chain, congruence, pass })
}

fn kind(s: &MatrixStructure) -> &'static str {
    match s {
        MatrixStructure::Permutation { .. } => "a permutation matrix",
        MatrixStructure::WeightedPermutation { .. } => "a weighted permutation matrix",
        MatrixStructure::General => "a general unitary",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ForelliReport {
    pub sigma: Vec<usize>,
    pub weights: Vec<C64>,
    /// In `[0, 1)`, from `Lambda = (1/L)(Z - theta0)`.
    pub theta0: f64,
    pub theta_spread: f64,
    pub weight_errors: Vec<f64>,
    pub max_weight_error: f64,
    /// `alpha_sigma(i) - beta_i`.
    pub jumps: Vec<f64>,
    pub jumps_in_lattice: bool,
    pub spectrum: LatticeMatch,
    pub tiling: TilingCertificate,
    pub chain: CongruenceChain,
    pub pass: bool,
}

/// Recovers `theta0` from `Lambda ⊂ (1/L)(Z - theta0)` by a circular mean.
/// Returns `(theta0, spread)`.
pub fn theta_from_spectrum(lambdas: &[f64], l: f64) -> Option<(f64, f64)> {
    if lambdas.is_empty() {
        return None;
    }
    let thetas: Vec<f64> = lambdas.iter().map(|&lam| (-l * lam).rem_euclid(1.0)).collect();
    let mean: C64 = thetas.iter().map(|&t| cis_turns(t)).sum();
    let theta0 = (mean.arg() / std::f64::consts::TAU).rem_euclid(1.0);
    let spread = thetas
        .iter()
        .map(|&t| {
            let d = t - theta0;
            (d - d.round()).abs()
        })
        .fold(0.0, f64::max);
    Some((theta0, spread))
}

/// For a spectral weighted permutation matrix: weights follow
/// `b_{i,sigma(i)} = e^{2 pi i (theta0/L)(alpha_sigma(i) - beta_i)}`, the jumps
/// lie in `L Z`, `Lambda = (1/L)(Z - theta0)`, `Omega` tiles by `L Z`, and the
/// interval chain holds. A plain permutation is the case `theta0 = 0`.
pub fn forelli_spectral_suite(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    window: (f64, f64),
    opts: &ScanOptions,
    tol: f64,
) -> Result<ForelliReport> {
    let (sigma, weights) = match b.classify_structure(tol.max(boundary::UNITARY_TOL)).structure {
        MatrixStructure::WeightedPermutation { sigma, weights } => (sigma, weights),
        MatrixStructure::Permutation { sigma } => {
            let w = vec![C64::new(1.0, 0.0); sigma.len()];
            (sigma, w)
        }
        MatrixStructure::General => return Err(Error::WrongStructure("expected a weighted permutation matrix, found a general unitary".into())),
    };
    let l = omega.measure();
    let lat_tol = tol.max(omega.tol());
    let jumps: Vec<f64> = sigma.iter().enumerate().map(|(i, &j)| omega.alpha(j) - omega.beta(i)).collect();
    require_spectral(omega, b, window, opts, || {
        let off: Vec<String> = jumps_outside_lattice(&sigma, omega, lat_tol).iter().map(|(i, jump)| format!("jump {jump} from interval {} is not in {l} Z", i + 1)).collect();
        if off.is_empty() { "all jumps lie in L Z".into() } else { off.join(", ") }
    })?;
    let report = spectrum(omega, b, window, opts)?;
    let lambdas = report.lambdas();
    let (theta0, theta_spread) = theta_from_spectrum(&lambdas, l)
        .ok_or_else(|| Error::NotSpectral { witness: f64::NAN, detail: "no spectrum points in the window".into() })?;
    if theta_spread > 1e-6 {
        return Err(Error::InconsistentTheta { spread: theta_spread });
    }
    let weight_errors: Vec<f64> =
        (0..sigma.len()).map(|i| (weights[i] - cis_turns(theta0 / l * jumps[i])).norm()).collect();
    let max_weight_error = weight_errors.iter().copied().fold(0.0, f64::max);
    let jumps_in_lattice = jumps_outside_lattice(&sigma, omega, lat_tol).is_empty();
    let matched = match_lattice(&lambdas, 1.0 / l, -theta0, window, 1e-8);
    let tiling = omega.tiles_by_lattice(l, lat_tol)?;
    let chain = congruence_chain(omega, &sigma, tol);
    let pass = max_weight_error < tol.max(1e-10) && jumps_in_lattice && matched.matches && tiling.tiles && chain.holds();
    Ok(ForelliReport {
        sigma,
        weights,
        theta0,
        theta_spread,
        weight_errors,
        max_weight_error,
        jumps,
        jumps_in_lattice,
        spectrum: matched,
        tiling,
        chain,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerCondition {
    /// `t0` is a multiplicative time.
    Multiplicative,
    /// `t0` is a Forelli time.
    Forelli,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerReport {
    pub ell: f64,
    pub t0: f64,
    /// `(p - 1) l < t0 <= p l`.
    pub p: u32,
    pub condition: PowerCondition,
    pub power_structure: MatrixStructure,
    /// Whether `B^p` has the structure the condition forces.
    pub necessary_condition_holds: bool,
    pub conclusion: String,
    /// Worst gap between path coefficients and rows of `B^p`.
    pub aggregate_max_difference: f64,
}

/// Classifies `B^p` for `p = ceil(t0 / l)`. If `t0` is a multiplicative time
/// `B^p` must be a permutation; for a Forelli time a weighted permutation.
pub fn equal_length_power_suite(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    t0: f64,
    condition: PowerCondition,
    tol: f64,
) -> Result<PowerReport> {
    let ell = omega.common_length().ok_or(Error::NotEqualLength)?;
    if !(t0 > 0.0) || !t0.is_finite() {
        return Err(Error::InvalidArgument(format!("t0 must be positive, got {t0}")));
    }
    let ratio = t0 / ell;
    let p = ((ratio - 1e-12).ceil() as u32).max(1);
    let power = b.power(p);
    let power_structure = power.classify_structure(tol.max(boundary::UNITARY_TOL)).structure;
    let holds = match condition {
        PowerCondition::Multiplicative => matches!(power_structure, MatrixStructure::Permutation { .. }),
        PowerCondition::Forelli => !matches!(power_structure, MatrixStructure::General),
    };
    let label = match condition {
        PowerCondition::Multiplicative => "T_B",
        PowerCondition::Forelli => "F_B",
    };
    let conclusion = if holds {
        format!("B^{p} is {}; the necessary condition for t0 = {t0} in {label} holds", kind(&power_structure))
    } else {
        format!("B^{p} is {}; t0 = {t0} cannot be in {label}", kind(&power_structure))
    };
    // any x in interval i with 0 < beta_i - x < t0 - (p - 1) l
    let d = 0.5 * (t0 - (p as f64 - 1.0) * ell).min(ell);
    let mut aggregate_max_difference: f64 = 0.0;
    for i in 0..omega.len() {
        let x = omega.beta(i) - d;
        let agg = aggregate_equal_length(omega, b, x, t0 - 1e-9 * ell * (ratio == p as f64) as u8 as f64, p)?;
        aggregate_max_difference = aggregate_max_difference.max(agg.max_difference);
    }
    Ok(PowerReport {
        ell,
        t0,
        p,
        condition,
        power_structure,
        necessary_condition_holds: holds,
        conclusion,
        aggregate_max_difference,
    })
}

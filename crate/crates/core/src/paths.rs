//! Admissible paths for the unitary group `U(t)`.
//!
//! For `t > 0` a point `x` in interval `i` runs right, leaves through `beta_i`
//! and splits into every interval `j` at `alpha_j` with weight `b[i][j]`; it
//! keeps running until the time budget is spent. For `t < 0` it runs left,
//! leaves through left endpoints and re-enters at right endpoints with the
//! adjoint weights `conj(b[j][i])`.

use serde::Serialize;

use crate::boundary::BoundaryMatrix;
use crate::error::{Error, Result};
use crate::geometry::IntervalUnion;
use crate::linalg::{C64, ONE};

/// Default bound on the number of enumerated paths.
pub const DEFAULT_PATH_CAP: usize = 1_000_000;
/// Environment variable overriding [`DEFAULT_PATH_CAP`].
pub const PATH_CAP_ENV: &str = "SPECTRAL_INTERVALS_MAX_PATHS";

/// The path cap, honouring `SPECTRAL_INTERVALS_MAX_PATHS` when it parses.
pub fn path_cap() -> usize {
    std::env::var(PATH_CAP_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_PATH_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    /// Interval indices `i_1 ... i_m`, 0-based.
    pub word: Vec<usize>,
    pub direction: Direction,
    /// `0 <= r < l_{i_m}`.
    pub remainder: f64,
    pub end: f64,
    pub weight: C64,
}

impl Path {
    pub fn last(&self) -> usize {
        *self.word.last().expect("paths are non-empty")
    }
}

/// `n^(ceil(|t| / lmin) + 1)`, an upper bound on `|P_{x,t}|`.
pub fn path_count_estimate(omega: &IntervalUnion, t: f64) -> f64 {
    (omega.len() as f64).powf((t.abs() / omega.min_length()).ceil() + 1.0)
}

/// `n^(floor(|t| / lmax) - 1)`, a lower bound on `|P_{x,t}|` for every `x`:
/// each level of the walk spends at most `lmax` and branches `n` ways.
pub fn path_count_lower_bound(omega: &IntervalUnion, t: f64) -> f64 {
    (omega.len() as f64).powf((t.abs() / omega.max_length()).floor() - 1.0)
}

/// Fails when every point has more than `cap` paths.
pub(crate) fn precheck_cap(omega: &IntervalUnion, t: f64, cap: usize) -> Result<()> {
    let lower = path_count_lower_bound(omega, t);
    if lower > cap as f64 {
        return Err(Error::GuardExceeded {
            what: "admissible paths",
            count: lower.min(usize::MAX as f64) as usize,
            cap,
            estimate: path_count_estimate(omega, t),
        });
    }
    Ok(())
}

/// Comparison slack for the half-open admissibility test.
fn snap_eps(omega: &IntervalUnion) -> f64 {
    1e-12 * omega.scale()
}

/// Enumerates `P_{x,t}` with the cap from [`path_cap`].
pub fn enumerate_paths(omega: &IntervalUnion, b: &BoundaryMatrix, x: f64, t: f64) -> Result<Vec<Path>> {
    enumerate_paths_capped(omega, b, x, t, path_cap())
}

pub fn enumerate_paths_capped(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    x: f64,
    t: f64,
    cap: usize,
) -> Result<Vec<Path>> {
    if b.size() != omega.len() {
        return Err(Error::DimensionMismatch { what: "boundary matrix", got: b.size(), expected: omega.len() });
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t = {t} is not finite")));
    }
    let i = omega.locate(x).ok_or(Error::XNotInOmega { x })?;
    precheck_cap(omega, t, cap)?;
    let eps = snap_eps(omega);
    let forward = t >= 0.0;
    let direction = if forward { Direction::Forward } else { Direction::Backward };
    let tau = t.abs();
    let exit = if forward { omega.beta(i) - x } else { x - omega.alpha(i) };

    if tau < exit - eps {
        let remainder = if forward { x + t - omega.alpha(i) } else { omega.beta(i) - (x + t) };
        return Ok(vec![Path { word: vec![i], direction, remainder, end: x + t, weight: ONE }]);
    }

    let weight = |from: usize, to: usize| -> C64 {
        if forward {
            b.entry(from, to)
        } else {
            b.entry(to, from).conj()
        }
    };
    let s = (tau - exit).max(0.0);
    let lengths = omega.lengths();
    let mut out = Vec::new();
    let mut word = vec![i];
    walk(omega, &lengths, &weight, s, 0.0, ONE, &mut word, direction, eps, cap, t, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    omega: &IntervalUnion,
    lengths: &[f64],
    weight: &dyn Fn(usize, usize) -> C64,
    s: f64,
    spent: f64,
    acc: C64,
    word: &mut Vec<usize>,
    direction: Direction,
    eps: f64,
    cap: usize,
    t: f64,
    out: &mut Vec<Path>,
) -> Result<()> {
    let from = *word.last().expect("word starts with i_1");
    for (k, &lk) in lengths.iter().enumerate() {
        let w = acc * weight(from, k);
        word.push(k);
        if s < spent + lk - eps {
            if out.len() >= cap {
                return Err(Error::GuardExceeded {
                    what: "admissible paths",
                    count: out.len() + 1,
                    cap,
                    estimate: path_count_estimate(omega, t),
                });
            }
            let remainder = (s - spent).max(0.0);
            let end = match direction {
                Direction::Forward => omega.alpha(k) + remainder,
                Direction::Backward => omega.beta(k) - remainder,
            };
            out.push(Path { word: word.clone(), direction, remainder, end, weight: w });
        } else {
            walk(omega, lengths, weight, s, spent + lk, w, word, direction, eps, cap, t, out)?;
        }
        word.pop();
    }
    Ok(())
}

/// Sum of path weights sharing one end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndSum {
    pub end: f64,
    pub sum: C64,
    pub paths: usize,
    /// Spread of the merged analytic ends.
    pub spread: f64,
    /// Ends closer than the merge tolerance but not equal to rounding
    /// accuracy were merged.
    pub flagged: bool,
}

/// Groups paths by end, merging ends within `1e-9 max(1, |alpha_1|, |beta_n|)`.
pub fn path_sum_by_end(omega: &IntervalUnion, paths: &[Path]) -> Vec<EndSum> {
    let merge = omega.tol();
    let exact = 1e-12 * omega.scale();
    let mut sorted: Vec<&Path> = paths.iter().collect();
    sorted.sort_by(|a, b| a.end.total_cmp(&b.end));
    let mut out: Vec<EndSum> = Vec::new();
    let mut first = f64::NAN;
    for p in sorted {
        match out.last_mut() {
            Some(g) if p.end - first <= merge => {
                g.sum += p.weight;
                g.paths += 1;
                g.spread = p.end - first;
                g.flagged = g.spread > exact;
            }
            _ => {
                first = p.end;
                out.push(EndSum { end: p.end, sum: p.weight, paths: 1, spread: 0.0, flagged: false });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalTranslationReport {
    pub x: f64,
    pub t: f64,
    pub target: f64,
    pub target_present: bool,
    /// Sum at the end `x + t`; should be `1`.
    pub target_sum: C64,
    /// Sums at all other ends; should vanish.
    pub other_sums: Vec<EndSum>,
    pub max_error: f64,
    pub pass: bool,
}

/// Checks that the weights ending at `x + t` add up to `1` and those ending
/// anywhere else cancel.
pub fn local_translation_identities(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    x: f64,
    t: f64,
    tol: f64,
) -> Result<LocalTranslationReport> {
    omega.locate(x).ok_or(Error::XNotInOmega { x })?;
    let target = x + t;
    omega.locate(target).ok_or(Error::XPlusTNotInOmega { y: target })?;
    let paths = enumerate_paths(omega, b, x, t)?;
    let sums = path_sum_by_end(omega, &paths);
    let hit = sums.iter().position(|g| (g.end - target).abs() <= omega.tol());
    let target_sum = hit.map_or(C64::new(0.0, 0.0), |k| sums[k].sum);
    let other_sums: Vec<EndSum> = sums.iter().enumerate().filter(|(k, _)| Some(*k) != hit).map(|(_, g)| g.clone()).collect();
    let max_error = other_sums.iter().map(|g| g.sum.norm()).fold((target_sum - ONE).norm(), f64::max);
    Ok(LocalTranslationReport {
        x,
        t,
        target,
        target_present: hit.is_some(),
        target_sum,
        other_sums,
        max_error,
        pass: hit.is_some() && max_error < tol,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateReport {
    pub row: usize,
    pub p: u32,
    /// Coefficient of `f(alpha_j + r)` summed over enumerated paths.
    pub path_coefficients: Vec<C64>,
    /// Row `row` of `B^p`.
    pub power_row: Vec<C64>,
    pub max_difference: f64,
}

/// For equal lengths `l` and `(p-1) l < t - (beta_i - x) < p l`, compares the
/// path coefficients of `f(alpha_j + r)` with row `i` of `B^p`.
pub fn aggregate_equal_length(omega: &IntervalUnion, b: &BoundaryMatrix, x: f64, t: f64, p: u32) -> Result<AggregateReport> {
    let ell = omega.common_length().ok_or(Error::NotEqualLength)?;
    let i = omega.locate(x).ok_or(Error::XNotInOmega { x })?;
    if p == 0 || t <= 0.0 {
        return Err(Error::PreconditionViolated(format!("need p >= 1 and t > 0, got p = {p}, t = {t}")));
    }
    let s = t - (omega.beta(i) - x);
    if !((p as f64 - 1.0) * ell < s && s < p as f64 * ell) {
        return Err(Error::PreconditionViolated(format!(
            "t - (beta_i - x) = {s} is not inside (({p} - 1) l, {p} l) with l = {ell}"
        )));
    }
    let paths = enumerate_paths(omega, b, x, t)?;
    let n = omega.len();
    let mut path_coefficients = vec![C64::new(0.0, 0.0); n];
    for path in &paths {
        path_coefficients[path.last()] += path.weight;
    }
    let power_row = b.power(p).matrix().row(i).to_vec();
    let max_difference = path_coefficients.iter().zip(&power_row).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    Ok(AggregateReport { row: i, p, path_coefficients, power_row, max_difference })
}

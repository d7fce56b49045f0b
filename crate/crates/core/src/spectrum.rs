//! Discrete spectrum of the self-adjoint extension `D_B`.
//!
//! `lambda` is an eigenvalue iff `1` is an eigenvalue of the unitary transfer
//! matrix `M(lambda) = E(lambda beta)^* B E(lambda alpha)`. Every eigenphase of
//! `M(lambda)` decreases strictly in `lambda` (its derivative is
//! `-2 pi sum_j |v_j|^2 l_j`) and their sum decreases at the constant rate
//! `2 pi L`, so the number of roots in a cell `(a, b]` equals the number of
//! eigenphases wrapping through zero, which can be read off exactly from the
//! phase sums at the two ends. The scan counts roots per grid cell and then
//! bisects every non-empty cell.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::boundary::{cis_turns, eig_unitary, BoundaryMatrix};
use crate::error::{Error, Result};
use crate::geometry::IntervalUnion;
use crate::linalg::{self, CMatrix, C64};
use crate::par::{self, Execution};

pub const TOL_ROOT: f64 = 1e-10;
pub const TOL_EIG: f64 = 1e-8;
pub const TOL_CONSTANT: f64 = 1e-8;

/// Eigenphases within this distance of zero are treated as already wrapped.
const PHASE_SNAP: f64 = 1e-12;
/// Allowed distance of a cell's root count from the nearest integer.
const COUNT_SLACK: f64 = 1e-6;
const MAX_GRID_POINTS: usize = 50_000_000;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    /// `None` selects [`default_grid_step`].
    pub grid_step: Option<f64>,
    pub tol_root: f64,
    pub tol_eig: f64,
    pub tol_constant: f64,
    #[serde(skip)]
    pub exec: Execution,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            grid_step: None,
            tol_root: TOL_ROOT,
            tol_eig: TOL_EIG,
            tol_constant: TOL_CONSTANT,
            exec: Execution::default(),
        }
    }
}

/// `1 / (8 L max(1, |alpha_1|, |beta_n|))`.
pub fn default_grid_step(omega: &IntervalUnion) -> f64 {
    1.0 / (8.0 * omega.measure() * omega.scale())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMethod {
    Scan,
    EqualLength,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralPoint {
    pub lambda: f64,
    /// Dimension of `{c : B E(lambda alpha) c = E(lambda beta) c}`.
    pub dimension: usize,
    /// Orthonormal basis of the eigenspace, as coefficient vectors `c`.
    pub basis: Vec<Vec<C64>>,
    /// The eigenspace is spanned by `(1, ..., 1)`.
    pub constant: bool,
    /// `min_j |1 - mu_j(M(lambda))|`.
    pub det_residual: f64,
    /// `max_c ||B E(lambda alpha) c - E(lambda beta) c||`.
    pub eig_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub window: (f64, f64),
    pub method: SpectrumMethod,
    pub grid_step: Option<f64>,
    /// Upper bound on `|d theta / d lambda|` for the eigenphases of `M(lambda)`.
    pub phase_speed_bound: f64,
    pub points: Vec<SpectralPoint>,
}

impl SpectrumReport {
    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_dims(omega: &IntervalUnion, b: &BoundaryMatrix) -> Result<()> {
    if b.size() != omega.len() {
        return Err(Error::DimensionMismatch { what: "boundary matrix", got: b.size(), expected: omega.len() });
    }
    Ok(())
}

fn check_window(window: (f64, f64)) -> Result<()> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidArgument(format!("window [{lo}, {hi}] must be finite with lo < hi")));
    }
    Ok(())
}

/// `M(lambda) = E(lambda beta)^* B E(lambda alpha)`.
pub fn transfer_matrix(omega: &IntervalUnion, b: &BoundaryMatrix, lambda: f64) -> Result<CMatrix> {
    check_dims(omega, b)?;
    let n = omega.len();
    let left: Vec<C64> = omega.alphas().iter().map(|&a| cis_turns(lambda * a)).collect();
    let right: Vec<C64> = omega.betas().iter().map(|&v| cis_turns(-lambda * v)).collect();
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = right[i] * b.entry(i, j) * left[j];
        }
    }
    Ok(m)
}

fn wrapped_phase(z: C64) -> f64 {
    let p = z.arg();
    if p <= PHASE_SNAP {
        p + TAU
    } else {
        p
    }
}

fn phase_sum(omega: &IntervalUnion, b: &BoundaryMatrix, lambda: f64) -> Result<f64> {
    let (values, _) = linalg::eig_normal(&transfer_matrix(omega, b, lambda)?)?;
    Ok(values.iter().map(|&z| wrapped_phase(z)).sum())
}

/// Number of spectrum points in `(a, b]` from the phase sums at both ends.
fn cell_count(measure: f64, a: f64, phi_a: f64, b: f64, phi_b: f64) -> Result<usize> {
    let raw = (phi_b - phi_a + TAU * measure * (b - a)) / TAU;
    let k = raw.round();
    if (raw - k).abs() > COUNT_SLACK || k < 0.0 {
        return Err(Error::SuspectedMissedRoot { lo: a, hi: b, residual: raw - k });
    }
    Ok(k as usize)
}

/// Orthonormal basis of `ker(I - M(lambda))`, keeping eigenvectors of the
/// unitary `M(lambda)` whose eigenvalue lies within `tol_eig` of `1`.
pub fn nullspace_at(omega: &IntervalUnion, b: &BoundaryMatrix, lambda: f64, tol_eig: f64) -> Result<Vec<Vec<C64>>> {
    let (values, vectors) = linalg::eig_normal(&transfer_matrix(omega, b, lambda)?)?;
    Ok(values
        .iter()
        .zip(vectors)
        .filter(|(mu, _)| (C64::new(1.0, 0.0) - **mu).norm() < tol_eig)
        .map(|(_, v)| v)
        .collect())
}

/// Whether `c` is a multiple of `(1, ..., 1)`.
pub fn is_constant_vector(c: &[C64], tol: f64) -> bool {
    let n = c.len() as f64;
    let mean = c.iter().sum::<C64>() / n;
    let scale = linalg::norm(c) / n.sqrt();
    scale > 0.0 && c.iter().all(|z| (z - mean).norm() <= tol * scale.max(1.0))
}

/// `||B E(lambda alpha) c - E(lambda beta) c||`.
pub fn eigen_residual(omega: &IntervalUnion, b: &BoundaryMatrix, lambda: f64, c: &[C64]) -> f64 {
    let left: Vec<C64> = omega.alphas().iter().zip(c).map(|(&a, &ci)| cis_turns(lambda * a) * ci).collect();
    let right: Vec<C64> = omega.betas().iter().zip(c).map(|(&v, &ci)| cis_turns(lambda * v) * ci).collect();
    linalg::norm(&linalg::sub(&b.matrix().mul_vec(&left), &right))
}

fn det_residual(omega: &IntervalUnion, b: &BoundaryMatrix, lambda: f64) -> Result<f64> {
    let (values, _) = linalg::eig_normal(&transfer_matrix(omega, b, lambda)?)?;
    Ok(values.iter().map(|mu| (C64::new(1.0, 0.0) - mu).norm()).fold(f64::INFINITY, f64::min))
}

fn make_point(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    lambda: f64,
    basis: Vec<Vec<C64>>,
    tol_constant: f64,
) -> Result<SpectralPoint> {
    let eig_residual = basis.iter().map(|c| eigen_residual(omega, b, lambda, c)).fold(0.0, f64::max);
    let constant = basis.len() == 1 && is_constant_vector(&basis[0], tol_constant);
    Ok(SpectralPoint {
        lambda,
        dimension: basis.len(),
        constant,
        det_residual: det_residual(omega, b, lambda)?,
        eig_residual,
        basis,
    })
}

/// One Newton step on the eigenphase closest to zero, kept inside `[a, b]`.
fn polish(omega: &IntervalUnion, b: &BoundaryMatrix, a: f64, hi: f64) -> Result<f64> {
    let mid = 0.5 * (a + hi);
    let (values, vectors) = linalg::eig_normal(&transfer_matrix(omega, b, mid)?)?;
    let Some((k, _)) = values
        .iter()
        .enumerate()
        .min_by(|x, y| (C64::new(1.0, 0.0) - x.1).norm().total_cmp(&(C64::new(1.0, 0.0) - y.1).norm()))
    else {
        return Ok(mid);
    };
    let phase = values[k].arg();
    let rate: f64 = -TAU * vectors[k].iter().zip(omega.lengths()).map(|(v, l)| v.norm_sqr() * l).sum::<f64>();
    let candidate = mid - phase / rate;
    Ok(if candidate.is_finite() && candidate >= a && candidate <= hi { candidate } else { mid })
}

/// Bisects `(a, b]`, which holds `count` roots, down to width `tol`.
#[allow(clippy::too_many_arguments)]
fn refine(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    cell: (f64, f64),
    phis: (f64, f64),
    count: usize,
    tol: f64,
    depth: usize,
    out: &mut Vec<(f64, usize)>,
) -> Result<()> {
    let (lo, hi) = cell;
    if hi - lo <= tol {
        let lambda = if count == 1 { polish(omega, b, lo, hi)? } else { 0.5 * (lo + hi) };
        out.push((lambda, count));
        return Ok(());
    }
    if depth > MAX_BISECTIONS {
        return Err(Error::ConvergenceFailure(format!("bisection of ({lo}, {hi}] did not reach width {tol}")));
    }
    let mid = 0.5 * (lo + hi);
    if mid <= lo || mid >= hi {
        out.push((mid, count));
        return Ok(());
    }
    let l = omega.measure();
    let phi_mid = phase_sum(omega, b, mid)?;
    let left = cell_count(l, lo, phis.0, mid, phi_mid)?;
    let right = cell_count(l, mid, phi_mid, hi, phis.1)?;
    if left + right != count {
        return Err(Error::SuspectedMissedRoot { lo, hi, residual: (left + right) as f64 - count as f64 });
    }
    if left > 0 {
        refine(omega, b, (lo, mid), (phis.0, phi_mid), left, tol, depth + 1, out)?;
    }
    if right > 0 {
        refine(omega, b, (mid, hi), (phi_mid, phis.1), right, tol, depth + 1, out)?;
    }
    Ok(())
}

/// All spectrum points in `[lo, hi]` by grid scan and bisection.
pub fn compute_spectrum(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    window: (f64, f64),
    opts: &ScanOptions,
) -> Result<SpectrumReport> {
    check_dims(omega, b)?;
    check_window(window)?;
    let step = opts.grid_step.unwrap_or_else(|| default_grid_step(omega));
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("grid step must be positive, got {step}")));
    }
    if !(opts.tol_root > 0.0) {
        return Err(Error::InvalidArgument("tol_root must be positive".into()));
    }
    let (lo, hi) = window;
    let start = lo - opts.tol_root;
    let cells = ((hi - start) / step).ceil().max(1.0);
    if cells > MAX_GRID_POINTS as f64 {
        return Err(Error::GuardExceeded { what: "grid points", count: cells as usize, cap: MAX_GRID_POINTS, estimate: cells });
    }
    let cells = cells as usize;
    let h = (hi - start) / cells as f64;
    let grid: Vec<f64> = (0..=cells).map(|k| if k == cells { hi } else { start + k as f64 * h }).collect();
    let phis = par::try_map(opts.exec, &grid, |&x| phase_sum(omega, b, x))?;

    let l = omega.measure();
    let mut busy = Vec::new();
    for k in 0..cells {
        let count = cell_count(l, grid[k], phis[k], grid[k + 1], phis[k + 1])?;
        if count > 0 {
            busy.push((k, count));
        }
    }
    let tol = opts.tol_root;
    let roots = par::try_map(opts.exec, &busy, |&(k, count)| {
        let mut out = Vec::new();
        refine(omega, b, (grid[k], grid[k + 1]), (phis[k], phis[k + 1]), count, tol, 0, &mut out)?;
        Ok::<_, Error>(out)
    })?;
    let roots: Vec<(f64, usize)> = roots.into_iter().flatten().collect();

    let points = par::try_map(opts.exec, &roots, |&(lambda, count)| {
        let basis = nullspace_at(omega, b, lambda, opts.tol_eig)?;
        if basis.is_empty() {
            return Err(Error::ConvergenceFailure(format!(
                "no eigenvector within {} of 1 at lambda = {lambda} ({count} root(s) counted)",
                opts.tol_eig
            )));
        }
        make_point(omega, b, lambda, basis, opts.tol_constant)
    })?;

    Ok(SpectrumReport {
        window,
        method: SpectrumMethod::Scan,
        grid_step: Some(step),
        phase_speed_bound: TAU * omega.max_length(),
        points,
    })
}

struct PhaseCluster {
    theta: f64,
    vectors: Vec<Vec<C64>>,
}

fn phase_clusters(b: &BoundaryMatrix, tol: f64) -> Result<Vec<PhaseCluster>> {
    let eig = eig_unitary(b.matrix())?;
    let mut clusters: Vec<PhaseCluster> = Vec::new();
    for (theta, v) in eig.phases.into_iter().zip(eig.vectors) {
        match clusters.last_mut() {
            Some(c) if theta - c.theta < tol => c.vectors.push(v),
            _ => clusters.push(PhaseCluster { theta, vectors: vec![v] }),
        }
    }
    // phases just below 1 belong with phases just above 0
    if clusters.len() > 1 {
        let last = clusters.len() - 1;
        if clusters[0].theta + 1.0 - clusters[last].theta < tol {
            let tail = clusters.pop().expect("non-empty");
            clusters[0].vectors.extend(tail.vectors);
        }
    }
    Ok(clusters)
}

/// Spectrum for equal interval lengths `l`: `(theta_j + Z) / l`, with
/// eigenvectors `c = E(-lambda alpha) v` for the eigenvectors `v` of `B`.
pub fn equal_length_spectrum(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    window: (f64, f64),
    tol_constant: f64,
) -> Result<SpectrumReport> {
    check_dims(omega, b)?;
    check_window(window)?;
    let ell = omega.common_length().ok_or(Error::NotEqualLength)?;
    let (lo, hi) = window;
    let slack = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
    let mut points = Vec::new();
    for cluster in phase_clusters(b, 1e-9)? {
        let k_lo = ((lo - slack) * ell - cluster.theta).ceil() as i64;
        let k_hi = ((hi + slack) * ell - cluster.theta).floor() as i64;
        for k in k_lo..=k_hi {
            let lambda = (cluster.theta + k as f64) / ell;
            let basis = cluster
                .vectors
                .iter()
                .map(|v| omega.alphas().iter().zip(v).map(|(&a, &vi)| cis_turns(-lambda * a) * vi).collect())
                .collect();
            points.push(make_point(omega, b, lambda, basis, tol_constant)?);
        }
    }
    points.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
    Ok(SpectrumReport {
        window,
        method: SpectrumMethod::EqualLength,
        grid_step: None,
        phase_speed_bound: TAU * ell,
        points,
    })
}

/// Uses [`equal_length_spectrum`] when every interval has the same length and
/// [`compute_spectrum`] otherwise.
pub fn spectrum(omega: &IntervalUnion, b: &BoundaryMatrix, window: (f64, f64), opts: &ScanOptions) -> Result<SpectrumReport> {
    if omega.common_length().is_some() {
        equal_length_spectrum(omega, b, window, opts.tol_constant)
    } else {
        compute_spectrum(omega, b, window, opts)
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MatrixVerdict {
    /// Equal lengths: every eigenspace over all of `R` is spanned by `(1, ..., 1)`.
    SpectralExact,
    /// Every eigenspace in the window is spanned by `(1, ..., 1)`.
    SpectralOnWindow { window: (f64, f64), points: usize },
    NotSpectral { witness: f64, dimension: usize, eigenspace: Vec<Vec<C64>> },
    Undecided { reason: String },
}

impl MatrixVerdict {
    pub fn is_spectral(&self) -> bool {
        matches!(self, MatrixVerdict::SpectralExact | MatrixVerdict::SpectralOnWindow { .. })
    }

    pub fn witness(&self) -> Option<f64> {
        match self {
            MatrixVerdict::NotSpectral { witness, .. } => Some(*witness),
            _ => None,
        }
    }
}

fn exact_equal_length_check(omega: &IntervalUnion, b: &BoundaryMatrix, ell: f64, tol_constant: f64) -> Result<MatrixVerdict> {
    let e_minus = |lambda: f64, v: &[C64]| -> Vec<C64> {
        omega.alphas().iter().zip(v).map(|(&a, &vi)| cis_turns(-lambda * a) * vi).collect()
    };
    let clusters = phase_clusters(b, 1e-9)?;
    for cluster in &clusters {
        let lambda = cluster.theta / ell;
        let eigenspace: Vec<Vec<C64>> = cluster.vectors.iter().map(|v| e_minus(lambda, v)).collect();
        if eigenspace.len() > 1 || !is_constant_vector(&eigenspace[0], tol_constant) {
            return Ok(MatrixVerdict::NotSpectral { witness: lambda, dimension: eigenspace.len(), eigenspace });
        }
    }
    // c at (theta + k) / l is E(-k alpha / l) times a constant vector
    let a1 = omega.alpha(0);
    let off_lattice = omega.alphas().iter().any(|&a| {
        let r = (a - a1) / ell;
        (r - r.round()).abs() * ell > omega.tol()
    });
    if off_lattice {
        let cluster = &clusters[0];
        let lambda = (cluster.theta + 1.0) / ell;
        let eigenspace = vec![e_minus(lambda, &cluster.vectors[0])];
        return Ok(MatrixVerdict::NotSpectral { witness: lambda, dimension: 1, eigenspace });
    }
    Ok(MatrixVerdict::SpectralExact)
}

/// Decides whether every solution `c` of `B E(lambda alpha) c = E(lambda beta) c`
/// is constant. Exact for equal lengths, window-limited otherwise.
pub fn spectral_matrix_check(
    omega: &IntervalUnion,
    b: &BoundaryMatrix,
    window: (f64, f64),
    opts: &ScanOptions,
) -> Result<MatrixVerdict> {
    check_dims(omega, b)?;
    if let Some(ell) = omega.common_length() {
        return exact_equal_length_check(omega, b, ell, opts.tol_constant);
    }
    let report = compute_spectrum(omega, b, window, opts)?;
    if report.is_empty() {
        return Ok(MatrixVerdict::Undecided { reason: format!("no spectrum points in [{}, {}]", window.0, window.1) });
    }
    let mut by_distance: Vec<&SpectralPoint> = report.points.iter().collect();
    by_distance.sort_by(|x, y| x.lambda.abs().total_cmp(&y.lambda.abs()));
    for p in by_distance {
        if !p.constant {
            return Ok(MatrixVerdict::NotSpectral { witness: p.lambda, dimension: p.dimension, eigenspace: p.basis.clone() });
        }
    }
    Ok(MatrixVerdict::SpectralOnWindow { window, points: report.len() })
}

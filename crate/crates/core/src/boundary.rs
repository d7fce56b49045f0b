//! Unitary boundary matrices and their structure.
//!
//! A boundary matrix `B` selects the self-adjoint extension whose domain is
//! `{ f : B f(alpha) = f(beta) }`, where `f(alpha)` and `f(beta)` collect the
//! one-sided limits at the left and right endpoints of every interval.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::IntervalUnion;
use crate::linalg::{self, CMatrix, C64, ONE};

/// Entrywise tolerance on `B*B - I`.
pub const UNITARY_TOL: f64 = 1e-10;

/// `e^{2 pi i x}`.
pub fn cis_turns(x: f64) -> C64 {
    let (s, c) = (TAU * x).sin_cos();
    C64::new(c, s)
}

/// `diag(e^{2 pi i z_1}, ..., e^{2 pi i z_n})`.
pub fn exp_diag(z: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&z.iter().map(|&v| cis_turns(v)).collect::<Vec<_>>())
}

/// The vector `e_lambda(points) = (e^{2 pi i lambda p_1}, ..., e^{2 pi i lambda p_n})`.
pub fn exp_vector(lambda: f64, points: &[f64]) -> Vec<C64> {
    points.iter().map(|&p| cis_turns(lambda * p)).collect()
}

/// A unitary `n x n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMatrix(CMatrix);

impl BoundaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, UNITARY_TOL)
    }

    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
        }
        if m.rows() == 0 {
            return Err(Error::InvalidArgument("boundary matrix is empty".into()));
        }
        let (row, col, deviation) = m.unitarity_defect();
        if !(deviation <= tol) {
            return Err(Error::NotUnitary { row, col, deviation });
        }
        Ok(BoundaryMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        Self::new(CMatrix::from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        BoundaryMatrix(CMatrix::identity(n))
    }

    /// Haar-distributed unitary: Gram-Schmidt on complex Gaussian columns, i.e.
    /// the QR factor with positive diagonal in `R`.
    pub fn random_haar(n: usize, rng: &mut impl rand::Rng) -> Self {
        use rand_distr::StandardNormal;
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        while cols.len() < n {
            let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
            for q in &cols {
                let p = linalg::dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= p * qi;
                }
            }
            let r = linalg::norm(&v);
            if r < 1e-8 {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= r);
            cols.push(v);
        }
        BoundaryMatrix(CMatrix::from_columns(&cols))
    }

    /// `P^sigma` with `P[i][sigma(i)] = 1`.
    pub fn permutation(sigma: &[usize]) -> Result<Self> {
        let n = sigma.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &j) in sigma.iter().enumerate() {
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, len: n });
            }
            m[(i, j)] = ONE;
        }
        Self::new(m)
    }

    pub fn size(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> BoundaryMatrix {
        BoundaryMatrix(self.0.adjoint())
    }

    /// `B^p` for `p >= 1`; `p = 0` gives the identity.
    pub fn power(&self, p: u32) -> BoundaryMatrix {
        BoundaryMatrix(self.0.pow(p))
    }

    /// True iff `max |B^{D n} - I| < 1e-7`.
    pub fn rational_order_check(&self, denominator: u32, n: u32) -> bool {
        let k = denominator.saturating_mul(n);
        self.0.pow(k).max_abs_diff(&CMatrix::identity(self.size())) < 1e-7
    }

    /// Eigenphases in `[0, 1)` and an orthonormal eigenbasis, sorted by phase.
    pub fn eig_unitary(&self) -> Result<UnitaryEigenData> {
        eig_unitary(&self.0)
    }

    pub fn classify_structure(&self, tol: f64) -> StructureReport {
        classify_structure(&self.0, tol)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitaryEigenData {
    /// `theta_j` with eigenvalue `e^{2 pi i theta_j}`, in `[0, 1)`.
    pub phases: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
}

/// Eigen-decomposition of a unitary matrix.
pub fn eig_unitary(m: &CMatrix) -> Result<UnitaryEigenData> {
    let (values, vectors) = linalg::eig_normal(m)?;
    let mut pairs: Vec<(f64, Vec<C64>)> = values
        .iter()
        .zip(vectors)
        .map(|(v, vec)| {
            let mut theta = v.arg() / TAU;
            if theta < 0.0 {
                theta += 1.0;
            }
            if theta >= 1.0 {
                theta -= 1.0;
            }
            (theta, vec)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (phases, vectors) = pairs.into_iter().unzip();
    Ok(UnitaryEigenData { phases, vectors })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatrixStructure {
    /// `b[i][sigma(i)] = 1`, zeros elsewhere.
    Permutation { sigma: Vec<usize> },
    /// `|b[i][sigma(i)]| = 1`, zeros elsewhere.
    WeightedPermutation { sigma: Vec<usize>, weights: Vec<C64> },
    General,
}

impl MatrixStructure {
    pub fn sigma(&self) -> Option<&[usize]> {
        match self {
            MatrixStructure::Permutation { sigma } | MatrixStructure::WeightedPermutation { sigma, .. } => Some(sigma),
            MatrixStructure::General => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub structure: MatrixStructure,
    /// Every `U(t)` is multiplicative (holds iff `B` is a permutation matrix).
    pub multiplicative_for_all_t: bool,
    /// Every `U(t)` satisfies the Forelli condition (iff weighted permutation).
    pub forelli_for_all_t: bool,
    /// Whether `sigma` is a single cycle through all indices; `None` for general matrices.
    pub full_cycle: Option<bool>,
}

/// Whether `sigma` is one cycle of length `n`.
pub fn is_full_cycle(sigma: &[usize]) -> bool {
    let n = sigma.len();
    let mut i = 0;
    for step in 1..=n {
        i = sigma[i];
        if i == 0 {
            return step == n;
        }
    }
    false
}

/// Classifies `m` as permutation, weighted permutation or general, treating an
/// entry as zero when `|b| < tol` and unimodular when `||b| - 1| < tol`.
pub fn classify_structure(m: &CMatrix, tol: f64) -> StructureReport {
    let n = m.rows();
    let mut sigma = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut weighted = true;
    'rows: for i in 0..n {
        let mut hit = None;
        for j in 0..n {
            let a = m[(i, j)].norm();
            if a < tol {
                continue;
            }
            if (a - 1.0).abs() < tol && hit.is_none() {
                hit = Some(j);
            } else {
                weighted = false;
                break 'rows;
            }
        }
        match hit {
            Some(j) => {
                sigma.push(j);
                weights.push(m[(i, j)]);
            }
            None => {
                weighted = false;
                break;
            }
        }
    }
    if weighted {
        let mut seen = vec![false; n];
        for &j in &sigma {
            if std::mem::replace(&mut seen[j], true) {
                weighted = false;
            }
        }
    }
    let structure = if !weighted {
        MatrixStructure::General
    } else if weights.iter().all(|w| (w - ONE).norm() < tol) {
        MatrixStructure::Permutation { sigma }
    } else {
        MatrixStructure::WeightedPermutation { sigma, weights }
    };
    let full_cycle = structure.sigma().map(is_full_cycle);
    StructureReport {
        multiplicative_for_all_t: matches!(structure, MatrixStructure::Permutation { .. }),
        forelli_for_all_t: !matches!(structure, MatrixStructure::General),
        full_cycle,
        structure,
    }
}

/// Reconstructs the unique `B` with `B e_lambda(alpha) = e_lambda(beta)` for the
/// sampled frequencies.
///
/// The first `n` samples whose boundary vectors are linearly independent
/// determine `B`; the remaining samples are used as a consistency check.
pub fn matrix_from_spectrum(omega: &IntervalUnion, samples: &[f64], tol: f64) -> Result<BoundaryMatrix> {
    let n = omega.len();
    let lefts: Vec<Vec<C64>> = samples.iter().map(|&l| exp_vector(l, omega.alphas())).collect();
    let chosen = linalg::independent_subset(&lefts, n, 1e-8);
    if chosen.len() < n {
        return Err(Error::DeficientSpan { rank: chosen.len(), n });
    }
    let a = CMatrix::from_columns(&chosen.iter().map(|&k| lefts[k].clone()).collect::<Vec<_>>());
    let c = CMatrix::from_columns(&chosen.iter().map(|&k| exp_vector(samples[k], omega.betas())).collect::<Vec<_>>());
    // B A = C  <=>  A^* B^* = C^*
    let b_adj = linalg::solve(&a.adjoint(), &c.adjoint(), 1e-14).ok_or(Error::DeficientSpan { rank: n - 1, n })?;
    let b = b_adj.adjoint();

    let mut worst = (f64::NAN, 0.0);
    for (k, &lambda) in samples.iter().enumerate() {
        let lhs = b.mul_vec(&lefts[k]);
        let rhs = exp_vector(lambda, omega.betas());
        let r = linalg::norm(&linalg::sub(&lhs, &rhs));
        if r > worst.1 {
            worst = (lambda, r);
        }
    }
    if worst.1 > tol {
        return Err(Error::Inconsistent { lambda: worst.0, residual: worst.1 });
    }
    BoundaryMatrix::with_tolerance(b, tol.max(UNITARY_TOL))
}

/// Checks `b[i][sigma(i)] = e^{2 pi i (theta0 / L)(alpha_sigma(i) - beta_i)}` and
/// `alpha_sigma(i) - beta_i in L Z` for a weighted permutation matrix.
pub fn forelli_weight_check(b: &BoundaryMatrix, omega: &IntervalUnion, theta0: f64, tol: f64) -> Result<bool> {
    let report = b.classify_structure(tol.max(UNITARY_TOL));
    let sigma = report
        .structure
        .sigma()
        .ok_or_else(|| Error::WrongStructure("expected a weighted permutation matrix".into()))?;
    if b.size() != omega.len() {
        return Err(Error::DimensionMismatch { what: "boundary matrix", got: b.size(), expected: omega.len() });
    }
    let l = omega.measure();
    Ok(sigma.iter().enumerate().all(|(i, &j)| {
        let jump = omega.alpha(j) - omega.beta(i);
        let expected = cis_turns(theta0 / l * jump);
        let ratio = jump / l;
        (b.entry(i, j) - expected).norm() < tol && (ratio - ratio.round()).abs() * l < tol.max(omega.tol())
    }))
}

/// Jumps `alpha_sigma(i) - beta_i` that are not in `L Z`, as `(i, jump)`.
pub fn jumps_outside_lattice(sigma: &[usize], omega: &IntervalUnion, tol: f64) -> Vec<(usize, f64)> {
    let l = omega.measure();
    sigma
        .iter()
        .enumerate()
        .filter_map(|(i, &j)| {
            let jump = omega.alpha(j) - omega.beta(i);
            let ratio = jump / l;
            ((ratio - ratio.round()).abs() * l >= tol).then_some((i, jump))
        })
        .collect()
}

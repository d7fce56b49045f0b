//! Small dense complex linear algebra.
//!
//! Matrices here are n x n with n the number of intervals, so everything is
//! plain O(n^3) code over a row-major `Vec<Complex64>`.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch { what: "matrix row", got: bad.len(), expected: c });
        }
        Ok(CMatrix { rows: r, cols: c, data: rows.iter().flatten().copied().collect() })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<C64>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Worst entry of `A* A - I`, as (row, col, deviation).
    pub fn unitarity_defect(&self) -> (usize, usize, f64) {
        let g = &self.adjoint() * self;
        let mut worst = (0, 0, 0.0);
        for i in 0..g.rows {
            for j in 0..g.cols {
                let target = if i == j { ONE } else { ZERO };
                let d = (g[(i, j)] - target).norm();
                if d > worst.2 {
                    worst = (i, j, d);
                }
            }
        }
        worst
    }

    pub fn pow(&self, p: u32) -> Self {
        assert!(self.is_square());
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows);
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for v in self.row(i) {
                write!(f, "({:+.6}{:+.6}i) ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    // conjugate-linear in the first argument
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Givens rotation `[[c, s], [-conj(s), c]]` with real `c` mapping `(a, b)` to `(r, 0)`.
fn givens(a: C64, b: C64) -> (f64, C64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    let an = a.norm();
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

fn rotate_rows(m: &mut CMatrix, k: usize, c: f64, s: C64) {
    for j in 0..m.cols {
        let x = m[(k, j)];
        let y = m[(k + 1, j)];
        m[(k, j)] = x * c + s * y;
        m[(k + 1, j)] = -s.conj() * x + y * c;
    }
}

/// Right-multiplies columns k, k+1 by the adjoint of the rotation.
fn rotate_cols(m: &mut CMatrix, k: usize, c: f64, s: C64) {
    for i in 0..m.rows {
        let x = m[(i, k)];
        let y = m[(i, k + 1)];
        m[(i, k)] = x * c + y * s.conj();
        m[(i, k + 1)] = -x * s + y * c;
    }
}

/// Reduces `a` to upper Hessenberg form with Householder reflections,
/// accumulating the unitary similarity into `q`.
fn hessenberg(a: &mut CMatrix, q: &mut CMatrix) {
    let n = a.rows;
    for k in 0..n.saturating_sub(2) {
        let x: Vec<C64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let alpha = norm(&x);
        if alpha < 1e-300 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let mut v = x.clone();
        v[0] += phase * alpha;
        let vn = norm(&v);
        if vn < 1e-300 {
            continue;
        }
        for vi in &mut v {
            *vi /= vn;
        }
        // A <- H A H with H = I - 2 v v^*
        for j in 0..n {
            let s: C64 = (0..v.len()).map(|r| v[r].conj() * a[(k + 1 + r, j)]).sum();
            for r in 0..v.len() {
                a[(k + 1 + r, j)] -= 2.0 * v[r] * s;
            }
        }
        for mat in [&mut *a, &mut *q] {
            for i in 0..n {
                let s: C64 = (0..v.len()).map(|r| mat[(i, k + 1 + r)] * v[r]).sum();
                for r in 0..v.len() {
                    mat[(i, k + 1 + r)] -= 2.0 * s * v[r].conj();
                }
            }
        }
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr_half = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = tr_half + root;
    let l2 = tr_half - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur decomposition `A = Q T Q*` by Hessenberg reduction and
/// single-shift QR iteration. Returns `(T, Q)`.
pub fn schur(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows, cols: a.cols });
    }
    let n = a.rows;
    let mut t = a.clone();
    let mut q = CMatrix::identity(n);
    if n <= 1 {
        return Ok((t, q));
    }
    hessenberg(&mut t, &mut q);

    let eps = f64::EPSILON;
    let max_iter = 60 * n;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        // deflation search
        let mut lo = hi;
        while lo > 0 {
            let sub = t[(lo, lo - 1)].norm();
            let scale = t[(lo, lo)].norm() + t[(lo - 1, lo - 1)].norm();
            if sub <= eps * scale.max(1e-300) || sub < 1e-300 {
                t[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_iter * n {
            return Err(Error::ConvergenceFailure(format!("QR iteration stalled at row {hi}")));
        }
        let shift = if iter.is_multiple_of(10) {
            // exceptional shift to break symmetric stalls (e.g. cyclic permutations)
            t[(hi, hi)] + C64::new(0.75, 0.4375) * t[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)])
        };
        for i in lo..=hi {
            t[(i, i)] -= shift;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(t[(k, k)], t[(k + 1, k)]);
            rotate_rows(&mut t, k, c, s);
            t[(k + 1, k)] = ZERO;
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            rotate_cols(&mut t, k, c, s);
            rotate_cols(&mut q, k, c, s);
        }
        for i in lo..=hi {
            t[(i, i)] += shift;
        }
    }
    Ok((t, q))
}

/// Eigen-decomposition of a normal matrix: eigenvalues and orthonormal
/// eigenvectors (the Schur vectors, since the Schur form of a normal matrix is
/// diagonal).
pub fn eig_normal(a: &CMatrix) -> Result<(Vec<C64>, Vec<Vec<C64>>)> {
    let (t, q) = schur(a)?;
    let n = a.rows();
    let values = (0..n).map(|i| t[(i, i)]).collect();
    let vectors = (0..n).map(|j| q.column(j)).collect();
    Ok((values, vectors))
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
/// Returns `None` if a pivot falls below `pivot_tol`.
pub fn solve(a: &CMatrix, b: &CMatrix, pivot_tol: f64) -> Option<CMatrix> {
    let n = a.rows;
    assert!(a.is_square() && b.rows == n);
    let mut m = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[(i, k)].norm().total_cmp(&m[(j, k)].norm()))?;
        if m[(p, k)].norm() < pivot_tol {
            return None;
        }
        if p != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = tmp;
            }
            for j in 0..x.cols {
                let tmp = x[(k, j)];
                x[(k, j)] = x[(p, j)];
                x[(p, j)] = tmp;
            }
        }
        let piv = m[(k, k)];
        for i in k + 1..n {
            let f = m[(i, k)] / piv;
            if f == ZERO {
                continue;
            }
            for j in k..n {
                let v = m[(k, j)];
                m[(i, j)] -= f * v;
            }
            for j in 0..x.cols {
                let v = x[(k, j)];
                x[(i, j)] -= f * v;
            }
        }
    }
    for k in (0..n).rev() {
        for j in 0..x.cols {
            let mut s = x[(k, j)];
            for c in k + 1..n {
                s -= m[(k, c)] * x[(c, j)];
            }
            x[(k, j)] = s / m[(k, k)];
        }
    }
    Some(x)
}

/// Greedy selection of linearly independent vectors by modified Gram-Schmidt.
/// Returns the indices of the selected vectors (at most `dim` of them).
pub fn independent_subset(vectors: &[Vec<C64>], dim: usize, tol: f64) -> Vec<usize> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut chosen = Vec::new();
    for (idx, v) in vectors.iter().enumerate() {
        if basis.len() == dim {
            break;
        }
        let scale = norm(v);
        if scale == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for u in &basis {
            let p = dot(u, &w);
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= p * ui;
            }
        }
        let wn = norm(&w);
        if wn > tol * scale {
            for wi in &mut w {
                *wi /= wn;
            }
            basis.push(w);
            chosen.push(idx);
        }
    }
    chosen
}

//! Piecewise exponential polynomials on a union of intervals.
//!
//! On each sub-piece a function is a finite sum of atoms
//! `p(x) e^{2 pi i lambda x}` with `p` a polynomial in the absolute coordinate
//! `x`. The class is closed under translation, which is all `U(t)` does on
//! each piece of constancy of the path set.

use serde::Serialize;

use crate::boundary::cis_turns;
use crate::error::{Error, Result};
use crate::geometry::IntervalUnion;
use crate::linalg::C64;

/// Largest polynomial degree accepted by constructors.
pub const MAX_DEGREE: usize = 8;
/// Probe points per sub-piece for pointwise comparisons.
pub const PROBES_PER_PIECE: usize = 64;

const CZERO: C64 = C64::new(0.0, 0.0);

pub fn poly_eval(p: &[C64], x: f64) -> C64 {
    p.iter().rev().fold(CZERO, |acc, &c| acc * x + c)
}

/// Coefficients of `q(x) = p(x + c)`.
pub fn poly_shift(p: &[C64], c: f64) -> Vec<C64> {
    let mut q = p.to_vec();
    // repeated synthetic division (Taylor shift)
    let n = q.len();
    for i in 0..n {
        for k in (i..n.saturating_sub(1)).rev() {
            let hi = q[k + 1];
            q[k] += hi * c;
        }
    }
    q
}

/// Coefficients of `p(-x)`.
pub fn poly_reflect(p: &[C64]) -> Vec<C64> {
    p.iter().enumerate().map(|(k, &c)| if k % 2 == 1 { -c } else { c }).collect()
}

pub fn poly_mul(p: &[C64], q: &[C64]) -> Vec<C64> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut r = vec![CZERO; p.len() + q.len() - 1];
    for (i, &a) in p.iter().enumerate() {
        for (j, &b) in q.iter().enumerate() {
            r[i + j] += a * b;
        }
    }
    r
}

fn poly_add_into(acc: &mut Vec<C64>, p: &[C64], scale: C64) {
    if acc.len() < p.len() {
        acc.resize(p.len(), CZERO);
    }
    for (a, &c) in acc.iter_mut().zip(p) {
        *a += c * scale;
    }
}

fn degree(p: &[C64]) -> usize {
    p.iter().rposition(|c| *c != CZERO).unwrap_or(0)
}

/// `p(x) e^{2 pi i freq x}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub freq: f64,
    /// `p(x) = sum_k poly[k] x^k`.
    pub poly: Vec<C64>,
}

impl Atom {
    pub fn new(freq: f64, poly: Vec<C64>) -> Self {
        Atom { freq, poly }
    }

    pub fn exponential(freq: f64, coeff: C64) -> Self {
        Atom { freq, poly: vec![coeff] }
    }

    pub fn eval(&self, x: f64) -> C64 {
        poly_eval(&self.poly, x) * cis_turns(self.freq * x)
    }

    /// The atom `y -> self(y + c)`.
    pub fn shifted(&self, c: f64) -> Atom {
        let phase = cis_turns(self.freq * c);
        Atom { freq: self.freq, poly: poly_shift(&self.poly, c).into_iter().map(|z| z * phase).collect() }
    }

    /// The atom `y -> self(-y)`.
    pub fn reflected(&self) -> Atom {
        Atom { freq: -self.freq, poly: poly_reflect(&self.poly) }
    }

    pub fn degree(&self) -> usize {
        degree(&self.poly)
    }
}

/// Adds `scale * atom` to `atoms`, merging equal frequencies.
pub fn accumulate(atoms: &mut Vec<Atom>, atom: &Atom, scale: C64) {
    if let Some(a) = atoms.iter_mut().find(|a| a.freq == atom.freq) {
        poly_add_into(&mut a.poly, &atom.poly, scale);
    } else {
        atoms.push(Atom { freq: atom.freq, poly: atom.poly.iter().map(|&c| c * scale).collect() });
    }
}

pub fn eval_atoms(atoms: &[Atom], x: f64) -> C64 {
    atoms.iter().map(|a| a.eval(x)).sum()
}

/// A sub-piece `[start, end)` of one interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub atoms: Vec<Atom>,
}

/// A function on `Omega`, piecewise a finite sum of atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseExpPoly {
    /// Per interval, sub-pieces in increasing order covering `[alpha_i, beta_i]`.
    pieces: Vec<Vec<Piece>>,
}

impl PiecewiseExpPoly {
    /// One list of atoms per interval.
    pub fn new(omega: &IntervalUnion, per_interval: Vec<Vec<Atom>>) -> Result<Self> {
        if per_interval.len() != omega.len() {
            return Err(Error::DimensionMismatch { what: "atom lists", got: per_interval.len(), expected: omega.len() });
        }
        if let Some(a) = per_interval.iter().flatten().find(|a| a.degree() > MAX_DEGREE) {
            return Err(Error::InvalidArgument(format!("polynomial degree {} exceeds {MAX_DEGREE}", a.degree())));
        }
        if per_interval.iter().flatten().any(|a| !a.freq.is_finite() || a.poly.iter().any(|c| !c.re.is_finite() || !c.im.is_finite())) {
            return Err(Error::InvalidArgument("atom with non-finite frequency or coefficient".into()));
        }
        let pieces = per_interval
            .into_iter()
            .enumerate()
            .map(|(i, atoms)| vec![Piece { start: omega.alpha(i), end: omega.beta(i), atoms }])
            .collect();
        Ok(PiecewiseExpPoly { pieces })
    }

    /// Builds from explicit sub-pieces, which must tile each interval.
    pub fn from_pieces(omega: &IntervalUnion, pieces: Vec<Vec<Piece>>) -> Result<Self> {
        if pieces.len() != omega.len() {
            return Err(Error::DimensionMismatch { what: "piece lists", got: pieces.len(), expected: omega.len() });
        }
        let tol = omega.tol();
        for (i, list) in pieces.iter().enumerate() {
            let ok = !list.is_empty()
                && (list[0].start - omega.alpha(i)).abs() <= tol
                && (list[list.len() - 1].end - omega.beta(i)).abs() <= tol
                && list.windows(2).all(|w| (w[0].end - w[1].start).abs() <= tol)
                && list.iter().all(|p| p.start < p.end);
            if !ok {
                return Err(Error::InvalidArgument(format!("sub-pieces do not tile interval {i}")));
            }
        }
        Ok(PiecewiseExpPoly { pieces })
    }

    pub fn zero(omega: &IntervalUnion) -> Self {
        Self::new(omega, vec![Vec::new(); omega.len()]).expect("valid")
    }

    /// `e_lambda` restricted to `Omega`.
    pub fn exponential(omega: &IntervalUnion, lambda: f64) -> Self {
        Self::new(omega, vec![vec![Atom::exponential(lambda, C64::new(1.0, 0.0))]; omega.len()]).expect("valid")
    }

    /// `e^{2 pi i lambda x} sum_i c_i chi_i(x)`.
    pub fn eigenfunction(omega: &IntervalUnion, lambda: f64, c: &[C64]) -> Result<Self> {
        if c.len() != omega.len() {
            return Err(Error::DimensionMismatch { what: "coefficient vector", got: c.len(), expected: omega.len() });
        }
        Self::new(omega, c.iter().map(|&ci| vec![Atom::exponential(lambda, ci)]).collect())
    }

    pub fn interval_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn pieces(&self, i: usize) -> &[Piece] {
        &self.pieces[i]
    }

    pub fn into_pieces(self) -> Vec<Vec<Piece>> {
        self.pieces
    }

    /// Interior breakpoints of interval `i`.
    pub fn breakpoints(&self, i: usize) -> Vec<f64> {
        self.pieces[i].iter().skip(1).map(|p| p.start).collect()
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.iter().map(Vec::len).sum()
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().flatten().flat_map(|p| &p.atoms).map(Atom::degree).max().unwrap_or(0)
    }

    fn piece_at(&self, i: usize, x: f64) -> &Piece {
        let list = &self.pieces[i];
        let k = list.partition_point(|p| p.end <= x).min(list.len() - 1);
        &list[k]
    }

    /// Value at `x` using the formula of interval `i` (extended by continuity
    /// of the atoms to the closed interval).
    pub fn eval_in(&self, i: usize, x: f64) -> C64 {
        eval_atoms(&self.piece_at(i, x).atoms, x)
    }

    /// Value at `x`, or `None` outside the closed intervals.
    pub fn eval(&self, x: f64) -> Option<C64> {
        let i = self.pieces.iter().position(|list| list[0].start <= x && x < list[list.len() - 1].end).or_else(|| {
            self.pieces.iter().position(|list| list[0].start <= x && x <= list[list.len() - 1].end)
        })?;
        Some(self.eval_in(i, x))
    }

    /// `f(alpha_i+)`.
    pub fn left_values(&self) -> Vec<C64> {
        self.pieces.iter().map(|list| eval_atoms(&list[0].atoms, list[0].start)).collect()
    }

    /// `f(beta_i-)`.
    pub fn right_values(&self) -> Vec<C64> {
        self.pieces
            .iter()
            .map(|list| {
                let last = &list[list.len() - 1];
                eval_atoms(&last.atoms, last.end)
            })
            .collect()
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        for p in out.pieces.iter_mut().flatten() {
            for a in &mut p.atoms {
                for c in &mut a.poly {
                    *c *= s;
                }
            }
        }
        out
    }

    /// `self + other` on the common refinement.
    pub fn add(&self, other: &PiecewiseExpPoly) -> Result<Self> {
        if self.pieces.len() != other.pieces.len() {
            return Err(Error::DimensionMismatch { what: "intervals", got: other.pieces.len(), expected: self.pieces.len() });
        }
        let pieces = (0..self.pieces.len())
            .map(|i| {
                common_refinement(&self.pieces[i], &other.pieces[i])
                    .into_iter()
                    .map(|(start, end, a, b)| {
                        let mut atoms = a.to_vec();
                        for atom in b {
                            accumulate(&mut atoms, atom, C64::new(1.0, 0.0));
                        }
                        Piece { start, end, atoms }
                    })
                    .collect()
            })
            .collect();
        Ok(PiecewiseExpPoly { pieces })
    }

    /// `(J f)(x) = f(-x)` on `-Omega`, with intervals in increasing order.
    pub fn reflect(&self) -> Self {
        let pieces = self
            .pieces
            .iter()
            .rev()
            .map(|list| {
                list.iter()
                    .rev()
                    .map(|p| Piece { start: -p.end, end: -p.start, atoms: p.atoms.iter().map(Atom::reflected).collect() })
                    .collect()
            })
            .collect();
        PiecewiseExpPoly { pieces }
    }
}

/// Overlapping sub-pieces of two piece lists over the same interval.
fn common_refinement<'a>(a: &'a [Piece], b: &'a [Piece]) -> Vec<(f64, f64, &'a [Atom], &'a [Atom])> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    let mut start = a[0].start.min(b[0].start);
    while i < a.len() && j < b.len() {
        let end = a[i].end.min(b[j].end);
        if end > start {
            out.push((start, end, a[i].atoms.as_slice(), b[j].atoms.as_slice()));
            start = end;
        }
        if a[i].end <= end {
            i += 1;
        }
        if j < b.len() && b[j].end <= end {
            j += 1;
        }
    }
    out
}

/// `int_0^h u^j e^{k u} du` for `j = 0..=d`.
fn moment_integrals(k: C64, h: f64, d: usize) -> Vec<C64> {
    let kh = k.norm() * h;
    if kh < (d as f64 / 2.0).max(1.0) {
        // power series of e^{k u}
        (0..=d)
            .map(|j| {
                let mut sum = CZERO;
                let mut term = C64::new(h.powi(j as i32 + 1), 0.0);
                let mut m = 0usize;
                loop {
                    let add = term / (j + m + 1) as f64;
                    sum += add;
                    m += 1;
                    term = term * k * h / m as f64;
                    if term.norm() <= 1e-18 * sum.norm().max(f64::MIN_POSITIVE) && m as f64 > kh {
                        break;
                    }
                    if m > 400 {
                        break;
                    }
                }
                sum
            })
            .collect()
    } else {
        let ekh = (k * h).exp();
        let mut out = Vec::with_capacity(d + 1);
        out.push((ekh - 1.0) / k);
        for j in 1..=d {
            let prev = out[j - 1];
            out.push((ekh * h.powi(j as i32) - prev * j as f64) / k);
        }
        out
    }
}

/// `int_a^b p(x) e^{2 pi i s x} dx` in closed form.
pub fn integrate_atom(p: &[C64], s: f64, a: f64, b: f64) -> C64 {
    if p.is_empty() || b <= a {
        return CZERO;
    }
    let k = C64::new(0.0, std::f64::consts::TAU * s);
    let local = poly_shift(p, a);
    let d = degree(&local);
    let moments = moment_integrals(k, b - a, d);
    let sum: C64 = local.iter().take(d + 1).zip(&moments).map(|(c, m)| c * m).sum();
    sum * cis_turns(s * a)
}

/// `<f, g> = int_Omega f conj(g)`, exact up to rounding.
pub fn inner_product(f: &PiecewiseExpPoly, g: &PiecewiseExpPoly) -> Result<C64> {
    if f.pieces.len() != g.pieces.len() {
        return Err(Error::DimensionMismatch { what: "intervals", got: g.pieces.len(), expected: f.pieces.len() });
    }
    let mut total = CZERO;
    for i in 0..f.pieces.len() {
        for (start, end, fa, ga) in common_refinement(&f.pieces[i], &g.pieces[i]) {
            for x in fa {
                for y in ga {
                    let conj: Vec<C64> = y.poly.iter().map(|c| c.conj()).collect();
                    total += integrate_atom(&poly_mul(&x.poly, &conj), x.freq - y.freq, start, end);
                }
            }
        }
    }
    Ok(total)
}

pub fn norm(f: &PiecewiseExpPoly) -> f64 {
    inner_product(f, f).map(|z| z.re.max(0.0).sqrt()).unwrap_or(f64::NAN)
}

/// Probe points avoiding the breakpoints of all given functions:
/// [`PROBES_PER_PIECE`] half-step offset points per sub-piece of the common
/// refinement.
pub fn probe_points(omega: &IntervalUnion, functions: &[&PiecewiseExpPoly]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..omega.len() {
        let mut cuts = vec![omega.alpha(i), omega.beta(i)];
        for f in functions {
            if i < f.interval_count() {
                cuts.extend(f.breakpoints(i));
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * omega.scale());
        for w in cuts.windows(2) {
            let h = (w[1] - w[0]) / PROBES_PER_PIECE as f64;
            out.extend((0..PROBES_PER_PIECE).map(|k| w[0] + (k as f64 + 0.5) * h));
        }
    }
    out
}

/// Largest `|f(x) - g(x)|` over [`probe_points`].
pub fn max_difference(omega: &IntervalUnion, f: &PiecewiseExpPoly, g: &PiecewiseExpPoly) -> f64 {
    probe_points(omega, &[f, g])
        .into_iter()
        .map(|x| match (f.eval(x), g.eval(x)) {
            (Some(a), Some(b)) => (a - b).norm(),
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

//! Finite unions of open intervals and the set-level predicates on them:
//! lattice tiling, disjoint translates, translation congruence to an interval,
//! gap decompositions, reflection and interval moves.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for endpoint and length comparisons.
pub const ENDPOINT_RTOL: f64 = 1e-9;

/// Cap on the number of candidate length combinations in [`IntervalUnion::gap_decomposition`].
pub const GAP_COMBINATION_CAP: usize = 1_000_000;

/// Ordered disjoint open intervals `(alpha_i, beta_i)`.
///
/// Adjacent intervals may share an endpoint; they are kept as distinct
/// intervals and never merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalUnion {
    alphas: Vec<f64>,
    betas: Vec<f64>,
}

impl IntervalUnion {
    /// Validates and sorts a list of `(alpha, beta)` pairs.
    pub fn new(endpoints: &[(f64, f64)]) -> Result<Self> {
        if endpoints.is_empty() {
            return Err(Error::NoIntervals);
        }
        for (index, &(a, b)) in endpoints.iter().enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if b <= a {
                return Err(Error::EmptyInterval { index, alpha: a, beta: b });
            }
        }
        let mut order: Vec<usize> = (0..endpoints.len()).collect();
        order.sort_by(|&i, &j| endpoints[i].0.total_cmp(&endpoints[j].0));
        let scale = endpoints.iter().fold(1.0f64, |m, &(a, b)| m.max(a.abs()).max(b.abs()));
        let tol = ENDPOINT_RTOL * scale;
        for w in order.windows(2) {
            let (_, b_prev) = endpoints[w[0]];
            let (a_next, _) = endpoints[w[1]];
            if a_next < b_prev - tol {
                return Err(Error::OverlappingIntervals { first: w[0], second: w[1] });
            }
        }
        Ok(IntervalUnion {
            alphas: order.iter().map(|&i| endpoints[i].0).collect(),
            betas: order.iter().map(|&i| endpoints[i].1).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.alphas[i]
    }

    pub fn beta(&self, i: usize) -> f64 {
        self.betas[i]
    }

    pub fn endpoints(&self) -> Vec<(f64, f64)> {
        self.alphas.iter().copied().zip(self.betas.iter().copied()).collect()
    }

    pub fn length(&self, i: usize) -> f64 {
        self.betas[i] - self.alphas[i]
    }

    pub fn lengths(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.length(i)).collect()
    }

    /// Gaps `alpha_{i+1} - beta_i` between consecutive intervals.
    pub fn gaps(&self) -> Vec<f64> {
        (1..self.len()).map(|i| self.alphas[i] - self.betas[i - 1]).collect()
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.lengths().iter().sum()
    }

    pub fn min_length(&self) -> f64 {
        self.lengths().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max_length(&self) -> f64 {
        self.lengths().into_iter().fold(0.0, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        self.betas[self.len() - 1] - self.alphas[0]
    }

    /// `max(1, |alpha_1|, |beta_n|)`, the scale used for absolute tolerances.
    pub fn scale(&self) -> f64 {
        1f64.max(self.alphas[0].abs()).max(self.betas[self.len() - 1].abs())
    }

    /// Absolute endpoint tolerance.
    pub fn tol(&self) -> f64 {
        ENDPOINT_RTOL * self.scale()
    }

    /// Common length when all intervals have the same length (within [`Self::tol`]).
    pub fn common_length(&self) -> Option<f64> {
        let ls = self.lengths();
        let l0 = ls[0];
        ls.iter().all(|l| (l - l0).abs() <= self.tol()).then_some(l0)
    }

    /// Index of the open interval containing `x`.
    pub fn locate(&self, x: f64) -> Option<usize> {
        (0..self.len()).find(|&i| self.alphas[i] < x && x < self.betas[i])
    }

    /// Index of the interval whose closure contains `x`, preferring the
    /// interval `x` opens on a shared endpoint.
    pub fn locate_closed(&self, x: f64) -> Option<usize> {
        let mut hit = None;
        for i in 0..self.len() {
            if self.alphas[i] <= x && x <= self.betas[i] {
                hit = Some(i);
                if x < self.betas[i] {
                    break;
                }
            }
        }
        hit
    }

    /// All multisets of interval lengths (repetition allowed) summing to `gap`
    /// within `tol`. Equal lengths are collapsed so each multiset appears once.
    pub fn gap_decomposition(&self, gap: f64, tol: f64) -> Result<Vec<Vec<f64>>> {
        if !(gap > 0.0) || !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("gap ({gap}) and tol ({tol}) must be positive")));
        }
        let mut distinct: Vec<f64> = Vec::new();
        for l in self.lengths() {
            if !distinct.iter().any(|d| (d - l).abs() <= self.tol()) {
                distinct.push(l);
            }
        }
        distinct.sort_by(f64::total_cmp);

        // one counter per distinct length; leaves are the multisets
        #[allow(clippy::too_many_arguments)]
        fn search(
            values: &[f64],
            idx: usize,
            sum: f64,
            gap: f64,
            tol: f64,
            current: &mut Vec<f64>,
            visited: &mut usize,
            found: &mut Vec<Vec<f64>>,
        ) -> Result<()> {
            *visited += 1;
            if *visited > GAP_COMBINATION_CAP {
                return Err(Error::GuardExceeded {
                    what: "gap decomposition candidates",
                    count: *visited,
                    cap: GAP_COMBINATION_CAP,
                    estimate: f64::NAN,
                });
            }
            if idx == values.len() {
                if !current.is_empty() && (sum - gap).abs() <= tol {
                    found.push(current.clone());
                }
                return Ok(());
            }
            let before = current.len();
            let mut s = sum;
            while s <= gap + tol {
                search(values, idx + 1, s, gap, tol, current, visited, found)?;
                current.push(values[idx]);
                s += values[idx];
            }
            current.truncate(before);
            Ok(())
        }

        let mut found = Vec::new();
        let mut visited = 0;
        search(&distinct, 0, 0.0, gap, tol, &mut Vec::new(), &mut visited, &mut found)?;
        found.iter_mut().for_each(|m| m.sort_by(f64::total_cmp));
        found.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        found.dedup();
        Ok(found)
    }

    /// Reduces every interval modulo `a` and checks the pieces cover `[0, a)`
    /// exactly once up to measure zero.
    pub fn tiles_by_lattice(&self, a: f64, tol: f64) -> Result<TilingCertificate> {
        if !(a > 0.0) {
            return Err(Error::InvalidArgument(format!("lattice period must be positive, got {a}")));
        }
        let mut pieces = Vec::new();
        for i in 0..self.len() {
            let mut start = self.alphas[i].rem_euclid(a);
            if a - start <= tol {
                start = 0.0;
            }
            let mut remaining = self.length(i);
            while remaining > tol {
                let take = remaining.min(a - start);
                pieces.push(ModPiece { interval: i, start, end: start + take });
                remaining -= take;
                start = 0.0;
            }
        }
        let mut cuts: Vec<f64> = vec![0.0, a];
        for p in &pieces {
            cuts.push(p.start);
            cuts.push(p.end);
        }
        cuts.sort_by(f64::total_cmp);
        let mut overlaps: Vec<(f64, f64)> = Vec::new();
        let mut holes: Vec<(f64, f64)> = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi - lo <= tol {
                continue;
            }
            let mid = 0.5 * (lo + hi);
            let cover = pieces.iter().filter(|p| p.start < mid && mid < p.end).count();
            let target = match cover {
                0 => &mut holes,
                1 => continue,
                _ => &mut overlaps,
            };
            match target.last_mut() {
                Some(last) if (last.1 - lo).abs() <= tol => last.1 = hi,
                _ => target.push((lo, hi)),
            }
        }
        pieces.sort_by(|p, q| p.start.total_cmp(&q.start));
        Ok(TilingCertificate { period: a, tiles: overlaps.is_empty() && holes.is_empty(), pieces, overlaps, holes })
    }

    /// True iff `Omega ∩ (Omega + k a)` is null for every nonzero integer `k`.
    pub fn translates_disjoint(&self, a: f64) -> Result<bool> {
        if a == 0.0 || !a.is_finite() {
            return Err(Error::InvalidArgument(format!("translation step must be nonzero and finite, got {a}")));
        }
        let a = a.abs();
        let tol = self.tol();
        let mut k = 1.0;
        while k * a < self.diameter() {
            if self.overlap_with_shift(k * a) > tol {
                return Ok(false);
            }
            k += 1.0;
        }
        Ok(true)
    }

    /// Measure of `Omega ∩ (Omega + shift)`.
    pub fn overlap_with_shift(&self, shift: f64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.len() {
            for j in 0..self.len() {
                let lo = self.alphas[i].max(self.alphas[j] + shift);
                let hi = self.betas[i].min(self.betas[j] + shift);
                if hi > lo {
                    total += hi - lo;
                }
            }
        }
        total
    }

    /// Searches for shifts in `aZ`, one per whole interval, carrying `Omega`
    /// onto `(alpha_1, alpha_1 + L)`.
    pub fn translation_congruence_to_interval(&self, a: f64, tol: f64) -> Result<Option<CongruenceMap>> {
        if !(a > 0.0) {
            return Err(Error::InvalidArgument(format!("modulus must be positive, got {a}")));
        }
        let target = (self.alphas[0], self.alphas[0] + self.measure());
        let mut used = vec![false; self.len()];
        let mut placed: Vec<CongruencePiece> = Vec::new();
        if self.fill_from(target.0, target.1, a, tol, &mut used, &mut placed) {
            placed.sort_by_key(|p| p.interval);
            Ok(Some(CongruenceMap { modulus: a, target, pieces: placed }))
        } else {
            Ok(None)
        }
    }

    fn fill_from(
        &self,
        pos: f64,
        end: f64,
        a: f64,
        tol: f64,
        used: &mut [bool],
        placed: &mut Vec<CongruencePiece>,
    ) -> bool {
        if used.iter().all(|&u| u) {
            return (pos - end).abs() <= tol;
        }
        for i in 0..self.len() {
            if used[i] {
                continue;
            }
            let k = ((pos - self.alphas[i]) / a).round();
            let shift = k * a;
            if (self.alphas[i] + shift - pos).abs() > tol {
                continue;
            }
            used[i] = true;
            placed.push(CongruencePiece { interval: i, multiple: k as i64, shift });
            if self.fill_from(self.betas[i] + shift, end, a, tol, used, placed) {
                return true;
            }
            placed.pop();
            used[i] = false;
        }
        false
    }

    /// `-Omega`, re-sorted.
    pub fn reflect(&self) -> IntervalUnion {
        let n = self.len();
        IntervalUnion {
            alphas: (0..n).rev().map(|i| -self.betas[i]).collect(),
            betas: (0..n).rev().map(|i| -self.alphas[i]).collect(),
        }
    }

    /// Moves interval `moved` to the right end of interval `anchor`, producing
    /// `∪_{k ≠ anchor, moved} (alpha_k, beta_k) ∪ (alpha_anchor, alpha_anchor + l_anchor + l_moved)`.
    pub fn move_interval(&self, moved: usize, anchor: usize) -> Result<IntervalUnion> {
        for idx in [moved, anchor] {
            if idx >= self.len() {
                return Err(Error::IndexOutOfRange { index: idx, len: self.len() });
            }
        }
        if moved == anchor {
            return Err(Error::InvalidArgument("cannot move an interval onto itself".into()));
        }
        let lo = self.alphas[anchor];
        let hi = lo + self.length(anchor) + self.length(moved);
        let tol = self.tol();
        let mut out = Vec::with_capacity(self.len() - 1);
        for k in 0..self.len() {
            if k == moved || k == anchor {
                continue;
            }
            let ov = hi.min(self.betas[k]) - lo.max(self.alphas[k]);
            if ov > tol {
                return Err(Error::MoveCollision { moved, anchor, hit: k });
            }
            out.push((self.alphas[k], self.betas[k]));
        }
        out.push((lo, hi));
        IntervalUnion::new(&out)
    }
}

/// One interval reduced modulo the lattice period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModPiece {
    pub interval: usize,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TilingCertificate {
    pub period: f64,
    pub tiles: bool,
    pub pieces: Vec<ModPiece>,
    /// Sub-intervals of `[0, a)` covered more than once.
    pub overlaps: Vec<(f64, f64)>,
    /// Sub-intervals of `[0, a)` not covered.
    pub holes: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CongruencePiece {
    pub interval: usize,
    pub multiple: i64,
    pub shift: f64,
}

/// Whole-interval translation congruence modulo `modulus * Z` onto `target`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CongruenceMap {
    pub modulus: f64,
    pub target: (f64, f64),
    pub pieces: Vec<CongruencePiece>,
}

impl CongruenceMap {
    /// Images of the source intervals, sorted by position.
    pub fn images(&self, omega: &IntervalUnion) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .pieces
            .iter()
            .map(|p| (omega.alpha(p.interval) + p.shift, omega.beta(p.interval) + p.shift))
            .collect();
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega(e: &[(f64, f64)]) -> IntervalUnion {
        IntervalUnion::new(e).unwrap()
    }

    #[test]
    fn construction_and_metrics() {
        let o = omega(&[(0.0, 1.0)]);
        assert_eq!((o.len(), o.measure()), (1, 1.0));
        let o = omega(&[(2.0, 3.0), (0.0, 1.0)]);
        assert_eq!(o.lengths(), vec![1.0, 1.0]);
        assert_eq!(o.gaps(), vec![1.0]);
        assert_eq!(o.measure(), 2.0);
        assert_eq!(o.min_length(), 1.0);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(IntervalUnion::new(&[(0.0, 1.0), (0.5, 2.0)]), Err(Error::OverlappingIntervals { .. })));
        assert!(matches!(IntervalUnion::new(&[(1.0, 1.0)]), Err(Error::EmptyInterval { .. })));
        assert!(matches!(IntervalUnion::new(&[(0.0, f64::NAN)]), Err(Error::NonFinite { .. })));
        assert!(matches!(IntervalUnion::new(&[]), Err(Error::NoIntervals)));
        // shared endpoints are fine and stay separate
        assert_eq!(omega(&[(0.0, 1.0), (1.0, 2.0)]).len(), 2);
    }

    #[test]
    fn gap_decomposition_cases() {
        let o = omega(&[(0.0, 1.0), (2.0, 3.0)]);
        assert_eq!(o.gap_decomposition(1.0, 1e-9).unwrap(), vec![vec![1.0]]);
        let o = omega(&[(0.0, 1.0), (1.5, 2.5)]);
        assert!(o.gap_decomposition(0.5, 1e-9).unwrap().is_empty());
        let o = omega(&[(0.0, 1.0), (1.5, 2.2), (4.0, 5.0)]);
        assert!(o.gap_decomposition(1.8, 1e-9).unwrap().is_empty());
        assert!(o.gap_decomposition(0.0, 1e-9).is_err());
    }

    #[test]
    fn gap_decomposition_with_repetition() {
        let o = omega(&[(0.0, 1.0), (1.5, 2.0), (5.0, 6.0)]);
        // 2 = 1+1 = 1+0.5+0.5 = 0.5*4
        let got = o.gap_decomposition(2.0, 1e-9).unwrap();
        assert_eq!(got, vec![vec![0.5, 0.5, 0.5, 0.5], vec![0.5, 0.5, 1.0], vec![1.0, 1.0]]);
    }

    #[test]
    fn gap_decomposition_guard() {
        let o = omega(&[(0.0, 1e-3), (1.0, 1.0011), (2.0, 2.0013)]);
        assert!(matches!(o.gap_decomposition(5.0, 1e-12), Err(Error::GuardExceeded { .. })));
    }

    #[test]
    fn lattice_tiling() {
        assert!(omega(&[(0.0, 1.0), (1.0, 2.0)]).tiles_by_lattice(2.0, 1e-9).unwrap().tiles);
        let cert = omega(&[(0.0, 1.0), (2.0, 3.0)]).tiles_by_lattice(2.0, 1e-9).unwrap();
        assert!(!cert.tiles);
        assert_eq!(cert.overlaps, vec![(0.0, 1.0)]);
        assert_eq!(cert.holes, vec![(1.0, 2.0)]);
        assert!(omega(&[(0.0, 1.0), (3.0, 4.0)]).tiles_by_lattice(2.0, 1e-9).unwrap().tiles);
        // wrap-around piece
        assert!(omega(&[(1.5, 2.5)]).tiles_by_lattice(1.0, 1e-9).unwrap().tiles);
    }

    #[test]
    fn disjoint_translates() {
        assert!(omega(&[(0.0, 1.0), (3.0, 4.0)]).translates_disjoint(2.0).unwrap());
        assert!(!omega(&[(0.0, 1.0), (1.5, 2.5)]).translates_disjoint(2.0).unwrap());
        assert!(omega(&[(0.0, 1.0)]).translates_disjoint(1.0).unwrap());
        assert!(omega(&[(0.0, 1.0), (3.0, 4.0)]).translates_disjoint(-2.0).unwrap());
    }

    #[test]
    fn congruence_search() {
        let o = omega(&[(0.0, 1.0), (3.0, 4.0)]);
        let map = o.translation_congruence_to_interval(2.0, 1e-9).unwrap().unwrap();
        assert_eq!(map.pieces.len(), 2);
        assert_eq!((map.pieces[0].interval, map.pieces[0].shift), (0, 0.0));
        assert_eq!((map.pieces[1].interval, map.pieces[1].shift), (1, -2.0));
        assert_eq!(map.images(&o), vec![(0.0, 1.0), (1.0, 2.0)]);

        let map = omega(&[(0.0, 2.0)]).translation_congruence_to_interval(2.0, 1e-9).unwrap().unwrap();
        assert_eq!(map.pieces[0].shift, 0.0);

        assert!(omega(&[(0.0, 1.0), (2.0, 3.0)]).translation_congruence_to_interval(2.0, 1e-9).unwrap().is_none());
    }

    #[test]
    fn reflection() {
        assert_eq!(omega(&[(0.0, 1.0)]).reflect(), omega(&[(-1.0, 0.0)]));
        assert_eq!(omega(&[(0.0, 1.0), (2.0, 3.0)]).reflect().endpoints(), vec![(-3.0, -2.0), (-1.0, 0.0)]);
    }

    #[test]
    fn moves() {
        let o = omega(&[(0.0, 1.0), (3.0, 4.0)]);
        assert_eq!(o.move_interval(1, 0).unwrap().endpoints(), vec![(0.0, 2.0)]);
        let o = omega(&[(0.0, 1.0), (2.0, 3.0), (5.0, 6.0)]);
        assert_eq!(o.move_interval(2, 1).unwrap().endpoints(), vec![(0.0, 1.0), (2.0, 4.0)]);
        let o = omega(&[(0.0, 1.0), (1.5, 2.0)]);
        assert_eq!(o.move_interval(1, 0).unwrap().endpoints(), vec![(0.0, 1.5)]);
        let o = omega(&[(0.0, 1.0), (1.5, 2.0), (3.0, 4.0)]);
        assert!(matches!(o.move_interval(2, 0), Err(Error::MoveCollision { hit: 1, .. })));
    }
}

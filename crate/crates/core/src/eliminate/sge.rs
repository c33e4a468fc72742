//! Modified structured Gaussian elimination of `D`.
//!
//! Rows are processed in order: normalize, densify, then repeatedly cancel
//! the head against the unique earlier pivot sharing its leading column
//! until no pivot matches (each cancellation moves the head strictly
//! right). The surviving row is sparsified, renormalized, and becomes a new
//! pivot. `D'` keeps one slot per input row; rows that vanish stay empty, so
//! the rank is the number of nonempty slots and pivot heads are pairwise
//! distinct.
//!
//! The row engine keeps the pivot lookup sorted by leading column; the
//! multiline engine appends pivots unsorted in discovery order, pairing
//! consecutive pivots into multiline vectors, and reduces `D`'s rows in
//! pairs. Both produce identical `D'`.

use std::collections::{BTreeMap, HashMap};

use crate::field::Prime;
use crate::matrix::{SparseRow};
use crate::multiline::{axpy1, to_multilines, DenseRow, MultilineVector};

/// Scales a row so its head value is 1.
pub(crate) fn normalize_row(row: &mut SparseRow, p: Prime) {
    if let Some(&(_, head)) = row.first() {
        if head != 1 {
            let inv = p.inv(head).expect("nonzero head");
            for e in row.iter_mut() {
                e.1 = p.mul(inv, e.1);
            }
        }
    }
}

/// Row-engine structured elimination. Returns `(D', rank_D)` with `D'` in
/// input row order (vanished rows empty).
pub fn sge_d(rows: &[SparseRow], width: u32, p: Prime) -> (Vec<SparseRow>, usize) {
    let n = rows.len();
    let mut out: Vec<SparseRow> = vec![Vec::new(); n];
    // head column -> index into `out`, kept sorted by head column
    let mut pivots: BTreeMap<u32, usize> = BTreeMap::new();
    let mut dense = DenseRow::new(width as usize);
    let mut rank = 0usize;
    for (i, row) in rows.iter().enumerate() {
        if row.is_empty() {
            continue;
        }
        let mut row = row.clone();
        normalize_row(&mut row, p);
        dense.load(&row, 0);
        let mut cursor = row[0].0 as usize;
        let settled = loop {
            let mut head = None;
            while cursor < width as usize {
                let v = dense.value_at(cursor, p);
                if v != 0 {
                    head = Some((cursor as u32, v));
                    break;
                }
                cursor += 1;
            }
            let Some((h, hv)) = head else {
                break None;
            };
            match pivots.get(&h) {
                Some(&pi) => {
                    // cancel the head; it moves strictly right
                    super::axpy_row(dense.as_mut_slice(), p.neg(hv), &out[pi], 0);
                }
                None => break Some(h),
            }
        };
        if let Some(head) = settled {
            let mut reduced = dense.to_sparse(p, 0);
            normalize_row(&mut reduced, p);
            debug_assert_eq!(reduced[0].0, head);
            pivots.insert(head, i);
            out[i] = reduced;
            rank += 1;
        }
    }
    (out, rank)
}

/// Multiline-engine structured elimination: identical `(D', rank_D)` to
/// [`sge_d`].
pub fn sge_d_multiline(rows: &[SparseRow], width: u32, p: Prime) -> (Vec<SparseRow>, usize) {
    let n = rows.len();
    let mut out: Vec<SparseRow> = vec![Vec::new(); n];
    let mut pivot_mls: Vec<MultilineVector> = Vec::new();
    // head column -> (multiline index, line 0 or 1); insertion order is
    // discovery order, never sorted
    let mut heads: HashMap<u32, (usize, u8)> = HashMap::new();
    // a pivot multiline still waiting for its second line
    let mut pending: Option<(usize, SparseRow)> = None;
    let mut dense = DenseRow::new(width as usize);
    let mut rank = 0usize;

    let input_mls = to_multilines(rows);
    for (t, ml) in input_mls.iter().enumerate() {
        let (r1, r2) = ml.expand();
        let second = if ml.is_single() { None } else { Some((2 * t + 1, r2)) };
        for (i, row) in std::iter::once((2 * t, r1)).chain(second) {
            if row.is_empty() {
                continue;
            }
            let mut row = row;
            normalize_row(&mut row, p);
            dense.load(&row, 0);
            let mut cursor = row[0].0 as usize;
            let settled = loop {
                let mut head = None;
                while cursor < width as usize {
                    let v = dense.value_at(cursor, p);
                    if v != 0 {
                        head = Some((cursor as u32, v));
                        break;
                    }
                    cursor += 1;
                }
                let Some((h, hv)) = head else {
                    break None;
                };
                match heads.get(&h) {
                    Some(&(ml_idx, line)) => {
                        let lam = p.neg(hv);
                        if line == 0 {
                            axpy1(&mut dense, lam, 0, &pivot_mls[ml_idx]);
                        } else {
                            axpy1(&mut dense, 0, lam, &pivot_mls[ml_idx]);
                        }
                    }
                    None => break Some(h),
                }
            };
            if let Some(head) = settled {
                let mut reduced = dense.to_sparse(p, 0);
                normalize_row(&mut reduced, p);
                match pending.take() {
                    Some((ml_idx, first)) => {
                        pivot_mls[ml_idx] = MultilineVector::from_rows(&first, &reduced);
                        heads.insert(head, (ml_idx, 1));
                    }
                    None => {
                        pivot_mls.push(MultilineVector::from_single(&reduced));
                        let ml_idx = pivot_mls.len() - 1;
                        heads.insert(head, (ml_idx, 0));
                        pending = Some((ml_idx, reduced.clone()));
                    }
                }
                out[i] = reduced;
                rank += 1;
            }
        }
    }
    (out, rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SparseMatrix;
    use crate::oracle::{dense_rank, dense_rref};

    fn p(v: u16) -> Prime {
        Prime::new(v).unwrap()
    }

    fn rng(seed: u64) -> impl FnMut(u64) -> u64 {
        let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
        move |m: u64| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state % m
        }
    }

    fn random_rows(
        next: &mut impl FnMut(u64) -> u64,
        nrows: usize,
        ncols: u32,
        q: u16,
        density_pct: u64,
    ) -> Vec<SparseRow> {
        let mut rows = Vec::with_capacity(nrows);
        for _ in 0..nrows {
            let mut row: SparseRow = Vec::new();
            for c in 0..ncols {
                if next(100) < density_pct {
                    row.push((c, next(u64::from(q) - 1) as u16 + 1));
                }
            }
            rows.push(row);
        }
        rows
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let rows = vec![Vec::new(); 4];
        let (dp, rank) = sge_d(&rows, 6, p(7));
        assert_eq!(rank, 0);
        assert!(dp.iter().all(|r| r.is_empty()));
        let (dp, rank) = sge_d_multiline(&rows, 6, p(7));
        assert_eq!(rank, 0);
        assert!(dp.iter().all(|r| r.is_empty()));
    }

    #[test]
    fn needs_normalization() {
        // D = [[0,2],[3,0]] mod 7: heads at columns 1 and 0, rank 2
        let rows: Vec<SparseRow> = vec![vec![(1, 2)], vec![(0, 3)]];
        let (dp, rank) = sge_d(&rows, 2, p(7));
        assert_eq!(rank, 2);
        assert_eq!(dp[0], vec![(1, 1)]);
        assert_eq!(dp[1], vec![(0, 1)]);
        assert_eq!(dense_rank(vec![vec![0, 2], vec![3, 0]], 7), 2);
        assert_eq!(sge_d_multiline(&rows, 2, p(7)), (dp, rank));
    }

    #[test]
    fn heads_pairwise_distinct_and_rank_matches_oracle() {
        let mut next = rng(77);
        for trial in 0..200 {
            let q = [3u16, 251, 65521][trial % 3];
            let nrows = 1 + next(60) as usize;
            let ncols = 1 + next(80) as u32;
            let density = 5 + next(30);
            let rows = random_rows(&mut next, nrows, ncols, q, density);
            let m = SparseMatrix::from_rows(ncols, p(q), rows.clone()).unwrap();

            let (dp, rank) = sge_d(&rows, ncols, p(q));
            assert_eq!(rank, dense_rank(m.to_dense(), q), "rank, trial {trial}");
            let mut heads: Vec<u32> =
                dp.iter().filter_map(|r| r.first().map(|&(c, _)| c)).collect();
            let total = heads.len();
            heads.sort_unstable();
            heads.dedup();
            assert_eq!(heads.len(), total, "duplicate heads, trial {trial}");

            // row space is preserved: canonical RREF of D' equals RREF of D
            let dp_mat = SparseMatrix::from_rows(ncols, p(q), dp.clone()).unwrap();
            assert_eq!(
                dense_rref(dp_mat.to_dense(), q),
                dense_rref(m.to_dense(), q),
                "row space, trial {trial}"
            );

            assert_eq!(sge_d_multiline(&rows, ncols, p(q)), (dp, rank), "ml, trial {trial}");
        }
    }

    #[test]
    fn idempotent_up_to_nothing() {
        // re-running on D' changes nothing: all heads are distinct already
        let mut next = rng(9);
        let rows = random_rows(&mut next, 20, 25, 251, 20);
        let (dp, rank) = sge_d(&rows, 25, p(251));
        let (dp2, rank2) = sge_d(&dp, 25, p(251));
        assert_eq!(rank, rank2);
        assert_eq!(dp, dp2);
    }

    #[test]
    fn duplicate_rows_cancel() {
        let row: SparseRow = vec![(0, 2), (3, 5)];
        let rows = vec![row.clone(), row.clone(), row];
        let (dp, rank) = sge_d(&rows, 4, p(7));
        assert_eq!(rank, 1);
        assert!(dp[1].is_empty() && dp[2].is_empty());
    }
}

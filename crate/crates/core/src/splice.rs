//! Splicing: pivot analysis, quadrant extraction, and reconstruction.
//!
//! A column is a pivot column when it is the leading column of at least one
//! row; among the candidate rows the lightest one (fewest nonzeros, ties by
//! lowest row index) becomes the pivot row, which keeps the triangular
//! quadrant `A` as sparse as possible. Reordering pivot columns first and
//! pivot rows on top cuts the matrix into
//!
//! ```text
//!     [ A B ]     A: npiv x npiv, upper triangular, unit diagonal
//!     [ C D ]     D: the part that still needs Gaussian elimination
//! ```
//!
//! `reconstruct` undoes the column permutation on the eliminated quadrants
//! and sorts rows by leading column, yielding the echelon form of the
//! original matrix.

use std::fmt;

use crate::field::Prime;
use crate::matrix::{leading, row_weight, SparseMatrix, SparseRow};

/// The permutations chosen by [`analyze`]: which columns are pivot columns,
/// which row serves each of them, and where every row and column lands.
#[derive(Debug, Clone)]
pub struct PivotMap {
    npiv: usize,
    nrows: usize,
    ncols: u32,
    /// New column index -> original column index (pivot columns first, in
    /// ascending original order, then non-pivot columns in original order).
    col_old_from_new: Vec<u32>,
    /// Original column index -> new column index.
    col_new_from_old: Vec<u32>,
    /// For pivot column `i` (in pivot order), the chosen source row.
    pivot_rows: Vec<usize>,
    /// Remaining rows in original relative order.
    nonpivot_rows: Vec<usize>,
}

impl PivotMap {
    #[inline]
    pub fn npiv(&self) -> usize {
        self.npiv
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> u32 {
        self.ncols
    }

    /// Original column for a spliced column index.
    #[inline]
    pub fn old_col(&self, new: u32) -> u32 {
        self.col_old_from_new[new as usize]
    }

    /// Spliced column for an original column index.
    #[inline]
    pub fn new_col(&self, old: u32) -> u32 {
        self.col_new_from_old[old as usize]
    }

    #[inline]
    pub fn pivot_rows(&self) -> &[usize] {
        &self.pivot_rows
    }

    #[inline]
    pub fn nonpivot_rows(&self) -> &[usize] {
        &self.nonpivot_rows
    }
}

/// Inconsistent matrix/map pair handed to [`split`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpliceError {
    pub row: usize,
    pub detail: &'static str,
}

impl fmt::Display for SpliceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "splice failed at row {}: {}", self.row, self.detail)
    }
}

impl std::error::Error for SpliceError {}

/// The four quadrants plus the permutations that produced them. Quadrant
/// columns are local: `A`/`C` columns index the pivot-column space, `B`/`D`
/// columns the non-pivot space.
#[derive(Debug, Clone)]
pub struct Splice {
    pub a: SparseMatrix,
    pub b: SparseMatrix,
    pub c: SparseMatrix,
    pub d: SparseMatrix,
    pub map: PivotMap,
}

/// Scales every nonempty row so its leading value is 1.
pub fn normalize_rows(m: &SparseMatrix) -> SparseMatrix {
    let p = m.modulus();
    let rows = m
        .rows()
        .iter()
        .map(|row| match leading(row) {
            Some((_, 1)) | None => row.clone(),
            Some((_, head)) => {
                let inv = p.inv(head).expect("nonzero head");
                row.iter().map(|&(c, v)| (c, p.mul(inv, v))).collect()
            }
        })
        .collect();
    SparseMatrix::from_rows(m.ncols(), p, rows).expect("scaling preserves structure")
}

/// Chooses pivot columns and rows, and the induced permutations.
///
/// Every column that leads at least one row becomes a pivot column; its
/// pivot row is the candidate of least weight, ties broken by lowest row
/// index. Zero rows always land in the non-pivot set.
pub fn analyze(m: &SparseMatrix) -> PivotMap {
    let ncols = m.ncols() as usize;
    // per column: best (weight, row) candidate
    let mut best: Vec<Option<(usize, usize)>> = vec![None; ncols];
    for (i, row) in m.rows().iter().enumerate() {
        if let Some((col, _)) = leading(row) {
            let cand = (row_weight(row), i);
            let slot = &mut best[col as usize];
            if slot.map_or(true, |cur| cand < cur) {
                *slot = Some(cand);
            }
        }
    }

    let mut pivot_cols: Vec<u32> = Vec::new();
    let mut pivot_rows: Vec<usize> = Vec::new();
    for (col, slot) in best.iter().enumerate() {
        if let Some((_, row)) = slot {
            pivot_cols.push(col as u32);
            pivot_rows.push(*row);
        }
    }
    let npiv = pivot_cols.len();

    let mut is_pivot_row = vec![false; m.nrows()];
    for &r in &pivot_rows {
        is_pivot_row[r] = true;
    }
    let nonpivot_rows: Vec<usize> =
        (0..m.nrows()).filter(|&r| !is_pivot_row[r]).collect();

    let mut is_pivot_col = vec![false; ncols];
    for &c in &pivot_cols {
        is_pivot_col[c as usize] = true;
    }
    let mut col_old_from_new = Vec::with_capacity(ncols);
    col_old_from_new.extend_from_slice(&pivot_cols);
    col_old_from_new.extend((0..ncols as u32).filter(|&c| !is_pivot_col[c as usize]));
    let mut col_new_from_old = vec![0u32; ncols];
    for (new, &old) in col_old_from_new.iter().enumerate() {
        col_new_from_old[old as usize] = new as u32;
    }

    PivotMap {
        npiv,
        nrows: m.nrows(),
        ncols: m.ncols(),
        col_old_from_new,
        col_new_from_old,
        pivot_rows,
        nonpivot_rows,
    }
}

/// Extracts the quadrants under the permutations of `map`. Expects the
/// row-normalized matrix that `map` was computed from.
pub fn split(m: &SparseMatrix, map: &PivotMap) -> Result<Splice, SpliceError> {
    if m.nrows() != map.nrows || m.ncols() != map.ncols {
        return Err(SpliceError { row: 0, detail: "matrix dimensions disagree with map" });
    }
    let p = m.modulus();
    let npiv = map.npiv;
    let ncols_right = map.ncols - npiv as u32;

    let split_row = |row: &SparseRow| -> (SparseRow, SparseRow) {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for &(c, v) in row {
            let nc = map.new_col(c);
            if nc < npiv as u32 {
                left.push((nc, v));
            } else {
                right.push((nc - npiv as u32, v));
            }
        }
        // the permutation is order-preserving inside each class, but the
        // two classes interleave, so re-sort cheaply
        left.sort_unstable_by_key(|&(c, _)| c);
        right.sort_unstable_by_key(|&(c, _)| c);
        (left, right)
    };

    let mut a_rows = Vec::with_capacity(npiv);
    let mut b_rows = Vec::with_capacity(npiv);
    for (i, &r) in map.pivot_rows.iter().enumerate() {
        let row = m.row(r);
        match leading(row) {
            Some((col, 1)) if map.new_col(col) == i as u32 => {}
            Some((_, 1)) => {
                return Err(SpliceError { row: r, detail: "pivot row leads at the wrong column" })
            }
            _ => return Err(SpliceError { row: r, detail: "pivot row is not monic" }),
        }
        let (left, right) = split_row(row);
        debug_assert!(left.first() == Some(&(i as u32, 1)));
        a_rows.push(left);
        b_rows.push(right);
    }

    let mut c_rows = Vec::with_capacity(map.nonpivot_rows.len());
    let mut d_rows = Vec::with_capacity(map.nonpivot_rows.len());
    for &r in &map.nonpivot_rows {
        let (left, right) = split_row(m.row(r));
        c_rows.push(left);
        d_rows.push(right);
    }

    let mk = |ncols: u32, rows: Vec<SparseRow>| {
        SparseMatrix::from_rows(ncols, p, rows).expect("splitting preserves structure")
    };
    Ok(Splice {
        a: mk(npiv as u32, a_rows),
        b: mk(ncols_right, b_rows),
        c: mk(npiv as u32, c_rows),
        d: mk(ncols_right, d_rows),
        map: map.clone(),
    })
}

impl Splice {
    /// Permutes the quadrants back into the original row and column order.
    /// For a splice of `normalize_rows(M)` this reproduces that matrix
    /// exactly.
    pub fn assemble(&self) -> SparseMatrix {
        let map = &self.map;
        let p = self.a.modulus();
        let npiv = map.npiv;
        let mut rows: Vec<SparseRow> = vec![Vec::new(); map.nrows];
        for (i, &r) in map.pivot_rows.iter().enumerate() {
            rows[r] = merge_back(self.a.row(i), self.b.row(i), map, npiv);
        }
        for (i, &r) in map.nonpivot_rows.iter().enumerate() {
            rows[r] = merge_back(self.c.row(i), self.d.row(i), map, npiv);
        }
        SparseMatrix::from_rows(map.ncols, p, rows).expect("permutation preserves structure")
    }
}

fn merge_back(left: &SparseRow, right: &SparseRow, map: &PivotMap, npiv: usize) -> SparseRow {
    let mut row: SparseRow = Vec::with_capacity(left.len() + right.len());
    row.extend(left.iter().map(|&(c, v)| (map.old_col(c), v)));
    row.extend(right.iter().map(|&(c, v)| (map.old_col(c + npiv as u32), v)));
    row.sort_unstable_by_key(|&(c, _)| c);
    row
}

/// Reassembles the echelon form in original column order.
///
/// `top_a = None` means the left part of the top block is the identity
/// (after the triangular solve); `Some(a)` passes the raw triangular `A`
/// through (the order of operations that skips the solve). `dprime` holds
/// the eliminated lower-right quadrant. Rows come out sorted by strictly
/// increasing leading column with zero rows dropped, so the row count is
/// the rank.
pub fn reconstruct(
    top_a: Option<&[SparseRow]>,
    top_b: &[SparseRow],
    dprime: &[SparseRow],
    map: &PivotMap,
    p: Prime,
) -> SparseMatrix {
    let npiv = map.npiv;
    let mut rows: Vec<SparseRow> = Vec::with_capacity(npiv + dprime.len());
    for i in 0..npiv {
        let left: SparseRow = match top_a {
            Some(a) => a[i].clone(),
            None => vec![(i as u32, 1u16)],
        };
        rows.push(merge_back(&left, &top_b[i], map, npiv));
    }
    for row in dprime {
        if row.is_empty() {
            continue;
        }
        rows.push(merge_back(&Vec::new(), row, map, npiv));
    }
    rows.sort_by_key(|r| leading(r).map(|(c, _)| c).unwrap_or(u32::MAX));
    debug_assert!(rows.windows(2).all(|w| {
        match (leading(&w[0]), leading(&w[1])) {
            (Some((c0, _)), Some((c1, _))) => c0 < c1,
            _ => false,
        }
    }));
    SparseMatrix::from_rows(map.ncols, p, rows).expect("reconstruction preserves structure")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Prime;
    use crate::oracle;

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

    fn random_matrix(
        next: &mut impl FnMut(u64) -> u64,
        nrows: usize,
        ncols: u32,
        q: u16,
        density_pct: u64,
    ) -> SparseMatrix {
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
        SparseMatrix::from_rows(ncols, p(q), rows).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let m = SparseMatrix::from_rows(2, p(7), vec![vec![(0, 3), (1, 6)]]).unwrap();
        assert_eq!(normalize_rows(&m).row(0), &vec![(0, 1), (1, 2)]);
        let monic = SparseMatrix::from_rows(2, p(7), vec![vec![(0, 1), (1, 5)]]).unwrap();
        assert_eq!(normalize_rows(&monic), monic);
        let zero = SparseMatrix::zero(2, 2, p(7));
        assert_eq!(normalize_rows(&zero), zero);
    }

    #[test]
    fn analyze_identity() {
        let m = SparseMatrix::identity(5, p(7));
        let map = analyze(&m);
        assert_eq!(map.npiv(), 5);
        for i in 0..5u32 {
            assert_eq!(map.old_col(i), i);
            assert_eq!(map.pivot_rows()[i as usize], i as usize);
        }
        assert!(map.nonpivot_rows().is_empty());
    }

    #[test]
    fn analyze_tie_breaks_by_row_index() {
        // both rows lead at column 0 with weight 2; row 0 wins
        let m = SparseMatrix::from_rows(
            2,
            p(7),
            vec![vec![(0, 1), (1, 2)], vec![(0, 1), (1, 3)]],
        )
        .unwrap();
        let map = analyze(&m);
        assert_eq!(map.npiv(), 1);
        assert_eq!(map.pivot_rows(), &[0]);
        assert_eq!(map.nonpivot_rows(), &[1]);
    }

    #[test]
    fn analyze_prefers_light_rows() {
        let m = SparseMatrix::from_rows(
            3,
            p(7),
            vec![vec![(0, 1), (1, 2), (2, 3)], vec![(0, 1), (2, 1)]],
        )
        .unwrap();
        let map = analyze(&m);
        assert_eq!(map.pivot_rows(), &[1]);
    }

    #[test]
    fn analyze_counts_distinct_leading_columns() {
        let mut next = rng(42);
        for _ in 0..20 {
            let m = random_matrix(&mut next, 40, 60, 251, 8);
            let map = analyze(&m);
            let mut lead_cols: Vec<u32> = m
                .rows()
                .iter()
                .filter_map(|r| leading(r).map(|(c, _)| c))
                .collect();
            lead_cols.sort_unstable();
            lead_cols.dedup();
            assert_eq!(map.npiv(), lead_cols.len());
        }
    }

    #[test]
    fn split_identity() {
        let m = SparseMatrix::identity(4, p(7));
        let s = split(&m, &analyze(&m)).unwrap();
        assert_eq!(s.a, SparseMatrix::identity(4, p(7)));
        assert_eq!(s.b.nrows(), 4);
        assert_eq!(s.b.nnz(), 0);
        assert_eq!(s.c.nrows(), 0);
        assert_eq!(s.d.nrows(), 0);
    }

    #[test]
    fn split_requires_consistent_map() {
        let m = SparseMatrix::identity(3, p(7));
        let map = analyze(&m);
        let other =
            SparseMatrix::from_rows(3, p(7), vec![vec![(1, 1)], vec![(0, 1)], vec![(2, 1)]])
                .unwrap();
        assert!(split(&other, &map).is_err());
    }

    #[test]
    fn split_a_is_unit_upper_triangular() {
        let mut next = rng(7);
        for _ in 0..50 {
            let m = normalize_rows(&random_matrix(&mut next, 25, 30, 251, 12));
            let s = split(&m, &analyze(&m)).unwrap();
            for (i, row) in s.a.rows().iter().enumerate() {
                assert_eq!(leading(row), Some((i as u32, 1)));
            }
        }
    }

    #[test]
    fn permute_back_round_trip() {
        let mut next = rng(123);
        for trial in 0..200 {
            let q = [3u16, 251, 65521][trial % 3];
            let nrows = (next(30) + 1) as usize;
            let ncols = (next(40) + 1) as u32;
            let density = 5 + next(25);
            let m = normalize_rows(&random_matrix(&mut next, nrows, ncols, q, density));
            let s = split(&m, &analyze(&m)).unwrap();
            assert_eq!(s.assemble(), m, "trial {trial}");
        }
    }

    #[test]
    fn analyze_pivot_columns_stable_under_row_permutation() {
        let mut next = rng(99);
        for _ in 0..30 {
            let m = random_matrix(&mut next, 15, 20, 251, 15);
            let map = analyze(&m);
            // reverse the rows; the set of pivot columns must not change
            let rev: Vec<SparseRow> = m.rows().iter().rev().cloned().collect();
            let mrev = SparseMatrix::from_rows(20, p(251), rev).unwrap();
            let map_rev = analyze(&mrev);
            let cols = |mp: &PivotMap| -> Vec<u32> {
                (0..mp.npiv() as u32).map(|i| mp.old_col(i)).collect()
            };
            assert_eq!(cols(&map), cols(&map_rev));
        }
    }

    #[test]
    fn rank_splits_between_npiv_and_d() {
        let mut next = rng(5);
        for _ in 0..50 {
            let m = random_matrix(&mut next, 20, 25, 251, 12);
            let map = analyze(&normalize_rows(&m));
            let total = oracle::dense_rank(m.to_dense(), 251);
            assert!(map.npiv() <= total + map.nonpivot_rows().len());
            assert!(map.npiv() >= total.saturating_sub(map.nonpivot_rows().len()));
        }
    }

    #[test]
    fn reconstruct_identity() {
        let m = SparseMatrix::identity(3, p(7));
        let map = analyze(&m);
        let s = split(&m, &map).unwrap();
        let rec = reconstruct(None, s.b.rows(), &[], &map, p(7));
        assert_eq!(rec, m);
    }
}

//! Second pass: full reduction of the right part.
//!
//! After the first pass the top block is `[Id | B']` and below sits `D'`
//! with pairwise distinct heads. The stacked right part `[B'; D']` gets the
//! same treatment once more: `D'` is reduced among its own rows (entries
//! above and below every `D'` pivot vanish), then each top row drops its
//! entries in the `D'` pivot columns. Combined with the identity on the
//! left this yields the canonical reduced row echelon form.

use super::{axpy_row, par_map_indexed, KernelConfig};
use crate::field::Prime;
use crate::matrix::SparseRow;
use crate::multiline::DenseRow;

/// Reduces `top_right` (the solved top rows) and `dprime` in place.
/// `width` is the non-pivot column count both share.
pub fn rref_second_pass(
    top_right: &mut [SparseRow],
    dprime: &mut [SparseRow],
    width: u32,
    p: Prime,
    cfg: &KernelConfig,
) {
    // pivot order by head column
    let mut pivots: Vec<(u32, usize)> = dprime
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.first().map(|&(c, _)| (c, i)))
        .collect();
    pivots.sort_unstable_by_key(|&(c, _)| c);
    if pivots.is_empty() {
        return;
    }

    // make D' itself reduced: process pivots right to left so every row a
    // pivot is cancelled with is already fully reduced
    let mut dense = DenseRow::new(width as usize);
    for k in (0..pivots.len().saturating_sub(1)).rev() {
        let row_idx = pivots[k].1;
        dense.load(&dprime[row_idx], 0);
        let mut changed = false;
        for &(head, src) in &pivots[k + 1..] {
            let v = dense.value_at(head as usize, p);
            if v != 0 {
                axpy_row(dense.as_mut_slice(), p.neg(v), &dprime[src], 0);
                changed = true;
            }
        }
        if changed {
            dprime[row_idx] = dense.to_sparse(p, 0);
        }
    }

    // drop D' pivot columns from every top row; rows are independent
    let reduced_top = par_map_indexed(top_right.len(), cfg.threads, |i| {
        let row = &top_right[i];
        if row.is_empty() {
            return None;
        }
        let mut dense = DenseRow::new(width as usize);
        dense.load(row, 0);
        let mut changed = false;
        for &(head, src) in &pivots {
            let v = dense.value_at(head as usize, p);
            if v != 0 {
                axpy_row(dense.as_mut_slice(), p.neg(v), &dprime[src], 0);
                changed = true;
            }
        }
        changed.then(|| dense.to_sparse(p, 0))
    });
    for (row, new) in top_right.iter_mut().zip(reduced_top) {
        if let Some(new) = new {
            *row = new;
        }
    }
}

//! Triangular solve: `B <- A^-1 B` for unit upper triangular `A`.
//!
//! Processed bottom-up over `A`'s rows, so every solved row is final before
//! any earlier row reads it. The scalars come straight from `A` (reducing
//! row `i` against the already-solved rows `[I | B'[j]]` only ever touches
//! column `j` of the left part), so no coefficients evolve during the pass.
//!
//! The row engine splits the column space into strips that are solved
//! independently; the multiline engine walks row pairs bottom-up and feeds
//! four scalars at a time into the fused kernels.

use super::{axpy_row, make_matrix, merge_strip_rows, par_map_indexed, strip_ranges, KernelConfig};
use crate::field::Prime;
use crate::matrix::{row_slice, SparseMatrix, SparseRow};
use crate::multiline::{axpy1, axpy2, pair_scalars, to_multilines, DenseRow, MultilineVector};

/// Row-engine solve. `a` must be unit upper triangular (as produced by the
/// splice); returns `B' = A^-1 B`.
pub fn trsm(a: &SparseMatrix, b: &SparseMatrix, cfg: &KernelConfig) -> SparseMatrix {
    let p = a.modulus();
    let npiv = a.nrows();
    debug_assert_eq!(npiv, b.nrows());
    let width = b.ncols();
    let strips = strip_ranges(width, cfg.block_size);
    let frags = par_map_indexed(strips.len(), cfg.threads, |si| {
        trsm_strip(a, b, strips[si].0, strips[si].1, p)
    });
    make_matrix(width, p, merge_strip_rows(npiv, frags))
}

fn trsm_strip(a: &SparseMatrix, b: &SparseMatrix, c0: u32, c1: u32, p: Prime) -> Vec<SparseRow> {
    let npiv = a.nrows();
    let w = (c1 - c0) as usize;
    let mut solved: Vec<SparseRow> = vec![Vec::new(); npiv];
    let mut dense = DenseRow::new(w);
    for i in (0..npiv).rev() {
        let arow = a.row(i);
        debug_assert_eq!(arow.first(), Some(&(i as u32, 1)));
        dense.load(row_slice(b.row(i), c0, c1), c0);
        for &(j, aij) in arow.iter().skip(1) {
            axpy_row(dense.as_mut_slice(), p.neg(aij), &solved[j as usize], 0);
        }
        solved[i] = dense.to_sparse(p, 0);
    }
    for row in &mut solved {
        for e in row.iter_mut() {
            e.0 += c0;
        }
    }
    solved
}

/// Multiline-engine solve: identical output to [`trsm`].
pub fn trsm_multiline(a: &SparseMatrix, b: &SparseMatrix, p: Prime) -> SparseMatrix {
    let npiv = a.nrows();
    let width = b.ncols();
    let amls = to_multilines(a.rows());
    let mut solved_rows: Vec<SparseRow> = vec![Vec::new(); npiv];
    let mut solved_mls: Vec<Option<MultilineVector>> = vec![None; amls.len()];
    let mut dense1 = DenseRow::new(width as usize);
    let mut dense2 = DenseRow::new(width as usize);

    for t in (0..amls.len()).rev() {
        let aml = &amls[t];
        let r1 = 2 * t;
        if aml.is_single() {
            dense1.load(b.row(r1), 0);
            apply_pairs(&mut dense1, None, aml, r1 as u32, &solved_mls, p);
            solved_rows[r1] = dense1.to_sparse(p, 0);
            solved_mls[t] = Some(MultilineVector::from_single(&solved_rows[r1]));
        } else {
            let r2 = r1 + 1;
            dense1.load(b.row(r1), 0);
            dense2.load(b.row(r2), 0);
            apply_pairs(&mut dense1, Some(&mut dense2), aml, r2 as u32, &solved_mls, p);
            // the second row of the pair never depends on the first, so it
            // is final now; the first may still need the intra-pair term
            solved_rows[r2] = dense2.to_sparse(p, 0);
            let a12 = aml.values_at(r2 as u32).map_or(0, |(v, _)| v);
            if a12 != 0 {
                axpy_row(dense1.as_mut_slice(), p.neg(a12), &solved_rows[r2], 0);
            }
            solved_rows[r1] = dense1.to_sparse(p, 0);
            solved_mls[t] =
                Some(MultilineVector::from_rows(&solved_rows[r1], &solved_rows[r2]));
        }
    }
    make_matrix(width, p, solved_rows)
}

/// Applies the already-solved multiline pairs above column `after` to one or
/// two dense rows, with negated scalars gathered from `aml`.
fn apply_pairs(
    dense1: &mut DenseRow,
    mut dense2: Option<&mut DenseRow>,
    aml: &MultilineVector,
    after: u32,
    solved_mls: &[Option<MultilineVector>],
    p: Prime,
) {
    for (s, l11, l12, l21, l22) in pair_scalars(aml, Some(after)) {
        let src = solved_mls[s].as_ref().expect("bottom-up order solves later pairs first");
        let (n11, n12, n21, n22) = (p.neg(l11), p.neg(l12), p.neg(l21), p.neg(l22));
        match dense2.as_deref_mut() {
            Some(d2) => {
                // lightweight zero tests pick the cheapest kernel
                if (n11 | n12) != 0 && (n21 | n22) != 0 {
                    axpy2(dense1, d2, n11, n12, n21, n22, src);
                } else if (n11 | n12) != 0 {
                    axpy1(dense1, n11, n12, src);
                } else if (n21 | n22) != 0 {
                    axpy1(d2, n21, n22, src);
                }
            }
            None => {
                if (n11 | n12) != 0 {
                    axpy1(dense1, n11, n12, src);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::dense_matmul;

    fn p(v: u16) -> Prime {
        Prime::new(v).unwrap()
    }

    fn cfg() -> KernelConfig {
        KernelConfig { block_size: 4, threads: 1 }
    }

    #[test]
    fn identity_a_leaves_b() {
        let a = SparseMatrix::identity(3, p(7));
        let b = SparseMatrix::from_rows(
            2,
            p(7),
            vec![vec![(0, 3)], vec![(1, 5)], vec![(0, 1), (1, 2)]],
        )
        .unwrap();
        assert_eq!(trsm(&a, &b, &cfg()), b);
        assert_eq!(trsm_multiline(&a, &b, p(7)), b);
    }

    #[test]
    fn two_by_two_solve() {
        // A = [[1,1],[0,1]], B = [[0],[1]] mod 7 -> B' = [[6],[1]]
        let a = SparseMatrix::from_rows(2, p(7), vec![vec![(0, 1), (1, 1)], vec![(1, 1)]])
            .unwrap();
        let b = SparseMatrix::from_rows(1, p(7), vec![vec![], vec![(0, 1)]]).unwrap();
        let expect =
            SparseMatrix::from_rows(1, p(7), vec![vec![(0, 6)], vec![(0, 1)]]).unwrap();
        assert_eq!(trsm(&a, &b, &cfg()), expect);
        assert_eq!(trsm_multiline(&a, &b, p(7)), expect);
    }

    fn random_triangular(
        next: &mut impl FnMut(u64) -> u64,
        npiv: usize,
        q: u16,
    ) -> SparseMatrix {
        let mut rows = Vec::with_capacity(npiv);
        for i in 0..npiv {
            let mut row: SparseRow = vec![(i as u32, 1)];
            for j in (i + 1)..npiv {
                if next(100) < 25 {
                    row.push((j as u32, next(u64::from(q) - 1) as u16 + 1));
                }
            }
            rows.push(row);
        }
        SparseMatrix::from_rows(npiv as u32, p(q), rows).unwrap()
    }

    fn random_sparse(
        next: &mut impl FnMut(u64) -> u64,
        nrows: usize,
        ncols: u32,
        q: u16,
    ) -> SparseMatrix {
        let mut rows = Vec::with_capacity(nrows);
        for _ in 0..nrows {
            let mut row: SparseRow = Vec::new();
            for c in 0..ncols {
                if next(100) < 30 {
                    row.push((c, next(u64::from(q) - 1) as u16 + 1));
                }
            }
            rows.push(row);
        }
        SparseMatrix::from_rows(ncols, p(q), rows).unwrap()
    }

    #[test]
    fn a_times_solution_recovers_b() {
        let mut state = 0xfeedu64;
        let mut next = move |m: u64| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) % m
        };
        for q in [3u16, 251, 65521] {
            for _ in 0..20 {
                let npiv = 1 + next(20) as usize;
                let a = random_triangular(&mut next, npiv, q);
                let width = 1 + next(15) as u32;
                let b = random_sparse(&mut next, npiv, width, q);
                let solved = trsm(&a, &b, &cfg());
                let product = dense_matmul(&a.to_dense(), &solved.to_dense(), q);
                assert_eq!(product, b.to_dense(), "A * B' != B for p = {q}");
                assert_eq!(trsm_multiline(&a, &b, p(q)), solved);
            }
        }
    }

    #[test]
    fn strip_width_never_changes_the_result() {
        let mut state = 0x1234u64;
        let mut next = move |m: u64| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) % m
        };
        let a = random_triangular(&mut next, 17, 251);
        let b = random_sparse(&mut next, 17, 23, 251);
        let reference = trsm(&a, &b, &KernelConfig { block_size: 1024, threads: 1 });
        for bs in [1usize, 2, 4, 16, 64] {
            assert_eq!(trsm(&a, &b, &KernelConfig { block_size: bs, threads: 1 }), reference);
        }
        assert_eq!(trsm(&a, &b, &KernelConfig { block_size: 4, threads: 3 }), reference);
    }
}

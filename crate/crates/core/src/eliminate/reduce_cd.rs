//! Reduction of `C` and `D`.
//!
//! Standard order assumes `B` already holds the solved rows and computes
//! `D - C * (A^-1 B)` directly; `C` is conceptually zeroed and dropped.
//!
//! The solve-free order reduces each `C` row against the raw triangular `A`
//! column by column: when the loop reaches column `j`, all earlier
//! eliminations are already folded in, so the reduced coefficient there is
//! final and can drive one fused update of both the `C` and `D` dense rows.
//! The block-practical variant runs that loop once to record the
//! coefficients, copies them into cache-sized blocks, and replays the
//! recorded multipliers against `B` strip by strip.

use super::{axpy_row, make_matrix, merge_strip_rows, par_map_indexed, strip_ranges, KernelConfig};
use crate::block::BlockMatrix;
use crate::field::Prime;
use crate::matrix::{row_slice, SparseMatrix, SparseRow};
use crate::multiline::{axpy1, axpy2, pair_scalars, to_multilines, DenseRow};
use crate::splice::Splice;

/// Standard-order fold: `D - C * B'` where `bprime` is the solved top.
pub fn reduce_cd_standard(
    c: &SparseMatrix,
    d: &SparseMatrix,
    bprime: &SparseMatrix,
    cfg: &KernelConfig,
) -> SparseMatrix {
    let p = d.modulus();
    let width = d.ncols();
    let strips = strip_ranges(width, cfg.block_size);
    let frags = par_map_indexed(strips.len(), cfg.threads, |si| {
        let (c0, c1) = strips[si];
        let w = (c1 - c0) as usize;
        let mut out: Vec<SparseRow> = Vec::with_capacity(d.nrows());
        let mut dense = DenseRow::new(w);
        for i in 0..d.nrows() {
            dense.load(row_slice(d.row(i), c0, c1), c0);
            for &(j, cv) in c.row(i) {
                axpy_row(
                    dense.as_mut_slice(),
                    p.neg(cv),
                    row_slice(bprime.row(j as usize), c0, c1),
                    c0,
                );
            }
            out.push(dense.to_sparse(p, c0));
        }
        out
    });
    make_matrix(width, p, merge_strip_rows(d.nrows(), frags))
}

/// Multiline-engine standard fold: identical output to
/// [`reduce_cd_standard`].
pub fn reduce_cd_standard_multiline(
    c: &SparseMatrix,
    d: &SparseMatrix,
    bprime: &SparseMatrix,
    p: Prime,
) -> SparseMatrix {
    let width = d.ncols();
    let bmls = to_multilines(bprime.rows());
    let cmls = to_multilines(c.rows());
    let mut out: Vec<SparseRow> = vec![Vec::new(); d.nrows()];
    let mut dense1 = DenseRow::new(width as usize);
    let mut dense2 = DenseRow::new(width as usize);
    for (u, cml) in cmls.iter().enumerate() {
        let i1 = 2 * u;
        let paired = !cml.is_single();
        dense1.load(d.row(i1), 0);
        if paired {
            dense2.load(d.row(i1 + 1), 0);
        }
        for (s, l11, l12, l21, l22) in pair_scalars(cml, None) {
            let src = &bmls[s];
            let (n11, n12, n21, n22) = (p.neg(l11), p.neg(l12), p.neg(l21), p.neg(l22));
            if paired && (n11 | n12) != 0 && (n21 | n22) != 0 {
                axpy2(&mut dense1, &mut dense2, n11, n12, n21, n22, src);
            } else if (n11 | n12) != 0 {
                axpy1(&mut dense1, n11, n12, src);
            } else if paired && (n21 | n22) != 0 {
                axpy1(&mut dense2, n21, n22, src);
            }
        }
        out[i1] = dense1.to_sparse(p, 0);
        if paired {
            out[i1 + 1] = dense2.to_sparse(p, 0);
        }
    }
    make_matrix(width, p, out)
}

/// Solve-free reduction, row at a time. Returns the new `D`; the final
/// value equals [`reduce_cd_standard`]'s.
pub fn reduce_cd_new_order(s: &Splice) -> SparseMatrix {
    let p = s.d.modulus();
    let npiv = s.a.nrows();
    let width = s.d.ncols();
    let mut out: Vec<SparseRow> = Vec::with_capacity(s.d.nrows());
    let mut dense_c = DenseRow::new(npiv);
    let mut dense_d = DenseRow::new(width as usize);
    for i in 0..s.d.nrows() {
        dense_c.load(s.c.row(i), 0);
        dense_d.load(s.d.row(i), 0);
        for j in 0..npiv {
            // earlier eliminations already updated column j; its value is final
            let cv = dense_c.value_at(j, p);
            if cv == 0 {
                continue;
            }
            let lam = p.neg(cv);
            axpy_row(dense_c.as_mut_slice(), lam, s.a.row(j), 0);
            axpy_row(dense_d.as_mut_slice(), lam, s.b.row(j), 0);
        }
        out.push(dense_d.to_sparse(p, 0));
    }
    make_matrix(width, p, out)
}

/// Multiline-engine solve-free reduction: identical output to
/// [`reduce_cd_new_order`].
///
/// The coefficients evolve as `C` is reduced, so the second scalar of each
/// column pair is corrected for the first row's contribution before one
/// fused pass applies both.
pub fn reduce_cd_new_order_multiline(s: &Splice) -> SparseMatrix {
    let p = s.d.modulus();
    let npiv = s.a.nrows();
    let width = s.d.ncols();
    let amls = to_multilines(s.a.rows());
    let bmls = to_multilines(s.b.rows());
    let cmls = to_multilines(s.c.rows());
    let mut out: Vec<SparseRow> = vec![Vec::new(); s.d.nrows()];
    let mut dense_c1 = DenseRow::new(npiv);
    let mut dense_c2 = DenseRow::new(npiv);
    let mut dense_d1 = DenseRow::new(width as usize);
    let mut dense_d2 = DenseRow::new(width as usize);

    for (u, cml) in cmls.iter().enumerate() {
        let i1 = 2 * u;
        let paired = !cml.is_single();
        dense_c1.load(s.c.row(i1), 0);
        dense_d1.load(s.d.row(i1), 0);
        if paired {
            dense_c2.load(s.c.row(i1 + 1), 0);
            dense_d2.load(s.d.row(i1 + 1), 0);
        }
        for (t, aml) in amls.iter().enumerate() {
            let j1 = 2 * t;
            let c11 = dense_c1.value_at(j1, p);
            let c21 = if paired { dense_c2.value_at(j1, p) } else { 0 };
            let (c12, c22) = if aml.is_single() {
                (0, 0)
            } else {
                let j2 = j1 + 1;
                // the first row's elimination lands on column j2 before the
                // loop gets there; fold it into the scalar now
                let a12 = aml.values_at(j2 as u32).map_or(0, |(v, _)| v);
                let fold = |dense: &DenseRow, head: u16| {
                    p.reduce(
                        dense.as_slice()[j2] + u64::from(p.neg(head)) * u64::from(a12),
                    )
                };
                (
                    fold(&dense_c1, c11),
                    if paired { fold(&dense_c2, c21) } else { 0 },
                )
            };
            let (n11, n12) = (p.neg(c11), p.neg(c12));
            let (n21, n22) = (p.neg(c21), p.neg(c22));
            if paired && (n11 | n12) != 0 && (n21 | n22) != 0 {
                axpy2(&mut dense_c1, &mut dense_c2, n11, n12, n21, n22, aml);
                axpy2(&mut dense_d1, &mut dense_d2, n11, n12, n21, n22, &bmls[t]);
            } else if (n11 | n12) != 0 {
                axpy1(&mut dense_c1, n11, n12, aml);
                axpy1(&mut dense_d1, n11, n12, &bmls[t]);
                if paired && (n21 | n22) != 0 {
                    axpy1(&mut dense_c2, n21, n22, aml);
                    axpy1(&mut dense_d2, n21, n22, &bmls[t]);
                }
            } else if paired && (n21 | n22) != 0 {
                axpy1(&mut dense_c2, n21, n22, aml);
                axpy1(&mut dense_d2, n21, n22, &bmls[t]);
            }
        }
        out[i1] = dense_d1.to_sparse(p, 0);
        if paired {
            out[i1 + 1] = dense_d2.to_sparse(p, 0);
        }
    }
    make_matrix(width, p, out)
}

/// Block-practical solve-free reduction: identical output to
/// [`reduce_cd_new_order`].
///
/// 1. reduce `C` by `A` row-wise, recording the elimination coefficients;
/// 2. copy the recorded coefficients into block layout `C'`;
/// 3. replay `C'` against `B` block-wise into `D`, one column strip at a
///    time.
pub fn reduce_cd_new_order_blocked(s: &Splice, cfg: &KernelConfig) -> SparseMatrix {
    let p = s.d.modulus();
    let npiv = s.a.nrows();

    let coeffs: Vec<SparseRow> = par_map_indexed(s.c.nrows(), cfg.threads, |i| {
        let mut dense_c = DenseRow::new(npiv);
        dense_c.load(s.c.row(i), 0);
        let mut rec: SparseRow = Vec::new();
        for j in 0..npiv {
            let cv = dense_c.value_at(j, p);
            if cv == 0 {
                continue;
            }
            let lam = p.neg(cv);
            rec.push((j as u32, lam));
            axpy_row(dense_c.as_mut_slice(), lam, s.a.row(j), 0);
        }
        rec
    });

    let cprime = BlockMatrix::from_rows(&coeffs, npiv as u32, cfg.block_size);

    let width = s.d.ncols();
    let strips = strip_ranges(width, cfg.block_size);
    let frags = par_map_indexed(strips.len(), cfg.threads, |si| {
        let (c0, c1) = strips[si];
        apply_blocked_strip(&cprime, &s.b, &s.d, c0, c1, p)
    });
    make_matrix(width, p, merge_strip_rows(s.d.nrows(), frags))
}

fn apply_blocked_strip(
    cprime: &BlockMatrix,
    b: &SparseMatrix,
    d: &SparseMatrix,
    c0: u32,
    c1: u32,
    p: Prime,
) -> Vec<SparseRow> {
    let w = (c1 - c0) as usize;
    let side = cprime.side();
    let nrows = d.nrows();
    let mut out: Vec<SparseRow> = vec![Vec::new(); nrows];
    let mut band: Vec<DenseRow> = (0..side.min(nrows.max(1))).map(|_| DenseRow::new(w)).collect();
    for br in 0..cprime.grid_rows() {
        let r0 = br * side;
        let band_h = side.min(nrows - r0);
        for r in 0..band_h {
            band[r].load(row_slice(d.row(r0 + r), c0, c1), c0);
        }
        for bc in 0..cprime.grid_cols() {
            for &(lr, lc, lam) in cprime.block(br, bc) {
                let j = bc * side + lc as usize;
                axpy_row(
                    band[lr as usize].as_mut_slice(),
                    lam,
                    row_slice(b.row(j), c0, c1),
                    c0,
                );
            }
        }
        for r in 0..band_h {
            out[r0 + r] = band[r].to_sparse(p, c0);
        }
    }
    out
}

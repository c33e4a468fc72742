//! The elimination pipelines.
//!
//! Two orders of operations are implemented over the spliced quadrants:
//!
//! * **standard**: triangular-solve the pivot rows (`B <- A^-1 B`), fold the
//!   solved rows through `C` into `D`, then run the structured Gaussian
//!   elimination on what is left of `D`;
//! * **new**: skip the triangular solve entirely and reduce `C` directly
//!   against the raw triangular `A`, mirroring each step on `D` with `B`.
//!   Only the lower-right quadrant is ever brought into echelon form, which
//!   is all a rank computation needs.
//!
//! Each pipeline comes in two engine variants: `row` works on plain sparse
//! rows and keeps structured-elimination pivots sorted; `multiline` packs
//! row pairs into multiline vectors and appends pivots unsorted. All four
//! combinations produce identical results.
//!
//! The data-parallel phases split work over column strips (and row bands)
//! whose boundaries never influence the arithmetic, so results are bitwise
//! identical for every thread count and block size.

mod reduce_cd;
mod rref;
pub(crate) mod sge;
mod trsm;

pub use reduce_cd::{
    reduce_cd_new_order, reduce_cd_new_order_blocked, reduce_cd_new_order_multiline,
    reduce_cd_standard, reduce_cd_standard_multiline,
};
pub use rref::rref_second_pass;
pub use sge::{sge_d, sge_d_multiline};
pub use trsm::{trsm, trsm_multiline};

use std::fmt;
use std::time::{Duration, Instant};

use crate::field::Prime;
use crate::matrix::{SparseMatrix, SparseRow};
use crate::parallel::{parallel_sge, ParallelSgeOptions};
use crate::splice::{analyze, normalize_rows, reconstruct, split};

/// Order of elimination steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// Triangular solve first, then fold through `C` into `D`.
    Standard,
    /// Solve-free: reduce `C` and `D` against the raw `A` and `B`.
    New,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Standard => write!(f, "standard"),
            Order::New => write!(f, "new"),
        }
    }
}

/// Kernel/data-structure variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Sparse rows everywhere; structured-elimination pivots kept sorted.
    Row,
    /// Multiline row pairs in the quadrant kernels; pivots appended
    /// unsorted.
    Multiline,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::Row => write!(f, "row"),
            Engine::Multiline => write!(f, "multiline"),
        }
    }
}

/// Options for [`echelonize`].
#[derive(Debug, Clone)]
pub struct EchelonOptions {
    pub order: Order,
    /// Run the second pass producing the canonical reduced echelon form.
    pub reduced: bool,
    /// Skip materializing the echelon matrix; only the rank is wanted.
    pub rank_only: bool,
    pub engine: Engine,
    /// Block side / column-strip width; any power of two.
    pub block_size: usize,
    /// Worker count for the data-parallel phases and the waiting-list
    /// elimination. `1` runs the sequential fallback paths.
    pub threads: usize,
    /// Rows eliminated sequentially before parallel elimination starts;
    /// defaults to `2 * threads`.
    pub warmup: Option<usize>,
}

impl Default for EchelonOptions {
    fn default() -> Self {
        EchelonOptions {
            order: Order::Standard,
            reduced: false,
            rank_only: false,
            engine: Engine::Row,
            block_size: 256,
            threads: 1,
            warmup: None,
        }
    }
}

/// Invalid [`EchelonOptions`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EchelonError {
    BlockSizeNotPowerOfTwo(usize),
    ZeroThreads,
}

impl fmt::Display for EchelonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EchelonError::BlockSizeNotPowerOfTwo(b) => {
                write!(f, "block size {b} is not a power of two")
            }
            EchelonError::ZeroThreads => write!(f, "thread count must be at least 1"),
        }
    }
}

impl std::error::Error for EchelonError {}

/// Wall times of the pipeline phases.
#[derive(Debug, Clone, Default)]
pub struct PhaseTimings {
    pub splice: Duration,
    pub trsm: Duration,
    pub reduce_cd: Duration,
    pub sge: Duration,
    pub rref: Duration,
    pub reconstruct: Duration,
    pub total: Duration,
}

/// Result of [`echelonize`].
#[derive(Debug, Clone)]
pub struct EchelonResult {
    /// `npiv + rank_d`.
    pub rank: usize,
    /// Pivots visible before elimination started.
    pub npiv: usize,
    /// New pivots found in the lower-right quadrant.
    pub rank_d: usize,
    /// The echelon form in original column order, rows sorted by strictly
    /// increasing leading column; `None` when `rank_only` was set.
    pub echelon: Option<SparseMatrix>,
    pub order: Order,
    pub reduced: bool,
    pub engine: Engine,
    pub timings: PhaseTimings,
}

/// Shared knobs for the quadrant kernels.
#[derive(Debug, Clone, Copy)]
pub struct KernelConfig {
    pub block_size: usize,
    pub threads: usize,
}

/// Full pipeline: splice, eliminate, and reassemble.
pub fn echelonize(m: &SparseMatrix, opts: &EchelonOptions) -> Result<EchelonResult, EchelonError> {
    if !opts.block_size.is_power_of_two() {
        return Err(EchelonError::BlockSizeNotPowerOfTwo(opts.block_size));
    }
    if opts.threads == 0 {
        return Err(EchelonError::ZeroThreads);
    }
    let cfg = KernelConfig { block_size: opts.block_size, threads: opts.threads };
    let p = m.modulus();
    let t_start = Instant::now();
    let mut timings = PhaseTimings::default();

    let t = Instant::now();
    let normalized = normalize_rows(m);
    let map = analyze(&normalized);
    let s = split(&normalized, &map).expect("analyze and split operate on the same matrix");
    timings.splice = t.elapsed();
    let npiv = map.npiv();
    let d_width = s.d.ncols();

    // reduce C into D under the chosen order
    let mut bprime: Option<SparseMatrix> = None;
    let d_new: SparseMatrix = match opts.order {
        Order::Standard => {
            let t = Instant::now();
            let solved = match opts.engine {
                Engine::Row => trsm(&s.a, &s.b, &cfg),
                Engine::Multiline => trsm_multiline(&s.a, &s.b, p),
            };
            timings.trsm = t.elapsed();
            let t = Instant::now();
            let d_new = match opts.engine {
                Engine::Row => reduce_cd_standard(&s.c, &s.d, &solved, &cfg),
                Engine::Multiline => reduce_cd_standard_multiline(&s.c, &s.d, &solved, p),
            };
            timings.reduce_cd = t.elapsed();
            bprime = Some(solved);
            d_new
        }
        Order::New => {
            let t = Instant::now();
            let d_new = match opts.engine {
                Engine::Row => reduce_cd_new_order_blocked(&s, &cfg),
                Engine::Multiline => reduce_cd_new_order_multiline(&s),
            };
            timings.reduce_cd = t.elapsed();
            d_new
        }
    };

    // structured elimination of what is left of D
    let t = Instant::now();
    let (mut dprime, rank_d) = if opts.threads > 1 {
        let popts = ParallelSgeOptions {
            threads: opts.threads,
            warmup: opts.warmup,
            ..ParallelSgeOptions::default()
        };
        parallel_sge(d_new.into_rows(), d_width, p, &popts)
    } else {
        match opts.engine {
            Engine::Row => sge_d(d_new.rows(), d_width, p),
            Engine::Multiline => sge_d_multiline(d_new.rows(), d_width, p),
        }
    };
    timings.sge = t.elapsed();

    let rank = npiv + rank_d;
    let echelon = if opts.rank_only {
        None
    } else {
        let need_solved_top = opts.reduced;
        if need_solved_top && bprime.is_none() {
            // the solve was skipped by the new order; the reduced form
            // still needs the solved top rows
            let t = Instant::now();
            bprime = Some(match opts.engine {
                Engine::Row => trsm(&s.a, &s.b, &cfg),
                Engine::Multiline => trsm_multiline(&s.a, &s.b, p),
            });
            timings.trsm += t.elapsed();
        }
        let reconstructed = if opts.reduced {
            let mut top = bprime.take().expect("solved above").into_rows();
            let t = Instant::now();
            rref_second_pass(&mut top, &mut dprime, d_width, p, &cfg);
            timings.rref = t.elapsed();
            let t = Instant::now();
            let rec = reconstruct(None, &top, &dprime, &map, p);
            timings.reconstruct = t.elapsed();
            rec
        } else {
            let t = Instant::now();
            let rec = match (opts.order, bprime) {
                (Order::Standard, Some(solved)) => {
                    reconstruct(None, solved.rows(), &dprime, &map, p)
                }
                (Order::New, _) => reconstruct(Some(s.a.rows()), s.b.rows(), &dprime, &map, p),
                (Order::Standard, None) => unreachable!("standard order always solves"),
            };
            timings.reconstruct = t.elapsed();
            rec
        };
        Some(reconstructed)
    };

    timings.total = t_start.elapsed();
    Ok(EchelonResult {
        rank,
        npiv,
        rank_d,
        echelon,
        order: opts.order,
        reduced: opts.reduced,
        engine: opts.engine,
        timings,
    })
}

/// Column ranges of width `block_size` covering `[0, width)`.
pub(crate) fn strip_ranges(width: u32, block_size: usize) -> Vec<(u32, u32)> {
    let bs = block_size as u32;
    let mut out = Vec::new();
    let mut c0 = 0u32;
    while c0 < width {
        out.push((c0, (c0 + bs).min(width)));
        c0 += bs;
    }
    out
}

/// Accumulates `lambda * row` into a dense delayed-reduction row; column
/// indices are shifted down by `offset`.
#[inline]
pub(crate) fn axpy_row(dense: &mut [u64], lambda: u16, row: &[(u32, u16)], offset: u32) {
    let lam = u64::from(lambda);
    for &(c, v) in row {
        dense[(c - offset) as usize] += lam * u64::from(v);
    }
}

/// Maps `f` over `0..n`, on `threads` rayon workers when the `parallel`
/// feature is enabled and more than one thread is requested. The output
/// order and every result are identical either way.
#[cfg(feature = "parallel")]
pub(crate) fn par_map_indexed<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if threads > 1 && n > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool");
        pool.install(|| (0..n).into_par_iter().map(f).collect())
    } else {
        (0..n).map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map_indexed<T, F>(n: usize, _threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Merges per-strip row fragments (already in global column order) into
/// whole rows.
pub(crate) fn merge_strip_rows(nrows: usize, frags: Vec<Vec<SparseRow>>) -> Vec<SparseRow> {
    let mut rows: Vec<SparseRow> = vec![Vec::new(); nrows];
    for frag in frags {
        debug_assert_eq!(frag.len(), nrows);
        for (i, part) in frag.into_iter().enumerate() {
            rows[i].extend(part);
        }
    }
    rows
}

pub(crate) fn make_matrix(ncols: u32, p: Prime, rows: Vec<SparseRow>) -> SparseMatrix {
    SparseMatrix::from_rows(ncols, p, rows).expect("kernels emit canonical rows")
}

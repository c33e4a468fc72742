//! Deterministic synthetic matrix generators for tests and benchmarks.
//!
//! The `gb-like` profile imitates the structure the reduction is built
//! for: monic rows that are shifted copies of a small pool of coefficient
//! vectors (so the deduplicating file format has redundancy to find),
//! supports grouped into consecutive runs (so column-run compression
//! bites), most leading columns distinct (so the splice finds pivots for
//! well over half the rows), and a set of heavier rows reusing existing
//! leading columns whose mass lands in the never-leading tail columns
//! (so the lower-right quadrant comes out densest).

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use crate::field::Prime;
use crate::matrix::{SparseMatrix, SparseRow};

/// Shape profile of the generated matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Nearly-triangular, block-patterned, monic rows with repeated
    /// coefficient vectors.
    GbLike,
    /// Independent per-cell sparsity.
    Uniform,
}

impl std::str::FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gb-like" | "gblike" => Ok(Profile::GbLike),
            "uniform" => Ok(Profile::Uniform),
            other => Err(format!("unknown profile `{other}` (expected gb-like or uniform)")),
        }
    }
}

/// Options for [`generate`].
#[derive(Debug, Clone)]
pub struct GeneratorOptions {
    pub profile: Profile,
    /// Target fraction of nonzero cells in `(0, 1]`.
    pub density: f64,
    pub seed: u64,
}

/// Generates an `nrows x ncols` matrix over `F_p`, deterministic in the
/// seed.
pub fn generate(nrows: usize, ncols: u32, p: Prime, opts: &GeneratorOptions) -> SparseMatrix {
    let mut rng = StdRng::seed_from_u64(opts.seed);
    match opts.profile {
        Profile::Uniform => uniform(nrows, ncols, p, opts.density, &mut rng),
        Profile::GbLike => gb_like(nrows, ncols, p, opts.density, &mut rng),
    }
}

fn uniform(nrows: usize, ncols: u32, p: Prime, density: f64, rng: &mut StdRng) -> SparseMatrix {
    let q = p.value();
    let mut rows = Vec::with_capacity(nrows);
    for _ in 0..nrows {
        let mut row: SparseRow = Vec::new();
        for c in 0..ncols {
            if rng.random::<f64>() < density {
                row.push((c, rng.random_range(1..q)));
            }
        }
        rows.push(row);
    }
    SparseMatrix::from_rows(ncols, p, rows).expect("generated rows are canonical")
}

/// One pool polynomial: run-structured offsets near the leading column,
/// a run-structured block of absolute tail columns, and the shared
/// coefficient vector (monic).
struct PoolPoly {
    near: Vec<u32>,
    tail: Vec<u32>,
    values: Vec<u16>,
}

fn run_structured(rng: &mut StdRng, count: usize, start: u32, limit: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(count);
    let mut c = start;
    while out.len() < count && c < limit {
        let run = rng.random_range(4..=12).min(count - out.len());
        for _ in 0..run {
            if c >= limit {
                break;
            }
            out.push(c);
            c += 1;
        }
        c += rng.random_range(1..=8);
    }
    out
}

fn make_poly(rng: &mut StdRng, near_len: usize, tail_len: usize, span_near: u32, tail_start: u32, ncols: u32, q: u16) -> PoolPoly {
    let mut near = vec![0u32];
    let near_start = 1 + rng.random_range(0..3);
    near.extend(run_structured(rng, near_len.saturating_sub(1), near_start, span_near));
    let tail = if tail_start < ncols && tail_len > 0 {
        let jitter = rng.random_range(0..((ncols - tail_start) / 2).max(1));
        run_structured(rng, tail_len, tail_start + jitter, ncols)
    } else {
        Vec::new()
    };
    let mut values = Vec::with_capacity(near.len() + tail.len());
    values.push(1u16);
    for _ in 1..(near.len() + tail.len()) {
        values.push(rng.random_range(1..q));
    }
    PoolPoly { near, tail, values }
}

fn gb_like(nrows: usize, ncols: u32, p: Prime, density: f64, rng: &mut StdRng) -> SparseMatrix {
    if nrows == 0 || ncols == 0 {
        return SparseMatrix::zero(nrows, ncols, p);
    }
    let q = p.value();
    let n = ncols as usize;

    // leading columns live in the first two thirds; the tail third only
    // ever receives non-leading mass
    let tail_start = ((2 * n) / 3).max(1) as u32;
    let weight = ((density * n as f64) * 0.85).round().max(2.0) as usize;
    let near_len = (weight / 4).max(1);
    let tail_len = weight.saturating_sub(near_len);
    let span_near = (tail_start / 2).max(2);
    let shift_limit = tail_start.saturating_sub(span_near).max(1);

    let pool_size = 16usize.min(nrows.max(1));
    let light: Vec<PoolPoly> = (0..pool_size)
        .map(|_| make_poly(rng, near_len, tail_len, span_near, tail_start, ncols, q))
        .collect();
    let heavy: Vec<PoolPoly> = (0..pool_size)
        .map(|_| make_poly(rng, near_len, 2 * tail_len + near_len, span_near, tail_start, ncols, q))
        .collect();

    // distinct leading columns for three quarters of the rows
    let pivot_rows = ((3 * nrows).div_ceil(4)).min(shift_limit as usize);
    let mut shifts: Vec<u32> = (0..shift_limit).collect();
    shifts.shuffle(rng);
    shifts.truncate(pivot_rows);

    let mut rows: Vec<SparseRow> = Vec::with_capacity(nrows);
    for i in 0..nrows {
        let (poly, shift) = if i < pivot_rows {
            (&light[rng.random_range(0..pool_size)], shifts[i])
        } else {
            // reuse an existing leading column so no new pivot appears
            let shift = shifts[rng.random_range(0..shifts.len().max(1))];
            (&heavy[rng.random_range(0..pool_size)], shift)
        };
        let mut row: SparseRow = Vec::with_capacity(poly.values.len());
        let mut vi = 0usize;
        for &o in &poly.near {
            let c = shift + o;
            if c < tail_start {
                row.push((c, poly.values[vi]));
            }
            vi += 1;
        }
        for &c in &poly.tail {
            row.push((c, poly.values[vi]));
            vi += 1;
        }
        rows.push(row);
    }
    rows.shuffle(rng);
    SparseMatrix::from_rows(ncols, p, rows).expect("generated rows are canonical")
}

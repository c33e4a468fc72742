//! Parallel structured Gaussian elimination with a waiting list.
//!
//! Workers share three things: the count of settled rows (`lp`: rows
//! `[0, lp)` are done, each a confirmed read-only pivot or a confirmed zero
//! row), the list of confirmed pivots, and a waiting list `W` of partially
//! reduced rows bookmarked with the prefix they have already been reduced
//! against. Each worker loops:
//!
//! 1. fetch a row (fresh, or parked in `W`);
//! 2. outside the lock, reduce it against the immutable pivot prefix up to
//!    the last snapshot of `lp`;
//! 3. if the row is now the lowest-indexed unsettled row and reduced up to
//!    the current `lp`, settle it (pivot or zero) and advance `lp`;
//! 4. otherwise park it in `W` with its bookmark (or keep reducing if `lp`
//!    moved meanwhile).
//!
//! Settlement order is the row order, so the final rows are exactly the
//! sequential elimination's for every thread count and interleaving. The
//! first `warmup` rows (default `2 * threads`) are eliminated sequentially
//! before workers start, which keeps `W` from ballooning at startup; zero
//! rows found then are counted immediately and never enter `W`.
//!
//! Mutations of `{lp, confirmed, W}` sit in one short critical section; row
//! reductions read confirmed pivots through write-once cells without any
//! lock.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use crate::eliminate::sge_d;
use crate::field::Prime;
use crate::matrix::SparseRow;
use crate::multiline::DenseRow;

/// Options for [`parallel_sge`].
#[derive(Debug, Clone)]
pub struct ParallelSgeOptions {
    pub threads: usize,
    /// Rows eliminated sequentially before workers start; `2 * threads`
    /// when unset.
    pub warmup: Option<usize>,
    /// Consecutive parks after which a worker is forced back onto the
    /// waiting list.
    pub insert_threshold: usize,
}

impl Default for ParallelSgeOptions {
    fn default() -> Self {
        ParallelSgeOptions { threads: 1, warmup: None, insert_threshold: 4 }
    }
}

/// A waiting-list entry: a row not yet fully reduced, and the settled
/// prefix it has already been reduced against.
#[derive(Debug, Clone)]
pub struct WaitingEntry {
    pub row: usize,
    pub reduced_upto: usize,
    data: SparseRow,
}

/// Shared pivot bookkeeping: the settled-row counter and the confirmed
/// pivots in confirmation order. Confirmed rows are read-only.
#[derive(Debug, Default)]
pub struct PivotLedger {
    /// Rows `[0, lp)` are settled.
    lp: usize,
    /// `(head column, row index)` of every confirmed nonzero pivot.
    confirmed: Vec<(u32, usize)>,
}

impl PivotLedger {
    #[inline]
    pub fn settled(&self) -> usize {
        self.lp
    }

    #[inline]
    pub fn confirmed(&self) -> &[(u32, usize)] {
        &self.confirmed
    }
}

/// What a worker should grab next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FetchDecision {
    /// Take this row from the waiting list.
    Waiting(usize),
    /// Take this untouched row.
    Fresh(usize),
    /// Neither source has work right now.
    Exhausted,
}

/// The worker-local state the fetch decision depends on.
#[derive(Debug, Clone, Copy)]
pub struct FetchContext {
    /// The worker settled a row on its previous commit.
    pub just_confirmed: bool,
    /// Parks since this worker's last waiting-list fetch.
    pub consecutive_inserts: usize,
    pub insert_threshold: usize,
    /// Smallest row index currently parked, if any.
    pub smallest_waiting: Option<usize>,
    /// Next untouched row index.
    pub next_fresh: usize,
    pub nrows: usize,
}

/// Deterministic fetch priority: after settling a row prefer the smallest
/// parked row; after `insert_threshold` consecutive parks force a
/// waiting-list fetch; otherwise take the lowest untouched fresh row,
/// falling back to the waiting list once fresh rows run out.
pub fn fetch_policy(ctx: &FetchContext) -> FetchDecision {
    if ctx.just_confirmed {
        if let Some(j) = ctx.smallest_waiting {
            return FetchDecision::Waiting(j);
        }
    }
    if ctx.consecutive_inserts >= ctx.insert_threshold {
        if let Some(j) = ctx.smallest_waiting {
            return FetchDecision::Waiting(j);
        }
    }
    if ctx.next_fresh < ctx.nrows {
        return FetchDecision::Fresh(ctx.next_fresh);
    }
    if let Some(j) = ctx.smallest_waiting {
        return FetchDecision::Waiting(j);
    }
    FetchDecision::Exhausted
}

/// Normalizes `row` and cancels its head against pivots reachable through
/// `lookup` until the head matches no pivot. Every cancellation moves the
/// head strictly right, and at most one pivot can match a head, so the
/// result is independent of lookup organization. Returns the reduced,
/// renormalized row (empty if it vanished).
pub fn reduce_row_fixpoint<'a, F>(
    row: SparseRow,
    dense: &mut DenseRow,
    p: Prime,
    lookup: &HashMap<u32, usize>,
    pivot_row: F,
) -> SparseRow
where
    F: Fn(usize) -> &'a SparseRow,
{
    if row.is_empty() {
        return row;
    }
    let mut row = row;
    crate::eliminate::sge::normalize_row(&mut row, p);
    dense.load(&row, 0);
    let width = dense.width();
    let mut cursor = row[0].0 as usize;
    loop {
        let mut head = None;
        while cursor < width {
            let v = dense.value_at(cursor, p);
            if v != 0 {
                head = Some((cursor as u32, v));
                break;
            }
            cursor += 1;
        }
        let Some((h, hv)) = head else {
            return Vec::new();
        };
        match lookup.get(&h) {
            Some(&pi) => {
                let lam = p.neg(hv);
                let lam64 = u64::from(lam);
                let d = dense.as_mut_slice();
                for &(c, v) in pivot_row(pi) {
                    d[c as usize] += lam64 * u64::from(v);
                }
            }
            None => break,
        }
    }
    let mut reduced = dense.to_sparse(p, 0);
    crate::eliminate::sge::normalize_row(&mut reduced, p);
    reduced
}

struct Shared {
    ledger: PivotLedger,
    waiting: BTreeMap<usize, WaitingEntry>,
    rows: Vec<Option<SparseRow>>,
    next_fresh: usize,
}

/// Parallel structured elimination of `rows`. Returns `(D', rank_D)` in
/// input row order, identical to the sequential elimination for every
/// thread count. `threads == 1` bypasses all synchronization.
pub fn parallel_sge(
    rows: Vec<SparseRow>,
    width: u32,
    p: Prime,
    opts: &ParallelSgeOptions,
) -> (Vec<SparseRow>, usize) {
    assert!(opts.threads >= 1, "thread count must be at least 1");
    let n = rows.len();
    if opts.threads == 1 || n <= 1 {
        return sge_d(&rows, width, p);
    }
    let warmup = opts.warmup.unwrap_or(2 * opts.threads).min(n);

    let settled: Vec<OnceLock<SparseRow>> = (0..n).map(|_| OnceLock::new()).collect();
    let mut shared = Shared {
        ledger: PivotLedger::default(),
        waiting: BTreeMap::new(),
        rows: rows.into_iter().map(Some).collect(),
        next_fresh: warmup,
    };

    // sequential warm-up, identical to the sequential elimination
    {
        let mut dense = DenseRow::new(width as usize);
        let mut lookup: HashMap<u32, usize> = HashMap::new();
        for j in 0..warmup {
            let data = shared.rows[j].take().expect("warm-up owns the prefix");
            let reduced =
                reduce_row_fixpoint(data, &mut dense, p, &lookup, |i| {
                    settled[i].get().expect("pivot settled")
                });
            if let Some(&(h, _)) = reduced.first() {
                lookup.insert(h, j);
                shared.ledger.confirmed.push((h, j));
            }
            settled[j].set(reduced).expect("row settled twice");
            shared.ledger.lp = j + 1;
        }
    }

    if warmup < n {
        let shared = Mutex::new(shared);
        let settled_ref = &settled;
        let shared_ref = &shared;
        std::thread::scope(|scope| {
            for _ in 0..opts.threads {
                scope.spawn(move || {
                    worker(shared_ref, settled_ref, n, width, p, opts.insert_threshold)
                });
            }
        });
        let sh = shared.into_inner().unwrap();
        assert_eq!(sh.ledger.lp, n, "every row settles");
        let rank = sh.ledger.confirmed.len();
        let out = settled
            .into_iter()
            .map(|cell| cell.into_inner().expect("all rows settled"))
            .collect();
        (out, rank)
    } else {
        let rank = shared.ledger.confirmed.len();
        let out = settled
            .into_iter()
            .map(|cell| cell.into_inner().expect("all rows settled"))
            .collect();
        (out, rank)
    }
}

fn worker(
    shared: &Mutex<Shared>,
    settled: &[OnceLock<SparseRow>],
    n: usize,
    width: u32,
    p: Prime,
    insert_threshold: usize,
) {
    let mut lookup: HashMap<u32, usize> = HashMap::new();
    let mut seen_confirmed = 0usize;
    let mut just_confirmed = false;
    let mut consecutive_inserts = 0usize;
    let mut dense = DenseRow::new(width as usize);
    // (row index, data, reduced-upto; None marks a row not yet processed)
    let mut held: Option<(usize, SparseRow, Option<usize>)> = None;

    loop {
        let target_lp;
        {
            let mut sh = shared.lock().unwrap();
            while seen_confirmed < sh.ledger.confirmed.len() {
                let (h, idx) = sh.ledger.confirmed[seen_confirmed];
                lookup.insert(h, idx);
                seen_confirmed += 1;
            }
            if let Some((j, data, upto)) = held.take() {
                match upto {
                    Some(upto) if upto == sh.ledger.lp => {
                        if j == sh.ledger.lp {
                            if let Some(&(h, _)) = data.first() {
                                sh.ledger.confirmed.push((h, j));
                            }
                            settled[j].set(data).expect("row settled twice");
                            sh.ledger.lp = j + 1;
                            just_confirmed = true;
                            consecutive_inserts = 0;
                        } else {
                            sh.waiting.insert(
                                j,
                                WaitingEntry { row: j, reduced_upto: upto, data },
                            );
                            consecutive_inserts += 1;
                        }
                    }
                    // lp advanced past the snapshot (or the row is fresh):
                    // keep holding and reduce further
                    _ => held = Some((j, data, upto)),
                }
            }
            if held.is_none() {
                let ctx = FetchContext {
                    just_confirmed,
                    consecutive_inserts,
                    insert_threshold,
                    smallest_waiting: sh.waiting.keys().next().copied(),
                    next_fresh: sh.next_fresh,
                    nrows: n,
                };
                match fetch_policy(&ctx) {
                    FetchDecision::Waiting(j) => {
                        let entry = sh.waiting.remove(&j).expect("policy saw the entry");
                        debug_assert!(entry.reduced_upto <= sh.ledger.lp);
                        consecutive_inserts = 0;
                        held = Some((j, entry.data, Some(entry.reduced_upto)));
                    }
                    FetchDecision::Fresh(j) => {
                        sh.next_fresh += 1;
                        let data = sh.rows[j].take().expect("fresh row fetched once");
                        held = Some((j, data, None));
                    }
                    FetchDecision::Exhausted => {
                        if sh.ledger.lp == n {
                            break;
                        }
                        drop(sh);
                        std::thread::yield_now();
                        continue;
                    }
                }
                just_confirmed = false;
            }
            target_lp = sh.ledger.lp;
        }

        // outside the critical section: reduce against the immutable prefix
        if let Some((j, data, upto)) = held.take() {
            let data = if upto == Some(target_lp) {
                data
            } else {
                reduce_row_fixpoint(data, &mut dense, p, &lookup, |i| {
                    settled[i].get().expect("prefix is settled")
                })
            };
            held = Some((j, data, Some(target_lp)));
        }
    }
}

//! The 2-multiline vector data structure and its fused AXPY kernels.
//!
//! A multiline vector packs two logically paired sparse rows behind a single
//! position index: `pos` holds the union of the two supports and `val`
//! interleaves the two rows' entries per column (`val[2i]`, `val[2i+1]`).
//! Columns where both rows are zero are omitted, so at most one wasted entry
//! is stored per column index. The interleaving pays off in the elimination
//! kernels: one pass over `pos` updates two dense accumulator rows with four
//! scalars at once.

use crate::field::{fused_axpy, Prime};
use crate::matrix::SparseRow;

/// Two sparse rows sharing one position index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultilineVector {
    pos: Vec<u32>,
    val: Vec<u16>,
    /// Set when this multiline carries a single unpaired row (odd row
    /// counts); the second line is implicitly absent, not a zero row.
    single: bool,
}

impl MultilineVector {
    /// Interleaves two sparse rows. `pos` becomes the sorted union of the
    /// supports with explicit zeros where only one row has an entry.
    pub fn from_rows(r1: &SparseRow, r2: &SparseRow) -> Self {
        let mut pos = Vec::with_capacity(r1.len().max(r2.len()));
        let mut val = Vec::with_capacity(2 * pos.capacity());
        let (mut i, mut j) = (0usize, 0usize);
        while i < r1.len() || j < r2.len() {
            let c1 = r1.get(i).map(|e| e.0);
            let c2 = r2.get(j).map(|e| e.0);
            match (c1, c2) {
                (Some(a), Some(b)) if a == b => {
                    pos.push(a);
                    val.push(r1[i].1);
                    val.push(r2[j].1);
                    i += 1;
                    j += 1;
                }
                (Some(a), Some(b)) if a < b => {
                    pos.push(a);
                    val.push(r1[i].1);
                    val.push(0);
                    i += 1;
                }
                (Some(_), Some(b)) => {
                    pos.push(b);
                    val.push(0);
                    val.push(r2[j].1);
                    j += 1;
                }
                (Some(a), None) => {
                    pos.push(a);
                    val.push(r1[i].1);
                    val.push(0);
                    i += 1;
                }
                (None, Some(b)) => {
                    pos.push(b);
                    val.push(0);
                    val.push(r2[j].1);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        MultilineVector { pos, val, single: false }
    }

    /// Wraps a final unpaired row; the second line is a zero sentinel.
    pub fn from_single(r: &SparseRow) -> Self {
        let mut ml = MultilineVector::from_rows(r, &Vec::new());
        ml.single = true;
        ml
    }

    /// Recovers the two sparse rows, dropping explicit zeros. A sentinel
    /// single yields an empty second row.
    pub fn expand(&self) -> (SparseRow, SparseRow) {
        let mut r1 = Vec::new();
        let mut r2 = Vec::new();
        for (i, &c) in self.pos.iter().enumerate() {
            let v1 = self.val[2 * i];
            let v2 = self.val[2 * i + 1];
            if v1 != 0 {
                r1.push((c, v1));
            }
            if v2 != 0 {
                r2.push((c, v2));
            }
        }
        (r1, r2)
    }

    /// Length `l`: the number of stored column indices.
    #[inline]
    pub fn len(&self) -> usize {
        self.pos.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    #[inline]
    pub fn pos(&self) -> &[u32] {
        &self.pos
    }

    #[inline]
    pub fn val(&self) -> &[u16] {
        &self.val
    }

    #[inline]
    pub fn is_single(&self) -> bool {
        self.single
    }

    /// The pair of interleaved values at column `col`, if stored.
    pub fn values_at(&self, col: u32) -> Option<(u16, u16)> {
        self.pos
            .binary_search(&col)
            .ok()
            .map(|i| (self.val[2 * i], self.val[2 * i + 1]))
    }
}

/// Walks a multiline's stored entries grouped by column pair `(2s, 2s+1)`,
/// yielding `(s, v11, v12, v21, v22)`: the first line's values at the two
/// columns and the second line's. Used by the kernels to gather the four
/// scalars of one fused pass.
pub(crate) struct PairScalars<'a> {
    pos: &'a [u32],
    val: &'a [u16],
    idx: usize,
}

impl Iterator for PairScalars<'_> {
    type Item = (usize, u16, u16, u16, u16);

    fn next(&mut self) -> Option<Self::Item> {
        if self.idx >= self.pos.len() {
            return None;
        }
        let c = self.pos[self.idx];
        let s = (c / 2) as usize;
        let (mut v11, mut v12, mut v21, mut v22) = (0u16, 0u16, 0u16, 0u16);
        if c % 2 == 0 {
            v11 = self.val[2 * self.idx];
            v21 = self.val[2 * self.idx + 1];
            if self.idx + 1 < self.pos.len() && self.pos[self.idx + 1] == c + 1 {
                v12 = self.val[2 * self.idx + 2];
                v22 = self.val[2 * self.idx + 3];
                self.idx += 2;
            } else {
                self.idx += 1;
            }
        } else {
            v12 = self.val[2 * self.idx];
            v22 = self.val[2 * self.idx + 1];
            self.idx += 1;
        }
        Some((s, v11, v12, v21, v22))
    }
}

/// Scalar quadruples of `ml`'s entries at columns greater than `after`
/// (all entries when `None`).
pub(crate) fn pair_scalars(ml: &MultilineVector, after: Option<u32>) -> PairScalars<'_> {
    let idx = match after {
        Some(a) => ml.pos.partition_point(|&c| c <= a),
        None => 0,
    };
    PairScalars { pos: &ml.pos, val: &ml.val, idx }
}

/// Packs consecutive rows into multilines: `(0,1), (2,3), ...`; an odd last
/// row becomes a sentinel single.
pub fn to_multilines(rows: &[SparseRow]) -> Vec<MultilineVector> {
    let mut out = Vec::with_capacity(rows.len().div_ceil(2));
    let mut it = rows.chunks_exact(2);
    for pair in &mut it {
        out.push(MultilineVector::from_rows(&pair[0], &pair[1]));
    }
    if let [last] = it.remainder() {
        out.push(MultilineVector::from_single(last));
    }
    out
}

/// A temporarily dense row of delayed-reduction accumulators indexed by
/// column.
#[derive(Clone, Debug)]
pub struct DenseRow {
    data: Vec<u64>,
}

impl DenseRow {
    pub fn new(width: usize) -> Self {
        DenseRow { data: vec![0; width] }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.data.len()
    }

    pub fn clear(&mut self) {
        self.data.fill(0);
    }

    /// Clears and scatters a sparse row, subtracting `offset` from each
    /// column index.
    pub fn load(&mut self, row: &[(u32, u16)], offset: u32) {
        self.clear();
        for &(c, v) in row {
            self.data[(c - offset) as usize] = u64::from(v);
        }
    }

    #[inline]
    pub fn as_slice(&self) -> &[u64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [u64] {
        &mut self.data
    }

    /// Reduced field value at local index `j`.
    #[inline]
    pub fn value_at(&self, j: usize, p: Prime) -> u16 {
        p.reduce(self.data[j])
    }

    /// Reduces every accumulator and collects the nonzero entries, adding
    /// `offset` back onto the column indices.
    pub fn to_sparse(&self, p: Prime, offset: u32) -> SparseRow {
        let mut out = Vec::new();
        for (j, &acc) in self.data.iter().enumerate() {
            let v = p.reduce(acc);
            if v != 0 {
                out.push((offset + j as u32, v));
            }
        }
        out
    }
}

/// Fused AXPY of two dense rows with one multiline vector:
/// `dense1[pos[i]] += l11*val[2i] + l12*val[2i+1]` and
/// `dense2[pos[i]] += l21*val[2i] + l22*val[2i+1]`, reduction deferred.
pub fn axpy2(
    dense1: &mut DenseRow,
    dense2: &mut DenseRow,
    l11: u16,
    l12: u16,
    l21: u16,
    l22: u16,
    ml: &MultilineVector,
) {
    let d1 = dense1.data.as_mut_slice();
    let d2 = dense2.data.as_mut_slice();
    for (i, &c) in ml.pos.iter().enumerate() {
        let v1 = ml.val[2 * i];
        let v2 = ml.val[2 * i + 1];
        let k = c as usize;
        d1[k] = fused_axpy(fused_axpy(d1[k], l11, v1), l12, v2);
        d2[k] = fused_axpy(fused_axpy(d2[k], l21, v1), l22, v2);
    }
}

/// Fused AXPY of one dense row with one multiline vector:
/// `dense[pos[i]] += l1*val[2i] + l2*val[2i+1]`. With `l2 == 0` the second
/// line is never read.
pub fn axpy1(dense: &mut DenseRow, l1: u16, l2: u16, ml: &MultilineVector) {
    let d = dense.data.as_mut_slice();
    if l2 == 0 {
        if l1 == 0 {
            return;
        }
        for (i, &c) in ml.pos.iter().enumerate() {
            let k = c as usize;
            d[k] = fused_axpy(d[k], l1, ml.val[2 * i]);
        }
    } else if l1 == 0 {
        for (i, &c) in ml.pos.iter().enumerate() {
            let k = c as usize;
            d[k] = fused_axpy(d[k], l2, ml.val[2 * i + 1]);
        }
    } else {
        for (i, &c) in ml.pos.iter().enumerate() {
            let k = c as usize;
            d[k] = fused_axpy(fused_axpy(d[k], l1, ml.val[2 * i]), l2, ml.val[2 * i + 1]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Prime;

    fn sparse(dense: &[u16]) -> SparseRow {
        dense
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, &v)| (i as u32, v))
            .collect()
    }

    #[test]
    fn worked_example() {
        let r1 = sparse(&[2, 0, 0, 1, 0, 0, 5]);
        let r2 = sparse(&[1, 7, 0, 0, 0, 1, 0]);
        let ml = MultilineVector::from_rows(&r1, &r2);
        assert_eq!(ml.pos(), &[0, 1, 3, 5, 6]);
        assert_eq!(ml.val(), &[2, 1, 0, 7, 1, 0, 0, 1, 5, 0]);
        assert_eq!(ml.expand(), (r1, r2));
    }

    #[test]
    fn zero_second_row() {
        let r1 = sparse(&[0, 3, 0, 4]);
        let ml = MultilineVector::from_rows(&r1, &Vec::new());
        assert_eq!(ml.pos(), &[1, 3]);
        assert_eq!(ml.val(), &[3, 0, 4, 0]);
        assert!(!ml.is_single());
        let (e1, e2) = ml.expand();
        assert_eq!(e1, r1);
        assert!(e2.is_empty());
    }

    #[test]
    fn empty_multiline() {
        let ml = MultilineVector::from_rows(&Vec::new(), &Vec::new());
        assert!(ml.is_empty());
        let (a, b) = ml.expand();
        assert!(a.is_empty() && b.is_empty());
    }

    #[test]
    fn no_useless_column_invariant() {
        let r1 = sparse(&[1, 0, 2, 0, 5]);
        let r2 = sparse(&[0, 0, 3, 0, 0]);
        let ml = MultilineVector::from_rows(&r1, &r2);
        for i in 0..ml.len() {
            assert!(ml.val()[2 * i] != 0 || ml.val()[2 * i + 1] != 0);
        }
        // at most one wasted entry per column index
        let zeros = ml.val().iter().filter(|&&v| v == 0).count();
        assert!(zeros <= ml.len());
    }

    #[test]
    fn odd_row_packing() {
        let rows = vec![sparse(&[1, 2]), sparse(&[0, 3]), sparse(&[4])];
        let mls = to_multilines(&rows);
        assert_eq!(mls.len(), 2);
        assert!(!mls[0].is_single());
        assert!(mls[1].is_single());
        assert_eq!(mls[1].expand().0, rows[2]);
    }

    /// Scalar per-step modular AXPY used as the kernel oracle.
    fn scalar_axpy(dense: &mut [u16], lambda: u16, row: &SparseRow, p: Prime) {
        for &(c, v) in row {
            dense[c as usize] = p.add(dense[c as usize], p.mul(lambda, v));
        }
    }

    fn reduce_all(d: &DenseRow, p: Prime) -> Vec<u16> {
        (0..d.width()).map(|j| d.value_at(j, p)).collect()
    }

    #[test]
    fn axpy2_matches_four_scalar_axpys() {
        let p = Prime::new(251).unwrap();
        let mut state = 12345u64;
        let mut next = move |m: u64| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) % m
        };
        for _ in 0..200 {
            let width = 24usize;
            let mut d1v = vec![0u16; width];
            let mut d2v = vec![0u16; width];
            let mut r1 = Vec::new();
            let mut r2 = Vec::new();
            for c in 0..width as u32 {
                if next(3) == 0 {
                    r1.push((c, next(250) as u16 + 1));
                }
                if next(3) == 0 {
                    r2.push((c, next(250) as u16 + 1));
                }
            }
            let (l11, l12, l21, l22) =
                (next(251) as u16, next(251) as u16, next(251) as u16, next(251) as u16);
            scalar_axpy(&mut d1v, l11, &r1, p);
            scalar_axpy(&mut d1v, l12, &r2, p);
            scalar_axpy(&mut d2v, l21, &r1, p);
            scalar_axpy(&mut d2v, l22, &r2, p);

            let ml = MultilineVector::from_rows(&r1, &r2);
            let mut d1 = DenseRow::new(width);
            let mut d2 = DenseRow::new(width);
            axpy2(&mut d1, &mut d2, l11, l12, l21, l22, &ml);
            assert_eq!(reduce_all(&d1, p), d1v);
            assert_eq!(reduce_all(&d2, p), d2v);
        }
    }

    #[test]
    fn axpy2_zero_scalars_leave_dense_unchanged() {
        let ml = MultilineVector::from_rows(&sparse(&[1, 2, 3]), &sparse(&[0, 4]));
        let mut d1 = DenseRow::new(4);
        let mut d2 = DenseRow::new(4);
        d1.as_mut_slice()[0] = 9;
        axpy2(&mut d1, &mut d2, 0, 0, 0, 0, &ml);
        assert_eq!(d1.as_slice(), &[9, 0, 0, 0]);
        assert_eq!(d2.as_slice(), &[0, 0, 0, 0]);
    }

    #[test]
    fn axpy2_identity_scalar_adds_first_row() {
        let p = Prime::new(7).unwrap();
        let r1 = sparse(&[2, 0, 5]);
        let r2 = sparse(&[0, 3, 1]);
        let ml = MultilineVector::from_rows(&r1, &r2);
        let mut d1 = DenseRow::new(3);
        let mut d2 = DenseRow::new(3);
        axpy2(&mut d1, &mut d2, 1, 0, 0, 0, &ml);
        assert_eq!(reduce_all(&d1, p), vec![2, 0, 5]);
        assert_eq!(reduce_all(&d2, p), vec![0, 0, 0]);
    }

    #[test]
    fn axpy1_matches_axpy2_single_output() {
        let p = Prime::new(251).unwrap();
        let r1 = sparse(&[10, 0, 0, 20, 30]);
        let r2 = sparse(&[0, 5, 0, 6, 0]);
        let ml = MultilineVector::from_rows(&r1, &r2);
        for (l1, l2) in [(3u16, 8u16), (1, 0), (0, 9), (250, 250)] {
            let mut d = DenseRow::new(5);
            let mut d1 = DenseRow::new(5);
            let mut scratch = DenseRow::new(5);
            axpy1(&mut d, l1, l2, &ml);
            axpy2(&mut d1, &mut scratch, l1, l2, 0, 0, &ml);
            assert_eq!(reduce_all(&d, p), reduce_all(&d1, p));
        }
    }

    #[test]
    fn axpy1_on_single_adds_row() {
        let p = Prime::new(7).unwrap();
        let r1 = sparse(&[2, 0, 5]);
        let ml = MultilineVector::from_single(&r1);
        let mut d = DenseRow::new(3);
        axpy1(&mut d, 1, 0, &ml);
        assert_eq!(reduce_all(&d, p), vec![2, 0, 5]);
    }
}

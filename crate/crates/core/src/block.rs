//! Cache-sized square blocking of a sparse quadrant.
//!
//! The block side is a power of two (256 by default, sized for L1);
//! logical entry `(i, j)` lives in block `(i / side, j / side)` at offset
//! `(i % side, j % side)`. Blocking is an implementation detail of the
//! kernels: results never depend on the chosen side.

use crate::matrix::SparseRow;

/// A sparse matrix stored as a row-major grid of square sparse blocks.
#[derive(Debug, Clone)]
pub struct BlockMatrix {
    side: usize,
    nrows: usize,
    ncols: usize,
    grid_cols: usize,
    /// Per block: `(local row, local col, value)` sorted row-major.
    blocks: Vec<Vec<(u16, u16, u16)>>,
}

impl BlockMatrix {
    /// Scatters sparse rows into blocks. `side` must be a power of two.
    pub fn from_rows(rows: &[SparseRow], ncols: u32, side: usize) -> Self {
        assert!(side.is_power_of_two(), "block side must be a power of two");
        assert!(side <= u16::MAX as usize + 1, "block side exceeds local index width");
        let nrows = rows.len();
        let ncols = ncols as usize;
        let grid_rows = nrows.div_ceil(side).max(1);
        let grid_cols = ncols.div_ceil(side).max(1);
        let mut blocks = vec![Vec::new(); grid_rows * grid_cols];
        for (i, row) in rows.iter().enumerate() {
            let br = i / side;
            let lr = (i % side) as u16;
            for &(c, v) in row {
                let bc = c as usize / side;
                blocks[br * grid_cols + bc].push((lr, (c as usize % side) as u16, v));
            }
        }
        BlockMatrix { side, nrows, ncols, grid_cols, blocks }
    }

    #[inline]
    pub fn side(&self) -> usize {
        self.side
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn grid_rows(&self) -> usize {
        if self.nrows == 0 {
            0
        } else {
            self.nrows.div_ceil(self.side)
        }
    }

    #[inline]
    pub fn grid_cols(&self) -> usize {
        self.grid_cols
    }

    /// Entries of block `(block_row, block_col)`.
    #[inline]
    pub fn block(&self, block_row: usize, block_col: usize) -> &[(u16, u16, u16)] {
        &self.blocks[block_row * self.grid_cols + block_col]
    }

    pub fn nnz(&self) -> u64 {
        self.blocks.iter().map(|b| b.len() as u64).sum()
    }

    /// Expands back to sparse rows (for tests).
    pub fn to_rows(&self) -> Vec<SparseRow> {
        let mut rows: Vec<SparseRow> = vec![Vec::new(); self.nrows];
        for br in 0..self.grid_rows() {
            for bc in 0..self.grid_cols {
                for &(lr, lc, v) in self.block(br, bc) {
                    rows[br * self.side + lr as usize]
                        .push(((bc * self.side + lc as usize) as u32, v));
                }
            }
        }
        for row in &mut rows {
            row.sort_unstable_by_key(|&(c, _)| c);
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scatter_and_gather() {
        let rows: Vec<SparseRow> = vec![
            vec![(0, 1), (5, 2), (17, 3)],
            vec![(3, 4)],
            vec![],
            vec![(16, 5), (18, 6)],
        ];
        for side in [2usize, 4, 16, 256] {
            let b = BlockMatrix::from_rows(&rows, 20, side);
            assert_eq!(b.to_rows(), rows, "side {side}");
            assert_eq!(b.nnz(), 6);
        }
    }

    #[test]
    fn placement_invariant() {
        let rows: Vec<SparseRow> = vec![vec![(9, 7)]; 5];
        let b = BlockMatrix::from_rows(&rows, 12, 4);
        // entry (3, 9) -> block (0, 2) at offset (3, 1)
        assert!(b.block(0, 2).contains(&(3, 1, 7)));
    }

    #[test]
    #[should_panic(expected = "power of two")]
    fn rejects_non_power_of_two() {
        let _ = BlockMatrix::from_rows(&[], 4, 3);
    }
}

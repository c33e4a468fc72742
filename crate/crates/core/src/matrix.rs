//! Sparse matrices over `F_p` in a row-major sparse representation.
//!
//! This is the interchange form all pipelines consume and produce: each row
//! is a list of `(column, value)` pairs sorted strictly by column with
//! nonzero values in `[1, p)`.

use std::fmt;

use crate::field::Prime;

/// One sparse row: `(column, value)` pairs, strictly increasing columns,
/// values in `[1, p)`.
pub type SparseRow = Vec<(u32, u16)>;

/// A sparse matrix over `F_p`.
#[derive(Clone, PartialEq, Eq)]
pub struct SparseMatrix {
    ncols: u32,
    modulus: Prime,
    rows: Vec<SparseRow>,
}

/// Structural violation found while building a [`SparseMatrix`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatrixError {
    ColumnOutOfRange { row: usize, col: u32, ncols: u32 },
    UnsortedColumns { row: usize },
    ZeroValue { row: usize, col: u32 },
    ValueOutOfRange { row: usize, col: u32, value: u16, modulus: u16 },
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixError::ColumnOutOfRange { row, col, ncols } => {
                write!(f, "row {row}: column {col} out of range (ncols = {ncols})")
            }
            MatrixError::UnsortedColumns { row } => {
                write!(f, "row {row}: columns not strictly increasing")
            }
            MatrixError::ZeroValue { row, col } => {
                write!(f, "row {row}: explicit zero stored at column {col}")
            }
            MatrixError::ValueOutOfRange { row, col, value, modulus } => {
                write!(f, "row {row}: value {value} at column {col} not reduced mod {modulus}")
            }
        }
    }
}

impl std::error::Error for MatrixError {}

impl SparseMatrix {
    /// Builds a matrix from per-row entry lists, validating every row.
    pub fn from_rows(
        ncols: u32,
        modulus: Prime,
        rows: Vec<SparseRow>,
    ) -> Result<Self, MatrixError> {
        for (i, row) in rows.iter().enumerate() {
            validate_row(row, i, ncols, modulus)?;
        }
        Ok(SparseMatrix { ncols, modulus, rows })
    }

    /// The all-zero `nrows x ncols` matrix.
    pub fn zero(nrows: usize, ncols: u32, modulus: Prime) -> Self {
        SparseMatrix { ncols, modulus, rows: vec![Vec::new(); nrows] }
    }

    /// The `k x k` identity.
    pub fn identity(k: u32, modulus: Prime) -> Self {
        let rows = (0..k).map(|i| vec![(i, 1u16)]).collect();
        SparseMatrix { ncols: k, modulus, rows }
    }

    /// Builds from a dense row-major table, dropping zeros and reducing
    /// nothing: values must already lie in `[0, p)`.
    pub fn from_dense(dense: &[Vec<u16>], ncols: u32, modulus: Prime) -> Result<Self, MatrixError> {
        let mut rows = Vec::with_capacity(dense.len());
        for r in dense {
            let mut row: SparseRow = Vec::new();
            for (j, &v) in r.iter().enumerate() {
                if v != 0 {
                    row.push((j as u32, v));
                }
            }
            rows.push(row);
        }
        SparseMatrix::from_rows(ncols, modulus, rows)
    }

    pub fn to_dense(&self) -> Vec<Vec<u16>> {
        let mut out = vec![vec![0u16; self.ncols as usize]; self.rows.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                out[i][c as usize] = v;
            }
        }
        out
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn ncols(&self) -> u32 {
        self.ncols
    }

    #[inline]
    pub fn modulus(&self) -> Prime {
        self.modulus
    }

    pub fn nnz(&self) -> u64 {
        self.rows.iter().map(|r| r.len() as u64).sum()
    }

    pub fn density(&self) -> f64 {
        let cells = self.rows.len() as f64 * self.ncols as f64;
        if cells == 0.0 {
            0.0
        } else {
            self.nnz() as f64 / cells
        }
    }

    #[inline]
    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    #[inline]
    pub fn row(&self, i: usize) -> &SparseRow {
        &self.rows[i]
    }

    pub fn into_rows(self) -> Vec<SparseRow> {
        self.rows
    }

    /// Re-checks all structural invariants. Writers call this before
    /// serializing so that corrupt in-memory data is rejected rather than
    /// encoded.
    pub fn validate(&self) -> Result<(), MatrixError> {
        for (i, row) in self.rows.iter().enumerate() {
            validate_row(row, i, self.ncols, self.modulus)?;
        }
        Ok(())
    }
}

impl fmt::Debug for SparseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SparseMatrix({}x{} mod {}, nnz={})",
            self.nrows(),
            self.ncols,
            self.modulus,
            self.nnz()
        )
    }
}

fn validate_row(row: &SparseRow, i: usize, ncols: u32, modulus: Prime) -> Result<(), MatrixError> {
    let p = modulus.value();
    let mut last: Option<u32> = None;
    for &(c, v) in row {
        if c >= ncols {
            return Err(MatrixError::ColumnOutOfRange { row: i, col: c, ncols });
        }
        if let Some(prev) = last {
            if c <= prev {
                return Err(MatrixError::UnsortedColumns { row: i });
            }
        }
        if v == 0 {
            return Err(MatrixError::ZeroValue { row: i, col: c });
        }
        if v >= p {
            return Err(MatrixError::ValueOutOfRange { row: i, col: c, value: v, modulus: p });
        }
        last = Some(c);
    }
    Ok(())
}

/// Leading (leftmost) entry of a row, if any.
#[inline]
pub fn leading(row: &SparseRow) -> Option<(u32, u16)> {
    row.first().copied()
}

/// Number of nonzero entries of a row.
#[inline]
pub fn row_weight(row: &SparseRow) -> usize {
    row.len()
}

/// The subslice of `row` whose columns fall in `[c0, c1)`.
pub fn row_slice(row: &SparseRow, c0: u32, c1: u32) -> &[(u32, u16)] {
    let start = row.partition_point(|&(c, _)| c < c0);
    let end = row.partition_point(|&(c, _)| c < c1);
    &row[start..end]
}

//! Row echelon forms and ranks of sparse matrices over prime fields `F_p`
//! with `p < 2^16`.
//!
//! The elimination is specialized for nearly-triangular sparse matrices of
//! the kind produced by polynomial-reduction workloads: the input is spliced
//! into quadrants around its already-visible pivots, the quadrants are
//! eliminated with cache-blocked fused kernels over a 2-multiline row
//! representation, and the remaining dense-ish corner goes through a
//! structured Gaussian elimination that also has a multi-threaded
//! waiting-list variant. Two compressed binary file formats and
//! MatrixMarket text are supported for interchange.
//!
//! Entry points: [`echelonize`] for the full pipeline, [`formats`] for I/O.

pub mod block;
pub mod eliminate;
pub mod field;
pub mod formats;
pub mod generate;
pub mod matrix;
pub mod multiline;
pub mod oracle;
pub mod parallel;
pub mod splice;

pub use eliminate::{echelonize, EchelonOptions, EchelonResult, Engine, Order};
pub use field::{NotPrime, Prime};
pub use matrix::{MatrixError, SparseMatrix, SparseRow};
pub use multiline::MultilineVector;
pub use splice::{analyze, normalize_rows, split, PivotMap, Splice};

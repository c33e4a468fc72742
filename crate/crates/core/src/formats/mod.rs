//! Bit-exact readers and writers for the two compressed binary matrix
//! formats, plus MatrixMarket text import/export.
//!
//! Both binary formats are little-endian streams. Format 1 is a plain
//! CSR-style dump (values, column indices, row lengths). Format 2 separates
//! entry locations from coefficient data: column indices are run-compressed
//! and rows sharing the same coefficient vector point into one deduplicated
//! polynomial table.

mod colid;
mod format1;
mod format2;
mod market;

pub use colid::{decode_colids, encode_colids, COLID_SINGLE_MASK};
pub use format1::{read_format1, write_format1};
pub use format2::{read_format2, write_format2, FORMAT2_VERSION};
pub use market::{dump_matrixmarket, read_matrixmarket};

use std::fmt;
use std::io::Read;

use crate::field::NotPrime;
use crate::matrix::{MatrixError, SparseMatrix};

/// Errors produced by the binary and text codecs. Stream-position errors
/// carry the byte offset where the problem was detected.
#[derive(Debug)]
pub enum FormatError {
    /// The stream ended before the declared layout was complete.
    Truncated { offset: u64 },
    Io { offset: u64, source: std::io::Error },
    /// Declared `nnz` disagrees with the sum of the row lengths.
    NnzMismatch { declared: u64, row_sum: u64 },
    ColumnOutOfRange { row: usize, col: u64, ncols: u64, offset: u64 },
    UnsortedColumns { row: usize, offset: u64 },
    ZeroValue { row: usize, offset: u64 },
    ValueOutOfRange { row: usize, value: u64, modulus: u64, offset: u64 },
    BadModulus(NotPrime),
    /// Format 2: version bits in `b` not recognized.
    UnknownVersion { version: u8 },
    /// Format 2: the 3-bit type code does not denote 16-bit unsigned data.
    UnsupportedTypeCode { bits: u8 },
    /// Format 2 stores at most `2^31 - 1` rows.
    RowLimit { nrows: u64 },
    /// Column indices must stay below `2^31` for the run encoding mask.
    ColumnLimit { col: u64 },
    /// A column run extends past the row's declared length.
    RunOverrun { row: usize, offset: u64 },
    /// Decoded column count disagrees with the row's declared length.
    ColidCount { row: usize, expected: usize, got: usize },
    /// Column-id tokens left over after all rows were decoded.
    TrailingTokens { remaining: u64 },
    /// A zero-length or malformed run pair.
    BadRun { row: usize, offset: u64 },
    PolymapOutOfRange { row: usize, index: u32, pnb: u32 },
    PolyLengthMismatch { row: usize, row_len: u32, poly_len: u32 },
    /// Declared `pnnz` disagrees with the sum of polynomial supports.
    PnnzMismatch { declared: u64, prow_sum: u64 },
    /// In-memory matrix failed validation before writing.
    InvalidMatrix(MatrixError),
    /// MatrixMarket text problem at a 1-based line number.
    Market { line: usize, msg: String },
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use FormatError::*;
        match self {
            Truncated { offset } => write!(f, "stream truncated at byte {offset}"),
            Io { offset, source } => write!(f, "i/o error at byte {offset}: {source}"),
            NnzMismatch { declared, row_sum } => {
                write!(f, "declared nnz {declared} != sum of row lengths {row_sum}")
            }
            ColumnOutOfRange { row, col, ncols, offset } => write!(
                f,
                "row {row}: column {col} >= ncols {ncols} (at byte {offset})"
            ),
            UnsortedColumns { row, offset } => {
                write!(f, "row {row}: columns not strictly increasing (at byte {offset})")
            }
            ZeroValue { row, offset } => {
                write!(f, "row {row}: explicit zero value (at byte {offset})")
            }
            ValueOutOfRange { row, value, modulus, offset } => write!(
                f,
                "row {row}: value {value} >= modulus {modulus} (at byte {offset})"
            ),
            BadModulus(e) => write!(f, "{e}"),
            UnknownVersion { version } => write!(f, "unknown format version {version}"),
            UnsupportedTypeCode { bits } => {
                write!(f, "unsupported coefficient type code {bits:#05b}")
            }
            RowLimit { nrows } => write!(f, "{nrows} rows exceed the 2^31 row limit"),
            ColumnLimit { col } => write!(f, "column {col} exceeds the 2^31 column limit"),
            RunOverrun { row, offset } => {
                write!(f, "row {row}: column run overruns row length (at byte {offset})")
            }
            ColidCount { row, expected, got } => {
                write!(f, "row {row}: decoded {got} columns, expected {expected}")
            }
            TrailingTokens { remaining } => {
                write!(f, "{remaining} column-id tokens left after decoding all rows")
            }
            BadRun { row, offset } => {
                write!(f, "row {row}: malformed column run (at byte {offset})")
            }
            PolymapOutOfRange { row, index, pnb } => {
                write!(f, "row {row}: polynomial index {index} >= pnb {pnb}")
            }
            PolyLengthMismatch { row, row_len, poly_len } => write!(
                f,
                "row {row}: row length {row_len} != polynomial support {poly_len}"
            ),
            PnnzMismatch { declared, prow_sum } => {
                write!(f, "declared pnnz {declared} != sum of polynomial supports {prow_sum}")
            }
            InvalidMatrix(e) => write!(f, "invalid matrix: {e}"),
            Market { line, msg } => write!(f, "matrixmarket line {line}: {msg}"),
        }
    }
}

impl std::error::Error for FormatError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            FormatError::Io { source, .. } => Some(source),
            FormatError::BadModulus(e) => Some(e),
            FormatError::InvalidMatrix(e) => Some(e),
            _ => None,
        }
    }
}

impl From<MatrixError> for FormatError {
    fn from(e: MatrixError) -> Self {
        FormatError::InvalidMatrix(e)
    }
}

/// Little-endian reader tracking the current byte offset for error reports.
pub(crate) struct ByteReader<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> ByteReader<R> {
    pub(crate) fn new(inner: R) -> Self {
        ByteReader { inner, offset: 0 }
    }

    #[inline]
    pub(crate) fn offset(&self) -> u64 {
        self.offset
    }

    fn fill(&mut self, buf: &mut [u8]) -> Result<(), FormatError> {
        match self.inner.read_exact(buf) {
            Ok(()) => {
                self.offset += buf.len() as u64;
                Ok(())
            }
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
                Err(FormatError::Truncated { offset: self.offset })
            }
            Err(e) => Err(FormatError::Io { offset: self.offset, source: e }),
        }
    }

    pub(crate) fn u16(&mut self) -> Result<u16, FormatError> {
        let mut b = [0u8; 2];
        self.fill(&mut b)?;
        Ok(u16::from_le_bytes(b))
    }

    pub(crate) fn u32(&mut self) -> Result<u32, FormatError> {
        let mut b = [0u8; 4];
        self.fill(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    pub(crate) fn u64(&mut self) -> Result<u64, FormatError> {
        let mut b = [0u8; 8];
        self.fill(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }

    pub(crate) fn u16s(&mut self, n: usize) -> Result<Vec<u16>, FormatError> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.u16()?);
        }
        Ok(out)
    }

    pub(crate) fn u32s(&mut self, n: usize) -> Result<Vec<u32>, FormatError> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.u32()?);
        }
        Ok(out)
    }

    pub(crate) fn u64s(&mut self, n: usize) -> Result<Vec<u64>, FormatError> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.u64()?);
        }
        Ok(out)
    }
}

pub(crate) fn put_u16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

pub(crate) fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

/// Converts a Format 1 stream into Format 2 bytes. Matrix semantics are
/// preserved exactly; only the encoding changes.
pub fn convert_1_to_2<R: Read>(input: R) -> Result<Vec<u8>, FormatError> {
    let m = read_format1(input)?;
    write_format2(&m)
}

/// Converts a Format 2 stream into Format 1 bytes.
pub fn convert_2_to_1<R: Read>(input: R) -> Result<Vec<u8>, FormatError> {
    let m = read_format2(input)?;
    write_format1(&m)
}

/// Input kinds the auto-detector can recognize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectedFormat {
    Format1,
    Format2,
    MatrixMarket,
}

/// Sniffs a buffered input. Detection order: Format 2 version bits, then
/// Format 1 size plausibility (declared nnz consistent with the stream
/// length), then the MatrixMarket banner.
pub fn detect_format(bytes: &[u8]) -> Option<DetectedFormat> {
    if bytes.len() >= 4 {
        let b = u32::from_le_bytes(bytes[..4].try_into().unwrap());
        if (b >> 24) as u8 == FORMAT2_VERSION && matches!(b & 0b111, 0b010 | 0b011) {
            return Some(DetectedFormat::Format2);
        }
    }
    if bytes.len() >= 20 {
        let m = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as u64;
        let p = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        let nnz = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
        let expect = nnz
            .checked_mul(6)
            .and_then(|t| t.checked_add(m.checked_mul(4)?))
            .and_then(|t| t.checked_add(20));
        if expect == Some(bytes.len() as u64) && p > 2 && p < (1 << 16) {
            return Some(DetectedFormat::Format1);
        }
    }
    if bytes.starts_with(b"%%MatrixMarket") {
        return Some(DetectedFormat::MatrixMarket);
    }
    None
}

/// Reads a matrix from a buffer in the given format. MatrixMarket input
/// needs an externally supplied modulus since the text format carries none.
pub fn read_detected(
    bytes: &[u8],
    format: DetectedFormat,
    market_modulus: Option<crate::field::Prime>,
) -> Result<SparseMatrix, FormatError> {
    match format {
        DetectedFormat::Format1 => read_format1(bytes),
        DetectedFormat::Format2 => read_format2(bytes),
        DetectedFormat::MatrixMarket => {
            let p = market_modulus.ok_or(FormatError::Market {
                line: 0,
                msg: "matrixmarket input requires a modulus".into(),
            })?;
            read_matrixmarket(bytes, p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Prime;

    #[test]
    fn detect_both_binary_formats_and_market() {
        let p = Prime::new(7).unwrap();
        let m = SparseMatrix::from_rows(3, p, vec![vec![(0, 2), (2, 5)], vec![(1, 1)]]).unwrap();
        let f1 = write_format1(&m).unwrap();
        let f2 = write_format2(&m).unwrap();
        assert_eq!(detect_format(&f1), Some(DetectedFormat::Format1));
        assert_eq!(detect_format(&f2), Some(DetectedFormat::Format2));
        assert_eq!(
            detect_format(b"%%MatrixMarket matrix coordinate integer general\n1 1 0\n"),
            Some(DetectedFormat::MatrixMarket)
        );
        assert_eq!(detect_format(b"garbage"), None);
    }

    #[test]
    fn convert_preserves_matrix() {
        let p = Prime::new(251).unwrap();
        let m = SparseMatrix::from_rows(
            5,
            p,
            vec![vec![(0, 1), (1, 2), (2, 3)], vec![], vec![(2, 1), (3, 2), (4, 3)]],
        )
        .unwrap();
        let f1 = write_format1(&m).unwrap();
        let f2 = convert_1_to_2(f1.as_slice()).unwrap();
        assert_eq!(read_format2(f2.as_slice()).unwrap(), m);
        let back = convert_2_to_1(f2.as_slice()).unwrap();
        assert_eq!(read_format1(back.as_slice()).unwrap(), m);
    }
}

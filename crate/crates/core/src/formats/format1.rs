//! Format 1: plain CSR-style binary dump.
//!
//! Little-endian layout: `m` (u32), `n` (u32), `p` (u32), `nnz` (u64),
//! `data` (nnz x u16), `cols` (nnz x u32), `rows` (m x u32 row lengths).

use std::io::Read;

use super::{put_u16, put_u32, put_u64, ByteReader, FormatError};
use crate::field::Prime;
use crate::matrix::{SparseMatrix, SparseRow};

pub fn read_format1<R: Read>(input: R) -> Result<SparseMatrix, FormatError> {
    let mut r = ByteReader::new(input);
    let m = r.u32()? as usize;
    let n = r.u32()?;
    let p_raw = r.u32()?;
    let modulus = Prime::from_u64(u64::from(p_raw)).map_err(FormatError::BadModulus)?;
    let nnz = r.u64()?;

    let data_offset = r.offset();
    let data = r.u16s(usize::try_from(nnz).expect("nnz fits in memory"))?;
    let cols_offset = r.offset();
    let cols = r.u32s(nnz as usize)?;
    let rows_len = r.u32s(m)?;

    let row_sum: u64 = rows_len.iter().map(|&l| u64::from(l)).sum();
    if row_sum != nnz {
        return Err(FormatError::NnzMismatch { declared: nnz, row_sum });
    }

    let mut rows: Vec<SparseRow> = Vec::with_capacity(m);
    let mut j = 0usize;
    for (i, &len) in rows_len.iter().enumerate() {
        let len = len as usize;
        let mut row: SparseRow = Vec::with_capacity(len);
        let mut prev: Option<u32> = None;
        for k in 0..len {
            let c = cols[j + k];
            let v = data[j + k];
            if c >= n {
                return Err(FormatError::ColumnOutOfRange {
                    row: i,
                    col: u64::from(c),
                    ncols: u64::from(n),
                    offset: cols_offset + 4 * (j + k) as u64,
                });
            }
            if let Some(pc) = prev {
                if c <= pc {
                    return Err(FormatError::UnsortedColumns {
                        row: i,
                        offset: cols_offset + 4 * (j + k) as u64,
                    });
                }
            }
            if v == 0 {
                return Err(FormatError::ZeroValue {
                    row: i,
                    offset: data_offset + 2 * (j + k) as u64,
                });
            }
            if v >= modulus.value() {
                return Err(FormatError::ValueOutOfRange {
                    row: i,
                    value: u64::from(v),
                    modulus: u64::from(modulus.value()),
                    offset: data_offset + 2 * (j + k) as u64,
                });
            }
            prev = Some(c);
            row.push((c, v));
        }
        j += len;
        rows.push(row);
    }

    Ok(SparseMatrix::from_rows(n, modulus, rows)?)
}

pub fn write_format1(m: &SparseMatrix) -> Result<Vec<u8>, FormatError> {
    m.validate()?;
    let nnz = m.nnz();
    let mut out = Vec::with_capacity(20 + 6 * nnz as usize + 4 * m.nrows());
    put_u32(&mut out, m.nrows() as u32);
    put_u32(&mut out, m.ncols());
    put_u32(&mut out, u32::from(m.modulus().value()));
    put_u64(&mut out, nnz);
    for row in m.rows() {
        for &(_, v) in row {
            put_u16(&mut out, v);
        }
    }
    for row in m.rows() {
        for &(c, _) in row {
            put_u32(&mut out, c);
        }
    }
    for row in m.rows() {
        put_u32(&mut out, row.len() as u32);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: u16) -> Prime {
        Prime::new(v).unwrap()
    }

    #[test]
    fn round_trip_small() {
        let m = SparseMatrix::from_rows(3, p(7), vec![vec![(0, 2), (2, 5)]]).unwrap();
        let bytes = write_format1(&m).unwrap();
        let back = read_format1(bytes.as_slice()).unwrap();
        assert_eq!(back, m);
        // byte-identical re-encode
        assert_eq!(write_format1(&back).unwrap(), bytes);
    }

    #[test]
    fn round_trip_identity() {
        let m = SparseMatrix::identity(2, p(65521));
        let bytes = write_format1(&m).unwrap();
        assert_eq!(bytes.len(), 20 + 2 * 2 + 4 * 2 + 4 * 2);
        assert_eq!(read_format1(bytes.as_slice()).unwrap(), m);
    }

    #[test]
    fn empty_matrix() {
        let m = SparseMatrix::zero(0, 0, p(7));
        let bytes = write_format1(&m).unwrap();
        assert_eq!(bytes.len(), 20);
        let back = read_format1(bytes.as_slice()).unwrap();
        assert_eq!(back.nrows(), 0);
        assert_eq!(back.ncols(), 0);
        assert_eq!(back.nnz(), 0);
    }

    #[test]
    fn empty_rows_only() {
        let m = SparseMatrix::zero(3, 4, p(7));
        let bytes = write_format1(&m).unwrap();
        let back = read_format1(bytes.as_slice()).unwrap();
        assert_eq!(back.nrows(), 3);
        assert_eq!(back.nnz(), 0);
    }

    #[test]
    fn nnz_mismatch_rejected() {
        let m = SparseMatrix::from_rows(3, p(7), vec![vec![(0, 2), (2, 5)]]).unwrap();
        let mut bytes = write_format1(&m).unwrap();
        // row-length table is the last 4 bytes; corrupt it
        let n = bytes.len();
        bytes[n - 4] = 1;
        let err = read_format1(bytes.as_slice()).unwrap_err();
        assert!(matches!(err, FormatError::NnzMismatch { .. }));
    }

    #[test]
    fn truncation_rejected() {
        let m = SparseMatrix::from_rows(3, p(7), vec![vec![(0, 2), (2, 5)]]).unwrap();
        let bytes = write_format1(&m).unwrap();
        for cut in [0, 5, 19, bytes.len() - 1] {
            let err = read_format1(&bytes[..cut]).unwrap_err();
            assert!(matches!(err, FormatError::Truncated { .. }), "cut at {cut}");
        }
    }

    #[test]
    fn bad_column_and_value_rejected() {
        let m = SparseMatrix::from_rows(3, p(7), vec![vec![(0, 2), (2, 5)]]).unwrap();
        let good = write_format1(&m).unwrap();

        // column index out of range: cols array starts at byte 20 + 2*2
        let mut bad = good.clone();
        bad[24] = 9;
        assert!(matches!(
            read_format1(bad.as_slice()).unwrap_err(),
            FormatError::ColumnOutOfRange { .. }
        ));

        // value >= p: data array starts at byte 20
        let mut bad = good.clone();
        bad[20] = 7;
        assert!(matches!(
            read_format1(bad.as_slice()).unwrap_err(),
            FormatError::ValueOutOfRange { .. }
        ));

        // explicit zero value
        let mut bad = good;
        bad[20] = 0;
        assert!(matches!(
            read_format1(bad.as_slice()).unwrap_err(),
            FormatError::ZeroValue { .. }
        ));
    }

    #[test]
    fn composite_modulus_rejected() {
        let m = SparseMatrix::from_rows(2, p(7), vec![vec![(0, 1)]]).unwrap();
        let mut bytes = write_format1(&m).unwrap();
        bytes[8] = 8; // p = 8
        assert!(matches!(
            read_format1(bytes.as_slice()).unwrap_err(),
            FormatError::BadModulus(_)
        ));
    }
}

//! Format 2: locations and coefficient data separated.
//!
//! Little-endian layout: `b` (u32 type/version code), `m` (u32), `n` (u32),
//! `p` (u64), `nnz` (u64), `rows` (m x u32), `polmap` (m x u32), `k` (u64),
//! `colid` (k x u64 run tokens), `pnb` (u32), `pnnz` (u64),
//! `prow` (pnb x u32), `pdata` (pnnz coefficients, u16 here).
//!
//! Rows whose value sequences are identical share one entry of the
//! polynomial table; `polmap[i]` names row `i`'s entry. Column indices are
//! run-compressed (see [`super::colid`]). At most `2^31 - 1` rows are
//! representable.

use std::collections::HashMap;
use std::io::Read;

use super::colid::{decode_colids, encode_colids};
use super::{put_u16, put_u32, put_u64, ByteReader, FormatError};
use crate::field::Prime;
use crate::matrix::{SparseMatrix, SparseRow};

/// Format version carried in the top 8 bits of `b`.
pub const FORMAT2_VERSION: u8 = 1;

/// Type code we emit: unsigned (`u = 0`), 16-bit (`v = 1`).
const TYPE_CODE_U16: u32 = 0b010;
/// Also accepted on read; some writers flag 16-bit unsigned data this way.
const TYPE_CODE_U16_ALT: u32 = 0b011;

/// Deduplicated per-row coefficient vectors.
///
/// `polmap[i]` indexes `polynomials`; expanding the table per `polmap`
/// reproduces every row's value sequence exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolynomialTable {
    pub polynomials: Vec<Vec<u16>>,
    pub polmap: Vec<u32>,
}

impl PolynomialTable {
    /// Groups rows by exact value-sequence equality, numbering polynomials
    /// in first-appearance order.
    pub fn build(rows: &[SparseRow]) -> Self {
        let mut index: HashMap<Vec<u16>, u32> = HashMap::new();
        let mut polynomials: Vec<Vec<u16>> = Vec::new();
        let mut polmap = Vec::with_capacity(rows.len());
        for row in rows {
            let values: Vec<u16> = row.iter().map(|&(_, v)| v).collect();
            let id = *index.entry(values.clone()).or_insert_with(|| {
                polynomials.push(values);
                (polynomials.len() - 1) as u32
            });
            polmap.push(id);
        }
        PolynomialTable { polynomials, polmap }
    }

    /// Number of distinct polynomials (`pnb`).
    pub fn count(&self) -> usize {
        self.polynomials.len()
    }

    /// Total coefficient count (`pnnz`).
    pub fn coefficient_count(&self) -> u64 {
        self.polynomials.iter().map(|p| p.len() as u64).sum()
    }
}

pub fn write_format2(m: &SparseMatrix) -> Result<Vec<u8>, FormatError> {
    m.validate()?;
    if m.nrows() as u64 >= 1 << 31 {
        return Err(FormatError::RowLimit { nrows: m.nrows() as u64 });
    }

    let table = PolynomialTable::build(m.rows());
    let mut colid: Vec<u64> = Vec::new();
    for row in m.rows() {
        let cols: Vec<u32> = row.iter().map(|&(c, _)| c).collect();
        encode_colids(&cols, &mut colid)?;
    }

    let b = (u32::from(FORMAT2_VERSION) << 24) | TYPE_CODE_U16;
    let mut out = Vec::new();
    put_u32(&mut out, b);
    put_u32(&mut out, m.nrows() as u32);
    put_u32(&mut out, m.ncols());
    put_u64(&mut out, u64::from(m.modulus().value()));
    put_u64(&mut out, m.nnz());
    for row in m.rows() {
        put_u32(&mut out, row.len() as u32);
    }
    for &id in &table.polmap {
        put_u32(&mut out, id);
    }
    put_u64(&mut out, colid.len() as u64);
    for &tok in &colid {
        put_u64(&mut out, tok);
    }
    put_u32(&mut out, table.count() as u32);
    put_u64(&mut out, table.coefficient_count());
    for poly in &table.polynomials {
        put_u32(&mut out, poly.len() as u32);
    }
    for poly in &table.polynomials {
        for &v in poly {
            put_u16(&mut out, v);
        }
    }
    Ok(out)
}

pub fn read_format2<R: Read>(input: R) -> Result<SparseMatrix, FormatError> {
    let mut r = ByteReader::new(input);
    let b = r.u32()?;
    let version = (b >> 24) as u8;
    if version != FORMAT2_VERSION {
        return Err(FormatError::UnknownVersion { version });
    }
    let type_code = b & 0b111;
    if type_code != TYPE_CODE_U16 && type_code != TYPE_CODE_U16_ALT {
        return Err(FormatError::UnsupportedTypeCode { bits: type_code as u8 });
    }
    let m = r.u32()? as usize;
    if m as u64 >= 1 << 31 {
        return Err(FormatError::RowLimit { nrows: m as u64 });
    }
    let n = r.u32()?;
    let p_raw = r.u64()?;
    let modulus = Prime::from_u64(p_raw).map_err(FormatError::BadModulus)?;
    let nnz = r.u64()?;

    let rows_len = r.u32s(m)?;
    let row_sum: u64 = rows_len.iter().map(|&l| u64::from(l)).sum();
    if row_sum != nnz {
        return Err(FormatError::NnzMismatch { declared: nnz, row_sum });
    }
    let polmap = r.u32s(m)?;

    let k = r.u64()?;
    let colid_offset = r.offset();
    let colid = r.u64s(usize::try_from(k).expect("k fits in memory"))?;

    let pnb = r.u32()?;
    let pnnz = r.u64()?;
    let prow = r.u32s(pnb as usize)?;
    let prow_sum: u64 = prow.iter().map(|&l| u64::from(l)).sum();
    if prow_sum != pnnz {
        return Err(FormatError::PnnzMismatch { declared: pnnz, prow_sum });
    }
    let pdata_offset = r.offset();
    let pdata = r.u16s(usize::try_from(pnnz).expect("pnnz fits in memory"))?;

    // polynomial start offsets into pdata
    let mut starts = Vec::with_capacity(pnb as usize + 1);
    let mut acc = 0usize;
    starts.push(0usize);
    for &l in &prow {
        acc += l as usize;
        starts.push(acc);
    }

    let mut cursor = 0usize;
    let mut rows: Vec<SparseRow> = Vec::with_capacity(m);
    for i in 0..m {
        let len = rows_len[i] as usize;
        let cols = decode_colids(&colid, &mut cursor, len, i, colid_offset)?;
        let id = polmap[i];
        if id >= pnb {
            return Err(FormatError::PolymapOutOfRange { row: i, index: id, pnb });
        }
        let poly = &pdata[starts[id as usize]..starts[id as usize + 1]];
        if poly.len() != len {
            return Err(FormatError::PolyLengthMismatch {
                row: i,
                row_len: len as u32,
                poly_len: poly.len() as u32,
            });
        }
        let mut row: SparseRow = Vec::with_capacity(len);
        for (idx, (&c, &v)) in cols.iter().zip(poly).enumerate() {
            if c >= n {
                return Err(FormatError::ColumnOutOfRange {
                    row: i,
                    col: u64::from(c),
                    ncols: u64::from(n),
                    offset: colid_offset,
                });
            }
            if v == 0 {
                return Err(FormatError::ZeroValue {
                    row: i,
                    offset: pdata_offset + 2 * (starts[id as usize] + idx) as u64,
                });
            }
            if v >= modulus.value() {
                return Err(FormatError::ValueOutOfRange {
                    row: i,
                    value: u64::from(v),
                    modulus: u64::from(modulus.value()),
                    offset: pdata_offset + 2 * (starts[id as usize] + idx) as u64,
                });
            }
            row.push((c, v));
        }
        rows.push(row);
    }
    if cursor != colid.len() {
        return Err(FormatError::TrailingTokens { remaining: (colid.len() - cursor) as u64 });
    }

    Ok(SparseMatrix::from_rows(n, modulus, rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::write_format1;

    fn p(v: u16) -> Prime {
        Prime::new(v).unwrap()
    }

    #[test]
    fn consecutive_run_stored_as_one_pair() {
        let m = SparseMatrix::from_rows(
            12,
            p(7),
            vec![vec![(5, 1), (6, 2), (7, 3), (8, 4)]],
        )
        .unwrap();
        let bytes = write_format2(&m).unwrap();
        // header 4+4+4+8+8 = 28, rows 4, polmap 4, then k at byte 36
        let k = u64::from_le_bytes(bytes[36..44].try_into().unwrap());
        assert_eq!(k, 2);
        let f = u64::from_le_bytes(bytes[44..52].try_into().unwrap());
        let s = u64::from_le_bytes(bytes[52..60].try_into().unwrap());
        assert_eq!((f, s), (5, 4));
        assert_eq!(read_format2(bytes.as_slice()).unwrap(), m);
    }

    #[test]
    fn identical_value_sequences_share_a_polynomial() {
        // two rows carrying [2,1,5] at different columns
        let m = SparseMatrix::from_rows(
            10,
            p(7),
            vec![
                vec![(0, 2), (3, 1), (4, 5)],
                vec![(2, 2), (5, 1), (9, 5)],
            ],
        )
        .unwrap();
        let table = PolynomialTable::build(m.rows());
        assert_eq!(table.count(), 1);
        assert_eq!(table.polmap, vec![0, 0]);
        let bytes = write_format2(&m).unwrap();
        // header 28, rows 8, polmap 8 -> k at byte 44; pnb follows the colid array
        let k = u64::from_le_bytes(bytes[44..52].try_into().unwrap());
        let pnb_at = 52 + 8 * k as usize;
        let pnb = u32::from_le_bytes(bytes[pnb_at..pnb_at + 4].try_into().unwrap());
        assert_eq!(pnb, 1);
        assert_eq!(read_format2(bytes.as_slice()).unwrap(), m);
    }

    #[test]
    fn full_redundancy_and_none() {
        let rows: Vec<SparseRow> = (0..10).map(|i| vec![(i, 3u16), (i + 10, 1u16)]).collect();
        let m = SparseMatrix::from_rows(20, p(7), rows).unwrap();
        let t = PolynomialTable::build(m.rows());
        assert_eq!(t.count(), 1);
        assert_eq!(t.coefficient_count(), 2);

        let rows: Vec<SparseRow> = (0..6u16).map(|i| vec![(0u32, i % 6 + 1)]).collect();
        let m = SparseMatrix::from_rows(1, p(7), rows).unwrap();
        assert_eq!(PolynomialTable::build(m.rows()).count(), 6);
    }

    #[test]
    fn dedup_expansion_is_lossless() {
        let m = SparseMatrix::from_rows(
            8,
            p(251),
            vec![
                vec![(0, 9), (4, 17)],
                vec![],
                vec![(1, 9), (6, 17)],
                vec![(2, 3)],
                vec![],
            ],
        )
        .unwrap();
        let t = PolynomialTable::build(m.rows());
        for (i, row) in m.rows().iter().enumerate() {
            let values: Vec<u16> = row.iter().map(|&(_, v)| v).collect();
            assert_eq!(t.polynomials[t.polmap[i] as usize], values);
        }
        // both empty rows share the empty polynomial
        assert_eq!(t.polmap[1], t.polmap[4]);
    }

    #[test]
    fn round_trip_with_empty_rows() {
        let m = SparseMatrix::from_rows(
            6,
            p(65521),
            vec![vec![], vec![(0, 65520), (1, 1), (2, 40000)], vec![]],
        )
        .unwrap();
        let bytes = write_format2(&m).unwrap();
        assert_eq!(read_format2(bytes.as_slice()).unwrap(), m);
    }

    #[test]
    fn version_and_type_code_checks() {
        let m = SparseMatrix::from_rows(3, p(7), vec![vec![(0, 1)]]).unwrap();
        let good = write_format2(&m).unwrap();

        let mut bad = good.clone();
        bad[3] = 9; // version byte
        assert!(matches!(
            read_format2(bad.as_slice()).unwrap_err(),
            FormatError::UnknownVersion { version: 9 }
        ));

        // the alternate 16-bit code 0b011 is accepted
        let mut alt = good.clone();
        alt[0] = 0b011;
        assert_eq!(read_format2(alt.as_slice()).unwrap(), m);

        // other widths are not
        let mut bad = good;
        bad[0] = 0b100; // v = 2 -> 32-bit
        assert!(matches!(
            read_format2(bad.as_slice()).unwrap_err(),
            FormatError::UnsupportedTypeCode { .. }
        ));
    }

    #[test]
    fn redundant_rows_compress_below_half_of_format1() {
        // 16 distinct coefficient vectors, each repeated 64 times at
        // shifted column positions
        let poly_len = 40u32;
        let mut rows: Vec<SparseRow> = Vec::new();
        for poly_id in 0..16u16 {
            let values: Vec<u16> = (0..poly_len as u16).map(|j| (poly_id * 37 + j * 11) % 250 + 1).collect();
            for rep in 0..64u32 {
                let shift = rep * 3 + u32::from(poly_id);
                rows.push((0..poly_len).map(|j| (shift + j, values[j as usize])).collect());
            }
        }
        let m = SparseMatrix::from_rows(1024, p(251), rows).unwrap();
        let f1 = write_format1(&m).unwrap();
        let f2 = write_format2(&m).unwrap();
        assert!(
            (f2.len() as f64) < (f1.len() as f64) / 2.0,
            "format2 {} bytes vs format1 {} bytes",
            f2.len(),
            f1.len()
        );
    }
}

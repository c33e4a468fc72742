//! MatrixMarket coordinate text import/export.

use super::FormatError;
use crate::field::Prime;
use crate::matrix::{SparseMatrix, SparseRow};

const HEADER: &str = "%%MatrixMarket matrix coordinate integer general";

/// Renders the matrix in MatrixMarket coordinate form: 1-based indices,
/// entries sorted row-major.
pub fn dump_matrixmarket(m: &SparseMatrix) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    out.push_str(&format!("{} {} {}\n", m.nrows(), m.ncols(), m.nnz()));
    for (i, row) in m.rows().iter().enumerate() {
        for &(c, v) in row {
            out.push_str(&format!("{} {} {}\n", i + 1, c + 1, v));
        }
    }
    out
}

/// Parses MatrixMarket coordinate text. The format carries no modulus, so
/// one is supplied; entry values are reduced into `[0, p)` and entries that
/// reduce to zero are dropped. Entries may appear in any order; duplicates
/// are rejected.
pub fn read_matrixmarket(bytes: &[u8], modulus: Prime) -> Result<SparseMatrix, FormatError> {
    let text = std::str::from_utf8(bytes).map_err(|_| FormatError::Market {
        line: 1,
        msg: "input is not valid UTF-8 text".into(),
    })?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().ok_or(FormatError::Market {
        line: 1,
        msg: "empty input".into(),
    })?;
    let mut fields = header.split_whitespace();
    let banner_ok = fields.next() == Some("%%MatrixMarket")
        && fields.next() == Some("matrix")
        && fields.next() == Some("coordinate");
    let value_type = fields.next().unwrap_or("");
    let symmetry = fields.next().unwrap_or("general");
    if !banner_ok {
        return Err(FormatError::Market { line: 1, msg: "not a coordinate MatrixMarket header".into() });
    }
    if !matches!(value_type, "integer" | "real" | "pattern") {
        return Err(FormatError::Market {
            line: 1,
            msg: format!("unsupported value type `{value_type}`"),
        });
    }
    if symmetry != "general" {
        return Err(FormatError::Market {
            line: 1,
            msg: format!("unsupported symmetry `{symmetry}`"),
        });
    }
    let pattern = value_type == "pattern";

    // size line, skipping comments
    let mut size: Option<(usize, u32, u64, usize)> = None;
    for (idx, line) in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(FormatError::Market { line: idx + 1, msg: "bad size line".into() });
        }
        let m: usize = parse_num(parts[0], idx + 1)?;
        let n: u32 = parse_num(parts[1], idx + 1)?;
        let nnz: u64 = parse_num(parts[2], idx + 1)?;
        size = Some((m, n, nnz, idx + 1));
        break;
    }
    let Some((nrows, ncols, nnz, _)) = size else {
        return Err(FormatError::Market { line: 1, msg: "missing size line".into() });
    };

    let p = i64::from(modulus.value());
    let mut entries: Vec<(u32, u32, u16)> = Vec::with_capacity(nnz as usize);
    let mut seen = 0u64;
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let lineno = idx + 1;
        let parts: Vec<&str> = line.split_whitespace().collect();
        let want = if pattern { 2 } else { 3 };
        if parts.len() != want {
            return Err(FormatError::Market { line: lineno, msg: "bad entry line".into() });
        }
        let i: u64 = parse_num(parts[0], lineno)?;
        let j: u64 = parse_num(parts[1], lineno)?;
        if i == 0 || j == 0 || i > nrows as u64 || j > u64::from(ncols) {
            return Err(FormatError::Market { line: lineno, msg: "entry indices out of range".into() });
        }
        let v = if pattern {
            1u16
        } else {
            let raw: i64 = parse_num(parts[2], lineno)?;
            raw.rem_euclid(p) as u16
        };
        seen += 1;
        if v != 0 {
            entries.push(((i - 1) as u32, (j - 1) as u32, v));
        }
    }
    if seen != nnz {
        return Err(FormatError::Market {
            line: 0,
            msg: format!("size line declared {nnz} entries, found {seen}"),
        });
    }

    entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
    for w in entries.windows(2) {
        if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
            return Err(FormatError::Market {
                line: 0,
                msg: format!("duplicate entry at ({}, {})", w[0].0 + 1, w[0].1 + 1),
            });
        }
    }

    let mut rows: Vec<SparseRow> = vec![Vec::new(); nrows];
    for (i, j, v) in entries {
        rows[i as usize].push((j, v));
    }
    Ok(SparseMatrix::from_rows(ncols, modulus, rows)?)
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T, FormatError> {
    s.parse().map_err(|_| FormatError::Market {
        line,
        msg: format!("cannot parse `{s}` as a number"),
    })
}

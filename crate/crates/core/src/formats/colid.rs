//! Run compression of per-row column indices for Format 2.
//!
//! A maximal run of `s > 1` consecutive indices starting at `f` is stored
//! as the two tokens `f`, `s`. An isolated index is stored as the single
//! token `f | (1 << 31)`. Column indices must stay below `2^31` so the mask
//! bit is free.

use super::FormatError;

/// Mask marking an isolated column index in the token stream.
pub const COLID_SINGLE_MASK: u64 = 1 << 31;

/// Encodes one row's strictly increasing column indices, appending tokens
/// to `out`.
pub fn encode_colids(cols: &[u32], out: &mut Vec<u64>) -> Result<(), FormatError> {
    let mut i = 0usize;
    while i < cols.len() {
        let f = cols[i];
        if u64::from(f) >= COLID_SINGLE_MASK {
            return Err(FormatError::ColumnLimit { col: u64::from(f) });
        }
        let mut s = 1u64;
        while i + (s as usize) < cols.len() && cols[i + s as usize] == f + s as u32 {
            s += 1;
        }
        if s > 1 {
            out.push(u64::from(f));
            out.push(s);
        } else {
            out.push(u64::from(f) | COLID_SINGLE_MASK);
        }
        i += s as usize;
    }
    Ok(())
}

/// Decodes tokens from `tokens[*cursor..]` until exactly `expected` column
/// indices for row `row` have been produced. `offset` is the stream offset
/// of `tokens[0]`, used for error reporting only.
pub fn decode_colids(
    tokens: &[u64],
    cursor: &mut usize,
    expected: usize,
    row: usize,
    offset: u64,
) -> Result<Vec<u32>, FormatError> {
    let mut cols = Vec::with_capacity(expected);
    let mut prev: Option<u32> = None;
    while cols.len() < expected {
        let at = |c: usize| offset + 8 * c as u64;
        let Some(&tok) = tokens.get(*cursor) else {
            return Err(FormatError::Truncated { offset: at(tokens.len()) });
        };
        let tok_at = at(*cursor);
        *cursor += 1;
        if tok & COLID_SINGLE_MASK != 0 {
            let f = tok & !COLID_SINGLE_MASK;
            if f >= COLID_SINGLE_MASK {
                return Err(FormatError::ColumnLimit { col: f });
            }
            push_checked(&mut cols, &mut prev, f as u32, row, tok_at)?;
        } else {
            let f = tok;
            if f >= COLID_SINGLE_MASK {
                return Err(FormatError::ColumnLimit { col: f });
            }
            let Some(&s) = tokens.get(*cursor) else {
                return Err(FormatError::Truncated { offset: at(tokens.len()) });
            };
            *cursor += 1;
            if s < 2 {
                return Err(FormatError::BadRun { row, offset: tok_at });
            }
            if cols.len() + s as usize > expected {
                return Err(FormatError::RunOverrun { row, offset: tok_at });
            }
            if f + s > COLID_SINGLE_MASK {
                return Err(FormatError::ColumnLimit { col: f + s - 1 });
            }
            for k in 0..s {
                push_checked(&mut cols, &mut prev, (f + k) as u32, row, tok_at)?;
            }
        }
    }
    if cols.len() != expected {
        return Err(FormatError::ColidCount { row, expected, got: cols.len() });
    }
    Ok(cols)
}

fn push_checked(
    cols: &mut Vec<u32>,
    prev: &mut Option<u32>,
    c: u32,
    row: usize,
    offset: u64,
) -> Result<(), FormatError> {
    if let Some(p) = *prev {
        if c <= p {
            return Err(FormatError::UnsortedColumns { row, offset });
        }
    }
    *prev = Some(c);
    cols.push(c);
    Ok(())
}

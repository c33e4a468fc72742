//! Naive dense reference implementations used to validate the sparse
//! pipelines.
//!
//! Everything here is deliberately independent of the rest of the crate:
//! plain dense tables, textbook Gauss-Jordan, and its own modular inverse.
//! Tests compare the optimized sparse paths against these.

/// Modular inverse by extended Euclid; `p` must be prime and `a != 0`.
fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut old_r, mut r) = (p as i64, a as i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r / r;
        old_r -= q * r;
        std::mem::swap(&mut old_r, &mut r);
        old_t -= q * t;
        std::mem::swap(&mut old_t, &mut t);
    }
    old_t.rem_euclid(p as i64) as u64
}

/// Canonical reduced row echelon form of a dense matrix mod `p`.
///
/// Returns the nonzero rows of the unique RREF together with the rank.
pub fn dense_rref(mut a: Vec<Vec<u16>>, p: u16) -> (Vec<Vec<u16>>, usize) {
    let p64 = u64::from(p);
    let nrows = a.len();
    let ncols = a.first().map_or(0, |r| r.len());
    let mut pivot_row = 0usize;
    for col in 0..ncols {
        if pivot_row == nrows {
            break;
        }
        let Some(src) = (pivot_row..nrows).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(pivot_row, src);
        let inv = inv_mod(u64::from(a[pivot_row][col]), p64);
        for j in col..ncols {
            a[pivot_row][j] = ((u64::from(a[pivot_row][j]) * inv) % p64) as u16;
        }
        for r in 0..nrows {
            if r == pivot_row || a[r][col] == 0 {
                continue;
            }
            let factor = u64::from(a[r][col]);
            for j in col..ncols {
                let sub = (factor * u64::from(a[pivot_row][j])) % p64;
                a[r][j] = ((u64::from(a[r][j]) + p64 - sub) % p64) as u16;
            }
        }
        pivot_row += 1;
    }
    let rank = pivot_row;
    a.truncate(rank);
    (a, rank)
}

/// Rank of a dense matrix mod `p`.
pub fn dense_rank(a: Vec<Vec<u16>>, p: u16) -> usize {
    dense_rref(a, p).1
}

/// Dense matrix product mod `p`.
pub fn dense_matmul(a: &[Vec<u16>], b: &[Vec<u16>], p: u16) -> Vec<Vec<u16>> {
    let p64 = u64::from(p);
    let n = a.len();
    let k = b.len();
    let m = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![0u16; m]; n];
    for i in 0..n {
        debug_assert_eq!(a[i].len(), k);
        for (l, brow) in b.iter().enumerate() {
            let av = u64::from(a[i][l]);
            if av == 0 {
                continue;
            }
            for j in 0..m {
                out[i][j] =
                    ((u64::from(out[i][j]) + av * u64::from(brow[j])) % p64) as u16;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_identity() {
        let id = vec![vec![1, 0], vec![0, 1]];
        let (r, rank) = dense_rref(id.clone(), 7);
        assert_eq!(rank, 2);
        assert_eq!(r, id);
    }

    #[test]
    fn rref_known_case() {
        // [[1,2],[2,4]] mod 7 has rank 1; RREF row is [1,2]
        let (r, rank) = dense_rref(vec![vec![1, 2], vec![2, 4]], 7);
        assert_eq!(rank, 1);
        assert_eq!(r, vec![vec![1, 2]]);
    }

    #[test]
    fn rref_needs_inversion() {
        // [[0,2],[3,0]] mod 7 -> rank 2, RREF = identity
        let (r, rank) = dense_rref(vec![vec![0, 2], vec![3, 0]], 7);
        assert_eq!(rank, 2);
        assert_eq!(r, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn rref_rectangular() {
        // hand-checked 2x3 case mod 5: scale row 0 by inv(2)=3 to get
        // [1,3,4]; row 1 minus 4*row 0 leaves [0,0,4]; scale and
        // back-substitute -> [[1,3,0],[0,0,1]]
        let (r, rank) = dense_rref(vec![vec![2, 1, 3], vec![4, 2, 0]], 5);
        assert_eq!(rank, 2);
        assert_eq!(r, vec![vec![1, 3, 0], vec![0, 0, 1]]);

        // [[2,1,3],[4,2,1]] has proportional rows: rank 1
        let (r, rank) = dense_rref(vec![vec![2, 1, 3], vec![4, 2, 1]], 5);
        assert_eq!(rank, 1);
        assert_eq!(r, vec![vec![1, 3, 4]]);
    }

    #[test]
    fn matmul_small() {
        let a = vec![vec![1, 2], vec![3, 4]];
        let b = vec![vec![5, 6], vec![0, 1]];
        // over F_7: [[5, 6+2],[15 mod 7, 18+4 mod 7]] = [[5,1],[1,1]]
        assert_eq!(dense_matmul(&a, &b, 7), vec![vec![5, 1], vec![1, 1]]);
    }

    #[test]
    fn rank_zero_matrix() {
        assert_eq!(dense_rank(vec![vec![0, 0], vec![0, 0]], 3), 0);
        assert_eq!(dense_rank(Vec::new(), 3), 0);
    }
}

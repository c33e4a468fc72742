//! Arithmetic in `F_p` for primes `2 < p < 2^16`.
//!
//! Coefficients are stored as `u16`. Elimination kernels accumulate fused
//! multiply-adds in `u64` accumulators and reduce once per row pass:
//! `(p - 1)^2 < 2^32`, so up to `2^32` fused terms fit in 64 bits without
//! overflow, far more than any row pass in this crate performs.

use std::fmt;

/// A validated prime modulus `p` with `2 < p < 2^16`.
///
/// All field operations hang off this type; values themselves are plain
/// `u16` integers in `[0, p)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Prime(u16);

/// Rejected modulus: not a prime in `(2, 2^16)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NotPrime(pub u32);

impl fmt::Display for NotPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "modulus {} is not an odd prime below 2^16", self.0)
    }
}

impl std::error::Error for NotPrime {}

impl fmt::Debug for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Prime({})", self.0)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Prime {
    /// Validates `value` by trial division. Composite moduli and `p <= 2`
    /// are rejected so that [`Prime::inv`] always operates in a field.
    pub fn new(value: u16) -> Result<Self, NotPrime> {
        if value > 2 && is_prime_u16(value) {
            Ok(Prime(value))
        } else {
            Err(NotPrime(u32::from(value)))
        }
    }

    /// Like [`Prime::new`] but from a wider integer, rejecting anything
    /// that does not fit in 16 bits.
    pub fn from_u64(value: u64) -> Result<Self, NotPrime> {
        match u16::try_from(value) {
            Ok(v) => Prime::new(v).map_err(|_| NotPrime(value as u32)),
            Err(_) => Err(NotPrime(u32::MAX)),
        }
    }

    #[inline]
    pub fn value(self) -> u16 {
        self.0
    }

    /// `(a + b) mod p` for reduced operands.
    #[inline]
    pub fn add(self, a: u16, b: u16) -> u16 {
        let s = u32::from(a) + u32::from(b);
        let p = u32::from(self.0);
        if s >= p {
            (s - p) as u16
        } else {
            s as u16
        }
    }

    /// `(a - b) mod p` for reduced operands.
    #[inline]
    pub fn sub(self, a: u16, b: u16) -> u16 {
        if a >= b {
            a - b
        } else {
            (u32::from(a) + u32::from(self.0) - u32::from(b)) as u16
        }
    }

    /// `-a mod p`.
    #[inline]
    pub fn neg(self, a: u16) -> u16 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    /// `(a * b) mod p` for reduced operands.
    #[inline]
    pub fn mul(self, a: u16, b: u16) -> u16 {
        ((u32::from(a) * u32::from(b)) % u32::from(self.0)) as u16
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    /// Returns `None` for `a == 0`.
    pub fn inv(self, a: u16) -> Option<u16> {
        if a == 0 {
            return None;
        }
        let (mut old_r, mut r) = (i32::from(self.0), i32::from(a));
        let (mut old_t, mut t) = (0i32, 1i32);
        while r != 0 {
            let q = old_r / r;
            old_r -= q * r;
            std::mem::swap(&mut old_r, &mut r);
            old_t -= q * t;
            std::mem::swap(&mut old_t, &mut t);
        }
        debug_assert_eq!(old_r, 1, "gcd(a, p) != 1 for prime p and a != 0");
        Some(old_t.rem_euclid(i32::from(self.0)) as u16)
    }

    /// Reduces a 64-bit accumulator to a field element.
    #[inline]
    pub fn reduce(self, acc: u64) -> u16 {
        (acc % u64::from(self.0)) as u16
    }
}

/// One fused add-multiply step on a delayed-reduction accumulator:
/// `acc + lambda * value` in plain integers. A final [`Prime::reduce`]
/// yields the same field element as a step-by-step modular fold, as long
/// as fewer than `2^32` fused steps happened since the last reduction.
#[inline]
pub fn fused_axpy(acc: u64, lambda: u16, value: u16) -> u64 {
    acc + u64::from(lambda) * u64::from(value)
}

fn is_prime_u16(n: u16) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u32;
    let n = u32::from(n);
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

//! Arithmetic in the prime field F_p and sparse columns over it.

use crate::error::{Error, Result};

/// A sparse vector over F_p: `(row, coefficient)` pairs, rows strictly
/// increasing, coefficients nonzero.
pub type Column = Vec<(usize, u32)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    /// Largest accepted characteristic; products of two elements fit in u64.
    pub const MAX_PRIME: u32 = 65_521;

    pub fn new(p: u32) -> Result<Self> {
        if !(2..=Self::MAX_PRIME).contains(&p) || !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        Ok(Self { p })
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.p as u64) as u32
    }

    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn inv(&self, a: u32) -> u32 {
        debug_assert!(!a.is_multiple_of(self.p), "inverse of zero");
        // Fermat: a^(p-2)
        let mut base = a as u64 % self.p as u64;
        let mut exp = self.p - 2;
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % self.p as u64;
            }
            base = base * base % self.p as u64;
            exp >>= 1;
        }
        acc as u32
    }

    pub fn from_i64(&self, a: i64) -> u32 {
        a.rem_euclid(self.p as i64) as u32
    }

    /// `target += factor * source`, keeping `target` sorted and free of zeros.
    pub fn axpy(&self, target: &mut Column, factor: u32, source: &[(usize, u32)]) {
        if factor == 0 || source.is_empty() {
            return;
        }
        let mut out = Vec::with_capacity(target.len() + source.len());
        let (mut i, mut j) = (0, 0);
        while i < target.len() && j < source.len() {
            let (rt, ct) = target[i];
            let (rs, cs) = source[j];
            if rt < rs {
                out.push((rt, ct));
                i += 1;
            } else if rs < rt {
                out.push((rs, self.mul(factor, cs)));
                j += 1;
            } else {
                let c = self.add(ct, self.mul(factor, cs));
                if c != 0 {
                    out.push((rt, c));
                }
                i += 1;
                j += 1;
            }
        }
        out.extend_from_slice(&target[i..]);
        out.extend(source[j..].iter().map(|&(r, c)| (r, self.mul(factor, c))));
        *target = out;
    }

    /// Multiplier that cancels the pivot of `target` against the pivot of `source`.
    pub fn elimination_factor(&self, target_pivot: u32, source_pivot: u32) -> u32 {
        self.neg(self.mul(target_pivot, self.inv(source_pivot)))
    }

    pub fn scale(&self, column: &mut Column, factor: u32) {
        debug_assert!(factor != 0);
        for entry in column.iter_mut() {
            entry.1 = self.mul(entry.1, factor);
        }
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        Self { p: 2 }
    }
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_composites() {
        assert!(PrimeField::new(4).is_err());
        assert!(PrimeField::new(1).is_err());
        assert!(PrimeField::new(0).is_err());
        assert!(PrimeField::new(7).is_ok());
    }

    #[test]
    fn inverses() {
        for p in [2, 3, 5, 7, 11, 65_521] {
            let f = PrimeField::new(p).unwrap();
            for a in 1..p.min(200) {
                assert_eq!(f.mul(a, f.inv(a)), 1, "p={p} a={a}");
            }
        }
    }

    #[test]
    fn axpy_cancels() {
        let f = PrimeField::new(3).unwrap();
        let mut a = vec![(0, 1), (2, 2)];
        f.axpy(&mut a, 1, &[(2, 1), (5, 1)]);
        assert_eq!(a, vec![(0, 1), (5, 1)]);
        let mut b = vec![(1, 2)];
        let factor = f.elimination_factor(2, 1);
        f.axpy(&mut b, factor, &[(1, 1), (3, 1)]);
        assert_eq!(b, vec![(3, 1)]);
    }
}

//! k-wise independent hashing `[n] -> [2^l]` over GF(2^r).
//!
//! `h(x) = g(sum_i a_i f(x)^(i-1))` with `f` the identity embedding of `x`
//! into the field and `g` truncation to the low `l` bits. Evaluating a
//! uniformly random polynomial of degree `< k` at `k` distinct points gives
//! `k` independent uniform field elements, and truncation keeps each output
//! uniform because every range value has exactly `2^(r-l)` preimages.

use rand::Rng as _;
use thiserror::Error;

use crate::seeding::rng_from_seed;

/// Largest supported independence.
pub const MAX_INDEPENDENCE: usize = 8;

/// Low-order part of the reduction polynomial for GF(2^r), index `r - 1`.
///
/// Entry `r` encodes `x^r + c(x)` with `c` given by the bit mask. Each is the
/// first irreducible trinomial `x^r + x^a + 1` in increasing `a`, or, where
/// none exists, the first irreducible pentanomial `x^r + x^a + x^b + x^c + 1`
/// in increasing `(a, b, c)`. Degree 1 uses `x + 1`.
pub const REDUCTION_LOW: [u64; 64] = [
    0x1, 0x3, 0x3, 0x3, 0x5, 0x3, 0x3, 0x1b, // 1..=8
    0x3, 0x9, 0x5, 0x9, 0x1b, 0x21, 0x3, 0x2b, // 9..=16
    0x9, 0x9, 0x27, 0x9, 0x5, 0x3, 0x21, 0x1b, // 17..=24
    0x9, 0x1b, 0x27, 0x3, 0x5, 0x3, 0x9, 0x8d, // 25..=32
    0x401, 0x81, 0x5, 0x201, 0x53, 0x63, 0x11, 0x39, // 33..=40
    0x9, 0x81, 0x59, 0x21, 0x1b, 0x3, 0x21, 0x2d, // 41..=48
    0x201, 0x1d, 0x4b, 0x9, 0x47, 0x201, 0x81, 0x95, // 49..=56
    0x11, 0x80001, 0x95, 0x3, 0x27, 0x20000001, 0x3, 0x1b, // 57..=64
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HashError {
    #[error("range size {0} is not a power of two")]
    RangeNotPowerOfTwo(u64),
    #[error("domain size must be at least 1")]
    EmptyDomain,
    #[error("independence {0} is outside 1..={MAX_INDEPENDENCE}")]
    BadIndependence(usize),
    #[error("field degree {0} is outside 1..=64")]
    BadDegree(u32),
    #[error("input {x} is outside the domain [0, {n})")]
    OutOfDomain { x: u64, n: u64 },
}

/// GF(2^r) in polynomial basis. Elements are the low `r` bits of a `u64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gf2r {
    r: u32,
    low: u64,
}

impl Gf2r {
    pub fn new(r: u32) -> Result<Self, HashError> {
        if !(1..=64).contains(&r) {
            return Err(HashError::BadDegree(r));
        }
        Ok(Gf2r { r, low: REDUCTION_LOW[r as usize - 1] })
    }

    pub fn degree(&self) -> u32 {
        self.r
    }

    /// Number of field elements minus one, as a bit mask.
    pub fn mask(&self) -> u64 {
        if self.r == 64 {
            u64::MAX
        } else {
            (1u64 << self.r) - 1
        }
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        a ^ b
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let top = 1u64 << (self.r - 1);
        let mask = self.mask();
        let (mut a, mut b, mut acc) = (a, b, 0u64);
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            let carry = a & top != 0;
            a = (a << 1) & mask;
            if carry {
                a ^= self.low;
            }
        }
        acc
    }

    pub fn pow(&self, mut a: u64, mut e: u128) -> u64 {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// `a^(2^r - 2)`; `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return None;
        }
        Some(self.pow(a, (1u128 << self.r) - 2))
    }
}

/// A sampled member of the family `H(n, 2^l)` with independence `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KwiseHash {
    field: Gf2r,
    coeffs: Vec<u64>,
    n: u64,
    range_bits: u32,
}

impl KwiseHash {
    /// Hash with explicit coefficients `a_1..a_k` (constant term first).
    pub fn from_coefficients(n: u64, m_range: u64, coeffs: Vec<u64>) -> Result<Self, HashError> {
        let (field, range_bits) = field_for(n, m_range, coeffs.len())?;
        let mask = field.mask();
        Ok(KwiseHash { field, coeffs: coeffs.into_iter().map(|c| c & mask).collect(), n, range_bits })
    }

    pub fn independence(&self) -> usize {
        self.coeffs.len()
    }

    pub fn field(&self) -> Gf2r {
        self.field
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn domain_size(&self) -> u64 {
        self.n
    }

    pub fn range_size(&self) -> u64 {
        1u64 << self.range_bits
    }

    pub fn eval(&self, x: u64) -> Result<u64, HashError> {
        if x >= self.n {
            return Err(HashError::OutOfDomain { x, n: self.n });
        }
        Ok(self.eval_unchecked(x))
    }

    /// `eval` without the domain check.
    pub fn eval_unchecked(&self, x: u64) -> u64 {
        let f = &self.field;
        let y = self.coeffs.iter().rev().fold(0u64, |acc, &a| f.add(f.mul(acc, x), a));
        fold(y, self.range_bits)
    }
}

fn fold(y: u64, bits: u32) -> u64 {
    if bits == 64 {
        y
    } else {
        y & ((1u64 << bits) - 1)
    }
}

/// Smallest `r >= 1` with `2^r >= max(n, m_range)`, plus `l = log2 m_range`.
fn field_for(n: u64, m_range: u64, k: usize) -> Result<(Gf2r, u32), HashError> {
    if n == 0 {
        return Err(HashError::EmptyDomain);
    }
    if !m_range.is_power_of_two() {
        return Err(HashError::RangeNotPowerOfTwo(m_range));
    }
    if !(1..=MAX_INDEPENDENCE).contains(&k) {
        return Err(HashError::BadIndependence(k));
    }
    let need = n.max(m_range);
    let r = (64 - (need - 1).leading_zeros()).max(1);
    Ok((Gf2r::new(r)?, m_range.trailing_zeros()))
}

/// Field degree used for domain `n` and range `m_range`.
pub fn field_degree(n: u64, m_range: u64) -> Result<u32, HashError> {
    Ok(field_for(n, m_range, 1)?.0.degree())
}

/// Draw `a_1..a_k` uniformly from GF(2^r), deterministically from `seed`.
pub fn sample_hash(n: u64, m_range: u64, k: usize, seed: u64) -> Result<KwiseHash, HashError> {
    let (field, _) = field_for(n, m_range, k)?;
    let mut rng = rng_from_seed(seed);
    let mask = field.mask();
    let coeffs = (0..k).map(|_| rng.gen::<u64>() & mask).collect();
    KwiseHash::from_coefficients(n, m_range, coeffs)
}

pub fn hash_eval(h: &KwiseHash, x: u64) -> Result<u64, HashError> {
    h.eval(x)
}

//! Arithmetic in binary fields `GF(2^m)`.
//!
//! Elements are stored as the coefficient bits of a polynomial over `GF(2)` of
//! degree below `m`, packed into a `u64`. Addition is exclusive-or and does not
//! depend on the field; multiplication is a carry-less product reduced modulo the
//! field's reduction polynomial, so it goes through a [`FieldSpec`].
//!
//! Two widths are supported for solving: `m = 8` (small enough to test
//! exhaustively) and `m = 64` (production). Other widths up to 16 can be built
//! with [`FieldSpec::new`] and are checked for irreducibility on construction.

use std::fmt;
use std::ops::{Add, AddAssign};

use rand::Rng;

use crate::error::{Error, Result};

/// Low terms of `x^8 + x^4 + x^3 + x + 1`.
pub const GF8_REDUCTION: u64 = 0x1B;
/// Low terms of `x^64 + x^4 + x^3 + x + 1`.
pub const GF64_REDUCTION: u64 = 0x1B;

const MAX_CHECKED_WIDTH: u32 = 16;

/// An element of `GF(2^m)`.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElem(u64);

impl FieldElem {
    pub const ZERO: FieldElem = FieldElem(0);
    pub const ONE: FieldElem = FieldElem(1);

    /// Wraps raw coefficient bits. The caller is responsible for keeping them
    /// below `2^m`; [`FieldSpec::elem`] does the masking.
    #[inline]
    pub const fn from_bits(bits: u64) -> Self {
        FieldElem(bits)
    }

    #[inline]
    pub const fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElem({:#x})", self.0)
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

impl Add for FieldElem {
    type Output = FieldElem;

    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: FieldElem) -> FieldElem {
        FieldElem(self.0 ^ rhs.0)
    }
}

impl AddAssign for FieldElem {
    #[inline]
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: FieldElem) {
        self.0 ^= rhs.0;
    }
}

impl std::iter::Sum for FieldElem {
    fn sum<I: Iterator<Item = FieldElem>>(iter: I) -> FieldElem {
        iter.fold(FieldElem::ZERO, |acc, x| acc + x)
    }
}

/// Width and reduction polynomial of a binary field.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldSpec {
    m: u32,
    /// Reduction polynomial without its leading `x^m` term.
    reduction: u64,
    mask: u64,
}

impl FieldSpec {
    /// `GF(2^8)` with reduction `x^8 + x^4 + x^3 + x + 1`.
    pub const fn gf8() -> Self {
        FieldSpec {
            m: 8,
            reduction: GF8_REDUCTION,
            mask: 0xFF,
        }
    }

    /// `GF(2^64)` with reduction `x^64 + x^4 + x^3 + x + 1`.
    pub const fn gf64() -> Self {
        FieldSpec {
            m: 64,
            reduction: GF64_REDUCTION,
            mask: u64::MAX,
        }
    }

    /// One of the two supported solving widths.
    pub fn with_width(m: u32) -> Result<Self> {
        match m {
            8 => Ok(Self::gf8()),
            64 => Ok(Self::gf64()),
            other => Err(Error::UnsupportedWidth(other)),
        }
    }

    /// Builds a field from its width and the low terms of the reduction
    /// polynomial. Widths up to 16 are verified irreducible by trial division;
    /// width 64 is accepted only with the standard pentanomial.
    pub fn new(m: u32, reduction: u64) -> Result<Self> {
        match m {
            1..=MAX_CHECKED_WIDTH => {
                if reduction >> m != 0 {
                    return Err(Error::ReducibleModulus { m, poly: reduction });
                }
                let full = (1u128 << m) | reduction as u128;
                if !is_irreducible(full, m) {
                    return Err(Error::ReducibleModulus { m, poly: reduction });
                }
                Ok(FieldSpec {
                    m,
                    reduction,
                    mask: (1u64 << m) - 1,
                })
            }
            64 if reduction == GF64_REDUCTION => Ok(Self::gf64()),
            64 => Err(Error::ReducibleModulus { m, poly: reduction }),
            other => Err(Error::UnsupportedWidth(other)),
        }
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Low terms of the reduction polynomial (the `x^m` term is implicit).
    #[inline]
    pub fn reduction(&self) -> u64 {
        self.reduction
    }

    /// Number of elements, `2^m`.
    #[inline]
    pub fn order(&self) -> u128 {
        1u128 << self.m
    }

    /// Masks raw bits down to a field element.
    #[inline]
    pub fn elem(&self, bits: u64) -> FieldElem {
        FieldElem(bits & self.mask)
    }

    #[inline]
    pub fn zero(&self) -> FieldElem {
        FieldElem::ZERO
    }

    #[inline]
    pub fn one(&self) -> FieldElem {
        FieldElem::ONE
    }

    #[inline]
    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        a + b
    }

    #[inline]
    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        FieldElem(self.reduce(clmul(a.0, b.0)))
    }

    #[inline]
    pub fn square(&self, a: FieldElem) -> FieldElem {
        self.mul(a, a)
    }

    pub fn pow(&self, mut base: FieldElem, mut exp: u64) -> FieldElem {
        let mut acc = FieldElem::ONE;
        while exp != 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.square(base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via `a^(2^m - 2)`.
    pub fn inv(&self, a: FieldElem) -> Result<FieldElem> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let exp = if self.m == 64 {
            u64::MAX - 1
        } else {
            (1u64 << self.m) - 2
        };
        Ok(self.pow(a, exp))
    }

    /// Uniform draw over all `2^m` elements, zero included.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElem {
        FieldElem(rng.random::<u64>() & self.mask)
    }

    /// `count` pairwise-distinct elements: the encodings of `1..=count`, except
    /// that a request for the whole field ends with zero instead of `2^m`.
    pub fn distinct_points(&self, count: usize) -> Result<Vec<FieldElem>> {
        let requested = count as u128;
        if requested > self.order() {
            return Err(Error::TooManyPoints {
                requested,
                available: self.order(),
            });
        }
        let mut points: Vec<FieldElem> = (1..=count as u64)
            .take_while(|&x| x as u128 <= self.mask as u128)
            .map(FieldElem)
            .collect();
        if points.len() < count {
            points.push(FieldElem::ZERO);
        }
        Ok(points)
    }

    #[inline]
    fn reduce(&self, mut p: u128) -> u64 {
        // x^m == reduction, so fold the high part down until it fits.
        loop {
            let hi = (p >> self.m) as u64;
            if hi == 0 {
                return p as u64;
            }
            p = (p & self.mask as u128) ^ clmul(hi, self.reduction);
        }
    }
}

/// Carry-less product of two 64-bit polynomials.
#[inline]
pub fn clmul(a: u64, b: u64) -> u128 {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("pclmulqdq") {
            // SAFETY: the required CPU feature was detected at runtime.
            return unsafe { clmul_x86(a, b) };
        }
    }
    clmul_portable(a, b)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "pclmulqdq", enable = "sse2")]
unsafe fn clmul_x86(a: u64, b: u64) -> u128 {
    use std::arch::x86_64::{_mm_clmulepi64_si128, _mm_set_epi64x, _mm_storeu_si128};
    let x = _mm_set_epi64x(0, a as i64);
    let y = _mm_set_epi64x(0, b as i64);
    let r = _mm_clmulepi64_si128::<0>(x, y);
    let mut out = 0u128;
    _mm_storeu_si128(&mut out as *mut u128 as *mut _, r);
    out
}

/// Four-bit windowed carry-less multiply.
#[inline]
pub fn clmul_portable(a: u64, b: u64) -> u128 {
    let mut table = [0u128; 16];
    let b = b as u128;
    for i in 1..16usize {
        table[i] = if i & 1 == 1 {
            table[i - 1] ^ b
        } else {
            table[i >> 1] << 1
        };
    }
    let mut acc = 0u128;
    for nibble in (0..16).rev() {
        acc = (acc << 4) ^ table[((a >> (4 * nibble)) & 0xF) as usize];
    }
    acc
}

fn poly_degree(p: u128) -> i32 {
    127 - p.leading_zeros() as i32
}

fn poly_rem(mut a: u128, b: u128) -> u128 {
    let db = poly_degree(b);
    while a != 0 && poly_degree(a) >= db {
        a ^= b << (poly_degree(a) - db);
    }
    a
}

fn is_irreducible(full: u128, m: u32) -> bool {
    (1..=m / 2).all(|d| ((1u128 << d)..(1u128 << (d + 1))).all(|f| poly_rem(full, f) != 0))
}

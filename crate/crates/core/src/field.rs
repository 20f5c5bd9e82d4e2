//! Coefficient fields for exact computation.
//!
//! Fields are value-level contexts: a [`Field`] knows how to combine its
//! elements, and elements themselves are plain data. This lets the prime be
//! chosen at run time.

use alloc::string::String;
use core::fmt;
use core::fmt::Write;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Default prime for modular computations.
pub const PRIME_A: u64 = 2_147_483_647;
/// Second prime used to cross-check degrees.
pub const PRIME_B: u64 = 2_147_483_629;

pub trait Field: Clone + fmt::Debug {
    type Elem: Clone + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn from_bigint(&self, v: &BigInt) -> Self::Elem;
    /// `None` when the denominator vanishes in this field.
    fn from_rational(&self, v: &BigRational) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    /// `Some(p)` for `F_p`, `None` for the rationals.
    fn modulus(&self) -> Option<u64>;
    /// Write a canonical text form (integers or `a/b`; symmetric residues mod p).
    fn write_elem(&self, a: &Self::Elem, out: &mut dyn Write) -> fmt::Result;

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        self.inv(b).map(|ib| self.mul(a, &ib))
    }

    fn elem_to_string(&self, a: &Self::Elem) -> String {
        let mut s = String::new();
        let _ = self.write_elem(a, &mut s);
        s
    }

    /// Whether the element is written with a leading minus sign.
    fn is_negative_repr(&self, a: &Self::Elem) -> bool {
        self.elem_to_string(a).starts_with('-')
    }
}

/// The prime field `F_p` for a prime `p < 2^32`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Panics unless `2 <= p < 2^32`; primality is the caller's concern.
    pub fn new(p: u64) -> Self {
        assert!((2..1 << 32).contains(&p), "modulus must lie in [2, 2^32)");
        PrimeField { p }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % self.p;
            }
            base = base * base % self.p;
            e >>= 1;
        }
        acc
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }
    fn from_bigint(&self, v: &BigInt) -> u64 {
        let r = v.mod_floor(&BigInt::from(self.p));
        r.to_u64().expect("residue fits in u64")
    }
    fn from_rational(&self, v: &BigRational) -> Option<u64> {
        let den = self.from_bigint(v.denom());
        let num = self.from_bigint(v.numer());
        self.inv(&den).map(|d| num * d % self.p)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.p
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if (*a).is_multiple_of(self.p) {
            return None;
        }
        // extended Euclid on signed values
        let (mut r0, mut r1) = (self.p as i64, *a as i64);
        let (mut s0, mut s1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        if r0 != 1 {
            return None;
        }
        Some(s0.rem_euclid(self.p as i64) as u64)
    }
    fn modulus(&self) -> Option<u64> {
        Some(self.p)
    }
    fn write_elem(&self, a: &u64, out: &mut dyn Write) -> fmt::Result {
        if *a > self.p / 2 {
            write!(out, "-{}", self.p - a)
        } else {
            write!(out, "{a}")
        }
    }
}

/// Arbitrary-precision rationals, always in lowest terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_bigint(&self, v: &BigInt) -> BigRational {
        BigRational::from_integer(v.clone())
    }
    fn from_rational(&self, v: &BigRational) -> Option<BigRational> {
        Some(v.clone())
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn modulus(&self) -> Option<u64> {
        None
    }
    fn write_elem(&self, a: &BigRational, out: &mut dyn Write) -> fmt::Result {
        if a.denom().is_one() {
            write!(out, "{}", a.numer())
        } else {
            write!(out, "{}/{}", a.numer(), a.denom())
        }
    }
    fn is_negative_repr(&self, a: &BigRational) -> bool {
        a.is_negative()
    }
}

/// Parse `a` or `a/b` with an optional sign into a rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.sign() == Sign::NoSign {
        return None;
    }
    Some(BigRational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn prime_field_basics() {
        let f = PrimeField::new(PRIME_A);
        assert_eq!(f.from_i64(-1), PRIME_A - 1);
        assert_eq!(f.inv(&2).map(|i| f.mul(&i, &2)), Some(1));
        assert_eq!(f.inv(&0), None);
        assert_eq!(f.elem_to_string(&(PRIME_A - 3)), "-3");
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(f.from_rational(&half).map(|h| f.mul(&h, &2)), Some(1));
        let small = PrimeField::new(7);
        let seventh = BigRational::new(BigInt::from(1), BigInt::from(7));
        assert_eq!(small.from_rational(&seventh), None);
    }

    #[test]
    fn rationals_print() {
        let q = Rationals;
        assert_eq!(q.elem_to_string(&parse_rational("-6/4").unwrap()), "-3/2");
        assert_eq!(q.elem_to_string(&q.from_i64(5)), "5");
        assert!(parse_rational("1/0").is_none());
    }

    proptest! {
        #[test]
        fn fp_inverse(a in 1u64..PRIME_B) {
            let f = PrimeField::new(PRIME_B);
            let i = f.inv(&a).unwrap();
            prop_assert_eq!(f.mul(&a, &i), 1);
            prop_assert_eq!(f.pow(a, PRIME_B - 1), 1);
        }

        #[test]
        fn fp_add_sub(a in 0u64..PRIME_A, b in 0u64..PRIME_A) {
            let f = PrimeField::new(PRIME_A);
            prop_assert_eq!(f.sub(&f.add(&a, &b), &b), a);
            prop_assert_eq!(f.add(&a, &f.neg(&a)), 0);
        }
    }
}

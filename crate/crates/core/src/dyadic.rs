//! Exact dyadic rationals `numer / 2^exp`.
//!
//! All weights, thresholds, and interval endpoints in the crate are dyadic,
//! so arithmetic here is exact: addition aligns denominators, multiplication
//! adds exponents, and normalization keeps the numerator odd (or zero with
//! exponent zero).  Comparisons never round.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numer: BigInt,
    exp: u64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Self { numer: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Self { numer: BigInt::one(), exp: 0 }
    }

    pub fn from_int(n: i64) -> Self {
        Self { numer: BigInt::from(n), exp: 0 }.normalized()
    }

    /// `numer / 2^exp` in lowest terms.
    pub fn new(numer: BigInt, exp: u64) -> Self {
        Self { numer, exp }.normalized()
    }

    /// `k / 2^e` for the wire format's unsigned weights.
    pub fn from_ratio(k: u64, e: u32) -> Self {
        Self::new(BigInt::from(k), u64::from(e))
    }

    /// `2^-e`.
    pub fn power_of_two(e: i64) -> Self {
        if e >= 0 {
            Self { numer: BigInt::one() << e as u64, exp: 0 }
        } else {
            Self { numer: BigInt::one(), exp: (-e) as u64 }
        }
    }

    fn normalized(mut self) -> Self {
        if self.numer.is_zero() {
            self.exp = 0;
            return self;
        }
        while self.exp > 0 && (&self.numer % 2) == BigInt::zero() {
            self.numer >>= 1;
            self.exp -= 1;
        }
        self
    }

    pub fn numer(&self) -> &BigInt {
        &self.numer
    }

    pub fn exp(&self) -> u64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.numer.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.numer.is_negative()
    }

    /// True when the value is exactly `2^-exp` for some natural `exp`
    /// (numerator one); these are the weights with exact entropy terms.
    pub fn is_unit_fraction(&self) -> bool {
        self.numer.is_one()
    }

    pub fn neg(&self) -> Self {
        Self { numer: -&self.numer, exp: self.exp }
    }

    pub fn add(&self, other: &Self) -> Self {
        let exp = self.exp.max(other.exp);
        let a = &self.numer << (exp - self.exp);
        let b = &other.numer << (exp - other.exp);
        Self { numer: a + b, exp }.normalized()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { numer: &self.numer * &other.numer, exp: self.exp + other.exp }.normalized()
    }

    pub fn mul_int(&self, k: u64) -> Self {
        Self { numer: &self.numer * BigInt::from(k), exp: self.exp }.normalized()
    }

    /// Exact halving.
    pub fn half(&self) -> Self {
        Self { numer: self.numer.clone(), exp: self.exp + 1 }.normalized()
    }

    /// Average of two dyadics (exact; used by bisection).
    pub fn midpoint(&self, other: &Self) -> Self {
        self.add(other).half()
    }

    /// Largest multiple of `2^-frac_bits` that is `<= self`.
    pub fn floor_to(&self, frac_bits: u64) -> Self {
        if self.exp <= frac_bits {
            return self.clone();
        }
        let shift = self.exp - frac_bits;
        // BigInt's arithmetic right shift already rounds toward negative
        // infinity, which is exactly floor semantics.
        let q = &self.numer >> shift;
        Self { numer: q, exp: frac_bits }.normalized()
    }

    /// Smallest multiple of `2^-frac_bits` that is `>= self`.
    pub fn ceil_to(&self, frac_bits: u64) -> Self {
        self.neg().floor_to(frac_bits).neg()
    }

    /// Approximate `f64` value for reports; never used in decisions.
    pub fn to_f64_lossy(&self) -> f64 {
        let bits = self.numer.bits();
        if bits <= 52 {
            let n = self.numer.to_f64().unwrap_or(f64::NAN);
            return n * 2f64.powi(-(self.exp as i32).min(1023).max(-1023));
        }
        let shift = bits - 52;
        let top = (&self.numer >> shift).to_f64().unwrap_or(f64::NAN);
        top * 2f64.powi((shift as i64 - self.exp as i64).clamp(-1022, 1022) as i32)
    }

    /// `(k, e)` with the value equal to `k / 2^e`, if `k` fits in a `u64`.
    /// This is the form required by the ensemble wire format.
    pub fn to_ratio(&self) -> Option<(u64, u32)> {
        if self.numer.is_negative() {
            return None;
        }
        let k = self.numer.to_u64()?;
        let e = u32::try_from(self.exp).ok()?;
        Some((k, e))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        let a = &self.numer << (exp - self.exp);
        let b = &other.numer << (exp - other.exp);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.numer)
        } else {
            write!(f, "{}/2^{}", self.numer, self.exp)
        }
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Dyadic", 3)?;
        s.serialize_field("num", &self.numer.to_string())?;
        s.serialize_field("exp", &self.exp)?;
        s.serialize_field("approx", &self.to_f64_lossy())?;
        s.end()
    }
}

/// Parses `"p/2^q"`, or a bare integer, as an exact dyadic.
pub fn parse_dyadic(s: &str) -> Result<Dyadic, String> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let p: i64 = num.trim().parse().map_err(|e| format!("bad numerator: {e}"))?;
        let den = den.trim();
        let q: u64 = den
            .strip_prefix("2^")
            .ok_or_else(|| format!("denominator must be 2^q, found {den:?}"))?
            .parse()
            .map_err(|e| format!("bad exponent: {e}"))?;
        Ok(Dyadic::new(BigInt::from(p), q))
    } else {
        let n: i64 = s.parse().map_err(|e| format!("bad integer: {e}"))?;
        Ok(Dyadic::from_int(n))
    }
}

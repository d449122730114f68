//! Exact interval arithmetic over dyadic endpoints.
//!
//! Real-valued quantities (entropies, logarithms) are returned as closed
//! intervals `[lo, hi]` with dyadic endpoints that provably contain the true
//! value.  Logarithms are enclosed by binary digit extraction (square the
//! mantissa, emit a bit, renormalize) with directed rounding: rounding every
//! intermediate down yields a certified lower bound, rounding up an upper
//! bound.  When the input is a power of two the result is an exact point.
//!
//! At `frac_bits = p` the enclosure of `log2` has width below `2^(-p+2)`,
//! and since ensemble weights sum to one the same bound holds for entropy
//! intervals assembled from these terms.

use std::fmt;

use num_bigint::BigInt;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::dyadic::Dyadic;

/// Three-valued comparison outcome; `Unknown` means the intervals overlap
/// and the caller should refine precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    True,
    False,
    Unknown,
}

#[derive(Clone, PartialEq, Eq)]
pub struct RealInterval {
    lo: Dyadic,
    hi: Dyadic,
}

impl RealInterval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Self { lo, hi }
    }

    pub fn point(v: Dyadic) -> Self {
        Self { lo: v.clone(), hi: v }
    }

    pub fn zero() -> Self {
        Self::point(Dyadic::zero())
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { lo: self.lo.add(&other.lo), hi: self.hi.add(&other.hi) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { lo: self.lo.sub(&other.hi), hi: self.hi.sub(&other.lo) }
    }

    pub fn neg(&self) -> Self {
        Self { lo: self.hi.neg(), hi: self.lo.neg() }
    }

    /// Multiplies by a nonnegative exact scalar.
    pub fn scale_nonneg(&self, k: &Dyadic) -> Self {
        assert!(!k.is_negative(), "scale factor must be nonnegative");
        Self { lo: self.lo.mul(k), hi: self.hi.mul(k) }
    }

    /// Widens both endpoints outward by a nonnegative `pad`.
    pub fn pad(&self, pad: &Dyadic) -> Self {
        assert!(!pad.is_negative());
        Self { lo: self.lo.sub(pad), hi: self.hi.add(pad) }
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn contains(&self, v: &Dyadic) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    /// Distance from the interval to a point (zero when contained).
    pub fn distance_to(&self, v: &Dyadic) -> Dyadic {
        if v < &self.lo {
            self.lo.sub(v)
        } else if v > &self.hi {
            v.sub(&self.hi)
        } else {
            Dyadic::zero()
        }
    }

    /// Certified `self >= other`; `Unknown` when the enclosures overlap.
    pub fn ge(&self, other: &Self) -> Decision {
        if self.lo >= other.hi {
            Decision::True
        } else if self.hi < other.lo {
            Decision::False
        } else {
            Decision::Unknown
        }
    }

    pub fn le(&self, other: &Self) -> Decision {
        other.ge(self)
    }
}

impl fmt::Display for RealInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Debug for RealInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for RealInterval {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("RealInterval", 2)?;
        s.serialize_field("lo", &self.lo)?;
        s.serialize_field("hi", &self.hi)?;
        s.end()
    }
}

/// Digit extraction for `log2` of a mantissa in `[1, 2)`.
///
/// One pass with downward rounding (certified lower bound) or upward
/// rounding (after adding one final ulp, certified upper bound).  Each pass
/// runs `frac_bits` squarings at `frac_bits + 8` working fraction bits; the
/// guard bits keep the accumulated rounding below one emitted ulp.
fn log2_mantissa_bound(m: &Dyadic, frac_bits: u32, round_up: bool) -> Dyadic {
    let work = u64::from(frac_bits) + 8;
    let round = |d: &Dyadic| if round_up { d.ceil_to(work) } else { d.floor_to(work) };
    let two = Dyadic::from_int(2);
    let mut cur = round(m);
    let mut acc = BigInt::ZERO;
    for _ in 0..frac_bits {
        cur = round(&cur.mul(&cur));
        acc <<= 1;
        if cur >= two {
            acc += 1;
            cur = cur.half();
        }
    }
    if round_up {
        acc += 1;
    }
    Dyadic::new(acc, u64::from(frac_bits))
}

/// Certified enclosure of `log2(q)` for a positive dyadic `q`, exact when
/// `q` is a power of two.
pub fn log2_interval(q: &Dyadic, frac_bits: u32) -> RealInterval {
    assert!(q.is_positive(), "log2 needs a positive argument");
    let top_bit = q.numer().magnitude().bits() - 1;
    let int_part = top_bit as i64 - q.exp() as i64;
    let int_part = Dyadic::from_int(int_part);
    if q.numer().magnitude().count_ones() == 1 {
        return RealInterval::point(int_part);
    }
    // mantissa m = numer / 2^top_bit lies strictly inside (1, 2)
    let m = Dyadic::new(q.numer().clone(), top_bit);
    let lo = log2_mantissa_bound(&m, frac_bits, false);
    let hi = log2_mantissa_bound(&m, frac_bits, true);
    RealInterval::new(int_part.add(&lo), int_part.add(&hi))
}

/// Enclosure of `log2(n)` for a natural cardinality `n >= 1`.
pub fn log2_nat(n: u64, frac_bits: u32) -> RealInterval {
    log2_interval(&Dyadic::from_int(n as i64), frac_bits)
}

/// Enclosure of the entropy term `-w * log2(w)` for a weight `w` in `(0, 1]`.
/// Exact whenever `w` is `1` or a unit fraction `2^-e`.
pub fn neg_w_log2_w(w: &Dyadic, frac_bits: u32) -> RealInterval {
    assert!(w.is_positive() && w <= &Dyadic::one(), "weight outside (0, 1]");
    if w.is_unit_fraction() {
        // -2^-e * log2(2^-e) = e / 2^e, exactly
        let e = w.exp();
        return RealInterval::point(Dyadic::new(BigInt::from(e), e));
    }
    // w = k/2^e with k odd >= 3: -log2 w = e - log2 k, then scale by w > 0
    let e = Dyadic::from_int(w.exp() as i64);
    let log2_k = log2_interval(&Dyadic::new(w.numer().clone(), 0), frac_bits);
    RealInterval::point(e).sub(&log2_k).scale_nonneg(w)
}

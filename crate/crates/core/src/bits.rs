//! Finite binary strings packed into 64-bit words.
//!
//! `BitString` is the universal currency of the crate: programs, outputs,
//! auxiliary inputs, and wire encodings are all bit strings.  The derived
//! total order is the canonical enumeration order used everywhere: first by
//! length, then lexicographically with `0 < 1`.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Bit `i` lives in `words[i / 64]` at position `63 - (i % 64)` (most
/// significant bit first), so comparing word slices of equal-length strings
/// is exactly lexicographic bit comparison.  Unused trailing bits are zero.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        if bit {
            let w = self.len / 64;
            self.words[w] |= 1u64 << (63 - (self.len % 64));
        }
        self.len += 1;
    }

    /// Removes and returns the last bit, preserving the tail-zero invariant.
    pub fn pop(&mut self) -> Option<bool> {
        if self.len == 0 {
            return None;
        }
        self.len -= 1;
        let w = self.len / 64;
        let mask = 1u64 << (63 - (self.len % 64));
        let bit = self.words[w] & mask != 0;
        self.words[w] &= !mask;
        if self.len % 64 == 0 {
            self.words.pop();
        }
        Some(bit)
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (63 - (i % 64))) & 1 == 1
    }

    pub fn last(&self) -> Option<bool> {
        if self.len == 0 {
            None
        } else {
            Some(self.get(self.len - 1))
        }
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Appends all bits of `other` (used for concatenation codes and the
    /// output-doubling opcode, where `other` may be a clone of `self`).
    pub fn extend_from(&mut self, other: &BitString) {
        for b in other.bits() {
            self.push(b);
        }
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.extend_from(other);
        out
    }

    /// The suffix starting at bit `pos`.
    pub fn suffix_from(&self, pos: usize) -> BitString {
        assert!(pos <= self.len);
        let mut out = BitString::new();
        for i in pos..self.len {
            out.push(self.get(i));
        }
        out
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len <= other.len && (0..self.len).all(|i| self.get(i) == other.get(i))
    }

    /// The `width` low bits of `value`, most significant first, so that for a
    /// fixed width the numeric order of `value` is the lexicographic order.
    pub fn from_uint(value: u64, width: u32) -> BitString {
        assert!(width <= 64);
        assert!(width == 64 || value < (1u64 << width), "value too wide");
        let mut out = BitString::new();
        for i in (0..width).rev() {
            out.push((value >> i) & 1 == 1);
        }
        out
    }

    /// All strings of length `n` in canonical (lexicographic) order.
    pub fn strings_of_length(n: u32) -> impl Iterator<Item = BitString> {
        assert!(n < 63, "exhaustive string iteration is desk-scale only");
        (0..(1u64 << n)).map(move |v| BitString::from_uint(v, n))
    }

    /// All strings of length at most `n`, in canonical order.
    pub fn strings_up_to_length(n: u32) -> impl Iterator<Item = BitString> {
        (0..=n).flat_map(BitString::strings_of_length)
    }

    /// Bits packed into bytes, most significant bit first, zero padded.
    pub fn to_padded_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for i in 0..self.len {
            if self.get(i) {
                out[i / 8] |= 1 << (7 - (i % 8));
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> BitString {
        let mut out = BitString::new();
        for byte in bytes {
            for i in (0..8).rev() {
                out.push((byte >> i) & 1 == 1);
            }
        }
        out
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.words.cmp(&other.words))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.bits() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("bit strings may contain only '0' and '1', found {found:?}")]
pub struct ParseBitsError {
    pub found: char,
}

impl FromStr for BitString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = BitString::new();
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                other => return Err(ParseBitsError { found: other }),
            }
        }
        Ok(out)
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<T: IntoIterator<Item = bool>>(iter: T) -> Self {
        let mut out = BitString::new();
        for b in iter {
            out.push(b);
        }
        out
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// Convenience constructor for literals in tests and docs.
pub fn bits(s: &str) -> BitString {
    s.parse().expect("literal must be a 0/1 string")
}

//! Self-delimiting bit codes: Elias gamma for positive integers, the
//! length-prefixed string code built on it, and pair concatenation.
//!
//! `gamma(n)` is `floor(log2 n)` zeros followed by the binary expansion of
//! `n`; its length is `2*floor(log2 n) + 1`.  `encode_string(x)` is
//! `gamma(len(x) + 1)` followed by the raw bits of `x`, and pairs are the
//! concatenation of the two string codes.  All decoders consume from the
//! front and report exactly how much they read, which is what makes the
//! encodings usable inside prefix-free program streams.

use thiserror::Error;

use crate::bits::BitString;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("bit stream ended inside a code")]
    Truncated,
    #[error("gamma code exceeds the 64-bit range")]
    Overflow,
}

/// Cursor over a bit string; every read advances `pos`.
pub struct BitReader<'a> {
    source: &'a BitString,
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(source: &'a BitString) -> Self {
        Self { source, pos: 0 }
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.source.len() - self.pos
    }

    pub fn is_done(&self) -> bool {
        self.remaining() == 0
    }

    pub fn read_bit(&mut self) -> Result<bool, CodecError> {
        if self.pos >= self.source.len() {
            return Err(CodecError::Truncated);
        }
        let b = self.source.get(self.pos);
        self.pos += 1;
        Ok(b)
    }

    pub fn read_gamma(&mut self) -> Result<u64, CodecError> {
        let mut zeros = 0u32;
        while !self.read_bit()? {
            zeros += 1;
            if zeros > 63 {
                return Err(CodecError::Overflow);
            }
        }
        let mut value = 1u64;
        for _ in 0..zeros {
            value = (value << 1) | u64::from(self.read_bit()?);
        }
        Ok(value)
    }

    /// Reads `gamma(len + 1)` then `len` raw bits.
    pub fn read_string(&mut self) -> Result<BitString, CodecError> {
        let n = self.read_gamma()?;
        let len = usize::try_from(n - 1).map_err(|_| CodecError::Overflow)?;
        if self.remaining() < len {
            return Err(CodecError::Truncated);
        }
        let mut out = BitString::new();
        for _ in 0..len {
            out.push(self.read_bit()?);
        }
        Ok(out)
    }

    pub fn rest(&self) -> BitString {
        self.source.suffix_from(self.pos)
    }
}

/// Number of bits in `gamma(n)`.
pub fn gamma_len(n: u64) -> u32 {
    assert!(n >= 1, "gamma codes positive integers only");
    2 * (63 - n.leading_zeros()) + 1
}

pub fn gamma_encode(n: u64) -> BitString {
    assert!(n >= 1, "gamma codes positive integers only");
    let top = 63 - n.leading_zeros();
    let mut out = BitString::new();
    for _ in 0..top {
        out.push(false);
    }
    for i in (0..=top).rev() {
        out.push((n >> i) & 1 == 1);
    }
    out
}

/// Decodes one gamma value from the front, returning it with the unread rest.
pub fn gamma_decode(b: &BitString) -> Result<(u64, BitString), CodecError> {
    let mut r = BitReader::new(b);
    let n = r.read_gamma()?;
    Ok((n, r.rest()))
}

/// `gamma(len(x) + 1) || x`; total with zero and empty strings.
pub fn encode_string(x: &BitString) -> BitString {
    let mut out = gamma_encode(x.len() as u64 + 1);
    out.extend_from(x);
    out
}

pub fn decode_string(b: &BitString) -> Result<(BitString, BitString), CodecError> {
    let mut r = BitReader::new(b);
    let s = r.read_string()?;
    Ok((s, r.rest()))
}

pub fn encode_pair(x: &BitString, y: &BitString) -> BitString {
    let mut out = encode_string(x);
    out.extend_from(&encode_string(y));
    out
}

pub fn decode_pair(b: &BitString) -> Result<((BitString, BitString), BitString), CodecError> {
    let mut r = BitReader::new(b);
    let x = r.read_string()?;
    let y = r.read_string()?;
    Ok(((x, y), r.rest()))
}

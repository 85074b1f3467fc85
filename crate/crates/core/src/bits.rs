//! Plain bit strings with fixed-width integer packing.
//!
//! Bits are stored most-significant first. Hex rendering pads the final
//! nibble with zeros, so a hex string always travels with its bit length.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error(
        "bit string truncated: needed {needed} bits at offset {offset}, {available} available"
    )]
    Truncated {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("invalid hex digit {0:?}")]
    BadHex(char),
    #[error("hex string of {hex_len} digits cannot hold {bits} bits")]
    LengthMismatch { hex_len: usize, bits: usize },
}

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn as_bools(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.bits.get(i).copied()
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn push(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push_uint(&mut self, value: u64, width: usize) {
        debug_assert!(width <= 64);
        debug_assert!(
            width == 64 || value < (1u64 << width),
            "{value} does not fit in {width} bits"
        );
        for i in (0..width).rev() {
            self.bits.push((value >> i) & 1 == 1);
        }
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn slice(&self, start: usize, end: usize) -> BitString {
        BitString {
            bits: self.bits[start..end].to_vec(),
        }
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader {
            bits: &self.bits,
            pos: 0,
        }
    }

    /// Positions that differ, plus the length difference.
    pub fn hamming(&self, other: &BitString) -> usize {
        let common = self.len().min(other.len());
        let diff = self.bits[..common]
            .iter()
            .zip(&other.bits[..common])
            .filter(|(a, b)| a != b)
            .count();
        diff + self.len().abs_diff(other.len())
    }

    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(self.len().div_ceil(4));
        for chunk in self.bits.chunks(4) {
            let mut nibble = 0u8;
            for (i, b) in chunk.iter().enumerate() {
                if *b {
                    nibble |= 1 << (3 - i);
                }
            }
            out.push(char::from_digit(u32::from(nibble), 16).unwrap());
        }
        out
    }

    pub fn from_hex(hex: &str, bits: usize) -> Result<Self, BitsError> {
        if hex.len() != bits.div_ceil(4) {
            return Err(BitsError::LengthMismatch {
                hex_len: hex.len(),
                bits,
            });
        }
        let mut out = BitString::new();
        for c in hex.chars() {
            let v = c.to_digit(16).ok_or(BitsError::BadHex(c))?;
            out.push_uint(u64::from(v), 4);
        }
        out.bits.truncate(bits);
        Ok(out)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({}b:", self.len())?;
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}

pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl BitReader<'_> {
    pub fn read_uint(&mut self, width: usize) -> Result<u64, BitsError> {
        if self.pos + width > self.bits.len() {
            return Err(BitsError::Truncated {
                offset: self.pos,
                needed: width,
                available: self.bits.len() - self.pos,
            });
        }
        let mut v = 0u64;
        for &b in &self.bits[self.pos..self.pos + width] {
            v = (v << 1) | u64::from(b);
        }
        self.pos += width;
        Ok(v)
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }
}

/// Bits needed to index `n` distinct values; zero when `n <= 1`.
pub fn index_width(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

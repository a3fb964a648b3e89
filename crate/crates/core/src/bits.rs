//! Fixed-length bit strings.
//!
//! Positions are 1-indexed at the API surface and 0-indexed in storage.
//! Position 1 is the most significant bit of the integer encoding, so the
//! string `1011` has index value 11 and Hamming weight 3.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BitString {
    bits: Vec<bool>,
}

impl BitString {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidParameter("bit string must be non-empty".into()));
        }
        Ok(BitString { bits })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![false; n])
    }

    /// The n-bit big-endian encoding of `value`; requires `value < 2^n`.
    pub fn from_index(value: u64, n: usize) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidParameter(format!("length {n} out of range 1..=64")));
        }
        if n < 64 && value >> n != 0 {
            return Err(Error::InvalidParameter(format!("value {value} does not fit in {n} bits")));
        }
        let bits = (0..n).map(|i| value >> (n - 1 - i) & 1 == 1).collect();
        Ok(BitString { bits })
    }

    pub fn from_binary_str(s: &str) -> Result<Self> {
        let bits: Vec<bool> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Format(format!("bad bit character {c:?}"))),
            })
            .collect::<Result<_>>()?;
        Self::new(bits)
    }

    /// Each hex digit contributes four bits, most significant first.
    pub fn from_hex_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len() * 4);
        for c in s.chars() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| Error::Format(format!("bad hex character {c:?}")))?;
            for i in (0..4).rev() {
                bits.push(v >> i & 1 == 1);
            }
        }
        Self::new(bits)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    /// Bit at 1-indexed position.
    pub fn get(&self, position: usize) -> bool {
        assert!(
            position >= 1 && position <= self.bits.len(),
            "position {position} out of range 1..={}",
            self.bits.len()
        );
        self.bits[position - 1]
    }

    pub fn hamming_weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn to_index(&self) -> Result<u64> {
        if self.bits.len() > 64 {
            return Err(Error::InvalidParameter(format!(
                "length {} exceeds 64-bit index range",
                self.bits.len()
            )));
        }
        Ok(self.bits.iter().fold(0u64, |acc, &b| acc << 1 | u64::from(b)))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", u8::from(b))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl TryFrom<String> for BitString {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Self::from_binary_str(&s)
    }
}

impl From<BitString> for String {
    fn from(b: BitString) -> String {
        b.to_string()
    }
}

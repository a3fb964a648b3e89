//! Explicit truth tables f: {0,1}^n -> {0,1}^m and their on-disk formats.
//!
//! Binary format: a 12-byte header of three unsigned 32-bit little-endian
//! words (magic `OBFX`, n, m) followed by the 2^n outputs packed m bits
//! each, row-major by input value. Bit t of output x sits at stream
//! position x*m + t, and stream bit i occupies bit i%8 of byte i/8.
//!
//! Hex format (for fixtures): a first line `obfx-tt <n> <m>` followed by the
//! same packed payload in lowercase hex, whitespace ignored.

use crate::bits::BitString;
use crate::dist::Distribution;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::source::ObfsSource;

pub const TT_MAGIC: u32 = u32::from_le_bytes(*b"OBFX");

/// Hard cap on table size: 2^n entries of 8 bytes each.
pub const MAX_TABLE_N: u32 = 26;

#[derive(Clone, PartialEq, Eq)]
pub struct TruthTableFunction {
    n: u32,
    m: u32,
    table: Vec<u64>,
}

impl TruthTableFunction {
    pub fn new(n: u32, m: u32, table: Vec<u64>) -> Result<Self> {
        if n == 0 || n > MAX_TABLE_N {
            return Err(Error::InvalidParameter(format!("n={n} out of range 1..={MAX_TABLE_N}")));
        }
        if m == 0 || m > 32 {
            return Err(Error::InvalidParameter(format!("m={m} out of range 1..=32")));
        }
        if table.len() != 1usize << n {
            return Err(Error::LengthMismatch { expected: 1usize << n, got: table.len() });
        }
        if let Some(bad) = table.iter().find(|&&v| v >> m != 0) {
            return Err(Error::InvalidParameter(format!(
                "table entry {bad} does not fit in {m} bits"
            )));
        }
        Ok(TruthTableFunction { n, m, table })
    }

    pub fn from_fn(n: u32, m: u32, f: impl FnMut(u64) -> u64) -> Result<Self> {
        let table = (0..1u64 << n).map(f).collect();
        Self::new(n, m, table)
    }

    /// XOR of all input bits; one output bit.
    pub fn parity(n: u32) -> Result<Self> {
        Self::from_fn(n, 1, |x| u64::from(x.count_ones() & 1))
    }

    pub fn constant(n: u32, m: u32, value: u64) -> Result<Self> {
        Self::from_fn(n, m, |_| value)
    }

    /// Sum of the input bits reduced mod 2^m.
    pub fn cycle_walk(n: u32, m: u32) -> Result<Self> {
        if m > n {
            return Err(Error::InvalidParameter(format!("m={m} exceeds input length n={n}")));
        }
        Self::from_fn(n, m, |x| u64::from(x.count_ones()) & ((1u64 << m) - 1))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn table(&self) -> &[u64] {
        &self.table
    }

    #[inline]
    pub fn eval_index(&self, x: u64) -> u64 {
        self.table[x as usize]
    }

    pub fn eval(&self, w: &BitString) -> Result<BitString> {
        if w.len() != self.n as usize {
            return Err(Error::LengthMismatch { expected: self.n as usize, got: w.len() });
        }
        BitString::from_index(self.eval_index(w.to_index()?), self.m as usize)
    }

    /// Exact output distribution of the function applied to the 2^k equally
    /// likely completions of the source. Every mass has denominator 2^k.
    pub fn output_distribution(&self, source: &ObfsSource) -> Result<Distribution> {
        if source.n() != self.n as usize {
            return Err(Error::LengthMismatch { expected: self.n as usize, got: source.n() });
        }
        let mut counts = vec![0u64; 1usize << self.m];
        let base = source.base_index();
        let free = source.free_index_mask();
        // Enumerate the subcube base | s for all submasks s of the free mask.
        let mut s = free;
        loop {
            counts[self.eval_index(base | s) as usize] += 1;
            if s == 0 {
                break;
            }
            s = (s - 1) & free;
        }
        Distribution::from_counts(self.m, &counts, source.k() as u32)
    }

    pub fn distance_from_uniform_on(&self, source: &ObfsSource) -> Result<Dyadic> {
        Ok(self.output_distribution(source)?.distance_from_uniform())
    }

    fn payload_bytes(&self) -> Vec<u64> {
        // total bits = 2^n * m
        let total_bits = (1u64 << self.n) * u64::from(self.m);
        let mut words = vec![0u64; (total_bits as usize).div_ceil(64)];
        for (x, &out) in self.table.iter().enumerate() {
            for t in 0..self.m as u64 {
                if out >> t & 1 == 1 {
                    let pos = x as u64 * u64::from(self.m) + t;
                    words[(pos / 64) as usize] |= 1 << (pos % 64);
                }
            }
        }
        words
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let total_bits = (1u64 << self.n) * u64::from(self.m);
        let nbytes = total_bits.div_ceil(8) as usize;
        let mut out = Vec::with_capacity(12 + nbytes);
        out.extend_from_slice(&TT_MAGIC.to_le_bytes());
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&self.m.to_le_bytes());
        let words = self.payload_bytes();
        let mut bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
        bytes.truncate(nbytes);
        out.extend_from_slice(&bytes);
        out
    }

    pub fn from_binary(data: &[u8]) -> Result<Self> {
        if data.len() < 12 {
            return Err(Error::Format("truth table file shorter than its header".into()));
        }
        let word = |i: usize| u32::from_le_bytes(data[i * 4..i * 4 + 4].try_into().unwrap());
        if word(0) != TT_MAGIC {
            return Err(Error::Format(format!("bad magic {:#010x}", word(0))));
        }
        let (n, m) = (word(1), word(2));
        if n == 0 || n > MAX_TABLE_N || m == 0 || m > 32 {
            return Err(Error::Format(format!("unreasonable header n={n}, m={m}")));
        }
        let total_bits = (1u64 << n) * u64::from(m);
        let nbytes = total_bits.div_ceil(8) as usize;
        let payload = &data[12..];
        if payload.len() != nbytes {
            return Err(Error::Format(format!(
                "payload is {} bytes, expected {nbytes}",
                payload.len()
            )));
        }
        let bit = |i: u64| payload[(i / 8) as usize] >> (i % 8) & 1;
        let table = (0..1u64 << n)
            .map(|x| (0..u64::from(m)).map(|t| u64::from(bit(x * u64::from(m) + t)) << t).sum())
            .collect();
        Self::new(n, m, table)
    }

    pub fn to_hex(&self) -> String {
        let binary = self.to_binary();
        let mut s = format!("obfx-tt {} {}\n", self.n, self.m);
        for (i, b) in binary[12..].iter().enumerate() {
            if i > 0 && i % 32 == 0 {
                s.push('\n');
            }
            s.push_str(&format!("{b:02x}"));
        }
        s.push('\n');
        s
    }

    pub fn from_hex(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty hex table".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("obfx-tt") {
            return Err(Error::Format("hex table must start with 'obfx-tt <n> <m>'".into()));
        }
        let n: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format("bad n in hex table header".into()))?;
        let m: u32 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format("bad m in hex table header".into()))?;
        let hex: String = lines.collect::<String>().chars().filter(|c| !c.is_whitespace()).collect();
        if !hex.len().is_multiple_of(2) {
            return Err(Error::Format("odd number of hex digits".into()));
        }
        let mut data = Vec::with_capacity(12 + hex.len() / 2);
        data.extend_from_slice(&TT_MAGIC.to_le_bytes());
        data.extend_from_slice(&n.to_le_bytes());
        data.extend_from_slice(&m.to_le_bytes());
        for i in (0..hex.len()).step_by(2) {
            let byte = u8::from_str_radix(&hex[i..i + 2], 16)
                .map_err(|_| Error::Format(format!("bad hex byte {:?}", &hex[i..i + 2])))?;
            data.push(byte);
        }
        Self::from_binary(&data)
    }
}

impl std::fmt::Debug for TruthTableFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TruthTableFunction(n={}, m={})", self.n, self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_on_fixed_source_is_uniform() {
        // parity on 3 bits, positions {1,2} fixed to "10": one free bit flips parity
        let f = TruthTableFunction::parity(3).unwrap();
        let s = ObfsSource::new(3, vec![1, 2], vec![true, false]).unwrap();
        let d = f.output_distribution(&s).unwrap();
        assert_eq!(d, Distribution::uniform(1));
    }

    #[test]
    fn constant_function_is_point_mass() {
        let f = TruthTableFunction::constant(4, 2, 0).unwrap();
        let s = ObfsSource::new(4, vec![2], vec![true]).unwrap();
        let d = f.output_distribution(&s).unwrap();
        assert_eq!(d, Distribution::point_mass(2, 0).unwrap());
    }

    #[test]
    fn cycle_walk_distribution_n4_m2() {
        // weight counts 1,4,6,4,1 reduced mod 4 -> {0: 2/16, 1: 4/16, 2: 6/16, 3: 4/16}
        let f = TruthTableFunction::cycle_walk(4, 2).unwrap();
        let s = ObfsSource::unfixed(4).unwrap();
        let d = f.output_distribution(&s).unwrap();
        assert_eq!(d, Distribution::from_counts(2, &[2, 4, 6, 4], 4).unwrap());
        assert_eq!(d.distance_from_uniform(), Dyadic::from_u64(1, 3));
    }

    #[test]
    fn length_mismatch_rejected() {
        let f = TruthTableFunction::parity(3).unwrap();
        let s = ObfsSource::unfixed(4).unwrap();
        assert!(f.output_distribution(&s).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let f = TruthTableFunction::from_fn(5, 3, |x| x.wrapping_mul(13) & 7).unwrap();
        let bytes = f.to_binary();
        assert_eq!(TruthTableFunction::from_binary(&bytes).unwrap(), f);
        assert!(TruthTableFunction::from_binary(&bytes[..8]).is_err());
        let mut bad = bytes.clone();
        bad[0] ^= 0xff;
        assert!(TruthTableFunction::from_binary(&bad).is_err());
    }

    #[test]
    fn hex_round_trip() {
        let f = TruthTableFunction::cycle_walk(6, 2).unwrap();
        let text = f.to_hex();
        assert_eq!(TruthTableFunction::from_hex(&text).unwrap(), f);
    }

    #[test]
    fn eval_matches_table() {
        let f = TruthTableFunction::parity(4).unwrap();
        let w = BitString::from_binary_str("1011").unwrap();
        assert_eq!(f.eval(&w).unwrap().to_string(), "1");
    }
}

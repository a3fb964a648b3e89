//! Oblivious bit-fixing sources.
//!
//! A source on n bits fixes the positions in a set L to constant values and
//! leaves the remaining k = n - |L| positions independent and uniform.
//! Sources with k = 0 are rejected at construction: a fully fixed source has
//! no randomness to extract and only pollutes enumeration sweeps.
//!
//! Index convention: position p (1-indexed, matching [`crate::bits`]) is bit
//! `n - p` of the integer encoding of an input string.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct ObfsSource {
    n: usize,
    /// Fixed positions, ascending, 1-indexed.
    fixed_positions: Vec<usize>,
    /// Values for the fixed positions, parallel to `fixed_positions`.
    fixed_values: Vec<bool>,
}

impl ObfsSource {
    pub fn new(n: usize, positions: Vec<usize>, values: Vec<bool>) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidParameter(format!("source length {n} out of range 1..=64")));
        }
        if positions.len() != values.len() {
            return Err(Error::LengthMismatch { expected: positions.len(), got: values.len() });
        }
        if positions.len() >= n {
            return Err(Error::InvalidParameter(
                "source must leave at least one position free (k >= 1)".into(),
            ));
        }
        let mut pairs: Vec<(usize, bool)> = positions.into_iter().zip(values).collect();
        pairs.sort_unstable_by_key(|&(p, _)| p);
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidParameter(format!("duplicate fixed position {}", w[0].0)));
            }
        }
        if let Some(&(p, _)) = pairs.iter().find(|&&(p, _)| p == 0 || p > n) {
            return Err(Error::InvalidParameter(format!("position {p} out of range 1..={n}")));
        }
        let (fixed_positions, fixed_values) = pairs.into_iter().unzip();
        Ok(ObfsSource { n, fixed_positions, fixed_values })
    }

    /// The fully random source (no fixed positions).
    pub fn unfixed(n: usize) -> Result<Self> {
        Self::new(n, vec![], vec![])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of free (uniformly random) positions.
    pub fn k(&self) -> usize {
        self.n - self.fixed_positions.len()
    }

    pub fn fixed_positions(&self) -> &[usize] {
        &self.fixed_positions
    }

    pub fn fixed_values(&self) -> &[bool] {
        &self.fixed_values
    }

    pub fn free_positions(&self) -> Vec<usize> {
        let mut fixed = vec![false; self.n + 1];
        for &p in &self.fixed_positions {
            fixed[p] = true;
        }
        (1..=self.n).filter(|&p| !fixed[p]).collect()
    }

    /// Integer encoding of the fixed bits (free positions contribute 0).
    pub fn base_index(&self) -> u64 {
        self.fixed_positions
            .iter()
            .zip(&self.fixed_values)
            .filter(|&(_, &v)| v)
            .map(|(&p, _)| 1u64 << (self.n - p))
            .sum()
    }

    /// Mask of the index bits belonging to free positions.
    pub fn free_index_mask(&self) -> u64 {
        let all = if self.n == 64 { u64::MAX } else { (1u64 << self.n) - 1 };
        let fixed: u64 = self.fixed_positions.iter().map(|&p| 1u64 << (self.n - p)).sum();
        all & !fixed
    }

    /// All 2^k completions of the source as integer-encoded inputs, in
    /// numeric order of the free-bit assignment (free positions read as a
    /// bit string, smallest position most significant). Only meaningful for
    /// enumerable k; callers enforce work budgets before iterating.
    pub fn completions(&self) -> impl Iterator<Item = u64> + '_ {
        let free = self.free_positions();
        let base = self.base_index();
        let k = free.len();
        assert!(k <= 48, "a source with k={k} free bits is not enumerable");
        (0..1u64 << k).map(move |g| {
            let mut x = base;
            for (j, &p) in free.iter().enumerate() {
                if g >> (k - 1 - j) & 1 == 1 {
                    x |= 1 << (self.n - p);
                }
            }
            x
        })
    }
}

impl std::fmt::Debug for ObfsSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ObfsSource(n={}, fixed={{", self.n)?;
        for (i, (&p, &v)) in self.fixed_positions.iter().zip(&self.fixed_values).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}={}", u8::from(v))?;
        }
        write!(f, "}}, k={})", self.k())
    }
}

impl Serialize for ObfsSource {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ObfsSource", 4)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("k", &self.k())?;
        s.serialize_field("fixed_positions", &self.fixed_positions)?;
        let values: String =
            self.fixed_values.iter().map(|&v| if v { '1' } else { '0' }).collect();
        s.serialize_field("fixed_values", &values)?;
        s.end()
    }
}

/// Iterates every (L, a) pair exactly once: fixed sets L of size n-k in
/// colexicographic order (equivalently, increasing value of the bitmask with
/// bit p-1 standing for position p), and for each L the fixed values a in
/// numeric order. The order is part of the contract: witnesses refer to it.
pub fn enumerate_sources(n: usize, k: usize) -> Result<impl Iterator<Item = ObfsSource>> {
    if n == 0 || n > 63 {
        return Err(Error::InvalidParameter(format!("n={n} out of range 1..=63")));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("k={k} out of range 1..={n}")));
    }
    let t = n - k;
    let masks: Vec<u64> = position_masks(n, t);
    Ok(masks.into_iter().flat_map(move |mask| {
        let positions: Vec<usize> = (1..=n).filter(|&p| mask >> (p - 1) & 1 == 1).collect();
        (0..1u64 << t).map(move |a| {
            let values: Vec<bool> = (0..t).map(|j| a >> (t - 1 - j) & 1 == 1).collect();
            ObfsSource::new(n, positions.clone(), values)
                .expect("enumerated source parameters are valid")
        })
    }))
}

/// All n-bit masks of popcount `t` in increasing numeric order (Gosper's
/// hack), which is colexicographic order on the underlying position sets.
pub(crate) fn position_masks(n: usize, t: usize) -> Vec<u64> {
    if t == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let limit = 1u64 << n;
    let mut mask = (1u64 << t) - 1;
    while mask < limit {
        out.push(mask);
        let u = mask & mask.wrapping_neg();
        let v = mask + u;
        if v >= limit {
            break;
        }
        mask = v | ((mask ^ v) / u) >> 2;
    }
    out
}

/// C(n, t) * 2^t, the number of sources enumerate_sources(n, n - t) yields.
pub fn source_count(n: usize, k: usize) -> u128 {
    let t = n - k;
    binomial_u128(n, t) * (1u128 << t)
}

pub(crate) fn binomial_u128(n: usize, t: usize) -> u128 {
    if t > n {
        return 0;
    }
    let t = t.min(n - t);
    let mut acc: u128 = 1;
    for i in 0..t {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

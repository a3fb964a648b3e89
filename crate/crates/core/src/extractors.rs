//! Explicit extractor constructions.
//!
//! The main construction reads the input bits as steps of a walk on the
//! cycle Z_{2^m} that adds 1 or 0 per bit, i.e. it outputs the bit sum mod
//! 2^m. The m = 1 case is plain parity. The +1/-1 walk on an odd cycle is
//! included for comparison only: it is the variant the add-1-or-0 walk
//! replaces (an even cycle is bipartite under forced moves, and an odd cycle
//! needs an output-conversion step that is out of scope here), and no
//! uniformity claim is attached to it.

use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};

/// Sum of the bits of `w` reduced mod 2^m, as an m-bit string. Invariant
/// under any permutation of the input bits.
pub fn cycle_walk_extract(w: &BitString, m: u32) -> Result<BitString> {
    if m == 0 || m as usize > w.len() {
        return Err(Error::InvalidParameter(format!(
            "m={m} out of range 1..={} for this input",
            w.len()
        )));
    }
    let sum = w.hamming_weight() as u64;
    let modulus_mask = u64::MAX >> (64 - m);
    BitString::from_index(sum & modulus_mask, m as usize)
}

/// XOR of all input bits.
pub fn parity(w: &BitString) -> BitString {
    BitString::from_index(w.hamming_weight() as u64 & 1, 1).expect("1-bit value")
}

/// Endpoint of the walk on a cycle of odd size that steps +1 on a 1 bit and
/// -1 on a 0 bit, starting from 0.
pub fn plusminus_cycle_extract(w: &BitString, cycle_size: u64) -> Result<u64> {
    if cycle_size < 3 || cycle_size.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "cycle size must be odd and >= 3, got {cycle_size}"
        )));
    }
    let mut state: u64 = 0;
    for b in w.iter() {
        state = if b { (state + 1) % cycle_size } else { (state + cycle_size - 1) % cycle_size };
    }
    Ok(state)
}

/// Target error for the cycle-walk construction, either an exact power of
/// two (preferred) or an arbitrary float in (0, 1/2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Epsilon {
    /// 2^-e
    PowTwo(u32),
    Value(f64),
}

impl Epsilon {
    pub fn to_f64(self) -> f64 {
        match self {
            Epsilon::PowTwo(e) => 2f64.powi(-(e as i32)),
            Epsilon::Value(v) => v,
        }
    }

    pub fn log2_inverse(self) -> f64 {
        match self {
            Epsilon::PowTwo(e) => f64::from(e),
            Epsilon::Value(v) => -v.log2(),
        }
    }
}

/// Validated parameters for the cycle-walk extractor: output length
/// m = floor((log2 k - log2 log2 (1/eps)) / 2), with m >= 1 and k >= M^2
/// (M = 2^m) enforced. The error guarantee depends on k >= M^2.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CycleWalkParams {
    pub k: u64,
    pub epsilon: Epsilon,
    pub m: u32,
}

pub fn params_for(k: u64, epsilon: Epsilon) -> Result<CycleWalkParams> {
    let eps = epsilon.to_f64();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie strictly between 0 and 1/2, got {eps}"
        )));
    }
    let log_k = (k as f64).log2();
    let loglog_inv_eps = epsilon.log2_inverse().log2();
    let m_real = 0.5 * (log_k - loglog_inv_eps);
    if m_real.is_nan() || m_real < 1.0 {
        return Err(Error::Infeasible(format!(
            "output length would be {m_real:.3} < 1 for k={k}, eps={eps}"
        )));
    }
    let m = m_real.floor() as u32;
    let m_sq = 1u64.checked_shl(2 * m).unwrap_or(u64::MAX);
    if k < m_sq {
        return Err(Error::Infeasible(format!(
            "k={k} is below M^2={m_sq}; the error guarantee needs k >= M^2"
        )));
    }
    Ok(CycleWalkParams { k, epsilon, m })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(s: &str) -> BitString {
        BitString::from_binary_str(s).unwrap()
    }

    #[test]
    fn cycle_walk_examples() {
        assert_eq!(cycle_walk_extract(&bs("1011"), 2).unwrap().to_string(), "11");
        assert_eq!(cycle_walk_extract(&bs("0000"), 2).unwrap().to_string(), "00");
        assert_eq!(cycle_walk_extract(&bs("110"), 1).unwrap().to_string(), "0");
        assert!(cycle_walk_extract(&bs("10"), 3).is_err());
        assert!(cycle_walk_extract(&bs("10"), 0).is_err());
    }

    #[test]
    fn m_equals_one_is_parity() {
        for n in 1..=16u32 {
            for x in 0..1u64 << n {
                let w = BitString::from_index(x, n as usize).unwrap();
                assert_eq!(cycle_walk_extract(&w, 1).unwrap(), parity(&w));
            }
        }
    }

    #[test]
    fn parity_examples() {
        assert_eq!(parity(&bs("0000")).to_string(), "0");
        assert_eq!(parity(&bs("10110")).to_string(), "1");
    }

    #[test]
    fn permutation_invariance_exhaustive_small() {
        // All permutations of all inputs for every n up to 8.
        for n in 2..=8usize {
            let mut perms = vec![];
            permutations(&mut (0..n).collect::<Vec<_>>(), 0, &mut perms);
            let m = 2.min(n as u32);
            for x in 0..1u64 << n {
                let w = BitString::from_index(x, n).unwrap();
                let base = cycle_walk_extract(&w, m).unwrap();
                for p in &perms {
                    let permuted: Vec<bool> = (0..n).map(|i| w.get(p[i] + 1)).collect();
                    let wp = BitString::new(permuted).unwrap();
                    assert_eq!(cycle_walk_extract(&wp, m).unwrap(), base);
                }
            }
        }
    }

    fn permutations(items: &mut Vec<usize>, start: usize, out: &mut Vec<Vec<usize>>) {
        if start == items.len() {
            out.push(items.clone());
            return;
        }
        for i in start..items.len() {
            items.swap(start, i);
            permutations(items, start + 1, out);
            items.swap(start, i);
        }
    }

    #[test]
    fn plusminus_examples() {
        assert_eq!(plusminus_cycle_extract(&bs("11"), 3).unwrap(), 2);
        assert_eq!(plusminus_cycle_extract(&bs("10"), 3).unwrap(), 0);
        assert_eq!(plusminus_cycle_extract(&bs("00"), 5).unwrap(), 3);
        assert!(plusminus_cycle_extract(&bs("10"), 4).is_err());
        assert!(plusminus_cycle_extract(&bs("10"), 1).is_err());
    }

    #[test]
    fn params_examples() {
        let p = params_for(16, Epsilon::PowTwo(4)).unwrap();
        assert_eq!(p.m, 1);
        let p = params_for(256, Epsilon::PowTwo(16)).unwrap();
        assert_eq!(p.m, 2);
        assert!(params_for(4, Epsilon::Value(0.5)).is_err());
        assert!(params_for(4, Epsilon::PowTwo(2)).is_err()); // m would be < 1
        assert!(params_for(0, Epsilon::PowTwo(4)).is_err());
    }

    #[test]
    fn params_match_quarter_log_rule() {
        // eps = 2^-sqrt(k) gives m = log2(k)/4 for fourth powers of two.
        for (k, e, want_m) in [(16u64, 4u32, 1u32), (256, 16, 2), (4096, 64, 3), (65536, 256, 4)] {
            let p = params_for(k, Epsilon::PowTwo(e)).unwrap();
            assert_eq!(p.m, want_m, "k={k}");
        }
    }
}

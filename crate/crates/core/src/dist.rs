//! Exact finite probability distributions over m-bit outcomes.

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// A distribution over `{0,1}^outcome_bits`, stored densely and indexed by
/// outcome value. Masses are exact dyadic rationals summing to exactly 1.
/// `outcome_bits = 0` is the degenerate single-outcome space.
#[derive(Clone, PartialEq, Eq, Serialize)]
pub struct Distribution {
    outcome_bits: u32,
    masses: Vec<Dyadic>,
}

pub const MAX_OUTCOME_BITS: u32 = 24;

impl Distribution {
    pub fn new(outcome_bits: u32, masses: Vec<Dyadic>) -> Result<Self> {
        if outcome_bits > MAX_OUTCOME_BITS {
            return Err(Error::InvalidParameter(format!(
                "outcome width {outcome_bits} exceeds the supported {MAX_OUTCOME_BITS} bits"
            )));
        }
        if masses.len() != 1usize << outcome_bits {
            return Err(Error::LengthMismatch {
                expected: 1usize << outcome_bits,
                got: masses.len(),
            });
        }
        let total = masses.iter().fold(Dyadic::zero(), |acc, m| acc.add(m));
        if total != Dyadic::one() {
            return Err(Error::InvalidParameter(format!(
                "masses sum to {total}, expected exactly 1"
            )));
        }
        Ok(Distribution { outcome_bits, masses })
    }

    pub fn uniform(outcome_bits: u32) -> Self {
        let masses = vec![Dyadic::pow2_neg(outcome_bits); 1usize << outcome_bits];
        Distribution { outcome_bits, masses }
    }

    pub fn point_mass(outcome_bits: u32, outcome: u64) -> Result<Self> {
        let size = 1u64 << outcome_bits;
        if outcome >= size {
            return Err(Error::InvalidParameter(format!(
                "outcome {outcome} out of range for {outcome_bits} bits"
            )));
        }
        let mut masses = vec![Dyadic::zero(); size as usize];
        masses[outcome as usize] = Dyadic::one();
        Ok(Distribution { outcome_bits, masses })
    }

    /// Distribution from occurrence counts with total 2^log2_total.
    pub fn from_counts(outcome_bits: u32, counts: &[u64], log2_total: u32) -> Result<Self> {
        let big: Vec<BigUint> = counts.iter().map(|&c| BigUint::from(c)).collect();
        Self::from_big_counts(outcome_bits, big, log2_total)
    }

    pub fn from_big_counts(
        outcome_bits: u32,
        counts: Vec<BigUint>,
        log2_total: u32,
    ) -> Result<Self> {
        let total: BigUint = counts.iter().sum();
        if total != BigUint::one() << u64::from(log2_total) {
            return Err(Error::InvalidParameter(format!(
                "counts sum to {total}, expected 2^{log2_total}"
            )));
        }
        let masses = counts.into_iter().map(|c| Dyadic::new(c, log2_total)).collect();
        Self::new(outcome_bits, masses)
    }

    pub fn outcome_bits(&self) -> u32 {
        self.outcome_bits
    }

    pub fn mass(&self, outcome: u64) -> &Dyadic {
        &self.masses[outcome as usize]
    }

    pub fn masses(&self) -> &[Dyadic] {
        &self.masses
    }

    pub fn support_size(&self) -> usize {
        self.masses.iter().filter(|m| !m.is_zero()).count()
    }

    /// Half the L1 distance between the two distributions, exactly.
    pub fn statistical_distance(&self, other: &Distribution) -> Result<Dyadic> {
        if self.outcome_bits != other.outcome_bits {
            return Err(Error::DimensionMismatch {
                left: self.outcome_bits,
                right: other.outcome_bits,
            });
        }
        let sum = self
            .masses
            .iter()
            .zip(&other.masses)
            .fold(Dyadic::zero(), |acc, (p, q)| acc.add(&p.abs_diff(q)));
        Ok(sum.halve())
    }

    pub fn distance_from_uniform(&self) -> Dyadic {
        self.statistical_distance(&Distribution::uniform(self.outcome_bits))
            .expect("uniform distribution has matching width")
    }

    /// The advantage of the maximizing statistical test, i.e. the total mass
    /// by which `self` exceeds `other`. Equals `statistical_distance`; both
    /// are exposed so the equivalence can be checked rather than assumed.
    pub fn max_test_advantage(&self, other: &Distribution) -> Result<Dyadic> {
        if self.outcome_bits != other.outcome_bits {
            return Err(Error::DimensionMismatch {
                left: self.outcome_bits,
                right: other.outcome_bits,
            });
        }
        let adv = self
            .masses
            .iter()
            .zip(&other.masses)
            .filter(|(p, q)| p > q)
            .fold(Dyadic::zero(), |acc, (p, q)| acc.add(&p.abs_diff(q)));
        Ok(adv)
    }
}

impl std::fmt::Debug for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Distribution({} bits; ", self.outcome_bits)?;
        for (i, m) in self.masses.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}: {m}")?;
        }
        write!(f, ")")
    }
}

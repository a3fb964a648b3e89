//! Exact arithmetic: non-negative dyadic rationals and small exact ratios.
//!
//! Every probability on a verification path in this crate has a power-of-two
//! denominator (a source with k free bits assigns masses that are multiples
//! of 2^-k), so [`Dyadic`] stores `num / 2^log2_den` with an arbitrary
//! precision numerator and is closed under everything the verifiers need:
//! addition, halving, absolute difference, and exact comparison. Floating
//! point is used only to evaluate closed-form bounds, never to decide an
//! exact quantity.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Non-negative dyadic rational `num / 2^log2_den`.
///
/// Canonical form: the numerator is odd or zero, and zero is stored as
/// `0 / 2^0`, so equality is structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigUint,
    log2_den: u32,
}

impl Dyadic {
    pub fn new(num: BigUint, log2_den: u32) -> Self {
        let mut d = Dyadic { num, log2_den };
        d.canonicalize();
        d
    }

    pub fn from_u64(num: u64, log2_den: u32) -> Self {
        Self::new(BigUint::from(num), log2_den)
    }

    pub fn zero() -> Self {
        Dyadic { num: BigUint::zero(), log2_den: 0 }
    }

    pub fn one() -> Self {
        Dyadic { num: BigUint::one(), log2_den: 0 }
    }

    /// Exactly 2^-e.
    pub fn pow2_neg(e: u32) -> Self {
        Dyadic { num: BigUint::one(), log2_den: e }
    }

    fn canonicalize(&mut self) {
        if self.num.is_zero() {
            self.log2_den = 0;
            return;
        }
        if let Some(tz) = self.num.trailing_zeros() {
            let shift = tz.min(u64::from(self.log2_den));
            if shift > 0 {
                self.num >>= shift;
                self.log2_den -= shift as u32;
            }
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn log2_den(&self) -> u32 {
        self.log2_den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let den = self.log2_den.max(other.log2_den);
        let a = &self.num << u64::from(den - self.log2_den);
        let b = &other.num << u64::from(den - other.log2_den);
        Dyadic::new(a + b, den)
    }

    pub fn abs_diff(&self, other: &Dyadic) -> Dyadic {
        let den = self.log2_den.max(other.log2_den);
        let a = &self.num << u64::from(den - self.log2_den);
        let b = &other.num << u64::from(den - other.log2_den);
        let diff = if a >= b { a - b } else { b - a };
        Dyadic::new(diff, den)
    }

    pub fn halve(&self) -> Dyadic {
        self.div_pow2(1)
    }

    /// Exact division by 2^e.
    pub fn div_pow2(&self, e: u32) -> Dyadic {
        // Route through `new`: an even integer numerator must re-reduce.
        Dyadic::new(self.num.clone(), self.log2_den + e)
    }

    /// Lossy conversion for display and CSV output. Values smaller than the
    /// f64 range come out as 0.0; use [`Dyadic::log2_lossy`] when the
    /// magnitude matters.
    pub fn to_f64_lossy(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.num.bits();
        let shift = bits.saturating_sub(53);
        let top = (&self.num >> shift).to_u64().expect("53-bit mantissa fits u64");
        let exp = shift as i64 - i64::from(self.log2_den);
        if exp < -1200 {
            return 0.0;
        }
        if exp > 1200 {
            return f64::INFINITY;
        }
        // |exp| <= 1200 so splitting into two powi factors stays in range.
        let half = (exp / 2) as i32;
        (top as f64) * 2f64.powi(half) * 2f64.powi((exp - i64::from(half)) as i32)
    }

    /// log2 of the value, None when zero. Accurate to well below one ulp of
    /// the 53-bit approximation of the numerator.
    pub fn log2_lossy(&self) -> Option<f64> {
        if self.is_zero() {
            return None;
        }
        let bits = self.num.bits();
        let shift = bits.saturating_sub(53);
        let top = (&self.num >> shift).to_u64().expect("top bits fit u64");
        Some((top as f64).log2() + shift as f64 - f64::from(self.log2_den))
    }

    /// A safe upper bound on log2 of the value (within one bit), used when an
    /// exact quantity must be compared against a bound that underflowed f64.
    pub fn log2_upper(&self) -> Option<f64> {
        if self.is_zero() {
            return None;
        }
        Some(self.num.bits() as f64 - f64::from(self.log2_den))
    }

    /// Exact value of a finite non-negative f64 (every finite f64 is a dyadic
    /// rational). Returns None for negative, NaN, or infinite input.
    pub fn from_f64_exact(x: f64) -> Option<Dyadic> {
        if !x.is_finite() || x.is_sign_negative() && x != 0.0 {
            return None;
        }
        if x == 0.0 {
            return Some(Dyadic::zero());
        }
        let bits = x.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if raw_exp == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        if exp >= 0 {
            Some(Dyadic::new(BigUint::from(mant) << exp as u64, 0))
        } else {
            Some(Dyadic::new(BigUint::from(mant), (-exp) as u32))
        }
    }

    /// Exact `self <= bound` where `bound` was computed in floating point.
    /// When the bound underflowed to 0.0, falls back to comparing against its
    /// log2 companion, rounding the exact side up so a false `true` is
    /// impossible.
    pub fn le_f64_bound(&self, bound: f64, bound_log2: f64) -> bool {
        if bound.is_nan() {
            return false;
        }
        if self.is_zero() {
            return bound >= 0.0 || bound_log2 > f64::NEG_INFINITY;
        }
        if bound > 0.0 {
            match Dyadic::from_f64_exact(bound) {
                Some(b) => return *self <= b,
                None => return true, // +inf bound
            }
        }
        // Bound evaluated to 0.0: decide in log space.
        match self.log2_upper() {
            Some(lu) => lu <= bound_log2,
            None => true,
        }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let den = self.log2_den.max(other.log2_den);
        let a = &self.num << u64::from(den - self.log2_den);
        let b = &other.num << u64::from(den - other.log2_den);
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
        if self.log2_den == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.log2_den)
        }
    }
}

// Debug delegates to Display; the canonical fraction is the useful view.
impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Dyadic", 3)?;
        // Giant numerators (walk distributions at k ~ 2^20) are not worth
        // printing in decimal; the log2 field carries the magnitude instead.
        if self.num.bits() <= 256 {
            s.serialize_field("exact", &self.to_string())?;
        } else {
            s.serialize_field("exact", &Option::<String>::None)?;
        }
        s.serialize_field("value", &self.to_f64_lossy())?;
        s.serialize_field("log2", &self.log2_lossy())?;
        s.end()
    }
}

/// Exact ratio p/q with small components, used for sweep thresholds and
/// tail-probability parameters where the denominator need not be a power of
/// two. Always stored reduced.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidParameter("ratio denominator is zero".into()));
        }
        let g = gcd(num, den);
        Ok(Ratio { num: num / g.max(1), den: den / g.max(1) })
    }

    pub fn zero() -> Self {
        Ratio { num: 0, den: 1 }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Accepts "p/q", "2^-e", decimal strings like "0.25", and plain
    /// integers.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("2^-") {
            let e: u32 = rest
                .parse()
                .map_err(|_| Error::Format(format!("bad power-of-two exponent in {s:?}")))?;
            if e >= 64 {
                return Err(Error::Format(format!("2^-{e} is below the supported range")));
            }
            return Ratio::new(1, 1u64 << e);
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: u64 = p.trim().parse().map_err(|_| Error::Format(format!("bad ratio {s:?}")))?;
            let q: u64 = q.trim().parse().map_err(|_| Error::Format(format!("bad ratio {s:?}")))?;
            return Ratio::new(p, q);
        }
        if let Some((int, frac)) = s.split_once('.') {
            let digits = frac.len() as u32;
            if digits > 18 {
                return Err(Error::Format(format!("too many decimal digits in {s:?}")));
            }
            let int: u64 = if int.is_empty() {
                0
            } else {
                int.parse().map_err(|_| Error::Format(format!("bad decimal {s:?}")))?
            };
            let frac: u64 =
                frac.parse().map_err(|_| Error::Format(format!("bad decimal {s:?}")))?;
            let scale = 10u64.pow(digits);
            return Ratio::new(int * scale + frac, scale);
        }
        let n: u64 = s.parse().map_err(|_| Error::Format(format!("bad number {s:?}")))?;
        Ratio::new(n, 1)
    }

    /// Exact comparison against a dyadic value.
    pub fn cmp_dyadic(&self, d: &Dyadic) -> Ordering {
        // self = num/den, d = d.num / 2^d.log2_den
        let lhs = BigUint::from(self.num) << u64::from(d.log2_den());
        let rhs = d.numerator() * BigUint::from(self.den);
        lhs.cmp(&rhs)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

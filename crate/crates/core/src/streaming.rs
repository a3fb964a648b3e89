//! One-pass streaming programs and the small-support attack against them.
//!
//! A program is the 5-tuple (V, v0, Sigma^0, Sigma^1, phi): per input
//! position i it holds two transition tables sigma_i^0, sigma_i^1 : V -> V;
//! on input (b_1, ..., b_n) it applies v <- sigma_i^{b_i}(v) left to right
//! and outputs phi(v_n). The program is *forgetless* when at every position
//! at least one of the two transitions is a permutation, so fixing that bit
//! never destroys state information.
//!
//! Every forgetless program has an equivalent normal form in which every
//! zero-transition is the identity (up to negating some input bits, which is
//! recorded as a mask). In normal form, reading a 0 does nothing and reading
//! a 1 at position i applies a single function f_i, which is what the greedy
//! attack exploits: it pigeonholes positions into a chain of states
//! v0 -> v1 -> ... -> vk on which all surviving positions agree, then fixes
//! every other position so the output can depend only on how many of the
//! surviving bits are set.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::source::ObfsSource;

#[derive(Clone, PartialEq, Eq)]
pub struct StreamingProgram {
    states: usize,
    initial: usize,
    n: usize,
    /// sigma0[i][v] is the zero-transition of position i+1 applied to state v.
    sigma0: Vec<Vec<usize>>,
    sigma1: Vec<Vec<usize>>,
    /// output[v] is the m-bit output value of state v.
    output: Vec<u64>,
    output_bits: u32,
}

impl StreamingProgram {
    pub fn new(
        states: usize,
        initial: usize,
        n: usize,
        sigma0: Vec<Vec<usize>>,
        sigma1: Vec<Vec<usize>>,
        output: Vec<u64>,
        output_bits: u32,
    ) -> Result<Self> {
        if states == 0 || states > 1 << 20 {
            return Err(Error::InvalidParameter(format!("state count {states} out of range")));
        }
        if initial >= states {
            return Err(Error::InvalidParameter(format!(
                "initial state {initial} out of range 0..{states}"
            )));
        }
        if n == 0 || n > 1 << 16 {
            return Err(Error::InvalidParameter(format!("input length {n} out of range")));
        }
        if output_bits == 0 || output_bits > 32 {
            return Err(Error::InvalidParameter(format!("output width {output_bits} out of range")));
        }
        for (name, tables) in [("sigma0", &sigma0), ("sigma1", &sigma1)] {
            if tables.len() != n {
                return Err(Error::LengthMismatch { expected: n, got: tables.len() });
            }
            for (i, t) in tables.iter().enumerate() {
                if t.len() != states {
                    return Err(Error::LengthMismatch { expected: states, got: t.len() });
                }
                if let Some(&bad) = t.iter().find(|&&v| v >= states) {
                    return Err(Error::InvalidParameter(format!(
                        "{name}[{i}] maps to state {bad}, out of range 0..{states}"
                    )));
                }
            }
        }
        if output.len() != states {
            return Err(Error::LengthMismatch { expected: states, got: output.len() });
        }
        if let Some(&bad) = output.iter().find(|&&v| v >> output_bits != 0) {
            return Err(Error::InvalidParameter(format!(
                "output value {bad} does not fit in {output_bits} bits"
            )));
        }
        Ok(StreamingProgram { states, initial, n, sigma0, sigma1, output, output_bits })
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn output_bits(&self) -> u32 {
        self.output_bits
    }

    /// log2 of the state count.
    pub fn space(&self) -> f64 {
        (self.states as f64).log2()
    }

    /// Final state after consuming the integer-encoded input (position p is
    /// bit n - p, matching the rest of the crate).
    pub fn run_state(&self, x: u64) -> usize {
        let mut v = self.initial;
        for i in 0..self.n {
            let bit = x >> (self.n - 1 - i) & 1;
            v = if bit == 1 { self.sigma1[i][v] } else { self.sigma0[i][v] };
        }
        v
    }

    /// Output value on the integer-encoded input.
    pub fn run_index(&self, x: u64) -> u64 {
        self.output[self.run_state(x)]
    }

    pub fn run(&self, w: &crate::bits::BitString) -> Result<crate::bits::BitString> {
        if w.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: w.len() });
        }
        let mut v = self.initial;
        for (i, b) in w.iter().enumerate() {
            v = if b { self.sigma1[i][v] } else { self.sigma0[i][v] };
        }
        crate::bits::BitString::from_index(self.output[v], self.output_bits as usize)
    }

    /// True iff at every position at least one transition is a permutation.
    /// The witness lists the violating positions (1-indexed).
    pub fn forgetless_report(&self) -> ForgetlessReport {
        let violations: Vec<usize> = (0..self.n)
            .filter(|&i| !is_permutation(&self.sigma0[i]) && !is_permutation(&self.sigma1[i]))
            .map(|i| i + 1)
            .collect();
        ForgetlessReport { forgetless: violations.is_empty(), violations }
    }

    pub fn is_forgetless(&self) -> bool {
        self.forgetless_report().forgetless
    }

    /// Exact output distribution on a source, by evolving the state
    /// distribution position by position. Free positions mix the two
    /// transitions with weight 1/2 each; fixed positions apply their
    /// transition deterministically. Cost O(n |V|), independent of 2^k.
    pub fn output_distribution_on(&self, source: &ObfsSource) -> Result<Distribution> {
        if source.n() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: source.n() });
        }
        let mut fixed_bit = vec![None::<bool>; self.n + 1];
        for (&p, &v) in source.fixed_positions().iter().zip(source.fixed_values()) {
            fixed_bit[p] = Some(v);
        }
        // State masses as integer counts over denominator 2^{free seen so far}.
        let mut counts = vec![BigUint::ZERO; self.states];
        counts[self.initial] = BigUint::one();
        for i in 0..self.n {
            let mut next = vec![BigUint::ZERO; self.states];
            match fixed_bit[i + 1] {
                Some(bit) => {
                    let table = if bit { &self.sigma1[i] } else { &self.sigma0[i] };
                    for v in 0..self.states {
                        if !counts[v].is_zero() {
                            next[table[v]] += &counts[v];
                        }
                    }
                }
                None => {
                    for v in 0..self.states {
                        if !counts[v].is_zero() {
                            next[self.sigma0[i][v]] += &counts[v];
                            next[self.sigma1[i][v]] += &counts[v];
                        }
                    }
                }
            }
            counts = next;
        }
        let mut out = vec![BigUint::ZERO; 1usize << self.output_bits];
        for v in 0..self.states {
            out[self.output[v] as usize] += &counts[v];
        }
        Distribution::from_big_counts(self.output_bits, out, source.k() as u32)
    }

    /// Serialization helpers for the JSON program format.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&ProgramJson::from(self)).expect("program serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: ProgramJson =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("program JSON: {e}")))?;
        raw.try_into()
    }
}

impl std::fmt::Debug for StreamingProgram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "StreamingProgram(states={}, n={}, m={}, v0={})",
            self.states, self.n, self.output_bits, self.initial
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ForgetlessReport {
    pub forgetless: bool,
    pub violations: Vec<usize>,
}

fn is_permutation(table: &[usize]) -> bool {
    let mut seen = vec![false; table.len()];
    for &v in table {
        if seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

fn invert_permutation(table: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; table.len()];
    for (i, &v) in table.iter().enumerate() {
        inv[v] = i;
    }
    inv
}

/// compose(f, g)[v] = f(g(v))
fn compose(f: &[usize], g: &[usize]) -> Vec<usize> {
    g.iter().map(|&v| f[v]).collect()
}

/// Equivalent program whose zero-transitions are all the identity, plus the
/// mask of input positions that had to be negated to get there:
/// `normalized.run(w) == original.run(w XOR mask)` for every w.
///
/// Construction: swap the per-position transition pair wherever the
/// zero-transition is not a permutation (recording the negation), then fold
/// the zero-transitions away through prefix products P_i = s_i^0 ... s_1^0:
/// the one-transition of position i becomes P_i^{-1} . s_i^1 . P_{i-1} and
/// the output map becomes phi . P_n.
pub fn normalize(p: &StreamingProgram) -> Result<(StreamingProgram, Vec<bool>)> {
    let report = p.forgetless_report();
    if !report.forgetless {
        return Err(Error::NotForgetless { positions: report.violations });
    }
    let mut negated = vec![false; p.n];
    let mut zero: Vec<&Vec<usize>> = Vec::with_capacity(p.n);
    let mut one: Vec<&Vec<usize>> = Vec::with_capacity(p.n);
    for (i, neg) in negated.iter_mut().enumerate() {
        if is_permutation(&p.sigma0[i]) {
            zero.push(&p.sigma0[i]);
            one.push(&p.sigma1[i]);
        } else {
            *neg = true;
            zero.push(&p.sigma1[i]);
            one.push(&p.sigma0[i]);
        }
    }
    let identity: Vec<usize> = (0..p.states).collect();
    let mut prefix = identity.clone(); // P_0
    let mut ones = Vec::with_capacity(p.n);
    for i in 0..p.n {
        let prev_prefix = prefix.clone(); // P_{i-1}
        prefix = compose(zero[i], &prefix); // P_i
        let f_i = compose(&compose(&invert_permutation(&prefix), one[i]), &prev_prefix);
        ones.push(f_i);
    }
    let output: Vec<u64> = prefix.iter().map(|&v| p.output[v]).collect();
    let normalized = StreamingProgram::new(
        p.states,
        p.initial,
        p.n,
        vec![identity; p.n],
        ones,
        output,
        p.output_bits,
    )?;
    Ok((normalized, negated))
}

/// Result of the small-support attack: a source on which the program's
/// output is confined to the orbit of the state chain.
#[derive(Clone, Debug, Serialize)]
pub struct AttackResult {
    pub source: ObfsSource,
    /// v0, v1, ..., vk in the normalized program.
    pub state_chain: Vec<usize>,
    /// Positions (1-indexed) whose one-transition walks the chain; all of
    /// them are left free in the source.
    pub free_positions: Vec<usize>,
    /// k + 1: the Hamming weight of k free bits takes k + 1 values.
    pub support_bound: usize,
}

/// The space precondition for the attack: space <= log2(n/k) / k guarantees
/// the surviving set at stage k still has at least k positions.
pub fn attack_space_limit(n: usize, k: usize) -> f64 {
    (n as f64 / k as f64).log2() / k as f64
}

/// Greedy pigeonhole attack. Requires a forgetless program whose space is at
/// most `attack_space_limit(n, k)`. Stage j keeps the largest subset of the
/// stage-(j-1) survivors whose one-transitions agree on v_{j-1} (ties broken
/// toward the smallest target state), defining v_j. The returned source
/// fixes every non-surviving position so that, in original-program
/// coordinates, it acts as the identity (value 0 before negation).
pub fn attack_source(p: &StreamingProgram, k: usize) -> Result<AttackResult> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if k >= p.n {
        return Err(Error::InvalidParameter(format!("k={k} must be below n={}", p.n)));
    }
    let limit = attack_space_limit(p.n, k);
    let s = p.space();
    if s > limit {
        return Err(Error::Infeasible(format!(
            "space {s:.4} exceeds the attack precondition log2(n/k)/k = {limit:.4}"
        )));
    }
    let (normalized, negated) = normalize(p)?;
    let mut survivors: Vec<usize> = (0..p.n).collect();
    let mut chain = vec![normalized.initial];
    for _ in 0..k {
        let v = *chain.last().expect("chain is non-empty");
        // Largest preimage wins; ties go to the smallest target state.
        let mut buckets = vec![0usize; normalized.states];
        for &i in &survivors {
            buckets[normalized.sigma1[i][v]] += 1;
        }
        let target = (0..normalized.states)
            .max_by_key(|&t| (buckets[t], std::cmp::Reverse(t)))
            .expect("at least one state");
        survivors.retain(|&i| normalized.sigma1[i][v] == target);
        chain.push(target);
    }
    let free_positions: Vec<usize> = survivors.iter().map(|&i| i + 1).collect();
    let surviving: std::collections::HashSet<usize> = survivors.iter().copied().collect();
    let mut fixed_positions = Vec::new();
    let mut fixed_values = Vec::new();
    for (i, &neg) in negated.iter().enumerate() {
        if !surviving.contains(&i) {
            fixed_positions.push(i + 1);
            // 0 in normalized coordinates; undo the negation for the original.
            fixed_values.push(neg);
        }
    }
    let source = ObfsSource::new(p.n, fixed_positions, fixed_values)?;
    Ok(AttackResult { source, state_chain: chain, support_bound: k + 1, free_positions })
}

/// Program computing the endpoint of the add-1-or-0 walk on Z_M: the
/// zero-transitions are the identity, the one-transitions rotate by one, and
/// the output is the m-bit state encoding. M must be a power of two.
pub fn cycle_add_program(n: usize, big_m: u64) -> Result<StreamingProgram> {
    if big_m < 2 || !big_m.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "modulus must be a power of two >= 2, got {big_m}"
        )));
    }
    let states = big_m as usize;
    let identity: Vec<usize> = (0..states).collect();
    let rotate: Vec<usize> = (0..states).map(|v| (v + 1) % states).collect();
    let output: Vec<u64> = (0..big_m).collect();
    StreamingProgram::new(
        states,
        0,
        n,
        vec![identity; n],
        vec![rotate; n],
        output,
        big_m.trailing_zeros(),
    )
}

/// Walk on the vertex set F_p where edge 0 from x goes to x + 1 and edge 1
/// goes to the multiplicative inverse of x (with 0 mapped to 0). Both edge
/// maps are permutations, so the program is forgetless. The output is the
/// state padded to ceil(log2 p) bits; the program is an attack target, not a
/// claimed extractor.
pub fn fp_chord_program(n: usize, prime: u64) -> Result<StreamingProgram> {
    if !is_prime(prime) {
        return Err(Error::InvalidParameter(format!("{prime} is not prime")));
    }
    let states = prime as usize;
    let succ: Vec<usize> = (0..states).map(|v| (v + 1) % states).collect();
    let inv: Vec<usize> = (0..states)
        .map(|v| if v == 0 { 0 } else { mod_inverse(v as u64, prime) as usize })
        .collect();
    let bits = if prime == 2 { 1 } else { 64 - (prime - 1).leading_zeros() };
    let output: Vec<u64> = (0..prime).collect();
    StreamingProgram::new(states, 0, n, vec![succ; n], vec![inv; n], output, bits)
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    // Fermat: a^{p-2} mod p for prime p.
    let mut base = a % p;
    let mut exp = p - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// log2(k / (1 - eps)): the longest output a function that depends only on
/// the free-bit count can have while staying eps-close to uniform, stated
/// for a support of size `support`. The attack reports both the support-k
/// and support-(k+1) readings.
pub fn symmetric_output_bound(support: u64, eps: f64) -> Result<f64> {
    if support == 0 {
        return Err(Error::InvalidParameter("support must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps={eps} out of [0, 1)")));
    }
    Ok((support as f64 / (1.0 - eps)).log2())
}

/// JSON wire format for programs.
#[derive(Serialize, Deserialize)]
struct ProgramJson {
    states: usize,
    initial: usize,
    n: usize,
    sigma0: Vec<Vec<usize>>,
    sigma1: Vec<Vec<usize>>,
    output: Vec<String>,
}

impl From<&StreamingProgram> for ProgramJson {
    fn from(p: &StreamingProgram) -> Self {
        let width = p.output_bits as usize;
        ProgramJson {
            states: p.states,
            initial: p.initial,
            n: p.n,
            sigma0: p.sigma0.clone(),
            sigma1: p.sigma1.clone(),
            output: p.output.iter().map(|&v| format!("{v:0width$b}")).collect(),
        }
    }
}

impl TryFrom<ProgramJson> for StreamingProgram {
    type Error = Error;
    fn try_from(raw: ProgramJson) -> Result<Self> {
        let width = raw
            .output
            .first()
            .map(|s| s.len())
            .ok_or_else(|| Error::Format("program has no output map".into()))?;
        if width == 0 || width > 32 {
            return Err(Error::Format(format!("output width {width} out of range 1..=32")));
        }
        let mut output = Vec::with_capacity(raw.output.len());
        for s in &raw.output {
            if s.len() != width {
                return Err(Error::Format("output strings must all have the same length".into()));
            }
            let v = u64::from_str_radix(s, 2)
                .map_err(|_| Error::Format(format!("bad output bit string {s:?}")))?;
            output.push(v);
        }
        StreamingProgram::new(
            raw.states,
            raw.initial,
            raw.n,
            raw.sigma0,
            raw.sigma1,
            output,
            width as u32,
        )
    }
}

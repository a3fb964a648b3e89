//! Exact worst-case verifiers.
//!
//! Three properties of a truth table f with entropy parameter k, all
//! computed by exhaustive enumeration in exact arithmetic with explicit work
//! budgets (refusal, never sampling):
//!
//! * resilient-function distance: the worst distance from uniform of f over
//!   every source that fixes n-k positions to every value;
//! * static exposure distance: for every fixed set L of n-k positions, the
//!   average over the fixed values of the distance from uniform, maximized
//!   over L;
//! * adaptive exposure distance: the worst advantage of an adversary that
//!   reads n-k positions one at a time, choosing each position from the
//!   values already seen. Only read-echo adversaries are searched: an
//!   adversary that post-processes its transcript can always be split into
//!   the echo part and a post-processing part, and post-processing cannot
//!   increase statistical distance.
//!
//! The adaptive verifier is a dynamic program over partial assignments: the
//! value of a position set with concrete read values depends only on the
//! induced subcube, not on the order the positions were read, so states are
//! (mask, values) pairs. An independent oracle enumerates explicit decision
//! trees and evaluates the defining joint distributions directly; the two
//! must agree exactly.

use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::source::{binomial_u128, position_masks, ObfsSource};
use crate::table::TruthTableFunction;

pub const DEFAULT_WORK_BUDGET: u128 = 1 << 32;

/// Largest n the adaptive dynamic program accepts; its memo table is indexed
/// by (mask, values) pairs and holds 4^n entries.
pub const MAX_ADAPTIVE_N: u32 = 11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Property {
    #[serde(rename = "RF")]
    Rf,
    #[serde(rename = "STATIC_ERF")]
    StaticErf,
    #[serde(rename = "ADAPTIVE_ERF")]
    AdaptiveErf,
}

#[derive(Clone, Debug, Serialize)]
pub enum Witness {
    /// The worst source for the resilient-function property.
    Source(ObfsSource),
    /// The worst fixed set plus the distance for every fixing of it.
    FixedSet { positions: Vec<usize>, per_fixing_distance: Vec<Dyadic> },
    /// The maximizing read-echo decision tree.
    DecisionTree(DecisionTree),
}

#[derive(Clone, Debug, Serialize)]
pub enum DecisionTree {
    Leaf { source: ObfsSource, distance: Dyadic },
    Read { position: usize, on_zero: Box<DecisionTree>, on_one: Box<DecisionTree> },
}

impl DecisionTree {
    /// Re-evaluates the tree bottom-up against the function it was built
    /// for; used to confirm a witness reproduces the reported distance.
    pub fn replay(&self, f: &TruthTableFunction) -> Result<Dyadic> {
        match self {
            DecisionTree::Leaf { source, .. } => f.distance_from_uniform_on(source),
            DecisionTree::Read { on_zero, on_one, .. } => {
                Ok(on_zero.replay(f)?.add(&on_one.replay(f)?).halve())
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub property: Property,
    pub k: usize,
    pub worst_distance: Dyadic,
    pub witness: Witness,
}

fn check_k(f: &TruthTableFunction, k: usize) -> Result<()> {
    if k == 0 || k > f.n() as usize {
        return Err(Error::InvalidParameter(format!("k={k} out of range 1..={}", f.n())));
    }
    Ok(())
}

fn enumeration_work(n: usize, k: usize) -> u128 {
    binomial_u128(n, n - k) << n
}

/// Fixed positions (ascending) encoded by a position mask with bit p-1
/// standing for position p.
fn mask_positions(mask: u64, n: usize) -> Vec<usize> {
    (1..=n).filter(|&p| mask >> (p - 1) & 1 == 1).collect()
}

/// Raw integer distances for every fixing `a` of the given positions:
/// distance = raw / 2^{k+m+1}. The scan visits fixings in numeric order.
fn scan_fixings(
    f: &TruthTableFunction,
    positions: &[usize],
    mut visit: impl FnMut(u64, u64), // (a, raw)
) {
    let n = f.n() as usize;
    let m = f.m();
    let k = n - positions.len();
    let t = positions.len();
    let idx_bits: Vec<u32> = positions.iter().map(|&p| (n - p) as u32).collect();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let fixed_mask: u64 = idx_bits.iter().map(|&b| 1u64 << b).sum();
    let free_mask = full & !fixed_mask;
    let big_m = 1u64 << m;
    let total = 1u64 << k;
    let mut counts = vec![0u64; big_m as usize];
    for a in 0..1u64 << t {
        let mut base = 0u64;
        for (j, &b) in idx_bits.iter().enumerate() {
            if a >> (t - 1 - j) & 1 == 1 {
                base |= 1 << b;
            }
        }
        counts.iter_mut().for_each(|c| *c = 0);
        let mut s = free_mask;
        loop {
            counts[f.eval_index(base | s) as usize] += 1;
            if s == 0 {
                break;
            }
            s = (s - 1) & free_mask;
        }
        let raw: u64 = counts.iter().map(|&c| (c * big_m).abs_diff(total)).sum();
        visit(a, raw);
    }
}

/// Worst distance from uniform over every (L, a) source, exactly. The
/// witness is the first maximizing source in enumeration order (L in
/// colexicographic order, fixings in numeric order).
pub fn rf_distance(f: &TruthTableFunction, k: usize, work_budget: u128) -> Result<VerificationReport> {
    check_k(f, k)?;
    let n = f.n() as usize;
    let needed = enumeration_work(n, k);
    if needed > work_budget {
        return Err(Error::BudgetExceeded { needed, budget: work_budget });
    }
    let masks = position_masks(n, n - k);
    let per_l: Vec<(u64, u64)> = masks
        .par_iter()
        .map(|&mask| {
            let positions = mask_positions(mask, n);
            let mut best_raw = 0u64;
            let mut best_a = 0u64;
            scan_fixings(f, &positions, |a, raw| {
                if raw > best_raw {
                    best_raw = raw;
                    best_a = a;
                }
            });
            (best_raw, best_a)
        })
        .collect();
    let (li, &(raw, a)) = per_l
        .iter()
        .enumerate()
        .max_by_key(|&(i, &(raw, _))| (raw, std::cmp::Reverse(i)))
        .expect("at least one fixed set");
    let positions = mask_positions(masks[li], n);
    let t = positions.len();
    let values: Vec<bool> = (0..t).map(|j| a >> (t - 1 - j) & 1 == 1).collect();
    let source = ObfsSource::new(n, positions, values)?;
    Ok(VerificationReport {
        property: Property::Rf,
        k,
        worst_distance: Dyadic::from_u64(raw, k as u32 + f.m() + 1),
        witness: Witness::Source(source),
    })
}

/// Worst, over fixed sets L, of the average distance over all fixings of L.
pub fn static_erf_distance(
    f: &TruthTableFunction,
    k: usize,
    work_budget: u128,
) -> Result<VerificationReport> {
    check_k(f, k)?;
    let n = f.n() as usize;
    let needed = enumeration_work(n, k);
    if needed > work_budget {
        return Err(Error::BudgetExceeded { needed, budget: work_budget });
    }
    let masks = position_masks(n, n - k);
    let sums: Vec<u64> = masks
        .par_iter()
        .map(|&mask| {
            let positions = mask_positions(mask, n);
            let mut sum = 0u64;
            scan_fixings(f, &positions, |_, raw| sum += raw);
            sum
        })
        .collect();
    let (li, &sum) = sums
        .iter()
        .enumerate()
        .max_by_key(|&(i, &s)| (s, std::cmp::Reverse(i)))
        .expect("at least one fixed set");
    let positions = mask_positions(masks[li], n);
    let mut per_fixing = Vec::with_capacity(1 << positions.len());
    scan_fixings(f, &positions, |_, raw| {
        per_fixing.push(Dyadic::from_u64(raw, k as u32 + f.m() + 1));
    });
    // average over 2^{n-k} fixings: divide the raw sum by 2^{n-k} as well
    Ok(VerificationReport {
        property: Property::StaticErf,
        k,
        worst_distance: Dyadic::from_u64(sum, n as u32 + f.m() + 1),
        witness: Witness::FixedSet { positions, per_fixing_distance: per_fixing },
    })
}

struct AdaptiveDp<'a> {
    f: &'a TruthTableFunction,
    n: usize,
    d: usize,
    /// raw value per (mask, values) state, -1 for unvisited.
    memo: Vec<i64>,
}

impl<'a> AdaptiveDp<'a> {
    fn new(f: &'a TruthTableFunction, d: usize) -> Self {
        let n = f.n() as usize;
        AdaptiveDp { f, n, d, memo: vec![-1; 1usize << (2 * n)] }
    }

    fn base_raw(&self, mask: u64, values: u64) -> u64 {
        let m = self.f.m();
        let big_m = 1u64 << m;
        let k = self.n - mask.count_ones() as usize;
        let total = 1u64 << k;
        let full = (1u64 << self.n) - 1;
        let free_mask = full & !mask;
        let mut counts = vec![0u64; big_m as usize];
        let mut s = free_mask;
        loop {
            counts[self.f.eval_index(values | s) as usize] += 1;
            if s == 0 {
                break;
            }
            s = (s - 1) & free_mask;
        }
        counts.iter().map(|&c| (c * big_m).abs_diff(total)).sum()
    }

    /// Raw worst distance at state (mask, values); at depth j = popcount(mask)
    /// the implied denominator is 2^{(d - j) + k + m + 1}.
    fn solve(&mut self, mask: u64, values: u64) -> i64 {
        let id = (mask as usize) << self.n | values as usize;
        if self.memo[id] >= 0 {
            return self.memo[id];
        }
        let depth = mask.count_ones() as usize;
        let raw = if depth == self.d {
            self.base_raw(mask, values) as i64
        } else {
            // positions ascending = index bits descending; first strict max
            // wins, so ties resolve toward the smallest position.
            let mut best = -1i64;
            for p in 1..=self.n {
                let b = 1u64 << (self.n - p);
                if mask & b != 0 {
                    continue;
                }
                let v = self.solve(mask | b, values) + self.solve(mask | b, values | b);
                if v > best {
                    best = v;
                }
            }
            best
        };
        self.memo[id] = raw;
        raw
    }

    fn witness(&mut self, mask: u64, values: u64) -> Result<DecisionTree> {
        let depth = mask.count_ones() as usize;
        if depth == self.d {
            let positions: Vec<usize> =
                (1..=self.n).filter(|&p| mask >> (self.n - p) & 1 == 1).collect();
            let vals: Vec<bool> =
                positions.iter().map(|&p| values >> (self.n - p) & 1 == 1).collect();
            let source = ObfsSource::new(self.n, positions, vals)?;
            let distance = self.f.distance_from_uniform_on(&source)?;
            return Ok(DecisionTree::Leaf { source, distance });
        }
        let target = self.solve(mask, values);
        for p in 1..=self.n {
            let b = 1u64 << (self.n - p);
            if mask & b != 0 {
                continue;
            }
            if self.solve(mask | b, values) + self.solve(mask | b, values | b) == target {
                return Ok(DecisionTree::Read {
                    position: p,
                    on_zero: Box::new(self.witness(mask | b, values)?),
                    on_one: Box::new(self.witness(mask | b, values | b)?),
                });
            }
        }
        unreachable!("some child achieves the memoized maximum")
    }
}

fn adaptive_state_count(n: usize, d: usize) -> u128 {
    (0..=d).map(|i| binomial_u128(n, i) << i).sum()
}

/// Worst distance over all read-echo adaptive adversaries reading n-k bits,
/// by dynamic programming over partial assignments. The witness is the
/// maximizing decision tree with ties broken toward smaller positions.
pub fn adaptive_erf_distance(
    f: &TruthTableFunction,
    k: usize,
    work_budget: u128,
) -> Result<VerificationReport> {
    check_k(f, k)?;
    let n = f.n() as usize;
    if f.n() > MAX_ADAPTIVE_N {
        return Err(Error::InvalidParameter(format!(
            "adaptive verification supports n <= {MAX_ADAPTIVE_N}, got {n}"
        )));
    }
    let d = n - k;
    let needed = adaptive_state_count(n, d) + enumeration_work(n, k);
    if needed > work_budget {
        return Err(Error::BudgetExceeded { needed, budget: work_budget });
    }
    let mut dp = AdaptiveDp::new(f, d);
    let raw = dp.solve(0, 0);
    let witness = dp.witness(0, 0)?;
    Ok(VerificationReport {
        property: Property::AdaptiveErf,
        k,
        worst_distance: Dyadic::from_u64(raw as u64, n as u32 + f.m() + 1),
        witness: Witness::DecisionTree(witness),
    })
}

/// Independent oracle for the adaptive verifier: enumerates every read-echo
/// decision tree of depth n-k explicitly (distinct positions along each
/// path) and, for each, measures the statistical distance between the joint
/// distributions (transcript, f(x)) and (transcript, uniform) over the full
/// input space. Exponential; n <= 5 enforced.
pub fn adaptive_erf_distance_bruteforce(f: &TruthTableFunction, k: usize) -> Result<Dyadic> {
    check_k(f, k)?;
    let n = f.n() as usize;
    if n > 5 {
        return Err(Error::InvalidParameter(format!("brute force supports n <= 5, got {n}")));
    }
    let d = n - k;
    if d == 0 {
        // no reads: plain distance from uniform on the full source
        return f.distance_from_uniform_on(&ObfsSource::unfixed(n)?);
    }
    // Internal nodes of a complete binary tree of depth d, heap-indexed
    // (root 1, children 2i and 2i+1), visited in preorder.
    let mut slots = Vec::with_capacity((1 << d) - 1);
    preorder(1, d, &mut slots);
    let mut labels = vec![0usize; 1 << d]; // indexed by heap id
    let mut best = Dyadic::zero();
    enumerate_labelings(f, d, &slots, 0, &mut labels, &mut best);
    Ok(best)
}

fn preorder(node: usize, d: usize, out: &mut Vec<usize>) {
    if node >= 1 << d {
        return;
    }
    out.push(node);
    preorder(2 * node, d, out);
    preorder(2 * node + 1, d, out);
}

fn enumerate_labelings(
    f: &TruthTableFunction,
    d: usize,
    slots: &[usize],
    idx: usize,
    labels: &mut Vec<usize>,
    best: &mut Dyadic,
) {
    if idx == slots.len() {
        let dist = joint_tree_distance(f, d, labels);
        if dist > *best {
            *best = dist;
        }
        return;
    }
    let node = slots[idx];
    // positions already used on the path from the root to this node
    let mut used = 0u64;
    let mut anc = node >> 1;
    while anc >= 1 {
        used |= 1 << labels[anc];
        anc >>= 1;
    }
    for p in 1..=f.n() as usize {
        if used >> p & 1 == 1 {
            continue;
        }
        labels[node] = p;
        enumerate_labelings(f, d, slots, idx + 1, labels, best);
    }
}

/// Distance between (transcript, f(x)) and (transcript, U_m) for the tree
/// described by `labels`, directly from the joint distributions.
fn joint_tree_distance(f: &TruthTableFunction, d: usize, labels: &[usize]) -> Dyadic {
    let n = f.n() as usize;
    let m = f.m();
    let cells = 1usize << (d + m as usize);
    let mut joint = vec![0u64; cells];
    let mut transcripts = vec![0u64; 1 << d];
    for x in 0..1u64 << n {
        let mut node = 1usize;
        let mut transcript = 0u64;
        for _ in 0..d {
            let p = labels[node];
            let bit = x >> (n - p) & 1;
            transcript = transcript << 1 | bit;
            node = 2 * node + bit as usize;
        }
        joint[(transcript << m | f.eval_index(x)) as usize] += 1;
        transcripts[transcript as usize] += 1;
    }
    // joint mass c/2^n versus product mass t/2^{n+m}
    let mut raw = 0u64;
    for tau in 0..1u64 << d {
        for o in 0..1u64 << m {
            let c = joint[(tau << m | o) as usize];
            raw += (c << m).abs_diff(transcripts[tau as usize]);
        }
    }
    Dyadic::from_u64(raw, n as u32 + m + 1)
}

/// Convenience dispatch used by sweeps and the CLI.
pub fn verify(
    f: &TruthTableFunction,
    property: Property,
    k: usize,
    work_budget: u128,
) -> Result<VerificationReport> {
    match property {
        Property::Rf => rf_distance(f, k, work_budget),
        Property::StaticErf => static_erf_distance(f, k, work_budget),
        Property::AdaptiveErf => adaptive_erf_distance(f, k, work_budget),
    }
}

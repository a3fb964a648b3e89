//! Closed-form bounds and the exact oracles they are checked against.
//!
//! The exact side of every comparison here is computed in integer/dyadic
//! arithmetic; the bound side is evaluated in f64 (53-bit mantissa) with a
//! log2 companion so comparisons survive underflow. When an exact value is
//! compared against a float bound, the conversion rounds the exact side up,
//! so a spurious "satisfied" verdict cannot occur.

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::Distribution;
use crate::dyadic::{Dyadic, Ratio};
use crate::error::{Error, Result};

/// Folded binomial counts: entry r holds the number of length-k bit strings
/// whose weight is congruent to r mod `modulus`, computed as
/// (1+x)^k mod (x^modulus - 1) by binary exponentiation.
pub fn folded_binomial_counts(k: u64, modulus: usize) -> Vec<BigUint> {
    assert!(modulus >= 1);
    if modulus == 1 {
        return vec![BigUint::one() << k];
    }
    let mut acc = vec![BigUint::ZERO; modulus];
    acc[0] = BigUint::one();
    if k == 0 {
        return acc;
    }
    let top_bit = 63 - k.leading_zeros();
    for bit in (0..=top_bit).rev() {
        acc = cyclic_square(&acc);
        if k >> bit & 1 == 1 {
            acc = mul_one_plus_x(&acc);
        }
    }
    acc
}

fn cyclic_square(a: &[BigUint]) -> Vec<BigUint> {
    let m = a.len();
    (0..m)
        .into_par_iter()
        .map(|r| {
            let mut acc = BigUint::ZERO;
            for i in 0..m {
                let j = (r + m - i) % m;
                if a[i] != BigUint::ZERO && a[j] != BigUint::ZERO {
                    acc += &a[i] * &a[j];
                }
            }
            acc
        })
        .collect()
}

fn mul_one_plus_x(a: &[BigUint]) -> Vec<BigUint> {
    let m = a.len();
    (0..m).map(|r| &a[r] + &a[(r + m - 1) % m]).collect()
}

/// Exact distribution of a k-step add-1-or-0 walk on Z_M, i.e. Binomial(k, 1/2)
/// reduced mod M. M must be a power of two so the outcome space is {0,1}^m;
/// M = 1 is the degenerate point-mass case.
pub fn exact_walk_distribution(k: u64, big_m: u64) -> Result<Distribution> {
    if k == 0 {
        return Err(Error::InvalidParameter("walk length k must be at least 1".into()));
    }
    if big_m == 0 || !big_m.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "modulus must be a positive power of two, got {big_m}"
        )));
    }
    let m = big_m.trailing_zeros();
    let counts = folded_binomial_counts(k, big_m as usize);
    let log2_total = u32::try_from(k)
        .map_err(|_| Error::InvalidParameter(format!("walk length {k} too large")))?;
    Distribution::from_big_counts(m, counts, log2_total)
}

pub fn walk_distance_exact(k: u64, big_m: u64) -> Result<Dyadic> {
    Ok(exact_walk_distribution(k, big_m)?.distance_from_uniform())
}

const LOG2_E: f64 = std::f64::consts::LOG2_E;

/// (1/4) * sum_{j=1}^{M-1} (1/2 + 1/2 cos(2 pi j / M))^k, evaluated in f64.
pub fn fourier_cosine_sum_bound(k: u64, big_m: u64) -> Result<f64> {
    cosine_sum_terms(k, big_m).map(|t| t.value)
}

/// log2 of the cosine sum; negative infinity when the sum is exactly zero.
pub fn fourier_cosine_sum_log2(k: u64, big_m: u64) -> Result<f64> {
    cosine_sum_terms(k, big_m).map(|t| t.log2)
}

struct LogSum {
    value: f64,
    log2: f64,
}

fn cosine_sum_terms(k: u64, big_m: u64) -> Result<LogSum> {
    if big_m < 2 || !big_m.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("modulus must be even and >= 2, got {big_m}")));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let m = big_m as f64;
    // log2 of each term; the j = M/2 term is exactly zero and is skipped.
    let mut logs = Vec::with_capacity(big_m as usize - 1);
    for j in 1..big_m {
        let c = 0.5 + 0.5 * (2.0 * std::f64::consts::PI * j as f64 / m).cos();
        if c <= 0.0 {
            continue;
        }
        logs.push(k as f64 * c.log2());
    }
    if logs.is_empty() {
        return Ok(LogSum { value: 0.0, log2: f64::NEG_INFINITY });
    }
    let peak = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum_scaled: f64 = logs.iter().map(|l| 2f64.powf(l - peak)).sum();
    let log2 = peak + sum_scaled.log2() - 2.0; // the leading 1/4
    Ok(LogSum { value: 2f64.powf(log2), log2 })
}

/// e^{-k pi^2 / 2M^2} / (2 (1 - e^{-3k pi^2 / 2M^2})).
pub fn fourier_mixing_bound(k: u64, big_m: u64) -> Result<f64> {
    mixing_terms(k, big_m).map(|t| t.value)
}

pub fn fourier_mixing_log2(k: u64, big_m: u64) -> Result<f64> {
    mixing_terms(k, big_m).map(|t| t.log2)
}

fn mixing_terms(k: u64, big_m: u64) -> Result<LogSum> {
    if big_m < 2 || k == 0 {
        return Err(Error::InvalidParameter(format!("need k >= 1 and M >= 2, got k={k}, M={big_m}")));
    }
    let x = k as f64 * std::f64::consts::PI.powi(2) / (2.0 * (big_m * big_m) as f64);
    let den = 2.0 * (-(-3.0 * x).exp_m1()); // 2 (1 - e^{-3x}), accurately
    let log2 = -x * LOG2_E - den.log2();
    Ok(LogSum { value: 2f64.powf(log2), log2 })
}

/// The simplified bound e^{-k pi^2 / 2M^2}; dominates the mixing bound once
/// 3k pi^2 / 2M^2 >= ln 2, in particular whenever k >= M^2.
pub fn simple_exp_bound(k: u64, big_m: u64) -> f64 {
    2f64.powf(simple_exp_log2(k, big_m))
}

pub fn simple_exp_log2(k: u64, big_m: u64) -> f64 {
    let x = k as f64 * std::f64::consts::PI.powi(2) / (2.0 * (big_m * big_m) as f64);
    -x * LOG2_E
}

/// One row of the walk-bound comparison: the exact distance next to the three
/// closed forms. `satisfied` records exact <= mixing bound (the closed form
/// that callers actually consume).
#[derive(Clone, Debug, Serialize)]
pub struct WalkBoundsRow {
    pub k: u64,
    pub big_m: u64,
    pub exact: Dyadic,
    pub cosine_sum: f64,
    #[serde(rename = "closed_form")]
    pub mixing: f64,
    pub simple_exp: f64,
    pub exact_le_cosine: bool,
    pub cosine_le_mixing: bool,
    pub mixing_le_simple: bool,
    pub satisfied: bool,
}

pub fn walk_bounds(k: u64, big_m: u64) -> Result<WalkBoundsRow> {
    let exact = walk_distance_exact(k, big_m)?;
    let cos = cosine_sum_terms(k, big_m)?;
    let mix = mixing_terms(k, big_m)?;
    let simple_log2 = simple_exp_log2(k, big_m);
    Ok(WalkBoundsRow {
        k,
        big_m,
        exact_le_cosine: exact.le_f64_bound(cos.value, cos.log2),
        cosine_le_mixing: cos.log2 <= mix.log2,
        mixing_le_simple: mix.log2 <= simple_log2,
        satisfied: exact.le_f64_bound(mix.value, mix.log2),
        exact,
        cosine_sum: cos.value,
        mixing: mix.value,
        simple_exp: simple_exp_bound(k, big_m),
    })
}

/// Doubling grid k = M^2, 2M^2, 4M^2, ... <= k_max for each modulus.
pub fn walk_bounds_grid(moduli: &[u64], k_max: u64) -> Result<Vec<WalkBoundsRow>> {
    let mut points = Vec::new();
    for &big_m in moduli {
        let mut k = big_m
            .checked_mul(big_m)
            .ok_or_else(|| Error::InvalidParameter("modulus too large".into()))?;
        while k <= k_max {
            points.push((k, big_m));
            match k.checked_mul(2) {
                Some(next) => k = next,
                None => break,
            }
        }
    }
    points.into_par_iter().map(|(k, big_m)| walk_bounds(k, big_m)).collect()
}

pub fn walk_bounds_csv(rows: &[WalkBoundsRow]) -> String {
    let mut out = String::from("k,M,exact,cosine_sum,closed_form,satisfied\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.k,
            r.big_m,
            r.exact.to_f64_lossy(),
            r.cosine_sum,
            r.mixing,
            r.satisfied
        ));
    }
    out
}

/// The tail bound 2 e^{-t eps^2 / 2}. May exceed 1, in which case it is
/// reported as-is (vacuously true).
pub fn chernoff_upper(t: u64, eps: f64) -> f64 {
    2.0 * (-(t as f64) * eps * eps / 2.0).exp()
}

pub fn chernoff_upper_log2(t: u64, eps: f64) -> f64 {
    1.0 - (t as f64) * eps * eps / 2.0 * LOG2_E
}

/// Pr[|X/t - 1/2| >= eps] for X ~ Binomial(t, 1/2), exactly:
/// the sum of C(t, j) / 2^t over all j with |2j - t| * eps.den >= 2 * eps.num * t.
pub fn binomial_tail_exact(t: u64, eps: Ratio) -> Result<Dyadic> {
    if t == 0 || t > 1 << 16 {
        return Err(Error::InvalidParameter(format!("t={t} out of range 1..=65536")));
    }
    if 2 * eps.num() as u128 > eps.den() as u128 {
        return Err(Error::InvalidParameter(format!("eps={eps} exceeds 1/2")));
    }
    let mut tail = BigUint::ZERO;
    let mut binom = BigUint::one(); // C(t, 0)
    for j in 0..=t {
        // |j/t - 1/2| >= eps  <=>  |2j - t| * den >= 2 * num * t
        let two_j_minus_t = (2 * j as i128 - t as i128).unsigned_abs();
        if two_j_minus_t * eps.den() as u128 >= 2 * eps.num() as u128 * t as u128 {
            tail += &binom;
        }
        if j < t {
            binom = binom * (t - j) / (j + 1);
        }
    }
    Ok(Dyadic::new(tail, t as u32))
}

/// Which segment of the converse analysis a grid point falls in:
/// 1 for eps < 1/(4 sqrt t), 2 for 1/(4 sqrt t) <= eps < 1/5, 3 for eps >= 1/5.
pub fn converse_case(t: u64, eps: Ratio) -> u8 {
    // eps < 1/(4 sqrt t)  <=>  16 num^2 t < den^2, exactly in integers.
    let lhs = 16u128 * (eps.num() as u128).pow(2) * t as u128;
    let rhs = (eps.den() as u128).pow(2);
    if lhs < rhs {
        1
    } else if 5 * eps.num() < eps.den() {
        2
    } else {
        3
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConverseRow {
    pub t: u64,
    pub eps: Ratio,
    pub case: u8,
    pub tail: Dyadic,
    pub tail_log2: f64,
    /// log2(1/tail) / (t eps^2); only cases 2 and 3 participate in the fit.
    pub exponent_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConverseReport {
    pub rows: Vec<ConverseRow>,
    /// Smallest constant c such that tail >= 2^{-ceil(c t eps^2)} across all
    /// case-2 and case-3 grid points (the max of the per-point ratios).
    pub fitted_c: f64,
}

impl ConverseReport {
    /// Re-checks the fitted constant exactly: tail >= 2^{-ceil(c t eps^2)}
    /// on cases 2-3 and tail >= 2^{-t} on case 3.
    pub fn verify(&self) -> bool {
        self.rows.iter().all(|row| {
            let case3_ok = row.case != 3 || row.tail >= Dyadic::pow2_neg(row.t as u32);
            let fit_ok = row.case == 1 || {
                let exponent = (self.fitted_c * row.t as f64 * row.eps.to_f64().powi(2)).ceil();
                exponent >= 0.0 && row.tail >= Dyadic::pow2_neg(exponent as u32)
            };
            case3_ok && fit_ok
        })
    }
}

pub fn converse_regime_report(t_grid: &[u64], eps_grid: &[Ratio]) -> Result<ConverseReport> {
    let mut rows = Vec::new();
    for &t in t_grid {
        for &eps in eps_grid {
            let tail = binomial_tail_exact(t, eps)?;
            let tail_log2 = tail.log2_lossy().unwrap_or(f64::NEG_INFINITY);
            let t_eps_sq = t as f64 * eps.to_f64().powi(2);
            let exponent_ratio =
                if t_eps_sq > 0.0 { -tail_log2 / t_eps_sq } else { f64::INFINITY };
            rows.push(ConverseRow {
                t,
                eps,
                case: converse_case(t, eps),
                tail,
                tail_log2,
                exponent_ratio,
            });
        }
    }
    let fitted_c = rows
        .iter()
        .filter(|r| r.case >= 2)
        .map(|r| r.exponent_ratio)
        .fold(0.0f64, f64::max);
    Ok(ConverseReport { rows, fitted_c })
}

pub fn converse_csv(report: &ConverseReport) -> String {
    let mut out = String::from("t,eps,case,tail,tail_log2,exponent_ratio\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.t,
            r.eps,
            r.case,
            r.tail.to_f64_lossy(),
            r.tail_log2,
            r.exponent_ratio
        ));
    }
    out.push_str(&format!("# fitted_c,{}\n", report.fitted_c));
    out
}

/// Additive constants for the threshold predictions. The asymptotic
/// statements hide unspecified constants; these are explicit configuration,
/// defaulting to zero, and are never asserted as ground truth.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ThresholdConstants {
    pub c: f64,
    /// Output length assumed for the static prediction.
    pub m: u32,
}

impl Default for ThresholdConstants {
    fn default() -> Self {
        ThresholdConstants { c: 0.0, m: 1 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdPredictions {
    pub n: u64,
    pub epsilon: f64,
    pub constants: ThresholdConstants,
    /// k above which a random function should be a resilient function:
    /// log2 n + 2 log2(1/eps) + c.
    pub rf_exist_k: f64,
    /// k below which a random function should fail as an extractor, from the
    /// fixed point of k = log2(n - k) + 2 log2(1/eps) - c.
    pub rf_fail_k: f64,
    /// Static exposure resilience needs only k >= m + 2 log2(1/eps) + c.
    pub static_min_k: f64,
    /// Adaptive exposure resilience: log2 log2 n + 2 log2(1/eps) + c.
    pub adaptive_min_k: f64,
    /// max over k of max(log2(n-k), log2 log2 C(n,k)); always <= log2 n.
    pub refinement_max_term: f64,
}

pub fn threshold_predictions(
    n: u64,
    epsilon: f64,
    constants: ThresholdConstants,
) -> Result<ThresholdPredictions> {
    if !(2..=1 << 22).contains(&n) {
        return Err(Error::InvalidParameter(format!("n={n} out of range 2..=2^22")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon={epsilon} out of (0,1)")));
    }
    let two_log_inv = 2.0 * (1.0 / epsilon).log2();
    let rf_exist_k = (n as f64).log2() + two_log_inv + constants.c;
    let mut rf_fail_k = (n as f64).log2();
    for _ in 0..64 {
        let next = ((n as f64 - rf_fail_k).max(1.0)).log2() + two_log_inv - constants.c;
        rf_fail_k = next.clamp(0.0, n as f64 - 1.0);
    }
    let adaptive_min_k = (n as f64).log2().log2() + two_log_inv + constants.c;
    let static_min_k = f64::from(constants.m) + two_log_inv + constants.c;
    Ok(ThresholdPredictions {
        n,
        epsilon,
        constants,
        rf_exist_k,
        rf_fail_k,
        static_min_k,
        adaptive_min_k,
        refinement_max_term: refinement_max_term(n),
    })
}

/// max over k in [1, n] of max(log2(n-k), log2 log2 C(n,k)), via prefix sums
/// of log2(i).
pub fn refinement_max_term(n: u64) -> f64 {
    let n_us = n as usize;
    let mut prefix = vec![0.0f64; n_us + 1];
    for i in 1..=n_us {
        prefix[i] = prefix[i - 1] + (i as f64).log2();
    }
    let log2_binom = |k: usize| prefix[n_us] - prefix[k] - prefix[n_us - k];
    let mut best = f64::NEG_INFINITY;
    for k in 1..=n_us {
        let a = if n_us > k { ((n_us - k) as f64).log2() } else { f64::NEG_INFINITY };
        let lb = log2_binom(k);
        let b = if lb > 0.0 { lb.log2() } else { f64::NEG_INFINITY };
        best = best.max(a.max(b));
    }
    best
}

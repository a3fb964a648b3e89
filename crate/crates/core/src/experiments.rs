//! Seeded Monte Carlo sweeps over random truth tables.
//!
//! A sweep samples functions, never sources: each sampled function is judged
//! by the exact exhaustive verifiers, and the randomness lives entirely in
//! the choice of function. Per-trial seeds derive from (master_seed, k,
//! trial) through a fixed mixing function, so results are bit-identical
//! under any parallel schedule and any thread count: trials are collected in
//! index order and every aggregate is either an integer, an exact dyadic, or
//! a float computed once from those.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::{Dyadic, Ratio};
use crate::error::{Error, Result};
use crate::table::TruthTableFunction;
use crate::verify::{self, Property};

/// Two-sided confidence level used for the reported radius: the radius r
/// solves 2 e^{-t r^2 / 2} = CONFIDENCE_DELTA for t trials.
pub const CONFIDENCE_DELTA: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct SweepConfig {
    pub property: Property,
    pub n: u32,
    pub m: u32,
    pub epsilon: Ratio,
    pub k_min: usize,
    pub k_max: usize,
    pub trials: u64,
    pub master_seed: u64,
    pub work_budget: u128,
    /// Thread-count hint; results are identical for every value.
    pub parallelism: Option<usize>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.k_min == 0 || self.k_min > self.k_max || self.k_max > self.n as usize {
            return Err(Error::InvalidParameter(format!(
                "k range {}..={} invalid for n={}",
                self.k_min, self.k_max, self.n
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub trials: u64,
    pub successes: u64,
    pub fraction: f64,
    pub mean_distance: f64,
    pub max_distance: Dyadic,
    pub conf_radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// Canonical CSV: one row per k with the config echoed on each line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "property,n,m,eps,k,trials,successes,fraction,mean_distance,max_distance,conf_radius,seed\n",
        );
        let prop = match self.config.property {
            Property::Rf => "rf",
            Property::StaticErf => "serf",
            Property::AdaptiveErf => "aerf",
        };
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                prop,
                self.config.n,
                self.config.m,
                self.config.epsilon,
                r.k,
                r.trials,
                r.successes,
                r.fraction,
                r.mean_distance,
                r.max_distance.to_f64_lossy(),
                r.conf_radius,
                self.config.master_seed,
            ));
        }
        out
    }
}

/// splitmix64 finalizer; the fixed mixing step behind seed derivation.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic per-trial seed from (master_seed, k, trial). Counter-based,
/// so any subset of trials can be computed independently and in any order.
pub fn derive_trial_seed(master_seed: u64, k: usize, trial: u64) -> u64 {
    let a = mix64(master_seed ^ 0x6a09e667f3bcc909);
    let b = mix64(a ^ (k as u64).wrapping_mul(0xbb67ae8584caa73b));
    mix64(b ^ trial.wrapping_mul(0x3c6ef372fe94f82b))
}

/// Uniformly random truth table: every entry independently uniform on
/// {0,1}^m, deterministic in the seed.
pub fn sample_random_function(n: u32, m: u32, seed: u64) -> Result<TruthTableFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // 2^m divides 2^32 for m <= 32, so masking introduces no bias.
    let mask = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    TruthTableFunction::from_fn(n, m, |_| u64::from(rng.next_u32() & mask))
}

pub fn confidence_radius(trials: u64) -> f64 {
    (2.0 * (2.0 / CONFIDENCE_DELTA).ln() / trials as f64).sqrt()
}

/// Runs the sweep: for each k, samples `trials` functions and verifies each
/// one exactly, counting those with worst distance <= epsilon.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    match config.parallelism {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(|| run_sweep_inner(config)),
        None => run_sweep_inner(config),
    }
}

fn run_sweep_inner(config: &SweepConfig) -> Result<SweepResult> {
    let mut rows = Vec::with_capacity(config.k_max - config.k_min + 1);
    for k in config.k_min..=config.k_max {
        let distances: Vec<Result<Dyadic>> = (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                let seed = derive_trial_seed(config.master_seed, k, trial);
                let f = sample_random_function(config.n, config.m, seed)
                    .map_err(|e| trial_error(k, trial, e))?;
                let report = verify::verify(&f, config.property, k, config.work_budget)
                    .map_err(|e| trial_error(k, trial, e))?;
                Ok(report.worst_distance)
            })
            .collect();
        let mut successes = 0u64;
        let mut max_distance = Dyadic::zero();
        let mut sum = Dyadic::zero();
        for d in distances {
            let d = d?;
            if config.epsilon.cmp_dyadic(&d) != std::cmp::Ordering::Less {
                successes += 1;
            }
            if d > max_distance {
                max_distance = d.clone();
            }
            sum = sum.add(&d);
        }
        rows.push(SweepRow {
            k,
            trials: config.trials,
            successes,
            fraction: successes as f64 / config.trials as f64,
            mean_distance: sum.to_f64_lossy() / config.trials as f64,
            max_distance,
            conf_radius: confidence_radius(config.trials),
        });
    }
    Ok(SweepResult { config: config.clone(), rows })
}

fn trial_error(k: usize, trial: u64, e: Error) -> Error {
    Error::SweepTrial { k, trial, source: Box::new(e) }
}

/// Exact success fraction over *all* (2^m)^(2^n) truth tables; feasible only
/// for tiny spaces, used to calibrate run_sweep. Returns (successes, total).
pub fn exhaustive_sweep(
    n: u32,
    m: u32,
    epsilon: Ratio,
    k: usize,
    property: Property,
    work_budget: u128,
) -> Result<(u64, u64)> {
    let entries = 1u32 << n;
    let space_bits = (u64::from(entries) * u64::from(m)) as u32;
    if space_bits > 16 {
        return Err(Error::InvalidParameter(format!(
            "function space 2^{space_bits} exceeds the 2^16 enumeration cap"
        )));
    }
    let total = 1u64 << space_bits;
    let successes = (0..total)
        .into_par_iter()
        .map(|code| {
            let f = TruthTableFunction::from_fn(n, m, |x| {
                code >> (x as u32 * m) & ((1u64 << m) - 1)
            })
            .expect("valid table");
            let report = verify::verify(&f, property, k, work_budget)?;
            Ok(u64::from(epsilon.cmp_dyadic(&report.worst_distance) != std::cmp::Ordering::Less))
        })
        .collect::<Result<Vec<u64>>>()?
        .into_iter()
        .sum();
    Ok((successes, total))
}

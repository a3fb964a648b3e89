//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `--nocapture` to see them) before asserting.
//!
//! Criterion 2 asserts the unsquared spectral chain
//! `exact <= cosine_sum <= mixing <= simple_exp` on the full grid. The first
//! link of that chain is mathematically false: the spectral sum bounds the
//! *squared* distance (see `walk_distance_squared_below_cosine_sum` in the
//! invariants suite for the relation that does hold), and exact computation
//! produces counterexamples such as k=16, M=4 where the exact distance is
//! 1/512 but the cosine sum is 2^-17. The criterion is implemented exactly
//! as stated and fails honestly rather than being weakened to pass.

use obfx_core::analysis::{self, ThresholdConstants};
use obfx_core::dyadic::{Dyadic, Ratio};
use obfx_core::experiments::{self, SweepConfig};
use obfx_core::streaming::{attack_source, cycle_add_program, fp_chord_program};
use obfx_core::table::TruthTableFunction;
use obfx_core::verify::{self, Property, DEFAULT_WORK_BUDGET};

fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {:>2} ({name}): {} — {detail}",
        criterion,
        if pass { "PASS" } else { "FAIL" }
    );
}

/// Criterion 1: exact walk distance at the parameter rule's own settings.
/// For each k with eps = 2^-sqrt(k) and m = floor(log2(k)/4), the exact
/// distance of the k-step walk mod 2^m stays below eps. No tolerance.
#[test]
fn c01_walk_error_guarantee_exact() {
    let cases: [(u64, u32); 10] = [
        (4, 2),
        (16, 4),
        (64, 8),
        (256, 16),
        (1024, 32),
        (4096, 64),
        (1 << 14, 128),
        (1 << 16, 256),
        (1 << 18, 512),
        (1 << 20, 1024),
    ];
    let mut detail = String::new();
    let mut pass = true;
    for (k, sqrt_k) in cases {
        let m = k.ilog2() / 4; // floor of log2(k)/4
        let exact = analysis::walk_distance_exact(k, 1u64 << m).unwrap();
        let eps = Dyadic::pow2_neg(sqrt_k);
        let ok = exact <= eps;
        pass &= ok;
        detail.push_str(&format!(
            "k={k} m={m}: log2(dist)={} vs -{sqrt_k} {}; ",
            exact.log2_lossy().map_or("-inf".into(), |v| format!("{v:.1}")),
            if ok { "ok" } else { "VIOLATED" }
        ));
    }
    report(1, "walk error guarantee", pass, &detail);
    assert!(pass, "{detail}");
}

/// Criterion 2: the unsquared spectral sandwich on the full grid. See the
/// module docs: the first link is false and this test is expected to fail.
#[test]
fn c02_spectral_sandwich_unsquared() {
    let rows = analysis::walk_bounds_grid(&[2, 4, 8, 16], 1 << 20).unwrap();
    assert!(rows.len() >= 40, "grid has only {} points", rows.len());
    let mut bad_exact_cosine = Vec::new();
    let mut bad_cosine_mixing = Vec::new();
    let mut bad_mixing_simple = Vec::new();
    for r in &rows {
        if !r.exact_le_cosine {
            bad_exact_cosine.push((r.k, r.big_m));
        }
        if !r.cosine_le_mixing {
            bad_cosine_mixing.push((r.k, r.big_m));
        }
        if !r.mixing_le_simple {
            bad_mixing_simple.push((r.k, r.big_m));
        }
    }
    let pass = bad_exact_cosine.is_empty()
        && bad_cosine_mixing.is_empty()
        && bad_mixing_simple.is_empty();
    let detail = if pass {
        format!("all {} grid points satisfy the chain", rows.len())
    } else {
        let first = bad_exact_cosine.first().copied().unwrap_or((0, 0));
        let sample = rows.iter().find(|r| (r.k, r.big_m) == first);
        format!(
            "exact<=cosine fails at {}/{} points (first: k={}, M={}, exact={}, cosine_sum={:e}); \
             cosine<=mixing fails at {}; mixing<=simple fails at {}",
            bad_exact_cosine.len(),
            rows.len(),
            first.0,
            first.1,
            sample.map_or("?".into(), |r| r.exact.to_string()),
            sample.map_or(0.0, |r| r.cosine_sum),
            bad_cosine_mixing.len(),
            bad_mixing_simple.len(),
        )
    };
    report(2, "spectral sandwich (unsquared)", pass, &detail);
    assert!(pass, "{detail}");
}

/// Criterion 3: the attack end to end. For both builtin targets with k = 2
/// the attack source confines the output to at most k+1 values and the
/// exact distance from uniform is at least (M - (k+1)) / M.
#[test]
fn c03_attack_end_to_end() {
    let k = 2usize;
    let mut detail = String::new();
    let mut pass = true;
    let targets: [(&str, obfx_core::streaming::StreamingProgram); 2] = [
        ("fp_chord(n=64, p=3)", fp_chord_program(64, 3).unwrap()),
        ("cycle_add(n=64, M=2)", cycle_add_program(64, 2).unwrap()),
    ];
    for (name, program) in &targets {
        let attack = attack_source(program, k).unwrap();
        let dist = program.output_distribution_on(&attack.source).unwrap();
        let support = dist.support_size();
        let distance = dist.distance_from_uniform();
        let big_m = 1u64 << program.output_bits();
        let support_ok = support <= k + 1;
        // (M - (k+1))/M, vacuous when M <= k+1
        let threshold_ok = if big_m > (k + 1) as u64 {
            let threshold = Dyadic::from_u64(big_m - (k + 1) as u64, program.output_bits());
            distance >= threshold
        } else {
            true
        };
        pass &= support_ok && threshold_ok;
        detail.push_str(&format!(
            "{name}: support={support} (bound {}), distance={distance}, free={} ; ",
            attack.support_bound,
            attack.free_positions.len()
        ));
    }
    report(3, "streaming attack", pass, &detail);
    assert!(pass, "{detail}");
}

/// Criterion 4: the adaptive dynamic program equals the explicit tree
/// enumeration exactly, on every 3-bit function for k in {1, 2} and on 20
/// seeded random 4-bit functions at k = 2.
#[test]
fn c04_adaptive_dp_vs_bruteforce() {
    let mut checked = 0u32;
    for code in 0..256u64 {
        let f = TruthTableFunction::from_fn(3, 1, |x| code >> x & 1).unwrap();
        for k in [1usize, 2] {
            let dp = verify::adaptive_erf_distance(&f, k, DEFAULT_WORK_BUDGET)
                .unwrap()
                .worst_distance;
            let bf = verify::adaptive_erf_distance_bruteforce(&f, k).unwrap();
            assert_eq!(dp, bf, "table {code:08b}, k={k}");
            checked += 1;
        }
    }
    for seed in 0..20u64 {
        let f = experiments::sample_random_function(4, 1, seed).unwrap();
        let dp =
            verify::adaptive_erf_distance(&f, 2, DEFAULT_WORK_BUDGET).unwrap().worst_distance;
        let bf = verify::adaptive_erf_distance_bruteforce(&f, 2).unwrap();
        assert_eq!(dp, bf, "seed {seed}");
        checked += 1;
    }
    report(4, "adaptive DP vs brute force", true, &format!("{checked} exact agreements"));
}

/// Criterion 5: static <= min(rf, adaptive), exactly, on 100 seeded random
/// functions at n = 6, m = 1, k in {1, 2, 3}.
#[test]
fn c05_hierarchy() {
    let mut checked = 0u32;
    for seed in 0..100u64 {
        let f = experiments::sample_random_function(6, 1, seed).unwrap();
        for k in [1usize, 2, 3] {
            let rf = verify::rf_distance(&f, k, DEFAULT_WORK_BUDGET).unwrap().worst_distance;
            let st = verify::static_erf_distance(&f, k, DEFAULT_WORK_BUDGET)
                .unwrap()
                .worst_distance;
            let ad = verify::adaptive_erf_distance(&f, k, DEFAULT_WORK_BUDGET)
                .unwrap()
                .worst_distance;
            assert!(st <= rf, "seed={seed}, k={k}: static {st} > rf {rf}");
            assert!(st <= ad, "seed={seed}, k={k}: static {st} > adaptive {ad}");
            checked += 1;
        }
    }
    report(5, "hierarchy", true, &format!("{checked} ordered triples"));
}

/// Criterion 6: parity has worst distance exactly zero for every n <= 10 and
/// every k, and exactly 2 of the 16 two-bit functions are perfect at k = 1.
#[test]
fn c06_parity_ground_truth() {
    for n in 1..=10u32 {
        let f = TruthTableFunction::parity(n).unwrap();
        for k in 1..=n as usize {
            let r = verify::rf_distance(&f, k, DEFAULT_WORK_BUDGET).unwrap();
            assert!(r.worst_distance.is_zero(), "parity n={n}, k={k}: {}", r.worst_distance);
        }
    }
    let (s, t) = experiments::exhaustive_sweep(
        2,
        1,
        Ratio::zero(),
        1,
        Property::Rf,
        DEFAULT_WORK_BUDGET,
    )
    .unwrap();
    assert_eq!((s, t), (2, 16));
    report(6, "parity ground truth", true, "rf_distance(parity)=0 for n<=10; 2/16 at n=2");
}

/// Criterion 7: threshold shape at n = 10. The RF success fraction moves
/// from below 0.1 at k = 1 to above 0.9 at k = 10; the static fraction
/// dominates RF at every k on shared seeds and the adaptive fraction sits
/// between them.
#[test]
fn c07_threshold_phenomena() {
    let base = SweepConfig {
        property: Property::Rf,
        n: 10,
        m: 1,
        epsilon: Ratio::new(1, 4).unwrap(),
        k_min: 1,
        k_max: 10,
        trials: 200,
        master_seed: 2024,
        work_budget: DEFAULT_WORK_BUDGET,
        parallelism: None,
    };
    let rf = experiments::run_sweep(&base).unwrap();
    let st =
        experiments::run_sweep(&SweepConfig { property: Property::StaticErf, ..base.clone() })
            .unwrap();
    let ad =
        experiments::run_sweep(&SweepConfig { property: Property::AdaptiveErf, ..base.clone() })
            .unwrap();
    let frac = |sweep: &experiments::SweepResult, k: usize| sweep.rows[k - 1].fraction;
    let mut pass = frac(&rf, 1) < 0.1 && frac(&rf, 10) > 0.9;
    for k in 1..=10usize {
        pass &= frac(&st, k) >= frac(&ad, k) && frac(&ad, k) >= frac(&rf, k);
    }
    let crossing = (1..=10).find(|&k| frac(&rf, k) >= 0.5);
    let detail = format!(
        "rf: {:.3} at k=1, {:.3} at k=10, crossing at k={:?} (radius {:.3}); \
         static/adaptive/rf fractions ordered at every k",
        frac(&rf, 1),
        frac(&rf, 10),
        crossing,
        rf.rows[0].conf_radius,
    );
    report(7, "threshold phenomena", pass, &detail);
    assert!(pass, "{detail}");
}

/// Criterion 8: the sampled success fraction at n=4, m=1, k=4, eps=3/10
/// matches the exhaustively computed 1 - 1394/65536 within the reported
/// confidence radius, for three master seeds.
#[test]
fn c08_sweep_calibration() {
    let eps = Ratio::new(3, 10).unwrap();
    let (s, t) =
        experiments::exhaustive_sweep(4, 1, eps, 4, Property::Rf, DEFAULT_WORK_BUDGET).unwrap();
    assert_eq!(t - s, 1394, "exhaustive failing-table count");
    let exact = s as f64 / t as f64;
    let mut detail = format!("exact={exact:.5}; ");
    let mut pass = true;
    for seed in [101u64, 202, 303] {
        let config = SweepConfig {
            property: Property::Rf,
            n: 4,
            m: 1,
            epsilon: eps,
            k_min: 4,
            k_max: 4,
            trials: 400,
            master_seed: seed,
            work_budget: DEFAULT_WORK_BUDGET,
            parallelism: None,
        };
        let sweep = experiments::run_sweep(&config).unwrap();
        let row = &sweep.rows[0];
        let ok = (row.fraction - exact).abs() <= row.conf_radius;
        pass &= ok;
        detail.push_str(&format!(
            "seed {seed}: {:.5} (radius {:.4}) {}; ",
            row.fraction,
            row.conf_radius,
            if ok { "ok" } else { "OUT" }
        ));
    }
    report(8, "sweep calibration", pass, &detail);
    assert!(pass, "{detail}");
}

/// Criterion 9: the exact binomial tail sits strictly below the closed-form
/// upper bound on the whole grid; the converse fit holds at every case-2/3
/// point and the case-3 floor 2^-t holds exactly.
#[test]
fn c09_tail_probability_pair() {
    let ts: Vec<u64> = (3..=10).map(|e| 1u64 << e).collect();
    let eps: Vec<Ratio> =
        [16u64, 8, 4, 2].iter().map(|&d| Ratio::new(1, d).unwrap()).collect();
    for &t in &ts {
        for &e in &eps {
            let tail = analysis::binomial_tail_exact(t, e).unwrap();
            let bound = analysis::chernoff_upper(t, e.to_f64());
            let bound_exact = Dyadic::from_f64_exact(bound).unwrap();
            assert!(tail < bound_exact, "t={t}, eps={e}: tail {tail} not below bound {bound}");
        }
    }
    let rep = analysis::converse_regime_report(&ts, &eps).unwrap();
    assert!(rep.verify(), "converse fit failed; fitted_c = {}", rep.fitted_c);
    for row in &rep.rows {
        if row.case == 1 {
            assert!(
                row.tail >= Dyadic::from_u64(1, 1),
                "case-1 point t={}, eps={} has tail {} below 1/2",
                row.t,
                row.eps,
                row.tail
            );
        }
        if row.case == 3 {
            assert!(row.tail >= Dyadic::pow2_neg(row.t as u32));
        }
    }
    report(
        9,
        "tail probability pair",
        true,
        &format!("32 grid points; fitted_c={:.4}", rep.fitted_c),
    );
}

/// Criterion 10: byte-identical outputs under thread pools of size 1 and 8.
#[test]
fn c10_determinism_under_parallelism() {
    let run_all = || {
        let sweep = experiments::run_sweep(&SweepConfig {
            property: Property::StaticErf,
            n: 6,
            m: 1,
            epsilon: Ratio::new(1, 4).unwrap(),
            k_min: 1,
            k_max: 3,
            trials: 24,
            master_seed: 99,
            work_budget: DEFAULT_WORK_BUDGET,
            parallelism: None,
        })
        .unwrap();
        let grid = analysis::walk_bounds_grid(&[2, 4], 1 << 12).unwrap();
        let attack =
            attack_source(&fp_chord_program(64, 3).unwrap(), 2).unwrap();
        let predictions =
            analysis::threshold_predictions(1 << 10, 0.25, ThresholdConstants::default())
                .unwrap();
        format!(
            "{}\n{}\n{}\n{}",
            sweep.to_csv(),
            analysis::walk_bounds_csv(&grid),
            serde_json::to_string_pretty(&attack).unwrap(),
            serde_json::to_string_pretty(&predictions).unwrap(),
        )
    };
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(run_all);
    let eight = rayon::ThreadPoolBuilder::new()
        .num_threads(8)
        .build()
        .unwrap()
        .install(run_all);
    let pass = single == eight;
    report(
        10,
        "determinism",
        pass,
        &format!("{} bytes, identical across pool sizes: {pass}", single.len()),
    );
    assert!(pass);
    assert_eq!(single, eight);
}

// Validates the testing primitives against routes that share nothing with
// the incomplete-beta implementation: direct quadrature of the Student-t
// density, brute-force CDF gap scans, and a large seeded null calibration.

use driftwatch_core::dataset::partition;
use driftwatch_core::scenario::{sample_scenario, RngSeed, ScenarioSpec};
use driftwatch_core::stats::{ks_two_sample, paired_t_test, student_t_two_tailed_p};
use proptest::prelude::*;

/// Composite Simpson rule over [a, b] with `panels` even subdivisions.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels % 2 == 0);
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 0 { 2.0 } else { 4.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Two-tailed Student-t tail mass by quadrature of the unnormalized density
/// (1 + x²/df)^(−(df+1)/2). The half line [c, ∞) folds onto [0, 1) through
/// x = c + u/(1−u); the normalizing constant cancels in tail(|t|)/tail(0),
/// so no gamma function is involved anywhere.
fn t_two_tailed_by_quadrature(t: f64, df: f64) -> f64 {
    let g = move |x: f64| (-0.5 * (df + 1.0) * (x * x / df).ln_1p()).exp();
    let tail = |c: f64| {
        let integrand = |u: f64| {
            let w = 1.0 - u;
            g(c + u / w) / (w * w)
        };
        simpson(&integrand, 0.0, 1.0 - 1e-9, 200_000)
    };
    (tail(t.abs()) / tail(0.0)).min(1.0)
}

#[test]
fn t_tail_matches_direct_quadrature() {
    let dfs = [1.0, 2.0, 5.0, 9.0, 30.0];
    let ts = [0.5, 1.5, 2.5, 3.5];
    let mut checked = 0;
    for &df in &dfs {
        for &t in &ts {
            let beta_route = student_t_two_tailed_p(t, df);
            let quad_route = t_two_tailed_by_quadrature(t, df);
            assert!(
                (beta_route - quad_route).abs() <= 1e-4,
                "t={t}, df={df}: beta route {beta_route} vs quadrature {quad_route}"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 20);
}

// With both samples drawn from the same distribution the p-value is uniform,
// so the rejection rate at the 5% cut must sit inside a 3.3-standard-error
// binomial band around 5%.
#[test]
fn null_rejection_rate_is_calibrated() {
    let spec = ScenarioSpec::no_drift(1);
    let seed = RngSeed(0x70);
    let trials = 5000;
    let mut rejections = 0;
    for trial in 0..trials {
        let x = sample_scenario(&spec, 50, seed.derive(&[trial, 0])).unwrap();
        let y = sample_scenario(&spec, 50, seed.derive(&[trial, 1])).unwrap();
        let result = paired_t_test(x.values(), y.values()).unwrap();
        if result.p_value < 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / trials as f64;
    assert!(
        (rate - 0.05).abs() <= 0.012,
        "null rejection rate {rate} outside 0.05 ± 0.012"
    );
}

/// Largest ECDF gap by counting at every pooled point — quadratic and
/// tie-proof, unlike the merge the library uses.
fn ks_statistic_by_counting(x: &[f64], y: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for &v in x.iter().chain(y) {
        let fx = x.iter().filter(|&&e| e <= v).count() as f64 / x.len() as f64;
        let fy = y.iter().filter(|&&e| e <= v).count() as f64 / y.len() as f64;
        best = best.max((fx - fy).abs());
    }
    best
}

proptest! {
    #[test]
    fn ks_statistic_matches_the_counting_scan(
        x in proptest::collection::vec(-5.0f64..5.0, 1..30),
        y in proptest::collection::vec(-5.0f64..5.0, 1..30),
    ) {
        let merged = ks_two_sample(&x, &y).unwrap().statistic;
        let counted = ks_statistic_by_counting(&x, &y);
        prop_assert!((merged - counted).abs() <= 1e-12, "merge {merged} vs scan {counted}");
    }

    #[test]
    fn ks_ignores_monotone_relabeling(
        x in proptest::collection::vec(-5.0f64..5.0, 1..30),
        y in proptest::collection::vec(-5.0f64..5.0, 1..30),
    ) {
        let plain = ks_two_sample(&x, &y).unwrap();
        let warp = |s: &[f64]| s.iter().map(|v| v.exp()).collect::<Vec<_>>();
        let warped = ks_two_sample(&warp(&x), &warp(&y)).unwrap();
        // Ranks are untouched, so the statistic (a ratio of counts) and the
        // p-value derived from it come back bit-identical.
        prop_assert_eq!(plain.statistic, warped.statistic);
        prop_assert_eq!(plain.p_value, warped.p_value);
    }

    #[test]
    fn paired_t_swaps_and_shifts_cleanly(
        pairs in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 2..40),
        c in -50.0f64..50.0,
    ) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let forward = paired_t_test(&x, &y).unwrap();
        let backward = paired_t_test(&y, &x).unwrap();
        // Negating every difference negates the mean and preserves squares,
        // so the swap is exact in floating point, not merely approximate.
        prop_assert_eq!(forward.statistic, -backward.statistic);
        prop_assert_eq!(forward.p_value, backward.p_value);

        let sd_guard = {
            let diffs: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
            diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
        };
        prop_assume!(sd_guard > 1e-9);
        let xs: Vec<f64> = x.iter().map(|v| v + c).collect();
        let ys: Vec<f64> = y.iter().map(|v| v + c).collect();
        let shifted = paired_t_test(&xs, &ys).unwrap();
        prop_assert!(
            (forward.statistic - shifted.statistic).abs()
                <= 1e-6 * forward.statistic.abs().max(1.0),
            "shift by {c} moved t from {} to {}", forward.statistic, shifted.statistic
        );
        prop_assert!((forward.p_value - shifted.p_value).abs() <= 1e-6);
    }

    #[test]
    fn partition_covers_without_overlap(
        n in 1usize..=50,
        k in 1usize..=50,
        seed in proptest::option::of(0u64..1000),
    ) {
        let plan = partition(n * k, n, k, seed.map(RngSeed)).unwrap();
        prop_assert_eq!(plan.batches.len(), n);
        let mut seen = vec![false; n * k];
        for batch in &plan.batches {
            prop_assert_eq!(batch.len(), k);
            for &row in batch {
                prop_assert!(!seen[row], "row {} assigned twice", row);
                seen[row] = true;
            }
        }
        prop_assert!(seen.iter().all(|&s| s), "some row never assigned");
    }
}

//! Drift detectors over a [`DetectionTriplet`]: batched paired distances with
//! a t test, a permutation test on one pooled distance, and a per-dimension
//! Kolmogorov-Smirnov screen with Bonferroni correction.
//!
//! All detectors are pure functions of (triplet, config, seed): rerunning with
//! the same inputs reproduces the same report bit for bit.

use alloc::format;
use alloc::vec::Vec;
use core::time::Duration;

use rand::seq::SliceRandom;

use crate::dataset::{partition, DataSet, DetectionTriplet};
use crate::distances::{batch_distance, median_heuristic_sigma, DistanceMetric, MetricKind};
use crate::error::{Error, Result};
use crate::scenario::RngSeed;
use crate::stats::{bonferroni_reject, empirical_p_value, ks_two_sample, paired_t_test, TestResult};

/// Which detection algorithm a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Method {
    /// Batched distances paired through a t test.
    Bd,
    /// Permutation test on a single pooled distance.
    Pt,
    /// Per-dimension Kolmogorov-Smirnov with Bonferroni correction.
    KsBc,
}

impl core::fmt::Display for Method {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Method::Bd => write!(f, "bd"),
            Method::Pt => write!(f, "pt"),
            Method::KsBc => write!(f, "ks-bc"),
        }
    }
}

/// Everything a detector run needs besides the data and the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectorConfig {
    pub method: Method,
    /// Required for `Bd` and `Pt`; ignored by `KsBc`.
    pub metric: Option<DistanceMetric>,
    /// Batch count. `KsBc` ignores it (reports echo n = 1).
    pub n: usize,
    /// Batch size. `KsBc` ignores it (reports echo k = detection rows).
    pub k: usize,
    /// Permutation rounds; consulted by `Pt` only.
    pub permutations: usize,
    /// Significance level in (0, 1).
    pub alpha: f64,
}

pub const DEFAULT_PERMUTATIONS: usize = 100;

impl DetectorConfig {
    pub fn bd(metric: DistanceMetric, n: usize, k: usize, alpha: f64) -> Self {
        DetectorConfig {
            method: Method::Bd,
            metric: Some(metric),
            n,
            k,
            permutations: DEFAULT_PERMUTATIONS,
            alpha,
        }
    }

    pub fn pt(metric: DistanceMetric, n: usize, k: usize, alpha: f64) -> Self {
        DetectorConfig {
            method: Method::Pt,
            metric: Some(metric),
            n,
            k,
            permutations: DEFAULT_PERMUTATIONS,
            alpha,
        }
    }

    /// The n/k fields are placeholders here; [`ks_bc_detect`] echoes the
    /// actual row budget it saw.
    pub fn ks_bc(alpha: f64) -> Self {
        DetectorConfig {
            method: Method::KsBc,
            metric: None,
            n: 1,
            k: 0,
            permutations: DEFAULT_PERMUTATIONS,
            alpha,
        }
    }

    pub fn with_permutations(mut self, rounds: usize) -> Self {
        self.permutations = rounds;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig {
                detail: format!("alpha must lie in (0, 1), got {}", self.alpha),
            });
        }
        match self.method {
            Method::Bd | Method::Pt => {
                let metric = self.metric.as_ref().ok_or(Error::MetricMissing)?;
                metric.validate()?;
                if self.n == 0 || self.k == 0 {
                    return Err(Error::InvalidConfig {
                        detail: format!("batch layout needs n >= 1 and k >= 1, got n={}, k={}", self.n, self.k),
                    });
                }
                if self.method == Method::Pt && self.permutations == 0 {
                    return Err(Error::InvalidConfig {
                        detail: "permutation test needs at least one round".into(),
                    });
                }
            }
            Method::KsBc => {}
        }
        Ok(())
    }
}

/// The paired per-batch distances behind a batched-distance decision.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairedDistances {
    /// Distance from each training batch to its reference batch.
    pub d_tr: Vec<f64>,
    /// Distance from each training batch to its detection batch.
    pub d_td: Vec<f64>,
}

/// Outcome of one detector run.
///
/// `drift_detected` always equals `p_value < config.alpha`. The echoed config
/// carries the metric as actually used: an MMD bandwidth resolved from the
/// data appears in `config.metric`, so the run can be replayed exactly.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DriftReport {
    pub drift_detected: bool,
    pub p_value: f64,
    /// t statistic (BD), the observed pooled distance (PT), or the largest
    /// per-dimension KS statistic (KS-BC).
    pub statistic: f64,
    /// Filled by the batched-distance detector only.
    pub per_batch_distances: Option<PairedDistances>,
    /// Smallest per-dimension KS p-value (KS-BC only), before correction.
    pub ks_min_p: Option<f64>,
    /// Dimension attaining `ks_min_p` (first index on ties; KS-BC only).
    pub ks_argmin_dim: Option<usize>,
    /// Zero when the crate is built without the `std` feature.
    pub wall_time: Duration,
    pub config: DetectorConfig,
}

#[cfg(feature = "std")]
pub(crate) struct Stopwatch(std::time::Instant);
#[cfg(not(feature = "std"))]
pub(crate) struct Stopwatch;

impl Stopwatch {
    #[cfg(feature = "std")]
    pub(crate) fn start() -> Self {
        Stopwatch(std::time::Instant::now())
    }

    #[cfg(not(feature = "std"))]
    pub(crate) fn start() -> Self {
        Stopwatch
    }

    #[cfg(feature = "std")]
    pub(crate) fn elapsed(&self) -> Duration {
        self.0.elapsed()
    }

    #[cfg(not(feature = "std"))]
    pub(crate) fn elapsed(&self) -> Duration {
        Duration::ZERO
    }
}

/// Label mixed into the run seed for the batch shuffle.
const SHUFFLE_LABEL: u64 = 0x5348;
/// Label mixed into the run seed for permutation rounds.
const PERMUTATION_LABEL: u64 = 0x5045;

/// Fills in a data-derived MMD bandwidth where none was given. The bandwidth
/// comes from the pooled training and reference rows only, never the
/// detection window, so a drifting window cannot shift its own yardstick.
fn resolve_metric(
    metric: &DistanceMetric,
    training: &DataSet,
    reference: &DataSet,
) -> Result<DistanceMetric> {
    let mut resolved = *metric;
    if resolved.kind == MetricKind::Mmd && resolved.mmd_sigma.is_none() {
        resolved.mmd_sigma = Some(median_heuristic_sigma(training, reference)?);
    }
    Ok(resolved)
}

fn per_set_batch_size(name: &str, rows: usize, n: usize) -> Result<usize> {
    if rows == 0 || rows % n != 0 {
        return Err(Error::SizeMismatch {
            detail: format!("{name} set has {rows} rows, not divisible into {n} batches"),
        });
    }
    Ok(rows / n)
}

/// Batched-distance detector.
///
/// Each set is split into `cfg.n` seeded batches; batch i of the training set
/// is compared against batch i of the reference set (d_TR) and of the
/// detection set (d_TD), and a paired two-tailed t test on the n pairs
/// decides drift at `cfg.alpha` (strict `<`).
///
/// Set sizes only need to share the batch count: each set's batch size is its
/// row count over n (so `cfg.k` is nominal). EMD additionally needs the
/// reference and detection batch sizes equal, and each pairing with a
/// training batch balanced or 2:1.
///
/// Sets with equal row counts are shuffled by the same seeded permutation.
/// That convention makes swapping the reference and detection sets negate the
/// t statistic exactly (and keep the p-value) whenever those two sets have
/// equal rows and the metric needs no data-derived bandwidth.
pub fn bd_detect(triplet: &DetectionTriplet, cfg: &DetectorConfig, seed: RngSeed) -> Result<DriftReport> {
    let clock = Stopwatch::start();
    cfg.validate()?;
    let metric = cfg.metric.as_ref().ok_or(Error::MetricMissing)?;
    let n = cfg.n;
    let k_t = per_set_batch_size("training", triplet.training.rows(), n)?;
    let k_r = per_set_batch_size("reference", triplet.reference.rows(), n)?;
    let k_d = per_set_batch_size("detection", triplet.detection.rows(), n)?;
    if metric.kind == MetricKind::Emd && k_r != k_d {
        return Err(Error::SizeMismatch {
            detail: format!(
                "EMD pairing needs equal reference and detection batch sizes, got {k_r} vs {k_d}"
            ),
        });
    }
    let resolved = resolve_metric(metric, &triplet.training, &triplet.reference)?;

    let shuffle = seed.derive(&[SHUFFLE_LABEL]);
    let plan_t = partition(triplet.training.rows(), n, k_t, Some(shuffle))?;
    let plan_r = partition(triplet.reference.rows(), n, k_r, Some(shuffle))?;
    let plan_d = partition(triplet.detection.rows(), n, k_d, Some(shuffle))?;

    let mut d_tr = Vec::with_capacity(n);
    let mut d_td = Vec::with_capacity(n);
    for i in 0..n {
        let t_i = triplet.training.select(&plan_t.batches[i]);
        d_tr.push(batch_distance(&resolved, &t_i, &triplet.reference.select(&plan_r.batches[i]))?);
        d_td.push(batch_distance(&resolved, &t_i, &triplet.detection.select(&plan_d.batches[i]))?);
    }
    let test = paired_t_test(&d_td, &d_tr)?;

    let mut echo = *cfg;
    echo.metric = Some(resolved);
    Ok(DriftReport {
        drift_detected: test.p_value < cfg.alpha,
        p_value: test.p_value,
        statistic: test.statistic,
        per_batch_distances: Some(PairedDistances { d_tr, d_td }),
        ks_min_p: None,
        ks_argmin_dim: None,
        wall_time: clock.elapsed(),
        config: echo,
    })
}

/// Permutation-test detector.
///
/// The observed statistic is one distance between the pooled
/// training+reference rows and the detection window. Each of
/// `cfg.permutations` rounds redraws a seeded uniform permutation of all
/// 3nk pooled rows, recomputes the distance between the first 2nk and the
/// remaining nk, and the p-value is the fraction of rounds whose |distance|
/// reaches the observed one. Drift at `p < alpha` (strict).
pub fn permutation_detect(
    triplet: &DetectionTriplet,
    cfg: &DetectorConfig,
    seed: RngSeed,
) -> Result<DriftReport> {
    let clock = Stopwatch::start();
    cfg.validate()?;
    let metric = cfg.metric.as_ref().ok_or(Error::MetricMissing)?;
    let budget = cfg.n * cfg.k;
    for (name, rows) in [
        ("training", triplet.training.rows()),
        ("reference", triplet.reference.rows()),
        ("detection", triplet.detection.rows()),
    ] {
        if rows != budget {
            return Err(Error::SizeMismatch {
                detail: format!("{name} set has {rows} rows, the permutation test expects n*k = {budget}"),
            });
        }
    }
    let resolved = resolve_metric(metric, &triplet.training, &triplet.reference)?;

    let base = triplet.training.vstack(&triplet.reference)?;
    let observed = batch_distance(&resolved, &base, &triplet.detection)?;
    let pooled = base.vstack(&triplet.detection)?;
    let split = base.rows();

    let mut d_perm = Vec::with_capacity(cfg.permutations);
    for round in 0..cfg.permutations {
        let mut rng = seed.derive(&[PERMUTATION_LABEL, round as u64]).rng();
        let mut order: Vec<usize> = (0..pooled.rows()).collect();
        order.shuffle(&mut rng);
        let head = pooled.select(&order[..split]);
        let tail = pooled.select(&order[split..]);
        d_perm.push(batch_distance(&resolved, &head, &tail)?);
    }
    let p_value = empirical_p_value(observed, &d_perm)?;

    let mut echo = *cfg;
    echo.metric = Some(resolved);
    Ok(DriftReport {
        drift_detected: p_value < cfg.alpha,
        p_value,
        statistic: observed,
        per_batch_distances: None,
        ks_min_p: None,
        ks_argmin_dim: None,
        wall_time: clock.elapsed(),
        config: echo,
    })
}

/// Two-sample KS test per dimension: pooled training+reference column against
/// the detection column. Returns one `TestResult` per dimension, in order.
pub fn ks_dimension_profile(triplet: &DetectionTriplet) -> Result<Vec<TestResult>> {
    let pooled = triplet.training.vstack(&triplet.reference)?;
    (0..pooled.dims())
        .map(|j| ks_two_sample(&pooled.column(j), &triplet.detection.column(j)))
        .collect()
}

/// Per-dimension KS detector with Bonferroni correction: drift when the
/// smallest of the m per-dimension p-values falls below alpha/m (strict).
///
/// The reported p-value is the Bonferroni-adjusted minimum, min(1, m*min_p),
/// so the report keeps the `drift ⇔ p < alpha` convention; the raw minimum
/// and its dimension ride along in `ks_min_p` / `ks_argmin_dim`, and the
/// statistic is the largest per-dimension KS distance.
pub fn ks_bc_detect(triplet: &DetectionTriplet, alpha: f64) -> Result<DriftReport> {
    let clock = Stopwatch::start();
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig {
            detail: format!("alpha must lie in (0, 1), got {alpha}"),
        });
    }
    let profile = ks_dimension_profile(triplet)?;
    let p_values: Vec<f64> = profile.iter().map(|r| r.p_value).collect();
    let outcome = bonferroni_reject(&p_values, alpha)?;
    let max_d = profile
        .iter()
        .map(|r| r.statistic)
        .fold(f64::NEG_INFINITY, f64::max);
    let adjusted = (outcome.min_p * profile.len() as f64).min(1.0);
    debug_assert_eq!(
        outcome.reject,
        adjusted < alpha,
        "adjusted minimum disagrees with the per-dimension threshold"
    );

    let mut echo = DetectorConfig::ks_bc(alpha);
    echo.k = triplet.detection.rows();
    Ok(DriftReport {
        drift_detected: outcome.reject,
        p_value: adjusted,
        statistic: max_d,
        per_batch_distances: None,
        ks_min_p: Some(outcome.min_p),
        ks_argmin_dim: Some(outcome.argmin_dim),
        wall_time: clock.elapsed(),
        config: echo,
    })
}

/// Runs whichever detector `cfg.method` names.
pub fn detect(triplet: &DetectionTriplet, cfg: &DetectorConfig, seed: RngSeed) -> Result<DriftReport> {
    match cfg.method {
        Method::Bd => bd_detect(triplet, cfg, seed),
        Method::Pt => permutation_detect(triplet, cfg, seed),
        Method::KsBc => ks_bc_detect(triplet, cfg.alpha),
    }
}

/// What `detector_feature_vector` extracts from each detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum FeatureOutput {
    /// BD p-values plus the smallest raw per-dimension KS p-value.
    PValues,
    /// BD t statistics plus a per-dimension KS distance (see `ks_min_d`).
    Statistics,
}

/// Shared layout for the four detector runs behind one feature vector.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeaturePipeline {
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    /// Explicit MMD bandwidth; None derives one per triplet.
    pub mmd_sigma: Option<f64>,
    /// Neighbour order for the KL estimate.
    pub kl_k: usize,
    /// Statistics mode reports the LARGEST per-dimension KS distance by
    /// default — the discriminative analogue of the smallest p. Setting this
    /// flips to the smallest distance, which is nearly 0 with or without
    /// drift; it exists for comparison, not for use.
    pub ks_min_d: bool,
}

impl FeaturePipeline {
    pub fn new(n: usize, k: usize, alpha: f64) -> Self {
        FeaturePipeline {
            n,
            k,
            alpha,
            mmd_sigma: None,
            kl_k: 1,
            ks_min_d: false,
        }
    }
}

/// Sub-seed labels for the three batched-distance runs inside
/// [`detector_feature_vector`]: `seed.derive(&[LABEL])` with the label for
/// the metric. Public so a caller can reproduce any single coordinate by
/// running that detector alone.
pub const FEATURE_EMD_LABEL: u64 = 1;
pub const FEATURE_MMD_LABEL: u64 = 2;
pub const FEATURE_KL_LABEL: u64 = 3;

/// One observation for the fusion layer: EMD, MMD and KL batched-distance
/// runs plus the per-dimension KS screen, reduced to 4 numbers.
///
/// In `PValues` mode these are the three t-test p-values and the smallest raw
/// per-dimension KS p-value (uncorrected). In `Statistics` mode, the three t
/// statistics and the largest per-dimension KS distance (or smallest, when
/// `pipe.ks_min_d` is set).
pub fn detector_feature_vector(
    triplet: &DetectionTriplet,
    output: FeatureOutput,
    pipe: &FeaturePipeline,
    seed: RngSeed,
) -> Result<[f64; 4]> {
    let mut metrics = [
        (DistanceMetric::emd(), FEATURE_EMD_LABEL),
        (DistanceMetric::mmd(), FEATURE_MMD_LABEL),
        (DistanceMetric::kl_with_order(pipe.kl_k), FEATURE_KL_LABEL),
    ];
    if let Some(sigma) = pipe.mmd_sigma {
        metrics[1].0 = DistanceMetric::mmd_with_sigma(sigma);
    }

    let mut features = [0.0; 4];
    for (slot, (metric, label)) in metrics.iter().enumerate() {
        let cfg = DetectorConfig::bd(*metric, pipe.n, pipe.k, pipe.alpha);
        let report = bd_detect(triplet, &cfg, seed.derive(&[*label]))?;
        features[slot] = match output {
            FeatureOutput::PValues => report.p_value,
            FeatureOutput::Statistics => report.statistic,
        };
    }

    let profile = ks_dimension_profile(triplet)?;
    features[3] = match output {
        FeatureOutput::PValues => profile.iter().map(|r| r.p_value).fold(f64::INFINITY, f64::min),
        FeatureOutput::Statistics => {
            if pipe.ks_min_d {
                profile.iter().map(|r| r.statistic).fold(f64::INFINITY, f64::min)
            } else {
                profile.iter().map(|r| r.statistic).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    };
    Ok(features)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{sample_scenario, ScenarioSpec};

    /// Strips the one field that legitimately differs between reruns.
    fn timeless(mut report: DriftReport) -> DriftReport {
        report.wall_time = Duration::ZERO;
        report
    }

    fn null_triplet(dims: usize, rows: usize, seed: u64) -> DetectionTriplet {
        let spec = ScenarioSpec::no_drift(dims);
        DetectionTriplet::new(
            sample_scenario(&spec, rows, RngSeed(seed)).unwrap(),
            sample_scenario(&spec, rows, RngSeed(seed ^ 0xA5A5)).unwrap(),
            sample_scenario(&spec, rows, RngSeed(seed ^ 0x5A5A)).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn bd_is_deterministic() {
        let triplet = null_triplet(2, 12, 40);
        let cfg = DetectorConfig::bd(DistanceMetric::emd(), 3, 4, 0.05);
        let a = bd_detect(&triplet, &cfg, RngSeed(9)).unwrap();
        let b = bd_detect(&triplet, &cfg, RngSeed(9)).unwrap();
        assert_eq!(timeless(a.clone()), timeless(b));
        assert_eq!(a.drift_detected, a.p_value < cfg.alpha);
        let batches = a.per_batch_distances.as_ref().unwrap();
        assert_eq!(batches.d_tr.len(), 3);
        assert_eq!(batches.d_td.len(), 3);
    }

    #[test]
    fn bd_swap_negates_t_exactly() {
        let triplet = null_triplet(2, 12, 41);
        let swapped = DetectionTriplet::new(
            triplet.training.clone(),
            triplet.detection.clone(),
            triplet.reference.clone(),
        )
        .unwrap();
        for metric in [
            DistanceMetric::emd(),
            DistanceMetric::kl(),
            DistanceMetric::mmd_with_sigma(1.0),
        ] {
            let cfg = DetectorConfig::bd(metric, 3, 4, 0.05);
            let a = bd_detect(&triplet, &cfg, RngSeed(5)).unwrap();
            let b = bd_detect(&swapped, &cfg, RngSeed(5)).unwrap();
            assert_eq!(a.statistic, -b.statistic, "{:?}", metric.kind);
            assert_eq!(a.p_value, b.p_value, "{:?}", metric.kind);
        }
    }

    #[test]
    fn bd_identical_reference_and_detection_degenerates() {
        // Equal row counts share one shuffle, so d_TR == d_TD pairwise and
        // the t test collapses to its zero-spread branch.
        let spec = ScenarioSpec::no_drift(2);
        let training = sample_scenario(&spec, 8, RngSeed(1)).unwrap();
        let window = sample_scenario(&spec, 8, RngSeed(2)).unwrap();
        let triplet = DetectionTriplet::new(training, window.clone(), window).unwrap();
        let cfg = DetectorConfig::bd(DistanceMetric::emd(), 2, 4, 0.05);
        let report = bd_detect(&triplet, &cfg, RngSeed(3)).unwrap();
        assert_eq!(report.p_value, 1.0);
        assert_eq!(report.statistic, 0.0);
        assert!(!report.drift_detected);
    }

    #[test]
    fn bd_requires_metric() {
        let triplet = null_triplet(2, 8, 42);
        let cfg = DetectorConfig {
            method: Method::Bd,
            metric: None,
            n: 2,
            k: 4,
            permutations: DEFAULT_PERMUTATIONS,
            alpha: 0.05,
        };
        assert_eq!(bd_detect(&triplet, &cfg, RngSeed(0)), Err(Error::MetricMissing));
    }

    #[test]
    fn bd_batch_size_rules() {
        let spec = ScenarioSpec::no_drift(2);
        let t = sample_scenario(&spec, 8, RngSeed(1)).unwrap();
        let r = sample_scenario(&spec, 8, RngSeed(2)).unwrap();
        let d_short = sample_scenario(&spec, 4, RngSeed(3)).unwrap();
        let uneven = DetectionTriplet::new(t.clone(), r.clone(), d_short).unwrap();

        // Rows must split evenly into n batches.
        let bad = DetectionTriplet::new(
            t.clone(),
            r.clone(),
            sample_scenario(&spec, 7, RngSeed(4)).unwrap(),
        )
        .unwrap();
        let emd = DetectorConfig::bd(DistanceMetric::emd(), 2, 4, 0.05);
        assert!(matches!(
            bd_detect(&bad, &emd, RngSeed(0)),
            Err(Error::SizeMismatch { .. })
        ));

        // EMD insists on equal reference/detection batch sizes...
        assert!(matches!(
            bd_detect(&uneven, &emd, RngSeed(0)),
            Err(Error::SizeMismatch { .. })
        ));
        // ...while KL takes the 4v4 / 4v2 batches as they come.
        let kl = DetectorConfig::bd(DistanceMetric::kl(), 2, 4, 0.05);
        assert!(bd_detect(&uneven, &kl, RngSeed(0)).is_ok());

        // EMD accepts a 2:1 training/reference imbalance per pair.
        let t_wide = sample_scenario(&spec, 16, RngSeed(5)).unwrap();
        let two_one = DetectionTriplet::new(t_wide, r, t).unwrap();
        assert!(bd_detect(&two_one, &emd, RngSeed(0)).is_ok());
    }

    #[test]
    fn bd_echoes_resolved_bandwidth() {
        let triplet = null_triplet(2, 12, 43);
        let cfg = DetectorConfig::bd(DistanceMetric::mmd(), 3, 4, 0.05);
        let report = bd_detect(&triplet, &cfg, RngSeed(7)).unwrap();
        let expected =
            median_heuristic_sigma(&triplet.training, &triplet.reference).unwrap();
        assert_eq!(report.config.metric.unwrap().mmd_sigma, Some(expected));
    }

    #[test]
    fn pt_is_deterministic_and_p_sits_on_grid() {
        let triplet = null_triplet(2, 10, 44);
        let cfg = DetectorConfig::pt(DistanceMetric::emd(), 2, 5, 0.05).with_permutations(25);
        let a = permutation_detect(&triplet, &cfg, RngSeed(11)).unwrap();
        let b = permutation_detect(&triplet, &cfg, RngSeed(11)).unwrap();
        assert_eq!(timeless(a.clone()), timeless(b));
        let scaled = a.p_value * 25.0;
        assert!((scaled - scaled.round()).abs() < 1e-9, "p = {}", a.p_value);
        assert_eq!(a.drift_detected, a.p_value < cfg.alpha);
    }

    #[test]
    fn pt_gross_shift_is_certain() {
        let null = ScenarioSpec::no_drift(2);
        let shifted = ScenarioSpec::mean_drift(2, 5.0);
        let triplet = DetectionTriplet::new(
            sample_scenario(&null, 20, RngSeed(1)).unwrap(),
            sample_scenario(&null, 20, RngSeed(2)).unwrap(),
            sample_scenario(&shifted, 20, RngSeed(3)).unwrap(),
        )
        .unwrap();
        let cfg = DetectorConfig::pt(DistanceMetric::emd(), 4, 5, 0.05).with_permutations(40);
        let report = permutation_detect(&triplet, &cfg, RngSeed(4)).unwrap();
        assert_eq!(report.p_value, 0.0);
        assert!(report.drift_detected);
    }

    #[test]
    fn pt_checks_row_budget() {
        let spec = ScenarioSpec::no_drift(2);
        let triplet = DetectionTriplet::new(
            sample_scenario(&spec, 10, RngSeed(1)).unwrap(),
            sample_scenario(&spec, 10, RngSeed(2)).unwrap(),
            sample_scenario(&spec, 8, RngSeed(3)).unwrap(),
        )
        .unwrap();
        let cfg = DetectorConfig::pt(DistanceMetric::kl(), 2, 5, 0.05);
        assert!(matches!(
            permutation_detect(&triplet, &cfg, RngSeed(0)),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn ks_bc_equal_samples_never_fire() {
        // Training == reference == detection: the pooled column repeats each
        // detection value, the empirical CDFs coincide, and every dimension
        // reports p = 1.
        let spec = ScenarioSpec::no_drift(3);
        let window = sample_scenario(&spec, 40, RngSeed(6)).unwrap();
        let triplet = DetectionTriplet::new(window.clone(), window.clone(), window).unwrap();
        let report = ks_bc_detect(&triplet, 0.05).unwrap();
        assert_eq!(report.p_value, 1.0);
        assert_eq!(report.ks_min_p, Some(1.0));
        assert!(!report.drift_detected);
        assert_eq!(report.config.k, 40);
    }

    #[test]
    fn ks_bc_flags_a_shifted_dimension() {
        let spec = ScenarioSpec::no_drift(3);
        let t = sample_scenario(&spec, 60, RngSeed(1)).unwrap();
        let r = sample_scenario(&spec, 60, RngSeed(2)).unwrap();
        let base = sample_scenario(&spec, 60, RngSeed(3)).unwrap();
        let mut rows: Vec<Vec<f64>> = (0..base.rows()).map(|i| base.row(i).to_vec()).collect();
        for row in &mut rows {
            row[1] += 4.0;
        }
        let d = DataSet::from_rows(rows).unwrap();
        let triplet = DetectionTriplet::new(t, r, d).unwrap();
        let report = ks_bc_detect(&triplet, 0.05).unwrap();
        assert!(report.drift_detected);
        assert_eq!(report.ks_argmin_dim, Some(1));
        assert!(report.p_value < 1e-6);
        assert!(report.statistic > 0.9); // near-total separation on dim 1
    }

    #[test]
    fn feature_vector_matches_standalone_runs() {
        let triplet = null_triplet(2, 12, 45);
        let pipe = FeaturePipeline::new(3, 4, 0.05);
        let seed = RngSeed(77);
        let stats = detector_feature_vector(&triplet, FeatureOutput::Statistics, &pipe, seed).unwrap();
        let ps = detector_feature_vector(&triplet, FeatureOutput::PValues, &pipe, seed).unwrap();

        let emd_cfg = DetectorConfig::bd(DistanceMetric::emd(), 3, 4, 0.05);
        let emd = bd_detect(&triplet, &emd_cfg, seed.derive(&[FEATURE_EMD_LABEL])).unwrap();
        assert_eq!(stats[0], emd.statistic);
        assert_eq!(ps[0], emd.p_value);

        let mmd_cfg = DetectorConfig::bd(DistanceMetric::mmd(), 3, 4, 0.05);
        let mmd = bd_detect(&triplet, &mmd_cfg, seed.derive(&[FEATURE_MMD_LABEL])).unwrap();
        assert_eq!(stats[1], mmd.statistic);

        let kl_cfg = DetectorConfig::bd(DistanceMetric::kl(), 3, 4, 0.05);
        let kl = bd_detect(&triplet, &kl_cfg, seed.derive(&[FEATURE_KL_LABEL])).unwrap();
        assert_eq!(stats[2], kl.statistic);

        let profile = ks_dimension_profile(&triplet).unwrap();
        let min_p = profile.iter().map(|r| r.p_value).fold(f64::INFINITY, f64::min);
        let max_d = profile.iter().map(|r| r.statistic).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(ps[3], min_p);
        assert_eq!(stats[3], max_d);
        assert!(ps.iter().all(|p| (0.0..=1.0).contains(p)));

        let literal = FeaturePipeline { ks_min_d: true, ..pipe };
        let flipped =
            detector_feature_vector(&triplet, FeatureOutput::Statistics, &literal, seed).unwrap();
        let min_d = profile.iter().map(|r| r.statistic).fold(f64::INFINITY, f64::min);
        assert_eq!(flipped[3], min_d);
        assert_eq!(flipped[..3], stats[..3]);
    }

    #[test]
    fn dispatch_follows_method() {
        let triplet = null_triplet(2, 10, 46);
        let cfg = DetectorConfig::pt(DistanceMetric::emd(), 2, 5, 0.05).with_permutations(10);
        let via_dispatch = detect(&triplet, &cfg, RngSeed(3)).unwrap();
        let direct = permutation_detect(&triplet, &cfg, RngSeed(3)).unwrap();
        // Wall time differs between runs; compare the decision payload.
        assert_eq!(via_dispatch.p_value, direct.p_value);
        assert_eq!(via_dispatch.statistic, direct.statistic);

        let ks = detect(&triplet, &DetectorConfig::ks_bc(0.05), RngSeed(0)).unwrap();
        assert!(ks.ks_min_p.is_some());
    }

    #[test]
    fn config_validation() {
        let ok = DetectorConfig::bd(DistanceMetric::emd(), 2, 4, 0.05);
        assert!(ok.validate().is_ok());
        let mut bad_alpha = ok;
        bad_alpha.alpha = 1.0;
        assert!(matches!(bad_alpha.validate(), Err(Error::InvalidConfig { .. })));
        let mut zero_n = ok;
        zero_n.n = 0;
        assert!(matches!(zero_n.validate(), Err(Error::InvalidConfig { .. })));
        let mut no_rounds = DetectorConfig::pt(DistanceMetric::emd(), 2, 4, 0.05);
        no_rounds.permutations = 0;
        assert!(matches!(no_rounds.validate(), Err(Error::InvalidConfig { .. })));
        assert!(DetectorConfig::ks_bc(0.05).validate().is_ok());
    }
}

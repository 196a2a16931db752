//! Fusing the four detectors into one decision.
//!
//! A training table of prior detection outcomes (feature vector + drift
//! label) feeds one of five combiners: averaging the p-values, a perceptron
//! over them, or a trained classifier (logistic regression, k-nearest
//! neighbours, or a small MLP) over standardized features. Classifiers
//! declare drift when their predicted class probability `p_c` falls to the
//! threshold ξ or below.

mod mlp;

pub use mlp::{train_mlp, Mlp, MLP_PARAM_COUNT};

use alloc::format;
use alloc::vec::Vec;
use core::time::Duration;

// Inherent f64 methods cover std builds; the trait supplies sqrt (via libm)
// when the crate is compiled without std.
#[allow(unused_imports)]
use num_traits::Float;

use crate::dataset::DetectionTriplet;
use crate::detectors::{detector_feature_vector, FeatureOutput, FeaturePipeline, Stopwatch};
use crate::error::{Error, Result};
use crate::scenario::RngSeed;

use mlp::sigmoid;

/// One prior detection outcome: four detector outputs and whether the window
/// had truly drifted.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FusionExample {
    pub features: [f64; 4],
    /// true = the window drifted (z = 1).
    pub label: bool,
}

impl FusionExample {
    fn z(&self) -> f64 {
        if self.label {
            1.0
        } else {
            0.0
        }
    }
}

/// Values at or below this floor are clamped before the log map so that an
/// exact zero (possible for underflowed or resampled p-values) stays finite.
const LOG_FLOOR: f64 = 1e-300;

/// Per-feature z-scoring statistics, fit once on a training table.
///
/// Columns can optionally pass through `ln` first. P-values live on a
/// multiplicative scale: the spread between 1e-2 and 1e-6 carries the real
/// signal yet collapses into a hair-thin sliver under plain z-scoring, where
/// no small downstream model can resolve it. Fitting and applying in the log
/// domain puts those decades at ordinary scale.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Standardizer {
    pub mean: [f64; 4],
    pub sd: [f64; 4],
    /// Map each feature through `ln(max(x, 1e-300))` before centering.
    #[cfg_attr(feature = "serde", serde(default))]
    pub log_domain: bool,
}

impl Standardizer {
    /// Column means and sample (n-1) standard deviations of the table.
    pub fn fit(table: &[FusionExample]) -> Result<Self> {
        Self::fit_in_domain(table, false)
    }

    /// Like [`Standardizer::fit`], but over `ln(max(x, 1e-300))` of each
    /// feature; [`Standardizer::apply`] then uses the same map.
    pub fn fit_log(table: &[FusionExample]) -> Result<Self> {
        Self::fit_in_domain(table, true)
    }

    fn fit_in_domain(table: &[FusionExample], log_domain: bool) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::EmptyTable);
        }
        let map = |x: f64| if log_domain { x.max(LOG_FLOOR).ln() } else { x };
        let n = table.len() as f64;
        let mut mean = [0.0; 4];
        for ex in table {
            for j in 0..4 {
                mean[j] += map(ex.features[j]);
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut sd = [0.0; 4];
        if table.len() > 1 {
            for ex in table {
                for j in 0..4 {
                    let d = map(ex.features[j]) - mean[j];
                    sd[j] += d * d;
                }
            }
            for s in &mut sd {
                *s = (*s / (n - 1.0)).sqrt();
            }
        }
        Ok(Standardizer {
            mean,
            sd,
            log_domain,
        })
    }

    /// No-op scaling (mean 0, sd 1) for combiners that work on raw p-values.
    pub fn identity() -> Self {
        Standardizer {
            mean: [0.0; 4],
            sd: [1.0; 4],
            log_domain: false,
        }
    }

    /// Z-scores a feature vector with the stored statistics. A feature whose
    /// fitted sd is 0 carries no information and maps to 0.
    pub fn apply(&self, features: [f64; 4]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for j in 0..4 {
            let x = if self.log_domain {
                features[j].max(LOG_FLOOR).ln()
            } else {
                features[j]
            };
            if self.sd[j] > 0.0 {
                out[j] = (x - self.mean[j]) / self.sd[j];
            }
        }
        out
    }
}

/// The five ways of turning a feature vector into a decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum FusionKind {
    Avg,
    Pl,
    Lr,
    Knn,
    Mlp,
}

impl core::fmt::Display for FusionKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FusionKind::Avg => write!(f, "avg"),
            FusionKind::Pl => write!(f, "pl"),
            FusionKind::Lr => write!(f, "lr"),
            FusionKind::Knn => write!(f, "knn"),
            FusionKind::Mlp => write!(f, "mlp"),
        }
    }
}

/// The trainable subset of [`FusionKind`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ClassifierKind {
    Lr,
    Knn,
    Mlp,
}

/// Which class's predicted probability plays the role of `p_c` in the
/// `p_c <= ξ` rule. With the no-drift class (the default), small ξ means a
/// conservative detector; reading `p_c` as the drift-class probability is
/// also available, though with ξ near 1 it fires on almost everything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ProbabilityClass {
    #[default]
    NoDrift,
    Drift,
}

/// Model parameters, one variant per combiner.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ModelParams {
    Avg,
    Pl { w: [f64; 4] },
    Lr { w: [f64; 4], bias: f64 },
    Knn {
        neighbours: usize,
        /// Stored with already-standardized features.
        examples: Vec<FusionExample>,
    },
    Mlp(Mlp),
}

/// A trained (or parameter-free) fusion combiner.
///
/// `threshold` is ξ for the classifiers and α for AVG/PL. AVG and PL work on
/// raw p-values and keep an identity standardizer.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FusionModel {
    pub output_type: FeatureOutput,
    pub standardizer: Standardizer,
    pub threshold: f64,
    pub pc_class: ProbabilityClass,
    pub params: ModelParams,
}

/// Decision threshold defaults for standalone training. Where the
/// false-positive rate matters, prefer re-fitting ξ against held-out
/// no-drift features with [`calibrate_threshold`]; the experiment harness
/// does exactly that.
pub const DEFAULT_XI_LR: f64 = 0.8;
pub const DEFAULT_XI_KNN: f64 = 0.85;
pub const DEFAULT_XI_MLP: f64 = 0.8;

impl FusionModel {
    pub fn kind(&self) -> FusionKind {
        match self.params {
            ModelParams::Avg => FusionKind::Avg,
            ModelParams::Pl { .. } => FusionKind::Pl,
            ModelParams::Lr { .. } => FusionKind::Lr,
            ModelParams::Knn { .. } => FusionKind::Knn,
            ModelParams::Mlp(_) => FusionKind::Mlp,
        }
    }

    /// The p-value-averaging combiner needs no training at all.
    pub fn avg(alpha: f64) -> Self {
        FusionModel {
            output_type: FeatureOutput::PValues,
            standardizer: Standardizer::identity(),
            threshold: alpha,
            pc_class: ProbabilityClass::NoDrift,
            params: ModelParams::Avg,
        }
    }

    /// Predicted probability of `pc_class` for a RAW feature vector; the
    /// stored standardizer is applied here. Only classifiers expose one.
    pub fn p_c(&self, features: [f64; 4]) -> Result<f64> {
        let x = self.standardizer.apply(features);
        let drift_prob = match &self.params {
            ModelParams::Lr { w, bias } => sigmoid(dot(w, &x) + bias),
            ModelParams::Mlp(net) => net.prob_drift(&x),
            ModelParams::Knn {
                neighbours,
                examples,
            } => knn_drift_fraction(examples, *neighbours, &x),
            ModelParams::Avg | ModelParams::Pl { .. } => {
                return Err(Error::InvalidConfig {
                    detail: "only trained classifiers expose a class probability".into(),
                })
            }
        };
        Ok(match self.pc_class {
            ProbabilityClass::Drift => drift_prob,
            ProbabilityClass::NoDrift => 1.0 - drift_prob,
        })
    }
}

fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn require_both_labels(table: &[FusionExample]) -> Result<()> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let drifted = table.iter().filter(|e| e.label).count();
    if drifted == 0 || drifted == table.len() {
        return Err(Error::SingleClassTable);
    }
    Ok(())
}

/// Runs the four detectors over each prior triplet and packs the outputs
/// with the known labels. Example i uses the sub-seed `seed.derive(&[i])`.
pub fn build_training_table(
    priors: &[(DetectionTriplet, bool)],
    output: FeatureOutput,
    pipe: &FeaturePipeline,
    seed: RngSeed,
) -> Result<Vec<FusionExample>> {
    if priors.is_empty() {
        return Err(Error::EmptyTable);
    }
    priors
        .iter()
        .enumerate()
        .map(|(i, (triplet, label))| {
            detector_feature_vector(triplet, output, pipe, seed.derive(&[i as u64])).map(
                |features| FusionExample {
                    features,
                    label: *label,
                },
            )
        })
        .collect()
}

/// Drift iff the mean of the four p-values is strictly below alpha.
pub fn avg_decide(p_values: &[f64; 4], alpha: f64) -> bool {
    let mean = p_values.iter().sum::<f64>() / 4.0;
    mean < alpha
}

/// Classical perceptron over the p-values: prediction 1{w·p + α > 0} with
/// the bias fixed at α (it is part of the decision rule, not a learned
/// parameter). Unit learning rate; updates run until a mistake-free epoch or
/// the 1000-epoch cap, whichever is first.
///
/// On overlapping classes the online weights never settle — they cycle, and
/// the endpoint is an arbitrary phase of that cycle, often one that fires on
/// plain no-drift inputs. So the returned weights are pocketed: the
/// end-of-epoch iterate with the fewest total mistakes among those that
/// never fire on a no-drift training example (the final weights if no
/// iterate qualifies).
pub fn train_perceptron(table: &[FusionExample], alpha: f64) -> Result<FusionModel> {
    require_both_labels(table)?;
    const MAX_EPOCHS: usize = 1000;
    let mut w = [0.0; 4];
    let mut pocket: Option<([f64; 4], usize)> = None;
    for _ in 0..MAX_EPOCHS {
        let mut online_mistakes = 0usize;
        for ex in table {
            let fired = dot(&w, &ex.features) + alpha > 0.0;
            let z_hat = if fired { 1.0 } else { 0.0 };
            let step = ex.z() - z_hat;
            if step != 0.0 {
                online_mistakes += 1;
                for j in 0..4 {
                    w[j] += step * ex.features[j];
                }
            }
        }
        let mut mistakes = 0usize;
        let mut null_fires = 0usize;
        for ex in table {
            let fired = dot(&w, &ex.features) + alpha > 0.0;
            if fired != ex.label {
                mistakes += 1;
            }
            if fired && !ex.label {
                null_fires += 1;
            }
        }
        if null_fires == 0 && pocket.map_or(true, |(_, m)| mistakes < m) {
            pocket = Some((w, mistakes));
        }
        if online_mistakes == 0 {
            break;
        }
    }
    let w = pocket.map_or(w, |(pw, _)| pw);
    Ok(FusionModel {
        output_type: FeatureOutput::PValues,
        standardizer: Standardizer::identity(),
        threshold: alpha,
        pc_class: ProbabilityClass::NoDrift,
        params: ModelParams::Pl { w },
    })
}

/// Applies a trained perceptron to a p-value vector.
pub fn pl_decide(model: &FusionModel, p_values: &[f64; 4]) -> Result<bool> {
    match &model.params {
        ModelParams::Pl { w } => Ok(dot(w, p_values) + model.threshold > 0.0),
        _ => Err(Error::InvalidConfig {
            detail: format!("pl_decide needs a perceptron model, got {}", model.kind()),
        }),
    }
}

/// Knobs for [`train_classifier`]. The defaults are the pinned values every
/// reported number uses; they exist as fields so experiments can vary them.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainingOptions {
    pub output_type: FeatureOutput,
    /// Learning rate / iteration count for logistic regression.
    pub lr_rate: f64,
    pub lr_iters: usize,
    pub knn_neighbours: usize,
    /// Learning rate / epoch count for the MLP.
    pub mlp_rate: f64,
    pub mlp_epochs: usize,
    /// Decision threshold ξ; None picks the per-kind default.
    pub threshold: Option<f64>,
    pub pc_class: ProbabilityClass,
}

impl Default for TrainingOptions {
    fn default() -> Self {
        TrainingOptions {
            output_type: FeatureOutput::PValues,
            lr_rate: 0.1,
            lr_iters: 2000,
            knn_neighbours: 10,
            mlp_rate: 0.1,
            mlp_epochs: 1000,
            threshold: None,
            pc_class: ProbabilityClass::NoDrift,
        }
    }
}

/// Logistic regression by full-batch gradient descent on the mean
/// cross-entropy, zero-initialized. Returns (weights, bias).
fn train_logistic(xs: &[[f64; 4]], zs: &[f64], rate: f64, iters: usize) -> ([f64; 4], f64) {
    let mut w = [0.0; 4];
    let mut bias = 0.0;
    let scale = rate / xs.len() as f64;
    for _ in 0..iters {
        let mut gw = [0.0; 4];
        let mut gb = 0.0;
        for (x, z) in xs.iter().zip(zs) {
            let residual = sigmoid(dot(&w, x) + bias) - z;
            for j in 0..4 {
                gw[j] += residual * x[j];
            }
            gb += residual;
        }
        for j in 0..4 {
            w[j] -= scale * gw[j];
        }
        bias -= scale * gb;
    }
    (w, bias)
}

/// Fraction of the `neighbours` nearest stored examples (Euclidean distance,
/// ties broken by stored order) that are labeled drift.
fn knn_drift_fraction(examples: &[FusionExample], neighbours: usize, x: &[f64; 4]) -> f64 {
    let mut order: Vec<(f64, usize)> = examples
        .iter()
        .enumerate()
        .map(|(i, ex)| {
            let d: f64 = ex
                .features
                .iter()
                .zip(x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (d, i)
        })
        .collect();
    order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let take = neighbours.min(order.len());
    let drifted = order[..take]
        .iter()
        .filter(|(_, i)| examples[*i].label)
        .count();
    drifted as f64 / take as f64
}

/// Fits one of the three classifiers on the table (standardizing internally,
/// in the log domain for p-value features) and wraps it with its decision
/// threshold. Only the MLP consumes the seed.
pub fn train_classifier(
    table: &[FusionExample],
    kind: ClassifierKind,
    opts: &TrainingOptions,
    seed: RngSeed,
) -> Result<FusionModel> {
    require_both_labels(table)?;
    let standardizer = match opts.output_type {
        FeatureOutput::PValues => Standardizer::fit_log(table)?,
        FeatureOutput::Statistics => Standardizer::fit(table)?,
    };
    let xs: Vec<[f64; 4]> = table.iter().map(|e| standardizer.apply(e.features)).collect();
    let zs: Vec<f64> = table.iter().map(FusionExample::z).collect();

    let (params, default_xi) = match kind {
        ClassifierKind::Lr => {
            let (w, bias) = train_logistic(&xs, &zs, opts.lr_rate, opts.lr_iters);
            (ModelParams::Lr { w, bias }, DEFAULT_XI_LR)
        }
        ClassifierKind::Knn => {
            if opts.knn_neighbours == 0 || opts.knn_neighbours > table.len() {
                return Err(Error::InvalidConfig {
                    detail: format!(
                        "neighbour count {} does not fit a table of {} examples",
                        opts.knn_neighbours,
                        table.len()
                    ),
                });
            }
            let examples = xs
                .iter()
                .zip(table)
                .map(|(x, ex)| FusionExample {
                    features: *x,
                    label: ex.label,
                })
                .collect();
            (
                ModelParams::Knn {
                    neighbours: opts.knn_neighbours,
                    examples,
                },
                DEFAULT_XI_KNN,
            )
        }
        ClassifierKind::Mlp => {
            let (net, _history) = train_mlp(&xs, &zs, opts.mlp_rate, opts.mlp_epochs, seed);
            (ModelParams::Mlp(net), DEFAULT_XI_MLP)
        }
    };

    let threshold = opts.threshold.unwrap_or(default_xi);
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidConfig {
            detail: format!("threshold must lie in (0, 1), got {threshold}"),
        });
    }
    Ok(FusionModel {
        output_type: opts.output_type,
        standardizer,
        threshold,
        pc_class: opts.pc_class,
        params,
    })
}

/// Outcome of one fusion decision over a triplet.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FusionReport {
    pub drift_detected: bool,
    /// What was compared against the threshold: the class probability `p_c`
    /// (classifiers), the mean p-value (AVG), or the margin w·p + α (PL,
    /// compared against 0).
    pub score: f64,
    pub threshold: f64,
    /// The four detector outputs, before standardization.
    pub features: [f64; 4],
    pub kind: FusionKind,
    pub output_type: FeatureOutput,
    /// Zero when the crate is built without the `std` feature.
    pub wall_time: Duration,
}

/// Runs the four detectors on the triplet and applies the model: classifiers
/// detect drift when `p_c <= ξ` (at ξ itself included), AVG when the mean
/// p-value is below α, PL when the perceptron fires.
pub fn classifier_detect(
    model: &FusionModel,
    triplet: &DetectionTriplet,
    pipe: &FeaturePipeline,
    seed: RngSeed,
) -> Result<FusionReport> {
    let clock = Stopwatch::start();
    let features = detector_feature_vector(triplet, model.output_type, pipe, seed)?;
    let (drift_detected, score) = match &model.params {
        ModelParams::Avg => {
            let mean = features.iter().sum::<f64>() / 4.0;
            (mean < model.threshold, mean)
        }
        ModelParams::Pl { w } => {
            let margin = dot(w, &features) + model.threshold;
            (margin > 0.0, margin)
        }
        _ => {
            let pc = model.p_c(features)?;
            (pc <= model.threshold, pc)
        }
    };
    Ok(FusionReport {
        drift_detected,
        score,
        threshold: model.threshold,
        features,
        kind: model.kind(),
        output_type: model.output_type,
        wall_time: clock.elapsed(),
    })
}

/// Picks the largest threshold ξ whose false-positive rate over a held-out
/// null sample stays at or below `target_fpr` (classifiers fire at
/// `p_c <= ξ`, so the rate grows with ξ). Candidates sit strictly between
/// neighbouring observed `p_c` values; if even the smallest candidate fires
/// too often, the one with the lowest rate is returned instead.
///
/// `null_features` are raw detector feature vectors from triplets known to
/// be drift-free.
pub fn calibrate_threshold(
    model: &FusionModel,
    null_features: &[[f64; 4]],
    target_fpr: f64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&target_fpr) {
        return Err(Error::InvalidConfig {
            detail: format!("target rate must lie in [0, 1), got {target_fpr}"),
        });
    }
    if null_features.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut pcs = null_features
        .iter()
        .map(|f| model.p_c(*f))
        .collect::<Result<Vec<f64>>>()?;
    pcs.sort_unstable_by(f64::total_cmp);
    let count = pcs.len() as f64;
    let rate_at = |xi: f64| pcs.iter().filter(|&&pc| pc <= xi).count() as f64 / count;

    let mut candidates = Vec::with_capacity(pcs.len() + 1);
    candidates.push(0.5 * pcs[0]); // below every observation
    for pair in pcs.windows(2) {
        if pair[1] > pair[0] {
            candidates.push(0.5 * (pair[0] + pair[1]));
        }
    }
    candidates.push(0.5 * (pcs[pcs.len() - 1] + 1.0)); // above every observation
    candidates.retain(|c| *c > 0.0 && *c < 1.0);
    if candidates.is_empty() {
        // every p_c was at or above 1; any threshold below 1 never fires
        return Ok(0.5);
    }

    let feasible = candidates
        .iter()
        .copied()
        .filter(|&c| rate_at(c) <= target_fpr)
        .fold(f64::NEG_INFINITY, f64::max);
    if feasible.is_finite() {
        return Ok(feasible);
    }
    let mut best = candidates[0];
    let mut best_rate = rate_at(best);
    for &c in &candidates[1..] {
        let r = rate_at(c);
        if r < best_rate || (r == best_rate && c < best) {
            best = c;
            best_rate = r;
        }
    }
    Ok(best)
}

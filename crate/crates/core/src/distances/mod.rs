//! Statistical distances between datasets: earth mover's distance (exact
//! optimal transport), maximum mean discrepancy, and a k-NN Kullback-Leibler
//! estimate, plus the supporting cost matrix and bandwidth heuristic.

mod assignment;
mod emd;
mod kl;
mod mmd;

pub use emd::{emd, emd_unbalanced_uniform};
pub use kl::kl_knn_estimate;
pub use mmd::mmd_u_statistic;

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::index::sample as sample_indices;

use crate::dataset::DataSet;
use crate::error::{Error, Result};
use crate::scenario::RngSeed;

/// Squared Euclidean distance between two equally long rows.
pub(crate) fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum()
}

/// Dense matrix of pairwise Euclidean distances.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

/// Entry (i, j) = Euclidean distance between row i of `a` and row j of `b`.
pub fn cost_matrix(a: &DataSet, b: &DataSet) -> Result<CostMatrix> {
    if a.dims() != b.dims() {
        return Err(Error::DimMismatch {
            expected: a.dims(),
            got: b.dims(),
        });
    }
    let mut data = Vec::with_capacity(a.rows() * b.rows());
    for i in 0..a.rows() {
        let x = a.row(i);
        for j in 0..b.rows() {
            data.push(sq_dist(x, b.row(j)).sqrt());
        }
    }
    Ok(CostMatrix {
        rows: a.rows(),
        cols: b.rows(),
        data,
    })
}

/// Cap on pooled rows entering the median heuristic; larger pools are
/// subsampled (seeded, so the function stays a pure function of its inputs).
const MEDIAN_HEURISTIC_CAP: usize = 2000;
const MEDIAN_HEURISTIC_SEED: RngSeed = RngSeed(0x6d65646961); /* "media" */

/// RBF bandwidth from the median heuristic: the median pairwise Euclidean
/// distance over the pooled rows of `a` and `b` (midpoint convention on even
/// counts). A zero median falls back to the smallest nonzero distance; if
/// every pair coincides there is no usable scale.
pub fn median_heuristic_sigma(a: &DataSet, b: &DataSet) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimMismatch {
            expected: a.dims(),
            got: b.dims(),
        });
    }
    let total = a.rows() + b.rows();
    if total < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: total,
        });
    }
    let fetch = |i: usize| -> &[f64] {
        if i < a.rows() {
            a.row(i)
        } else {
            b.row(i - a.rows())
        }
    };
    let pooled: Vec<usize> = if total > MEDIAN_HEURISTIC_CAP {
        let mut rng = MEDIAN_HEURISTIC_SEED.rng();
        let mut picked = sample_indices(&mut rng, total, MEDIAN_HEURISTIC_CAP).into_vec();
        picked.sort_unstable();
        picked
    } else {
        (0..total).collect()
    };

    let n = pooled.len();
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        let x = fetch(pooled[i]);
        for &pj in &pooled[i + 1..] {
            dists.push(sq_dist(x, fetch(pj)).sqrt());
        }
    }
    let len = dists.len();
    let median = if len % 2 == 1 {
        let (_, mid, _) = dists.select_nth_unstable_by(len / 2, f64::total_cmp);
        *mid
    } else {
        let (lower, mid, _) = dists.select_nth_unstable_by(len / 2, f64::total_cmp);
        let hi = *mid;
        let lo = lower
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    };
    if median > 0.0 {
        return Ok(median);
    }
    let smallest_nonzero = dists
        .iter()
        .copied()
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if smallest_nonzero.is_finite() {
        Ok(smallest_nonzero)
    } else {
        Err(Error::DegenerateData)
    }
}

/// Which distance a detector runs on, plus metric-specific knobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MetricKind {
    Emd,
    Mmd,
    Kl,
}

impl core::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MetricKind::Emd => write!(f, "emd"),
            MetricKind::Mmd => write!(f, "mmd"),
            MetricKind::Kl => write!(f, "kl"),
        }
    }
}

/// A metric choice with its knobs: RBF bandwidth for MMD (None = derive from
/// data with [`median_heuristic_sigma`]), neighbour order for KL.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistanceMetric {
    pub kind: MetricKind,
    pub mmd_sigma: Option<f64>,
    pub kl_k: usize,
}

impl DistanceMetric {
    pub fn emd() -> Self {
        DistanceMetric {
            kind: MetricKind::Emd,
            mmd_sigma: None,
            kl_k: 1,
        }
    }

    pub fn mmd() -> Self {
        DistanceMetric {
            kind: MetricKind::Mmd,
            mmd_sigma: None,
            kl_k: 1,
        }
    }

    pub fn mmd_with_sigma(sigma: f64) -> Self {
        DistanceMetric {
            kind: MetricKind::Mmd,
            mmd_sigma: Some(sigma),
            kl_k: 1,
        }
    }

    pub fn kl() -> Self {
        DistanceMetric {
            kind: MetricKind::Kl,
            mmd_sigma: None,
            kl_k: 1,
        }
    }

    pub fn kl_with_order(k_nn: usize) -> Self {
        DistanceMetric {
            kind: MetricKind::Kl,
            mmd_sigma: None,
            kl_k: k_nn,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.mmd_sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidConfig {
                    detail: alloc::format!("mmd_sigma must be a positive real, got {s}"),
                });
            }
        }
        if self.kl_k == 0 {
            return Err(Error::InvalidConfig {
                detail: "kl_k must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Distance dispatch used by the detectors. For MMD the bandwidth must
/// already be resolved (`mmd_sigma` set). EMD accepts balanced rows or a 2:1
/// ratio in either direction; MMD and KL take any sizes meeting their own
/// minimums.
pub fn batch_distance(metric: &DistanceMetric, a: &DataSet, b: &DataSet) -> Result<f64> {
    match metric.kind {
        MetricKind::Emd => {
            if a.rows() == b.rows() {
                emd(a, b)
            } else if a.rows() == 2 * b.rows() {
                emd_unbalanced_uniform(a, b)
            } else if b.rows() == 2 * a.rows() {
                emd_unbalanced_uniform(b, a)
            } else {
                Err(Error::SizeMismatch {
                    detail: alloc::format!(
                        "EMD needs balanced or 2:1 batch sizes, got {} vs {}",
                        a.rows(),
                        b.rows()
                    ),
                })
            }
        }
        MetricKind::Mmd => {
            let sigma = metric.mmd_sigma.ok_or(Error::InvalidConfig {
                detail: "MMD bandwidth not resolved before batch_distance".into(),
            })?;
            mmd_u_statistic(a, b, sigma)
        }
        MetricKind::Kl => kl_knn_estimate(a, b, metric.kl_k),
    }
}

//! Drift detection without labels, built on distances between batches of data.
//!
//! The crate is organized bottom-up:
//!
//! * [`dataset`] - row-major numeric datasets, the train/reference/detection
//!   triplet, and batch partitioning;
//! * [`scenario`] - seeded Gaussian samplers for the synthetic drift scenarios
//!   (mean, variance, covariance shifts);
//! * [`distances`] - earth mover's distance, MMD, and a k-NN Kullback-Leibler
//!   estimate between datasets;
//! * [`stats`] - the paired t test, two-sample Kolmogorov-Smirnov test,
//!   Bonferroni correction, and empirical p-values;
//! * [`detectors`] - the batched-distance detector, the permutation-test
//!   baseline, and the per-dimension KS detector;
//! * [`fusion`] - combining the detectors' outputs with simple trained models.
//!
//! Everything is deterministic given a seed. The crate is `no_std`-compatible
//! (requires `alloc`); the `std` feature only adds wall-clock timing to
//! reports.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod dataset;
pub mod detectors;
pub mod distances;
pub mod error;
pub mod fusion;
pub mod scenario;
pub mod stats;

pub use dataset::{BatchPlan, DataSet, DetectionTriplet};
pub use detectors::{DetectorConfig, DriftReport, Method};
pub use distances::{DistanceMetric, MetricKind};
pub use error::{Error, Result};
pub use fusion::{FusionKind, FusionModel, FusionReport};
pub use scenario::{DriftKind, RngSeed, ScenarioSpec};

//! Seeded samplers for the synthetic drift scenarios.
//!
//! All scenarios draw i.i.d. rows from a multivariate Gaussian:
//!
//! * no drift: N(0, I)
//! * mean drift: N(zeta * 1, I)
//! * variance drift: N(mu, zeta * I), zeta >= 1
//! * covariance drift: N(mu, S) with unit diagonal and every off-diagonal
//!   entry zeta
//!
//! Covariance drift uses a one-factor construction, x = mu + sqrt(zeta) * g * 1
//! + sqrt(1 - zeta) * z with scalar g and vector z standard normal, which has
//! exactly the target covariance and costs O(m) per row. mu defaults to the
//! zero vector; `mean_override` swaps in another center for the variance and
//! covariance scenarios.

use alloc::format;
use alloc::vec::Vec;

// Brings sqrt and friends into scope for no_std builds; std's inherent
// methods shadow it otherwise.
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::DataSet;
use crate::error::{Error, Result};

/// A 64-bit seed. Equal seeds give bit-identical streams everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RngSeed(pub u64);

/// SplitMix64 finalizer; a stable stateless mixer, unlike the std hasher.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngSeed {
    /// Derives an independent child seed from this one and a list of labels
    /// (cell index, trial index, stream tag, ...). Deterministic and
    /// platform-stable.
    pub fn derive(self, labels: &[u64]) -> RngSeed {
        let mut state = splitmix64(self.0);
        for &label in labels {
            state = splitmix64(state ^ splitmix64(label));
        }
        RngSeed(state)
    }

    /// A fresh generator seeded from this value.
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

/// Which of the synthetic scenarios to sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DriftKind {
    NoDrift,
    MeanDrift,
    VarDrift,
    CovDrift,
}

/// A fully specified sampling scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: DriftKind,
    pub zeta: f64,
    pub dims: usize,
    /// Replacement center for the variance/covariance scenarios (default 0).
    pub mean_override: Option<Vec<f64>>,
}

impl ScenarioSpec {
    pub fn no_drift(dims: usize) -> Self {
        ScenarioSpec {
            kind: DriftKind::NoDrift,
            zeta: 0.0,
            dims,
            mean_override: None,
        }
    }

    pub fn mean_drift(dims: usize, zeta: f64) -> Self {
        ScenarioSpec {
            kind: DriftKind::MeanDrift,
            zeta,
            dims,
            mean_override: None,
        }
    }

    pub fn var_drift(dims: usize, zeta: f64) -> Self {
        ScenarioSpec {
            kind: DriftKind::VarDrift,
            zeta,
            dims,
            mean_override: None,
        }
    }

    pub fn cov_drift(dims: usize, zeta: f64) -> Self {
        ScenarioSpec {
            kind: DriftKind::CovDrift,
            zeta,
            dims,
            mean_override: None,
        }
    }

    /// Centers a variance or covariance scenario somewhere other than 0.
    pub fn with_mean(mut self, mean: Vec<f64>) -> Result<Self> {
        if !matches!(self.kind, DriftKind::VarDrift | DriftKind::CovDrift) {
            return Err(Error::InvalidConfig {
                detail: format!("mean_override applies to variance/covariance scenarios, not {:?}", self.kind),
            });
        }
        if mean.len() != self.dims {
            return Err(Error::DimMismatch {
                expected: self.dims,
                got: mean.len(),
            });
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig {
                detail: "mean_override contains a non-finite entry".into(),
            });
        }
        self.mean_override = Some(mean);
        Ok(self)
    }

    /// Checks the magnitude against the ranges each scenario admits.
    pub fn validate(&self) -> Result<()> {
        if self.dims == 0 {
            return Err(Error::EmptyDataset);
        }
        let z = self.zeta;
        if !z.is_finite() {
            return Err(Error::InvalidZeta {
                detail: format!("zeta = {z} is not finite"),
            });
        }
        match self.kind {
            DriftKind::NoDrift => Ok(()),
            DriftKind::MeanDrift => {
                if z < 0.0 {
                    Err(Error::InvalidZeta {
                        detail: format!("mean drift needs zeta >= 0, got {z}"),
                    })
                } else {
                    Ok(())
                }
            }
            DriftKind::VarDrift => {
                if z < 1.0 {
                    Err(Error::InvalidZeta {
                        detail: format!("variance drift needs zeta >= 1, got {z}"),
                    })
                } else {
                    Ok(())
                }
            }
            DriftKind::CovDrift => {
                if !(0.0..1.0).contains(&z) {
                    Err(Error::InvalidZeta {
                        detail: format!("covariance drift needs 0 <= zeta < 1, got {z}"),
                    })
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Draws `count` i.i.d. rows for the scenario. Deterministic in the seed; the
/// generator walks rows in order, and within a covariance-drift row the shared
/// factor is drawn before the per-coordinate noise.
pub fn sample_scenario(spec: &ScenarioSpec, count: usize, seed: RngSeed) -> Result<DataSet> {
    spec.validate()?;
    if count == 0 {
        return Err(Error::EmptyDataset);
    }
    let m = spec.dims;
    let mut rng = seed.rng();
    let mut values = Vec::with_capacity(count * m);
    let zero_mean = alloc::vec![0.0; m];
    let mean: &[f64] = spec.mean_override.as_deref().unwrap_or(&zero_mean);
    match spec.kind {
        DriftKind::NoDrift => {
            for _ in 0..count * m {
                values.push(rng.sample::<f64, _>(StandardNormal));
            }
        }
        DriftKind::MeanDrift => {
            for _ in 0..count * m {
                values.push(spec.zeta + rng.sample::<f64, _>(StandardNormal));
            }
        }
        DriftKind::VarDrift => {
            let scale = spec.zeta.sqrt();
            for _ in 0..count {
                for mu in mean {
                    values.push(mu + scale * rng.sample::<f64, _>(StandardNormal));
                }
            }
        }
        DriftKind::CovDrift => {
            let shared = spec.zeta.sqrt();
            let own = (1.0 - spec.zeta).sqrt();
            for _ in 0..count {
                let g: f64 = rng.sample(StandardNormal);
                for mu in mean {
                    values.push(mu + shared * g + own * rng.sample::<f64, _>(StandardNormal));
                }
            }
        }
    }
    DataSet::from_vec(count, m, values)
}

//! Row-major numeric datasets and batch partitioning.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scenario::RngSeed;

/// A dense table of real-valued observations, one row per data point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DataSet {
    rows: usize,
    dims: usize,
    values: Vec<f64>,
}

impl DataSet {
    /// Builds a dataset from a row-major buffer.
    ///
    /// Rejects empty shapes, buffers whose length is not `rows * dims`, and
    /// any non-finite entry.
    pub fn from_vec(rows: usize, dims: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || dims == 0 {
            return Err(Error::EmptyDataset);
        }
        if values.len() != rows * dims {
            return Err(Error::SizeMismatch {
                detail: format!(
                    "buffer holds {} values, shape {rows}x{dims} needs {}",
                    values.len(),
                    rows * dims
                ),
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: i / dims,
                    col: i % dims,
                });
            }
        }
        Ok(DataSet { rows, dims, values })
    }

    /// Builds a dataset from one `Vec` per row. All rows must share a length.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dims = rows.first().map(Vec::len).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * dims);
        for row in &rows {
            if row.len() != dims {
                return Err(Error::DimMismatch {
                    expected: dims,
                    got: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        DataSet::from_vec(rows.len(), dims, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dims..(i + 1) * self.dims]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Copies one column out of the table.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.values[i * self.dims + j]).collect()
    }

    /// Stacks `self` on top of `other`. Column counts must agree.
    pub fn vstack(&self, other: &DataSet) -> Result<DataSet> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch {
                expected: self.dims,
                got: other.dims,
            });
        }
        let mut values = Vec::with_capacity((self.rows + other.rows) * self.dims);
        values.extend_from_slice(&self.values);
        values.extend_from_slice(&other.values);
        Ok(DataSet {
            rows: self.rows + other.rows,
            dims: self.dims,
            values,
        })
    }

    /// Copies the given rows (in order) into a new dataset.
    ///
    /// Panics if an index is out of range; callers pass indices produced by
    /// [`partition`], which are valid by construction.
    pub fn select(&self, indices: &[usize]) -> DataSet {
        let mut values = Vec::with_capacity(indices.len() * self.dims);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        DataSet {
            rows: indices.len(),
            dims: self.dims,
            values,
        }
    }
}

/// The three datasets a detector compares: data the model was trained on, a
/// reference window known to match it, and the window under test.
#[derive(Debug, Clone)]
pub struct DetectionTriplet {
    pub training: DataSet,
    pub reference: DataSet,
    pub detection: DataSet,
}

impl DetectionTriplet {
    /// Groups three datasets, requiring a common column count.
    pub fn new(training: DataSet, reference: DataSet, detection: DataSet) -> Result<Self> {
        if reference.dims() != training.dims() {
            return Err(Error::DimMismatch {
                expected: training.dims(),
                got: reference.dims(),
            });
        }
        if detection.dims() != training.dims() {
            return Err(Error::DimMismatch {
                expected: training.dims(),
                got: detection.dims(),
            });
        }
        Ok(DetectionTriplet {
            training,
            reference,
            detection,
        })
    }

    pub fn dims(&self) -> usize {
        self.training.dims()
    }
}

/// Row indices grouped into `n` batches of `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchPlan {
    pub n: usize,
    pub k: usize,
    pub batches: Vec<Vec<usize>>,
}

/// Splits `rows` row indices into `n` batches of exactly `k`.
///
/// With a seed the indices are shuffled (Fisher-Yates) before being cut into
/// consecutive blocks; without one the batches are consecutive runs of the
/// original order. Every index appears in exactly one batch.
pub fn partition(rows: usize, n: usize, k: usize, shuffle_seed: Option<RngSeed>) -> Result<BatchPlan> {
    if n == 0 || k == 0 {
        return Err(Error::InvalidConfig {
            detail: format!("partition needs n >= 1 and k >= 1, got n={n}, k={k}"),
        });
    }
    if rows != n * k {
        return Err(Error::SizeMismatch {
            detail: format!("{rows} rows cannot form {n} batches of {k}"),
        });
    }
    let mut indices: Vec<usize> = (0..rows).collect();
    if let Some(seed) = shuffle_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
        indices.shuffle(&mut rng);
    }
    let batches = indices.chunks_exact(k).map(<[usize]>::to_vec).collect();
    Ok(BatchPlan { n, k, batches })
}

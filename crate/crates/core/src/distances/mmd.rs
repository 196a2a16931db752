//! Unbiased U-statistic estimate of squared maximum mean discrepancy with an
//! RBF kernel.

#[allow(unused_imports)]
use num_traits::Float;

use crate::dataset::DataSet;
use crate::error::{Error, Result};

use super::sq_dist;

/// The unbiased MMD^2 estimate:
///
/// mean of off-diagonal kernel values within `a`, plus the same within `b`,
/// minus twice the mean over all cross pairs, with kernel
/// exp(-||x - y||^2 / (2 sigma^2)). Each term is normalized by its own pair
/// count, so unequal row counts are fine. The estimate can be negative.
pub fn mmd_u_statistic(a: &DataSet, b: &DataSet, sigma: f64) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimMismatch {
            expected: a.dims(),
            got: b.dims(),
        });
    }
    if a.rows() < 2 || b.rows() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            got: a.rows().min(b.rows()),
        });
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig {
            detail: alloc::format!("RBF bandwidth must be a positive real, got {sigma}"),
        });
    }
    let scale = -1.0 / (2.0 * sigma * sigma);
    let na = a.rows();
    let nb = b.rows();

    let mut within_a = 0.0;
    for i in 0..na {
        for j in (i + 1)..na {
            within_a += (scale * sq_dist(a.row(i), a.row(j))).exp();
        }
    }
    within_a = 2.0 * within_a / (na as f64 * (na as f64 - 1.0));

    let mut within_b = 0.0;
    for i in 0..nb {
        for j in (i + 1)..nb {
            within_b += (scale * sq_dist(b.row(i), b.row(j))).exp();
        }
    }
    within_b = 2.0 * within_b / (nb as f64 * (nb as f64 - 1.0));

    let mut cross = 0.0;
    for i in 0..na {
        for j in 0..nb {
            cross += (scale * sq_dist(a.row(i), b.row(j))).exp();
        }
    }
    cross /= na as f64 * nb as f64;

    Ok(within_a + within_b - 2.0 * cross)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use approx::assert_relative_eq;

    fn one_d(values: &[f64]) -> DataSet {
        DataSet::from_vec(values.len(), 1, values.to_vec()).unwrap()
    }

    #[test]
    fn hand_evaluated_equal_pair() {
        // a = b = {0, 2}, sigma = 1: within terms e^-2 each, cross mean
        // (1 + e^-2)/2 twice, total e^-2 - 1.
        let a = one_d(&[0.0, 2.0]);
        let v = mmd_u_statistic(&a, &a, 1.0).unwrap();
        assert_relative_eq!(v, (-2.0f64).exp() - 1.0, epsilon = 1e-14);
    }

    #[test]
    fn hand_evaluated_separated_sets() {
        let a = one_d(&[0.0, 0.0]);
        let b = one_d(&[10.0, 10.0]);
        let v = mmd_u_statistic(&a, &b, 1.0).unwrap();
        // Cross kernels are e^-50 < 1e-21.
        assert!((v - 2.0).abs() < 1e-20, "v = {v}");
    }

    #[test]
    fn symmetric_in_a_and_b() {
        let a = DataSet::from_vec(3, 2, vec![0.0, 1.0, 2.0, -1.0, 0.3, 0.7]).unwrap();
        let b = DataSet::from_vec(4, 2, vec![1.0, 1.0, -2.0, 0.1, 0.0, 0.0, 2.2, -0.4]).unwrap();
        let ab = mmd_u_statistic(&a, &b, 0.8).unwrap();
        let ba = mmd_u_statistic(&b, &a, 0.8).unwrap();
        assert_relative_eq!(ab, ba, epsilon = 1e-15);
    }

    #[test]
    fn row_permutation_invariant() {
        let a = DataSet::from_vec(3, 1, vec![0.0, 1.0, 2.0]).unwrap();
        let a_perm = DataSet::from_vec(3, 1, vec![2.0, 0.0, 1.0]).unwrap();
        let b = one_d(&[0.5, 1.5, -0.5]);
        let x = mmd_u_statistic(&a, &b, 1.3).unwrap();
        let y = mmd_u_statistic(&a_perm, &b, 1.3).unwrap();
        assert_relative_eq!(x, y, epsilon = 1e-15);
    }

    #[test]
    fn rejects_undersized_sets() {
        let a = one_d(&[0.0]);
        let b = one_d(&[1.0, 2.0]);
        assert_eq!(
            mmd_u_statistic(&a, &b, 1.0),
            Err(Error::TooFewRows { needed: 2, got: 1 })
        );
    }

    #[test]
    fn rejects_bad_sigma() {
        let a = one_d(&[0.0, 1.0]);
        assert!(matches!(
            mmd_u_statistic(&a, &a, 0.0),
            Err(Error::InvalidConfig { .. })
        ));
    }
}

//! Kullback-Leibler divergence estimate from k-nearest-neighbour radii.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::dataset::DataSet;
use crate::error::{Error, Result};

use super::sq_dist;

/// Radii below this are clamped before the log ratio, so duplicate points
/// cannot produce infinities.
const RADIUS_FLOOR: f64 = 1e-12;

/// k-NN divergence estimate of D(P_a || P_b):
///
/// (m / n_a) * sum_i log(nu_k(x_i) / rho_k(x_i)) + log(n_b / (n_a - 1))
///
/// where rho_k(x_i) is the distance from row i of `a` to its k-th nearest
/// neighbour within `a` (itself excluded) and nu_k(x_i) the distance to its
/// k-th nearest neighbour within `b`. Distances are plain O(N^2) scans. The
/// estimate is asymmetric in (a, b) and can be negative.
pub fn kl_knn_estimate(a: &DataSet, b: &DataSet, k_nn: usize) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimMismatch {
            expected: a.dims(),
            got: b.dims(),
        });
    }
    if k_nn == 0 {
        return Err(Error::InvalidConfig {
            detail: "nearest-neighbour order must be at least 1".into(),
        });
    }
    if a.rows() <= k_nn {
        return Err(Error::TooFewRows {
            needed: k_nn + 1,
            got: a.rows(),
        });
    }
    if b.rows() < k_nn {
        return Err(Error::TooFewRows {
            needed: k_nn,
            got: b.rows(),
        });
    }

    let na = a.rows();
    let nb = b.rows();
    let m = a.dims();
    let mut log_ratio_sum = 0.0;
    let mut own = Vec::with_capacity(na - 1);
    let mut other = Vec::with_capacity(nb);
    for i in 0..na {
        let x = a.row(i);
        own.clear();
        for j in 0..na {
            if j != i {
                own.push(sq_dist(x, a.row(j)));
            }
        }
        other.clear();
        for j in 0..nb {
            other.push(sq_dist(x, b.row(j)));
        }
        let rho = kth_smallest(&mut own, k_nn).sqrt().max(RADIUS_FLOOR);
        let nu = kth_smallest(&mut other, k_nn).sqrt().max(RADIUS_FLOOR);
        log_ratio_sum += (nu / rho).ln();
    }
    Ok((m as f64 / na as f64) * log_ratio_sum + (nb as f64 / (na as f64 - 1.0)).ln())
}

/// k-th smallest element (1-based k), by partial selection. Scratch buffer is
/// reordered.
fn kth_smallest(values: &mut [f64], k: usize) -> f64 {
    let (_, kth, _) = values.select_nth_unstable_by(k - 1, f64::total_cmp);
    *kth
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn one_d(values: &[f64]) -> DataSet {
        DataSet::from_vec(values.len(), 1, values.to_vec()).unwrap()
    }

    #[test]
    fn finite_under_duplicates() {
        // a and b share rows, so nearest-neighbour radii hit the floor; the
        // estimate must still be finite.
        let a = one_d(&[0.0, 0.0, 1.0, 1.0]);
        let v = kl_knn_estimate(&a, &a, 1).unwrap();
        assert!(v.is_finite());
    }

    #[test]
    fn asymmetric_on_a_fixed_instance() {
        let a = one_d(&[0.0, 0.1, 0.2, 0.3, 5.0]);
        let b = one_d(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let ab = kl_knn_estimate(&a, &b, 1).unwrap();
        let ba = kl_knn_estimate(&b, &a, 1).unwrap();
        assert_ne!(ab, ba);
    }

    #[test]
    fn row_counts_validated() {
        let a = one_d(&[0.0, 1.0]);
        let b = one_d(&[0.0]);
        assert_eq!(
            kl_knn_estimate(&a, &b, 2),
            Err(Error::TooFewRows { needed: 3, got: 2 })
        );
        assert_eq!(
            kl_knn_estimate(&one_d(&[0.0, 1.0, 2.0]), &b, 2),
            Err(Error::TooFewRows { needed: 2, got: 1 })
        );
    }

    #[test]
    fn kth_selection() {
        let mut v = vec![5.0, 1.0, 4.0, 2.0, 3.0];
        assert_eq!(kth_smallest(&mut v, 1), 1.0);
        let mut v = vec![5.0, 1.0, 4.0, 2.0, 3.0];
        assert_eq!(kth_smallest(&mut v, 3), 3.0);
    }
}

//! Earth mover's distance between uniform empirical measures, computed
//! exactly as a minimum-cost assignment.

use crate::dataset::DataSet;
use crate::error::{Error, Result};

use super::assignment::solve_square;
use super::cost_matrix;

/// Wasserstein-1 distance between two same-size point clouds with uniform
/// weights: the optimal assignment cost divided by the number of rows.
pub fn emd(a: &DataSet, b: &DataSet) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimMismatch {
            expected: a.dims(),
            got: b.dims(),
        });
    }
    if a.rows() != b.rows() {
        return Err(Error::SizeMismatch {
            detail: alloc::format!(
                "equal-size transport needs matching row counts, got {} vs {}",
                a.rows(),
                b.rows()
            ),
        });
    }
    let costs = cost_matrix(a, b)?;
    let (_, total) = solve_square(a.rows(), |i, j| costs.get(i, j));
    Ok(total / a.rows() as f64)
}

/// Wasserstein-1 distance when `a` has exactly twice the rows of `b`, the one
/// unbalanced shape the pooled-versus-detection comparison produces.
///
/// Every row of `b` carries mass 2/a.rows, which is exactly two units of the
/// 1/a.rows mass each row of `a` carries. Splitting each b-row into two
/// co-located copies is therefore an exact reduction to a balanced assignment
/// of size a.rows (a vertex of the balanced transportation polytope is a
/// permutation).
pub fn emd_unbalanced_uniform(a: &DataSet, b: &DataSet) -> Result<f64> {
    if a.dims() != b.dims() {
        return Err(Error::DimMismatch {
            expected: a.dims(),
            got: b.dims(),
        });
    }
    if a.rows() != 2 * b.rows() {
        return Err(Error::SizeMismatch {
            detail: alloc::format!(
                "unbalanced transport needs a 2:1 row ratio, got {} vs {}",
                a.rows(),
                b.rows()
            ),
        });
    }
    let costs = cost_matrix(a, b)?;
    let nb = b.rows();
    // Columns j and j + nb are the two copies of b's row j.
    let (_, total) = solve_square(a.rows(), |i, j| costs.get(i, j % nb));
    Ok(total / a.rows() as f64)
}

//! Exact minimum-cost assignment by shortest augmenting paths with dual
//! potentials. O(n^3) for an n x n instance, which is what keeps the per-batch
//! transport cost at k^3.

use alloc::vec;
use alloc::vec::Vec;

const NONE: usize = usize::MAX;

/// Solves the square assignment problem with costs `cost(row, col)`.
///
/// Returns the matched column per row and the total cost of the optimal
/// matching. Costs must be finite; optimality is exact up to float rounding
/// in the potential updates.
pub(crate) fn solve_square<F>(n: usize, cost: F) -> (Vec<usize>, f64)
where
    F: Fn(usize, usize) -> f64,
{
    assert!(n > 0, "assignment needs at least one row");
    // col_row[j] = row matched to column j; index n is the virtual column the
    // current row enters through.
    let mut col_row = vec![NONE; n + 1];
    let mut u = vec![0.0f64; n]; // row potentials
    let mut v = vec![0.0f64; n + 1]; // column potentials
    let mut min_reduced = vec![f64::INFINITY; n + 1];
    let mut reached_from = vec![0usize; n + 1];
    let mut used = vec![false; n + 1];

    for row in 0..n {
        col_row[n] = row;
        let mut j0 = n;
        for x in min_reduced.iter_mut() {
            *x = f64::INFINITY;
        }
        for x in used.iter_mut() {
            *x = false;
        }
        // Dijkstra over columns in the reduced-cost graph.
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = NONE;
            for j in 0..n {
                if !used[j] {
                    let reduced = cost(i0, j) - u[i0] - v[j];
                    if reduced < min_reduced[j] {
                        min_reduced[j] = reduced;
                        reached_from[j] = j0;
                    }
                    if min_reduced[j] < delta {
                        delta = min_reduced[j];
                        j1 = j;
                    }
                }
            }
            debug_assert!(j1 != NONE, "some unmatched column is always reachable");
            for j in 0..=n {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_reduced[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == NONE {
                break;
            }
        }
        // Augment: walk the path back to the virtual column, shifting matches.
        loop {
            let j1 = reached_from[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == n {
                break;
            }
        }
    }

    let mut row_col = vec![0usize; n];
    let mut total = 0.0;
    for j in 0..n {
        row_col[col_row[j]] = j;
        total += cost(col_row[j], j);
    }
    (row_col, total)
}

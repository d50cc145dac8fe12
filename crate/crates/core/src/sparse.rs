//! Thin wrapper over faer's sparse LU for the Newton and Laplace solves.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};

/// Solves `A x = b` for a square sparse `A` given as `(row, col, value)`
/// triplets; duplicate entries are summed.
pub(crate) fn solve(n: usize, entries: &[(usize, usize, f64)], rhs: &[f64]) -> Result<Vec<f64>, String> {
    let trips: Vec<Triplet<usize, usize, f64>> = entries.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trips).map_err(|e| format!("{e:?}"))?;
    let lu = a.sp_lu().map_err(|e| format!("{e:?}"))?;
    let mut b = faer::Col::<f64>::from_fn(n, |i| rhs[i]);
    lu.solve_in_place(b.as_mat_mut());
    let x: Vec<f64> = (0..n).map(|i| b[i]).collect();
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err("singular system".into())
    }
}

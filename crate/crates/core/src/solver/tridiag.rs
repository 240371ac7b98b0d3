//! Thomas algorithm for tridiagonal systems.

/// In-place tridiagonal solve. `lower[i]` couples row i to i-1 (lower[0]
/// unused), `upper[i]` couples row i to i+1 (last entry unused). `diag` and
/// `rhs` are overwritten; the solution lands in `rhs`.
///
/// The assembled Poisson and continuity matrices are diagonally dominant,
/// so no pivoting is needed.
pub fn solve_in_place(lower: &[f64], diag: &mut [f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    for i in 1..n {
        let w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
    }
}

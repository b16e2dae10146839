//! Tridiagonal solvers for the implicit diffusion sweeps.

/// Solves `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]` in place
/// (Thomas algorithm). `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut [f64]) {
    let n = rhs.len();
    debug_assert!(lower.len() >= n && diag.len() >= n && upper.len() >= n && scratch.len() >= n);
    let mut denom = diag[0];
    scratch[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = upper[i] / denom;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

/// Periodic tridiagonal solve: `lower[0]` couples to `x[n-1]` and `upper[n-1]`
/// to `x[0]`. Uses the Sherman-Morrison correction of a Thomas solve.
pub fn solve_cyclic(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = rhs.len();
    assert!(n >= 3, "cyclic system needs at least 3 unknowns");
    let corner_top = lower[0];
    let corner_bottom = upper[n - 1];
    let gamma = -diag[0];
    let mut d = diag[..n].to_vec();
    d[0] -= gamma;
    d[n - 1] -= corner_bottom * corner_top / gamma;
    let mut scratch = vec![0.0; n];
    solve_tridiagonal(lower, &d, upper, rhs, &mut scratch);
    let mut z = vec![0.0; n];
    z[0] = gamma;
    z[n - 1] = corner_bottom;
    solve_tridiagonal(lower, &d, upper, &mut z, &mut scratch);
    let fact = (rhs[0] + corner_top * rhs[n - 1] / gamma) / (1.0 + z[0] + corner_top * z[n - 1] / gamma);
    for (x, zi) in rhs.iter_mut().zip(&z) {
        *x -= fact * zi;
    }
}

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Inverse of a symmetric matrix through its eigendecomposition. Eigenvalues
/// at or below `rel_tol * max_eigenvalue` are dropped, which turns the result
/// into the Moore-Penrose pseudo-inverse. The flag reports whether any
/// eigenvalue was dropped.
pub(crate) fn symmetric_pinv(m: &DMatrix<f64>, rel_tol: f64) -> (DMatrix<f64>, bool) {
    let d = m.nrows();
    if d == 0 {
        return (DMatrix::zeros(0, 0), false);
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let max_ev = eig.eigenvalues.iter().fold(0.0_f64, |a, &b| a.max(b));
    let cutoff = rel_tol * max_ev;
    let mut dropped = false;
    let inv_vals = DVector::from_iterator(
        d,
        eig.eigenvalues.iter().map(|&ev| {
            if ev > cutoff && ev > 0.0 {
                1.0 / ev
            } else {
                dropped = true;
                0.0
            }
        }),
    );
    let q = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(d, d, |i, j| q[(i, j)] * inv_vals[j]);
    let inv = &scaled * q.transpose();
    ((&inv + inv.transpose()) * 0.5, dropped)
}

/// Solves `h x = g` for symmetric positive definite `h`, falling back to the
/// pseudo-inverse when the Cholesky factorization fails.
pub(crate) fn solve_spd(h: &DMatrix<f64>, g: &DVector<f64>) -> DVector<f64> {
    match h.clone().cholesky() {
        Some(ch) => ch.solve(g),
        None => symmetric_pinv(h, 1e-12).0 * g,
    }
}

/// `log(1 + exp(x))` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `sigmoid(x) * (1 - sigmoid(x))`, accurate in the tails.
pub(crate) fn logistic_variance(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

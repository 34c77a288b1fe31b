//! Rao score statistics for adding feature terms to the node-wise null model
//! `y_k ~ y_{-k}`.
//!
//! Everything that does not involve the candidate feature (the null fit,
//! its weights `W` and the inverse label information `A^{-1}`) lives in a
//! [`NullModelCache`] built once per label. Scoring a feature then only
//! needs a handful of weighted dot products.

use nalgebra::{DMatrix, DVector};

use crate::error::{argument, Result};
use crate::linalg::{logistic_variance, symmetric_pinv};
use crate::logistic::{fit_mle, LogisticConfig};

/// A fitted null model with |logit coefficient| above this is treated as
/// (quasi-)separated.
pub const SEPARATION_LOGIT: f64 = 15.0;

/// `v <= COLLINEAR_TOL * max(1, D)` counts as exact collinearity.
pub const COLLINEAR_TOL: f64 = 1e-12;

/// Relative eigenvalue cutoff for the pseudo-inverses.
pub const PINV_TOL: f64 = 1e-10;

/// Per-label quantities of the null model reused across all candidate
/// features.
#[derive(Debug, Clone)]
pub struct NullModelCache {
    label_index: usize,
    other_labels: Vec<usize>,
    beta_hat: DVector<f64>,
    w_diag: DVector<f64>,
    a_inv: DMatrix<f64>,
    residuals: DVector<f64>,
    others: DMatrix<f64>,
    weighted_others: DMatrix<f64>,
    degenerate: bool,
    singular: bool,
    converged: bool,
}

impl NullModelCache {
    pub fn label_index(&self) -> usize {
        self.label_index
    }

    /// Indices of the conditioning labels, in design-column order.
    pub fn other_labels(&self) -> &[usize] {
        &self.other_labels
    }

    /// Null-model coefficients of the other labels.
    pub fn beta_hat(&self) -> &DVector<f64> {
        &self.beta_hat
    }

    /// Null-model coefficients augmented with a zero for the candidate slot.
    pub fn theta_hat(&self) -> DVector<f64> {
        let k = self.beta_hat.len();
        self.beta_hat.clone().insert_row(k, 0.0)
    }

    pub fn w_diag(&self) -> &DVector<f64> {
        &self.w_diag
    }

    pub fn a_inv(&self) -> &DMatrix<f64> {
        &self.a_inv
    }

    /// `Y_k - p(theta_hat)`.
    pub fn residuals(&self) -> &DVector<f64> {
        &self.residuals
    }

    /// The conditioning labels `Y_{-k}` as a real n x (K-1) matrix.
    pub fn other_label_matrix(&self) -> &DMatrix<f64> {
        &self.others
    }

    pub fn n_rows(&self) -> usize {
        self.residuals.len()
    }

    /// Constant label column or a separated null fit.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// `A` was rank deficient and a pseudo-inverse was used.
    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    /// The K columns `(x * y_l for l != k, x)` of the feature-dependent
    /// interaction model.
    pub fn interaction_design(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_len(x.len())?;
        let n = self.n_rows();
        let q = self.other_labels.len();
        Ok(DMatrix::from_fn(n, q + 1, |i, c| {
            if c < q {
                x[i] * self.others[(i, c)]
            } else {
                x[i]
            }
        }))
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_rows() {
            return argument(format!("feature has length {len}, expected {}", self.n_rows()));
        }
        Ok(())
    }

    /// Univariate statistic without argument checks: returns `(u, collinear)`.
    pub(crate) fn univariate(&self, x: &[f64]) -> (f64, bool) {
        let n = self.n_rows();
        let r = self.residuals.as_slice();
        let w = self.w_diag.as_slice();
        let mut s = 0.0;
        let mut d = 0.0;
        for i in 0..n {
            s += x[i] * r[i];
            d += w[i] * x[i] * x[i];
        }
        let q = self.other_labels.len();
        let wy = self.weighted_others.as_slice();
        let b: Vec<f64> = (0..q)
            .map(|l| {
                let col = &wy[l * n..(l + 1) * n];
                col.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect();
        let mut quad = 0.0;
        for l in 0..q {
            let mut row = 0.0;
            for (m, &bm) in b.iter().enumerate().take(q) {
                row += self.a_inv[(l, m)] * bm;
            }
            quad += b[l] * row;
        }
        let v = d - quad;
        if v <= COLLINEAR_TOL * d.max(1.0) {
            (0.0, true)
        } else {
            ((s * s / v).abs(), false)
        }
    }
}

/// Fits `y_k ~ y_{-k}` without intercept and caches `W`, `A^{-1}` and the
/// residuals.
pub fn build_null_cache(labels: &DMatrix<u8>, k: usize, config: &LogisticConfig) -> Result<NullModelCache> {
    let n = labels.nrows();
    let n_labels = labels.ncols();
    if n_labels < 2 {
        return argument("at least two labels are required");
    }
    if k >= n_labels {
        return argument(format!("label index {k} out of range for {n_labels} labels"));
    }
    if n == 0 {
        return argument("label matrix has no rows");
    }
    if labels.iter().any(|&v| v > 1) {
        return argument("labels must be 0 or 1");
    }
    let other_labels: Vec<usize> = (0..n_labels).filter(|&l| l != k).collect();
    let others = labels.select_columns(&other_labels).map(f64::from);
    let response = labels.column(k).map(f64::from);

    let cfg = LogisticConfig {
        fit_intercept: false,
        ..*config
    };
    let fit = fit_mle(&others, &response, &cfg)?;
    let eta = &others * &fit.coefficients;
    let w_diag = eta.map(logistic_variance);
    let residuals = &response - &fit.fitted_probabilities;

    let mut weighted_others = others.clone();
    for mut col in weighted_others.column_iter_mut() {
        col.component_mul_assign(&w_diag);
    }
    let a = others.tr_mul(&weighted_others);
    let (a_inv, singular) = symmetric_pinv(&a, PINV_TOL);

    let first = response[0];
    let constant = response.iter().all(|&v| v == first);
    let separated = fit.coefficients.iter().any(|c| c.abs() >= SEPARATION_LOGIT);
    Ok(NullModelCache {
        label_index: k,
        other_labels,
        beta_hat: fit.coefficients,
        w_diag,
        a_inv,
        residuals,
        others,
        weighted_others,
        degenerate: constant || separated || !fit.converged,
        singular,
        converged: fit.converged,
    })
}

/// Value of a score statistic plus diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreResult {
    pub value: f64,
    /// The candidate lies (numerically) in the span of the null design, or
    /// part of the multivariate information matrix was dropped.
    pub collinear: bool,
    /// Optional per-term breakdown, e.g. `u_k(x)` followed by each
    /// `u_k(x * y_s)`.
    pub components: Option<Vec<f64>>,
}

/// `u = |s^2 / v|` with `s = x^T (Y_k - p)` and `v = D - C A^{-1} B`.
pub fn score_univariate(cache: &NullModelCache, xj: &[f64]) -> Result<ScoreResult> {
    cache.check_len(xj.len())?;
    if xj.iter().any(|v| !v.is_finite()) {
        return argument("feature contains non-finite values");
    }
    let (value, collinear) = cache.univariate(xj);
    Ok(ScoreResult {
        value,
        collinear,
        components: None,
    })
}

/// Per-interaction breakdown: `u_k(x)` followed by `u_k(x * y_s)` for every
/// conditioning label `s`, with their sum as the value.
pub fn score_interactions(cache: &NullModelCache, xj: &[f64]) -> Result<ScoreResult> {
    cache.check_len(xj.len())?;
    let (first, mut collinear) = cache.univariate(xj);
    let mut components = Vec::with_capacity(cache.other_labels.len() + 1);
    components.push(first);
    let mut product = vec![0.0; xj.len()];
    for l in 0..cache.other_labels.len() {
        for (i, p) in product.iter_mut().enumerate() {
            *p = xj[i] * cache.others[(i, l)];
        }
        let (u, c) = cache.univariate(&product);
        collinear |= c;
        components.push(u);
    }
    Ok(ScoreResult {
        value: components.iter().sum(),
        collinear,
        components: Some(components),
    })
}

/// `U = |S^T V^+ S|` for a block of candidate columns `M`.
pub fn score_multivariate(cache: &NullModelCache, m: &DMatrix<f64>) -> Result<ScoreResult> {
    if m.nrows() != cache.n_rows() {
        return argument(format!(
            "candidate block has {} rows, expected {}",
            m.nrows(),
            cache.n_rows()
        ));
    }
    if m.ncols() == 0 {
        return argument("candidate block has no columns");
    }
    if m.iter().any(|v| !v.is_finite()) {
        return argument("candidate block contains non-finite values");
    }
    let s = m.tr_mul(&cache.residuals);
    let b = cache.weighted_others.tr_mul(m);
    let mut wm = m.clone();
    for mut col in wm.column_iter_mut() {
        col.component_mul_assign(&cache.w_diag);
    }
    let d = m.tr_mul(&wm);
    let v = d - b.transpose() * &cache.a_inv * &b;
    let (v_inv, dropped) = symmetric_pinv(&v, PINV_TOL);
    let value = (s.transpose() * v_inv * &s)[(0, 0)].abs();
    Ok(ScoreResult {
        value,
        collinear: dropped,
        components: None,
    })
}

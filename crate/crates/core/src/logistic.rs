//! Logistic regression without a constant term: Newton maximum likelihood
//! and l1-penalized cyclic coordinate descent.
//!
//! The log-likelihood is `l(theta) = sum_i [y_i * eta_i - log(1 + exp(eta_i))]`
//! with `eta = Z theta`. An optional unpenalized intercept is appended as the
//! last internal column for real-data use.

use nalgebra::{DMatrix, DVector};

use crate::error::{argument, Result};
use crate::linalg::{logistic_variance, sigmoid, softplus, solve_spd};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticConfig {
    /// Convergence threshold on the max-norm of the (projected) gradient.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Ridge weight: `ridge * |theta|^2 / 2` is subtracted from the likelihood.
    pub ridge: f64,
    /// Box constraint `|theta_j| <= coef_cap` that keeps separated fits finite.
    pub coef_cap: f64,
    pub fit_intercept: bool,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iter: 100,
            ridge: 1e-8,
            coef_cap: 30.0,
            fit_intercept: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    /// One coefficient per design column.
    pub coefficients: DVector<f64>,
    /// Zero unless the fit was configured with an intercept.
    pub intercept: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Unpenalized log-likelihood at the returned coefficients.
    pub final_log_likelihood: f64,
    pub fitted_probabilities: DVector<f64>,
}

impl LogisticFit {
    pub fn linear_predictor(&self, design: &DMatrix<f64>) -> DVector<f64> {
        let mut eta = design * &self.coefficients;
        eta.add_scalar_mut(self.intercept);
        eta
    }

    pub fn predict_proba(&self, design: &DMatrix<f64>) -> DVector<f64> {
        self.linear_predictor(design).map(sigmoid)
    }
}

fn validate(design: &DMatrix<f64>, response: &DVector<f64>) -> Result<()> {
    if design.ncols() == 0 {
        return argument("design has no columns");
    }
    if design.nrows() == 0 {
        return argument("design has no rows");
    }
    if design.nrows() != response.len() {
        return argument(format!(
            "design has {} rows but response has length {}",
            design.nrows(),
            response.len()
        ));
    }
    if design.iter().any(|v| !v.is_finite()) {
        return argument("design contains non-finite entries");
    }
    if response.iter().any(|&y| y != 0.0 && y != 1.0) {
        return argument("response entries must be 0 or 1");
    }
    Ok(())
}

/// Unpenalized log-likelihood for a given linear predictor.
pub fn log_likelihood(eta: &DVector<f64>, response: &DVector<f64>) -> f64 {
    eta.iter()
        .zip(response.iter())
        .map(|(&e, &y)| y * e - softplus(e))
        .sum()
}

/// Gradient of the unpenalized log-likelihood, `Z^T (y - p)`.
pub fn log_likelihood_gradient(design: &DMatrix<f64>, theta: &DVector<f64>, response: &DVector<f64>) -> DVector<f64> {
    let eta = design * theta;
    let resid = DVector::from_iterator(eta.len(), eta.iter().zip(response.iter()).map(|(&e, &y)| y - sigmoid(e)));
    design.tr_mul(&resid)
}

/// Maximum-likelihood logistic fit by Newton's method with step halving.
pub fn fit_mle(design: &DMatrix<f64>, response: &DVector<f64>, config: &LogisticConfig) -> Result<LogisticFit> {
    validate(design, response)?;
    let n = design.nrows();
    let d = design.ncols();
    let z = if config.fit_intercept {
        design.clone().insert_column(d, 1.0)
    } else {
        design.clone()
    };
    let dim = z.ncols();
    let penalized = |j: usize| j < d;

    let objective = |theta: &DVector<f64>, eta: &DVector<f64>| {
        let pen: f64 = (0..d).map(|j| theta[j] * theta[j]).sum();
        log_likelihood(eta, response) - 0.5 * config.ridge * pen
    };

    let mut theta = DVector::<f64>::zeros(dim);
    let mut eta = DVector::<f64>::zeros(n);
    let mut current = objective(&theta, &eta);
    let mut converged = false;
    let mut iterations = 0;

    loop {
        let resid = DVector::from_iterator(n, eta.iter().zip(response.iter()).map(|(&e, &y)| y - sigmoid(e)));
        let mut grad = z.tr_mul(&resid);
        for j in 0..d {
            grad[j] -= config.ridge * theta[j];
        }
        // Coordinates pinned at the cap are stationary if the gradient pushes outward.
        let projected_norm = (0..dim)
            .map(|j| {
                let at_upper = theta[j] >= config.coef_cap && grad[j] > 0.0;
                let at_lower = theta[j] <= -config.coef_cap && grad[j] < 0.0;
                if at_upper || at_lower {
                    0.0
                } else {
                    grad[j].abs()
                }
            })
            .fold(0.0, f64::max);
        if projected_norm <= config.tolerance {
            converged = true;
            break;
        }
        if iterations >= config.max_iter {
            break;
        }
        iterations += 1;

        let w = eta.map(logistic_variance);
        let mut zw = z.clone();
        for mut col in zw.column_iter_mut() {
            col.component_mul_assign(&w);
        }
        let mut hess = z.tr_mul(&zw);
        for j in 0..dim {
            hess[(j, j)] += if penalized(j) { config.ridge } else { 1e-12 };
        }
        let step = solve_spd(&hess, &grad);

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let candidate = (&theta + &step * t).map(|v| v.clamp(-config.coef_cap, config.coef_cap));
            let cand_eta = &z * &candidate;
            let value = objective(&candidate, &cand_eta);
            if value >= current || (value - current).abs() <= 1e-14 * current.abs().max(1.0) {
                theta = candidate;
                eta = cand_eta;
                current = value.max(current);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    let (coefficients, intercept) = if config.fit_intercept {
        (theta.rows(0, d).into_owned(), theta[d])
    } else {
        (theta, 0.0)
    };
    Ok(LogisticFit {
        coefficients,
        intercept,
        converged,
        iterations,
        final_log_likelihood: log_likelihood(&eta, response),
        fitted_probabilities: eta.map(sigmoid),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Config {
    /// Stop when the largest coefficient change in a cycle falls below this.
    pub tolerance: f64,
    /// Cap on outer cycles, each a quadratic approximation of the likelihood.
    pub max_cycles: usize,
    /// Cap on coordinate sweeps over the quadratic approximation per cycle.
    pub max_inner_sweeps: usize,
    pub coef_cap: f64,
}

impl Default for L1Config {
    fn default() -> Self {
        Self {
            tolerance: 1e-7,
            max_cycles: 100,
            max_inner_sweeps: 100,
            coef_cap: 30.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct L1Fit {
    pub coefficients: DVector<f64>,
    pub lambda: f64,
    pub lambda_max: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `-l(theta) + lambda * |theta|_1` at the returned coefficients.
    pub objective: f64,
}

fn column(design: &DMatrix<f64>, j: usize) -> &[f64] {
    let n = design.nrows();
    &design.as_slice()[j * n..(j + 1) * n]
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Smallest penalty at which the zero vector satisfies the optimality
/// conditions: `max_j |sum_i z_ij (y_i - 1/2)|`.
pub fn lambda_max(design: &DMatrix<f64>, response: &DVector<f64>) -> f64 {
    let centered: Vec<f64> = response.iter().map(|&y| y - sigmoid(0.0)).collect();
    (0..design.ncols())
        .map(|j| dot(column(design, j), &centered).abs())
        .fold(0.0, f64::max)
}

fn soft_threshold(a: f64, lambda: f64) -> f64 {
    if a > lambda {
        a - lambda
    } else if a < -lambda {
        a + lambda
    } else {
        0.0
    }
}

/// Minimizes `-l(theta) + lambda * |theta|_1` by cyclic coordinate descent.
///
/// Each cycle replaces the likelihood by its second-order expansion at the
/// current point and sweeps the coordinates with soft-thresholding until the
/// quadratic subproblem settles; the resulting step is backtracked on the
/// true objective.
pub fn fit_l1(design: &DMatrix<f64>, response: &DVector<f64>, lambda: f64, config: &L1Config) -> Result<L1Fit> {
    validate(design, response)?;
    if !lambda.is_finite() || lambda < 0.0 {
        return argument(format!("penalty {lambda} must be a finite nonnegative number"));
    }
    let n = design.nrows();
    let d = design.ncols();
    let y = response.as_slice();
    let lmax = lambda_max(design, response);

    let objective = |theta: &DVector<f64>, eta: &DVector<f64>| -log_likelihood(eta, response) + lambda * theta.lp_norm(1);

    let mut theta = DVector::<f64>::zeros(d);
    let mut eta = DVector::<f64>::zeros(n);
    let mut current = objective(&theta, &eta);
    let mut converged = false;
    let mut iterations = 0;
    let mut w = vec![0.0; n];
    let mut r = vec![0.0; n];
    let mut curvature = vec![0.0; d];

    while iterations < config.max_cycles {
        iterations += 1;
        for i in 0..n {
            w[i] = logistic_variance(eta[i]);
            r[i] = y[i] - sigmoid(eta[i]);
        }
        for (j, h) in curvature.iter_mut().enumerate() {
            *h = column(design, j).iter().zip(&w).map(|(x, wi)| wi * x * x).sum();
        }

        // r tracks the gradient of the quadratic model at the trial point.
        let mut trial = theta.clone();
        for _ in 0..config.max_inner_sweeps {
            let mut max_delta: f64 = 0.0;
            for j in 0..d {
                let h = curvature[j];
                if h <= 0.0 {
                    continue;
                }
                let xj = column(design, j);
                let a = dot(xj, &r) + h * trial[j];
                let updated = (soft_threshold(a, lambda) / h).clamp(-config.coef_cap, config.coef_cap);
                let delta = updated - trial[j];
                if delta != 0.0 {
                    for i in 0..n {
                        r[i] -= w[i] * xj[i] * delta;
                    }
                    trial[j] = updated;
                    max_delta = max_delta.max(delta.abs());
                }
            }
            if max_delta < config.tolerance {
                break;
            }
        }

        let direction = &trial - &theta;
        if direction.amax() == 0.0 {
            converged = true;
            break;
        }
        let eta_direction = design * &direction;
        let mut t = 1.0;
        let mut moved = 0.0;
        for _ in 0..40 {
            let cand = &theta + &direction * t;
            let cand_eta = &eta + &eta_direction * t;
            let value = objective(&cand, &cand_eta);
            if value <= current {
                moved = (&direction * t).amax();
                theta = cand;
                eta = cand_eta;
                current = value;
                break;
            }
            t *= 0.5;
        }
        if moved < config.tolerance {
            converged = true;
            break;
        }
    }

    Ok(L1Fit {
        coefficients: theta,
        lambda,
        lambda_max: lmax,
        iterations,
        converged,
        objective: current,
    })
}

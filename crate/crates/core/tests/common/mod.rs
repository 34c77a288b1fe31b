//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mlrank::NullModelCache;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_labels(n: usize, k: usize, rng: &mut impl Rng) -> DMatrix<u8> {
    DMatrix::from_fn(n, k, |_, _| rng.random_bool(0.5) as u8)
}

pub fn gaussian_matrix(n: usize, p: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    use rand_distr::{Distribution, StandardNormal};
    DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(rng))
}

pub fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Score statistic from the full information matrix of the augmented model
/// `(Y_{-k}, x)` at the null estimate: `u = s_x^2 [I^{-1}]_{xx}`.
pub fn full_information_score(cache: &NullModelCache, labels: &DMatrix<u8>, x: &[f64]) -> f64 {
    let n = labels.nrows();
    let k = cache.label_index();
    let others = cache.other_labels();
    let q = others.len();
    let z = DMatrix::from_fn(n, q + 1, |i, c| if c < q { labels[(i, others[c])] as f64 } else { x[i] });
    let theta = cache.theta_hat();
    let eta = &z * &theta;
    let prob = eta.map(sigmoid);
    let y = DVector::from_fn(n, |i, _| labels[(i, k)] as f64);
    let score = z.transpose() * (&y - &prob);
    let w = prob.map(|p| p * (1.0 - p));
    let mut zw = z.clone();
    for (i, mut row) in zw.row_iter_mut().enumerate() {
        row *= w[i];
    }
    let info = z.transpose() * zw;
    let inv = info.try_inverse().expect("information matrix is invertible");
    score[q] * score[q] * inv[(q, q)]
}

/// Exact conditional label distribution of an Ising model by enumeration:
/// `P(y | x) ∝ exp(log_potential(x, y))`, states indexed by `sum_k y_k 2^k`.
pub fn exact_label_distribution(params: &mlrank::IsingParams, x: &[f64]) -> Vec<f64> {
    let kk = params.n_labels();
    let states = 1usize << kk;
    let logs: Vec<f64> = (0..states)
        .map(|s| {
            let y: Vec<u8> = (0..kk).map(|k| ((s >> k) & 1) as u8).collect();
            params.log_potential(x, &y)
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        (values[m / 2 - 1] + values[m / 2]) / 2.0
    }
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Coefficient of determination of an ordinary least-squares line.
pub fn linear_r2(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    sxy * sxy / (sxx * syy)
}

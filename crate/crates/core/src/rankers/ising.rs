use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{FeatureRanking, InteractionForm, Method, RankerConfig};
use crate::dataset::{standardize_matrix, MultiLabelDataset};
use crate::error::Result;
use crate::logistic::{fit_l1, lambda_max};
use crate::score::{build_null_cache, score_interactions, score_multivariate, NullModelCache};

fn prepared_features(ds: &MultiLabelDataset, cfg: &RankerConfig) -> DMatrix<f64> {
    if cfg.standardize {
        standardize_matrix(ds.features())
    } else {
        ds.features().clone()
    }
}

fn null_caches(ds: &MultiLabelDataset, cfg: &RankerConfig) -> Result<Vec<NullModelCache>> {
    (0..ds.n_labels())
        .into_par_iter()
        .map(|k| build_null_cache(ds.labels(), k, &cfg.logistic))
        .collect()
}

/// Scores every feature against every label cache and ranks by the row sums.
fn rank_by_label_scores<F>(ds: &MultiLabelDataset, cfg: &RankerConfig, method: Method, score: F) -> Result<FeatureRanking>
where
    F: Fn(&NullModelCache, &[f64]) -> Result<f64> + Sync,
{
    let x = prepared_features(ds, cfg);
    let caches = null_caches(ds, cfg)?;
    let n = ds.n_rows();
    let data = x.as_slice();
    let rows: Vec<Vec<f64>> = (0..ds.n_features())
        .into_par_iter()
        .map(|j| {
            let col = &data[j * n..(j + 1) * n];
            caches.iter().map(|c| score(c, col)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let kk = ds.n_labels();
    let per_label = DMatrix::from_fn(rows.len(), kk, |j, k| rows[j][k]);
    // Summed in label order so results do not depend on scheduling.
    let importances = rows.iter().map(|r| r.iter().sum()).collect();
    Ok(FeatureRanking::from_importances(importances, method, Some(per_label)))
}

/// Constant-interaction Ising ranking: `imp(x_j) = sum_k u_k(x_j)`.
pub fn rank_ising_score(ds: &MultiLabelDataset, cfg: &RankerConfig) -> Result<FeatureRanking> {
    rank_by_label_scores(ds, cfg, Method::IsingScore, |cache, x| Ok(cache.univariate(x).0))
}

/// Feature-dependent interaction ranking. By default
/// `imp(x_j) = sum_k [u_k(x_j) + sum_{s != k} u_k(x_j y_s)]`; with
/// [`InteractionForm::Joint`] the multivariate `sum_k U_k(x_j)` is used.
pub fn rank_ising_inter_score(ds: &MultiLabelDataset, cfg: &RankerConfig) -> Result<FeatureRanking> {
    match cfg.interaction_form {
        InteractionForm::PerTerm => rank_by_label_scores(ds, cfg, Method::IsingInterScore, |cache, x| {
            Ok(score_interactions(cache, x)?.value)
        }),
        InteractionForm::Joint => rank_by_label_scores(ds, cfg, Method::IsingInterScore, |cache, x| {
            let m = cache.interaction_design(x)?;
            Ok(score_multivariate(cache, &m)?.value)
        }),
    }
}

/// l1 ranking: for each label fit `y_k ~ (y_{-k}, x)` at
/// `lambda = lambda_factor * lambda_max` and sum `|a_kj|` over labels.
pub fn rank_ising_l1(ds: &MultiLabelDataset, cfg: &RankerConfig) -> Result<FeatureRanking> {
    let x = prepared_features(ds, cfg);
    let kk = ds.n_labels();
    let p = ds.n_features();
    let labels = ds.labels_f64();
    let per_label: Vec<Vec<f64>> = (0..kk)
        .into_par_iter()
        .map(|k| {
            let others: Vec<usize> = (0..kk).filter(|&l| l != k).collect();
            let design = DMatrix::from_fn(ds.n_rows(), kk - 1 + p, |i, c| {
                if c < kk - 1 {
                    labels[(i, others[c])]
                } else {
                    x[(i, c - (kk - 1))]
                }
            });
            let response = labels.column(k).into_owned();
            let lambda = cfg.lambda_factor * lambda_max(&design, &response);
            let fit = fit_l1(&design, &response, lambda, &cfg.l1)?;
            Ok((0..p).map(|j| fit.coefficients[kk - 1 + j].abs()).collect())
        })
        .collect::<Result<_>>()?;
    let scores = DMatrix::from_fn(p, kk, |j, k| per_label[k][j]);
    let importances = (0..p).map(|j| (0..kk).map(|k| per_label[k][j]).sum()).collect();
    Ok(FeatureRanking::from_importances(importances, Method::IsingL1, Some(scores)))
}

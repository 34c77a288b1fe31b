//! Chi-squared and information-gain filters over discretized features.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{FeatureRanking, Method, RankerConfig};
use crate::dataset::{DiscretizationMap, MultiLabelDataset};
use crate::error::{argument, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterStat {
    Chi2,
    InfoGain,
}

impl FilterStat {
    pub fn compute(self, feature_codes: &[usize], target_codes: &[usize]) -> Result<f64> {
        match self {
            FilterStat::Chi2 => chi2_statistic(feature_codes, target_codes),
            FilterStat::InfoGain => info_gain(feature_codes, target_codes),
        }
    }
}

struct Table {
    counts: Vec<f64>,
    rows: usize,
    cols: usize,
    row_sums: Vec<f64>,
    col_sums: Vec<f64>,
    total: f64,
}

fn contingency(feature_codes: &[usize], target_codes: &[usize]) -> Result<Table> {
    if feature_codes.is_empty() {
        return argument("contingency table needs at least one observation");
    }
    if feature_codes.len() != target_codes.len() {
        return argument("feature and target code vectors differ in length");
    }
    let rows = feature_codes.iter().max().map_or(0, |m| m + 1);
    let cols = target_codes.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0.0; rows * cols];
    for (&f, &t) in feature_codes.iter().zip(target_codes) {
        counts[f * cols + t] += 1.0;
    }
    let row_sums = (0..rows).map(|r| counts[r * cols..(r + 1) * cols].iter().sum()).collect();
    let col_sums = (0..cols).map(|c| (0..rows).map(|r| counts[r * cols + c]).sum()).collect();
    Ok(Table {
        counts,
        rows,
        cols,
        row_sums,
        col_sums,
        total: feature_codes.len() as f64,
    })
}

/// Pearson's `sum (O - E)^2 / E` over the feature x target table; cells with
/// zero expectation are skipped.
pub fn chi2_statistic(feature_codes: &[usize], target_codes: &[usize]) -> Result<f64> {
    let t = contingency(feature_codes, target_codes)?;
    let mut chi2 = 0.0;
    for r in 0..t.rows {
        for c in 0..t.cols {
            let expected = t.row_sums[r] * t.col_sums[c] / t.total;
            if expected > 0.0 {
                let diff = t.counts[r * t.cols + c] - expected;
                chi2 += diff * diff / expected;
            }
        }
    }
    Ok(chi2)
}

fn entropy(counts: impl Iterator<Item = f64>, total: f64) -> f64 {
    counts
        .filter(|&c| c > 0.0)
        .map(|c| {
            let p = c / total;
            -p * p.ln()
        })
        .sum()
}

/// `H(target) - H(target | feature)` with plug-in entropies in nats.
pub fn info_gain(feature_codes: &[usize], target_codes: &[usize]) -> Result<f64> {
    let t = contingency(feature_codes, target_codes)?;
    let h_target = entropy(t.col_sums.iter().copied(), t.total);
    let h_cond: f64 = (0..t.rows)
        .filter(|&r| t.row_sums[r] > 0.0)
        .map(|r| {
            let row = &t.counts[r * t.cols..(r + 1) * t.cols];
            t.row_sums[r] / t.total * entropy(row.iter().copied(), t.row_sums[r])
        })
        .sum();
    Ok((h_target - h_cond).max(0.0))
}

fn feature_codes(ds: &MultiLabelDataset, bins: usize) -> Result<Vec<Vec<usize>>> {
    let map = DiscretizationMap::fit(ds.features(), bins)?;
    Ok((0..ds.n_features()).map(|j| map.encode_column(j, ds.feature(j))).collect())
}

/// Binary relevance: `imp(x_j) = sum_k stat(x_j, y_k)`.
pub fn rank_br(ds: &MultiLabelDataset, cfg: &RankerConfig, stat: FilterStat) -> Result<FeatureRanking> {
    let codes = feature_codes(ds, cfg.bins)?;
    let kk = ds.n_labels();
    let targets: Vec<Vec<usize>> = (0..kk)
        .map(|k| ds.labels().column(k).iter().map(|&v| v as usize).collect())
        .collect();
    let rows: Vec<Vec<f64>> = codes
        .par_iter()
        .map(|fc| targets.iter().map(|t| stat.compute(fc, t)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    let per_label = DMatrix::from_fn(rows.len(), kk, |j, k| rows[j][k]);
    let importances = rows.iter().map(|r| r.iter().sum()).collect();
    let method = match stat {
        FilterStat::Chi2 => Method::BrChi2,
        FilterStat::InfoGain => Method::BrIg,
    };
    Ok(FeatureRanking::from_importances(importances, method, Some(per_label)))
}

/// Label-powerset meta-class per row (ids in order of first appearance) and
/// the number of rows sharing each id.
pub fn meta_classes(labels: &DMatrix<u8>) -> (Vec<usize>, Vec<usize>) {
    let mut ids: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut counts = Vec::new();
    let codes = (0..labels.nrows())
        .map(|i| {
            let key: Vec<u8> = labels.row(i).iter().copied().collect();
            let next = ids.len();
            let id = *ids.entry(key).or_insert(next);
            if id == counts.len() {
                counts.push(0);
            }
            counts[id] += 1;
            id
        })
        .collect();
    (codes, counts)
}

/// Label powerset: `imp(x_j) = stat(x_j, metaclass)`, after dropping rows
/// whose label combination occurs fewer than `cfg.lp_min_count` times.
pub fn rank_lp(ds: &MultiLabelDataset, cfg: &RankerConfig, stat: FilterStat) -> Result<FeatureRanking> {
    let codes = feature_codes(ds, cfg.bins)?;
    let (meta, counts) = meta_classes(ds.labels());
    let kept: Vec<usize> = (0..ds.n_rows()).filter(|&i| counts[meta[i]] >= cfg.lp_min_count).collect();
    let method = match stat {
        FilterStat::Chi2 => Method::LpChi2,
        FilterStat::InfoGain => Method::LpIg,
    };
    if kept.is_empty() {
        return Ok(FeatureRanking::from_importances(vec![0.0; ds.n_features()], method, None));
    }
    let target: Vec<usize> = kept.iter().map(|&i| meta[i]).collect();
    let importances = codes
        .par_iter()
        .map(|fc| {
            let f: Vec<usize> = kept.iter().map(|&i| fc[i]).collect();
            stat.compute(&f, &target)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FeatureRanking::from_importances(importances, method, None))
}

//! Ranking ROC curves, multi-label classification metrics and the
//! validation-based choice of a ranking prefix.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::chains::{predict_chain, train_chain, ChainConfig, ChainModel};
use crate::dataset::{split_rows, MultiLabelDataset};
use crate::error::{argument, Error, Result};
use crate::rankers::FeatureRanking;

/// `points[k-1]` is `(FPR(k), TPR(k))` after admitting the top `k` features.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

/// ROC of a ranking against the set of truly relevant features (0-based).
pub fn ranking_roc(ranking: &FeatureRanking, relevant: &[usize]) -> Result<RocCurve> {
    let p = ranking.len();
    let mut is_relevant = vec![false; p];
    for &j in relevant {
        if j >= p {
            return argument(format!("relevant feature {} exceeds the feature count {p}", j + 1));
        }
        is_relevant[j] = true;
    }
    let n_pos = is_relevant.iter().filter(|&&r| r).count();
    let n_neg = p - n_pos;
    if n_pos == 0 {
        return argument("relevant set is empty");
    }
    if n_neg == 0 {
        return argument("relevant set contains every feature");
    }

    let (mut tp, mut fp) = (0usize, 0usize);
    let mut points = Vec::with_capacity(p);
    for &j in &ranking.order {
        if is_relevant[j] {
            tp += 1;
        } else {
            fp += 1;
        }
        points.push((fp as f64 / n_neg as f64, tp as f64 / n_pos as f64));
    }
    let mut auc = 0.0;
    let mut prev = (0.0, 0.0);
    for &pt in &points {
        auc += (pt.0 - prev.0) * (pt.1 + prev.1) / 2.0;
        prev = pt;
    }
    Ok(RocCurve { points, auc })
}

/// Instance-averaged multi-label measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub subset_accuracy: f64,
    pub hamming: f64,
    /// An instance with no true and no predicted labels scores 1.
    pub jaccard: f64,
}

pub fn classification_metrics(y_true: &DMatrix<u8>, y_pred: &DMatrix<u8>) -> Result<MetricsReport> {
    if y_true.shape() != y_pred.shape() {
        return argument(format!(
            "label matrices differ in shape: {:?} vs {:?}",
            y_true.shape(),
            y_pred.shape()
        ));
    }
    let (n, kk) = y_true.shape();
    if n == 0 || kk == 0 {
        return argument("label matrices are empty");
    }
    let (mut subset, mut hamming, mut jaccard) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (mut agree, mut inter, mut union) = (0usize, 0usize, 0usize);
        for k in 0..kk {
            let (t, q) = (y_true[(i, k)] != 0, y_pred[(i, k)] != 0);
            agree += (t == q) as usize;
            inter += (t && q) as usize;
            union += (t || q) as usize;
        }
        subset += (agree == kk) as u8 as f64;
        hamming += agree as f64 / kk as f64;
        jaccard += if union == 0 { 1.0 } else { inter as f64 / union as f64 };
    }
    let n = n as f64;
    Ok(MetricsReport {
        subset_accuracy: subset / n,
        hamming: hamming / n,
        jaccard: jaccard / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionConfig {
    /// Largest prefix tried, as a fraction of the feature count.
    pub budget_frac: f64,
    /// Share of rows held out to score each prefix.
    pub val_frac: f64,
    pub seed: u64,
    pub chain: ChainConfig,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            budget_frac: 0.2,
            val_frac: 0.3,
            seed: 0,
            chain: ChainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// 0-based features of the chosen ranking prefix, in ranking order.
    pub chosen_subset: Vec<usize>,
    /// Validation subset accuracy for prefix sizes `1..=budget`.
    pub prefix_scores: Vec<f64>,
    pub budget: usize,
    /// Chain on the chosen prefix, refitted on all rows of the input.
    pub model: ChainModel,
}

impl SelectionResult {
    pub fn chosen_size(&self) -> usize {
        self.chosen_subset.len()
    }
}

/// Largest prefix size for a budget fraction of `p` features.
pub fn selection_budget(budget_frac: f64, p: usize) -> Result<usize> {
    if !(budget_frac > 0.0 && budget_frac <= 1.0) {
        return argument(format!("budget fraction {budget_frac} must lie in (0, 1]"));
    }
    // The small slack keeps products like 0.2 * 50 from rounding up past 10.
    let budget = (budget_frac * p as f64 - 1e-9).ceil().max(0.0) as usize;
    if budget < 1 {
        return argument("feature budget is below one");
    }
    Ok(budget.min(p))
}

/// Trains a chain on each ranking prefix of size `1..=L` using a fit part of
/// the rows and keeps the prefix with the best validation subset accuracy.
pub fn select_features(ds: &MultiLabelDataset, ranking: &FeatureRanking, cfg: &SelectionConfig) -> Result<SelectionResult> {
    let p = ds.n_features();
    if ranking.len() != p {
        return Err(Error::Validation(format!(
            "ranking covers {} features but the dataset has {p}",
            ranking.len()
        )));
    }
    let budget = selection_budget(cfg.budget_frac, p)?;
    let parts = split_rows(ds.n_rows(), 1.0 - cfg.val_frac, cfg.val_frac, cfg.seed)?;
    if parts.val_idx.is_empty() {
        return argument("validation part is empty");
    }
    let mut fit_idx = parts.train_idx;
    fit_idx.extend(parts.test_idx);
    fit_idx.sort_unstable();
    let fit = ds.select_rows(&fit_idx)?;
    let val = ds.select_rows(&parts.val_idx)?;
    let order: Vec<usize> = (0..ds.n_labels()).collect();

    let prefix_scores = (1..=budget)
        .into_par_iter()
        .map(|size| {
            let model = train_chain(fit.features(), fit.labels(), ranking.top(size), &order, &cfg.chain)?;
            let pred = predict_chain(&model, val.features())?;
            Ok(classification_metrics(val.labels(), &pred)?.subset_accuracy)
        })
        .collect::<Result<Vec<f64>>>()?;

    let mut best = 0;
    for (i, &s) in prefix_scores.iter().enumerate() {
        if s > prefix_scores[best] {
            best = i;
        }
    }
    let chosen_subset = ranking.top(best + 1).to_vec();
    let model = train_chain(ds.features(), ds.labels(), &chosen_subset, &order, &cfg.chain)?;
    Ok(SelectionResult {
        chosen_subset,
        prefix_scores,
        budget,
        model,
    })
}

/// `run,k,fpr,tpr` rows for each curve followed by pointwise means under
/// run `mean`. All curves must have the same length.
pub fn write_roc_csv<W: Write>(curves: &[(String, RocCurve)], writer: W) -> Result<()> {
    let len = curves.first().map_or(0, |c| c.1.points.len());
    if curves.iter().any(|c| c.1.points.len() != len) {
        return argument("ROC curves differ in length");
    }
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["run", "k", "fpr", "tpr"])?;
    for (run, curve) in curves {
        for (k, &(fpr, tpr)) in curve.points.iter().enumerate() {
            wtr.write_record([run.clone(), (k + 1).to_string(), fpr.to_string(), tpr.to_string()])?;
        }
    }
    if !curves.is_empty() {
        let m = curves.len() as f64;
        for k in 0..len {
            let fpr = curves.iter().map(|c| c.1.points[k].0).sum::<f64>() / m;
            let tpr = curves.iter().map(|c| c.1.points[k].1).sum::<f64>() / m;
            wtr.write_record(["mean".to_string(), (k + 1).to_string(), fpr.to_string(), tpr.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// `run,auc` rows plus a final `mean` row.
pub fn write_auc_csv<W: Write>(curves: &[(String, RocCurve)], writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["run", "auc"])?;
    for (run, curve) in curves {
        wtr.write_record([run.clone(), curve.auc.to_string()])?;
    }
    if !curves.is_empty() {
        let mean = curves.iter().map(|c| c.1.auc).sum::<f64>() / curves.len() as f64;
        wtr.write_record(["mean".to_string(), mean.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_metrics_csv<W: Write>(report: &MetricsReport, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["subset_accuracy", "hamming", "jaccard"])?;
    wtr.write_record([
        report.subset_accuracy.to_string(),
        report.hamming.to_string(),
        report.jaccard.to_string(),
    ])?;
    wtr.flush()?;
    Ok(())
}

/// `prefix_size,val_subset_accuracy,chosen` for sizes `1..=L`.
pub fn write_selection_csv<W: Write>(result: &SelectionResult, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["prefix_size", "val_subset_accuracy", "chosen"])?;
    for (i, s) in result.prefix_scores.iter().enumerate() {
        let chosen = (i + 1 == result.chosen_size()) as u8;
        wtr.write_record([(i + 1).to_string(), s.to_string(), chosen.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

//! Classifier chains with logistic base learners.
//!
//! Position `m` of the chain predicts label `order[m]` from the selected
//! features and the labels at positions `0..m`. Training conditions on the
//! true earlier labels; inference feeds hard 0/1 predictions forward.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::logistic::{fit_mle, LogisticConfig};

pub const MODEL_FORMAT: &str = "mlrank-chain";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    pub logistic: LogisticConfig,
    /// Probability at or above which a label is predicted as 1.
    pub threshold: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            logistic: LogisticConfig {
                fit_intercept: true,
                ..LogisticConfig::default()
            },
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLink {
    /// Selected-feature coefficients followed by one per earlier label.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainModel {
    pub format: String,
    pub version: u32,
    /// Width of the feature matrix the chain was trained on.
    pub n_features: usize,
    pub feature_subset: Vec<usize>,
    pub label_order: Vec<usize>,
    pub links: Vec<ChainLink>,
    pub threshold: f64,
}

impl ChainModel {
    pub fn n_labels(&self) -> usize {
        self.label_order.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ChainModel = serde_json::from_str(text)?;
        if model.format != MODEL_FORMAT {
            return Err(Error::Validation(format!("not a chain model (format {:?})", model.format)));
        }
        if model.version != MODEL_VERSION {
            return Err(Error::Validation(format!("unsupported chain model version {}", model.version)));
        }
        check_permutation(&model.label_order)?;
        let q = model.feature_subset.len();
        for (m, link) in model.links.iter().enumerate() {
            if link.coefficients.len() != q + m {
                return Err(Error::Validation(format!("chain position {m} has the wrong coefficient count")));
            }
        }
        if model.links.len() != model.label_order.len() {
            return Err(Error::Validation("chain link count does not match label order".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn check_features(&self, features: &DMatrix<f64>) -> Result<()> {
        if features.ncols() != self.n_features {
            return argument(format!(
                "feature matrix has {} columns, the chain was trained on {}",
                features.ncols(),
                self.n_features
            ));
        }
        Ok(())
    }

    fn probability(&self, m: usize, x_row: &[f64], earlier: &[u8]) -> f64 {
        let link = &self.links[m];
        let q = self.feature_subset.len();
        let mut eta = link.intercept;
        for (c, &j) in self.feature_subset.iter().enumerate() {
            eta += link.coefficients[c] * x_row[j];
        }
        for (c, &y) in earlier.iter().enumerate() {
            eta += link.coefficients[q + c] * f64::from(y);
        }
        1.0 / (1.0 + (-eta).exp())
    }
}

fn check_permutation(order: &[usize]) -> Result<()> {
    let mut seen = vec![false; order.len()];
    for &k in order {
        if k >= order.len() || seen[k] {
            return argument("label order is not a permutation");
        }
        seen[k] = true;
    }
    Ok(())
}

/// Fits one logistic model per chain position.
pub fn train_chain(
    features: &DMatrix<f64>,
    labels: &DMatrix<u8>,
    feature_subset: &[usize],
    order: &[usize],
    config: &ChainConfig,
) -> Result<ChainModel> {
    if feature_subset.is_empty() {
        return argument("feature subset is empty");
    }
    if let Some(&bad) = feature_subset.iter().find(|&&j| j >= features.ncols()) {
        return argument(format!("feature index {bad} out of range"));
    }
    if order.len() != labels.ncols() {
        return argument("label order length does not match the label count");
    }
    check_permutation(order)?;
    if features.nrows() != labels.nrows() {
        return argument("feature and label matrices differ in row count");
    }
    let n = features.nrows();
    let q = feature_subset.len();
    let mut design = DMatrix::zeros(n, q + order.len().saturating_sub(1));
    for (c, &j) in feature_subset.iter().enumerate() {
        design.set_column(c, &features.column(j));
    }
    let mut links = Vec::with_capacity(order.len());
    for (m, &k) in order.iter().enumerate() {
        let response = labels.column(k).map(f64::from);
        let current = design.columns(0, q + m).into_owned();
        let fit = fit_mle(&current, &response, &config.logistic)?;
        links.push(ChainLink {
            coefficients: fit.coefficients.iter().copied().collect(),
            intercept: fit.intercept,
            converged: fit.converged,
        });
        if m + 1 < order.len() {
            design.set_column(q + m, &response);
        }
    }
    Ok(ChainModel {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        n_features: features.ncols(),
        feature_subset: feature_subset.to_vec(),
        label_order: order.to_vec(),
        links,
        threshold: config.threshold,
    })
}

fn predict_rows(model: &ChainModel, features: &DMatrix<f64>, given: Option<&DMatrix<u8>>) -> DMatrix<u8> {
    let n = features.nrows();
    let kk = model.n_labels();
    let mut out = DMatrix::zeros(n, kk);
    let mut earlier = Vec::with_capacity(kk);
    for i in 0..n {
        let x_row: Vec<f64> = features.row(i).iter().copied().collect();
        earlier.clear();
        for (m, &k) in model.label_order.iter().enumerate() {
            let pred = (model.probability(m, &x_row, &earlier) >= model.threshold) as u8;
            out[(i, k)] = pred;
            earlier.push(match given {
                Some(truth) => truth[(i, k)],
                None => pred,
            });
        }
    }
    out
}

/// Greedy chain inference. Returns an n x K matrix in original label order.
pub fn predict_chain(model: &ChainModel, features: &DMatrix<f64>) -> Result<DMatrix<u8>> {
    model.check_features(features)?;
    Ok(predict_rows(model, features, None))
}

/// Predicts every position with the true earlier labels fed in, which
/// isolates each link's conditional accuracy.
pub fn predict_chain_teacher_forced(model: &ChainModel, features: &DMatrix<f64>, labels: &DMatrix<u8>) -> Result<DMatrix<u8>> {
    model.check_features(features)?;
    if labels.shape() != (features.nrows(), model.n_labels()) {
        return argument("label matrix shape does not match the chain");
    }
    Ok(predict_rows(model, features, Some(labels)))
}

/// Probabilities of each position under greedy inference (n x K, original
/// label order).
pub fn chain_probabilities(model: &ChainModel, features: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    model.check_features(features)?;
    let kk = model.n_labels();
    let mut out = DMatrix::zeros(features.nrows(), kk);
    for i in 0..features.nrows() {
        let x_row: Vec<f64> = features.row(i).iter().copied().collect();
        let mut earlier = Vec::with_capacity(kk);
        for (m, &k) in model.label_order.iter().enumerate() {
            let prob = model.probability(m, &x_row, &earlier);
            out[(i, k)] = prob;
            earlier.push((prob >= model.threshold) as u8);
        }
    }
    Ok(out)
}

//! Feature ranking for multi-label classification.
//!
//! Labels are modelled jointly with an Ising model conditioned on features.
//! Node-wise logistic regressions of each label on the remaining labels give
//! a null model per label, and a Rao score statistic measures how much a
//! candidate feature (or a feature-by-label interaction) would improve it.
//! An l1-penalized variant fits all features at once. Chi-squared and
//! information-gain filters over binary-relevance and label-powerset
//! transformations are provided as baselines, together with the synthetic
//! benchmarks, classifier chains and evaluation measures needed to compare
//! them.

pub mod chains;
pub mod dataset;
pub mod error;
pub mod evaluation;
mod linalg;
pub mod logistic;
pub mod rankers;
pub mod score;
pub mod synth;

pub use chains::{predict_chain, predict_chain_teacher_forced, train_chain, ChainConfig, ChainModel};
pub use dataset::{discretize, load_csv, split, standardize, write_csv, CsvOptions, DataSplit, DiscretizationMap, MultiLabelDataset};
pub use error::{Error, Result};
pub use evaluation::{classification_metrics, ranking_roc, select_features, MetricsReport, RocCurve, SelectionConfig, SelectionResult};
pub use logistic::{fit_l1, fit_mle, lambda_max, L1Config, L1Fit, LogisticConfig, LogisticFit};
pub use rankers::{rank, FeatureRanking, InteractionForm, Method, RankerConfig};
pub use score::{build_null_cache, score_multivariate, score_univariate, NullModelCache, ScoreResult};
pub use synth::{gibbs_sample_labels, make_artdata, make_or_toy, make_xor_toy, IsingParams, Scenario, ScenarioSpec};

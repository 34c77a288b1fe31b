//! Feature rankers: the three Ising-model methods and the binary-relevance /
//! label-powerset filter baselines.

mod filter;
mod ising;

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::dataset::MultiLabelDataset;
use crate::error::{argument, Error, Result};
use crate::logistic::{L1Config, LogisticConfig};

pub use filter::{chi2_statistic, info_gain, meta_classes, rank_br, rank_lp, FilterStat};
pub use ising::{rank_ising_inter_score, rank_ising_l1, rank_ising_score};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    IsingScore,
    IsingInterScore,
    IsingL1,
    BrChi2,
    BrIg,
    LpChi2,
    LpIg,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::IsingScore,
        Method::IsingInterScore,
        Method::IsingL1,
        Method::BrChi2,
        Method::BrIg,
        Method::LpChi2,
        Method::LpIg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::IsingScore => "ising+score",
            Method::IsingInterScore => "ising-inter+score",
            Method::IsingL1 => "ising+l1",
            Method::BrChi2 => "br-chi2",
            Method::BrIg => "br-ig",
            Method::LpChi2 => "lp-chi2",
            Method::LpIg => "lp-ig",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace([' ', '_'], "-");
        Method::ALL.into_iter().find(|m| m.name() == norm).ok_or_else(|| {
            let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
            Error::Argument(format!("unknown method {s:?}; valid methods: {}", names.join(", ")))
        })
    }
}

/// How the feature-dependent interaction ranker aggregates its terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InteractionForm {
    /// `sum_k [u_k(x) + sum_{s != k} u_k(x * y_s)]`.
    #[default]
    PerTerm,
    /// `sum_k U_k(x)` with the joint multivariate statistic.
    Joint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankerConfig {
    pub method: Method,
    /// Bins for the equal-frequency discretization used by the filters.
    pub bins: usize,
    /// l1 penalty as a fraction of `lambda_max`.
    pub lambda_factor: f64,
    /// Label-powerset pruning: combinations seen fewer times are dropped.
    pub lp_min_count: usize,
    /// Standardize features before the Ising methods.
    pub standardize: bool,
    pub interaction_form: InteractionForm,
    pub logistic: LogisticConfig,
    pub l1: L1Config,
}

impl RankerConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            bins: 10,
            lambda_factor: 1e-4,
            lp_min_count: 0,
            standardize: true,
            interaction_form: InteractionForm::PerTerm,
            logistic: LogisticConfig::default(),
            l1: L1Config::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins < 2 {
            return argument(format!("bin count must be at least 2, got {}", self.bins));
        }
        if !self.lambda_factor.is_finite() || self.lambda_factor <= 0.0 {
            return argument(format!("lambda factor must be positive, got {}", self.lambda_factor));
        }
        Ok(())
    }
}

/// Features ordered by decreasing importance. Indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRanking {
    pub order: Vec<usize>,
    pub importances: Vec<f64>,
    pub method: Method,
    /// Per-label contributions (p x K) when the method has them.
    pub per_label_scores: Option<DMatrix<f64>>,
}

impl FeatureRanking {
    /// Sorts by descending importance; ties go to the lower feature index.
    pub fn from_importances(importances: Vec<f64>, method: Method, per_label_scores: Option<DMatrix<f64>>) -> Self {
        let mut order: Vec<usize> = (0..importances.len()).collect();
        order.sort_by(|&a, &b| importances[b].total_cmp(&importances[a]).then(a.cmp(&b)));
        Self {
            order,
            importances,
            method,
            per_label_scores,
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// 0-based position of feature `j` in the ranking.
    pub fn position_of(&self, j: usize) -> Option<usize> {
        self.order.iter().position(|&f| f == j)
    }

    pub fn top(&self, count: usize) -> &[usize] {
        &self.order[..count.min(self.order.len())]
    }

    /// CSV with columns `rank,feature_index,feature_name,importance`; rank
    /// and feature index are 1-based.
    pub fn write_csv_to<W: Write>(&self, feature_names: &[String], writer: W) -> Result<()> {
        if feature_names.len() != self.order.len() {
            return argument("feature name count does not match the ranking");
        }
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["rank", "feature_index", "feature_name", "importance"])?;
        for (pos, &j) in self.order.iter().enumerate() {
            wtr.write_record([
                (pos + 1).to_string(),
                (j + 1).to_string(),
                feature_names[j].clone(),
                self.importances[j].to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_csv(&self, feature_names: &[String], path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path.as_ref())?;
        self.write_csv_to(feature_names, std::io::BufWriter::new(file))
    }

    /// Reads a ranking CSV written by [`FeatureRanking::write_csv`]. Rows are
    /// taken in file order.
    pub fn read_csv_from<R: Read>(reader: R, method: Method) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut order = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse_err = |column: usize, message: String| Error::Parse {
                row: i + 2,
                column,
                message,
            };
            if rec.len() != 4 {
                return Err(parse_err(1, format!("expected 4 columns, found {}", rec.len())));
            }
            let idx: usize = rec[1]
                .trim()
                .parse()
                .map_err(|_| parse_err(2, format!("bad feature index {:?}", &rec[1])))?;
            if idx == 0 {
                return Err(parse_err(2, "feature indices are 1-based".into()));
            }
            let imp: f64 = rec[3]
                .trim()
                .parse()
                .map_err(|_| parse_err(4, format!("bad importance {:?}", &rec[3])))?;
            order.push(idx - 1);
            values.push(imp);
        }
        let p = order.len();
        let mut importances = vec![f64::NAN; p];
        for (&j, &v) in order.iter().zip(&values) {
            if j >= p || !importances[j].is_nan() {
                return Err(Error::Validation("ranking is not a permutation of 1..p".into()));
            }
            importances[j] = v;
        }
        Ok(Self {
            order,
            importances,
            method,
            per_label_scores: None,
        })
    }

    pub fn read_csv(path: impl AsRef<Path>, method: Method) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::read_csv_from(file, method)
    }
}

/// Runs the ranker selected by `cfg.method`.
pub fn rank(ds: &MultiLabelDataset, cfg: &RankerConfig) -> Result<FeatureRanking> {
    cfg.validate()?;
    match cfg.method {
        Method::IsingScore => rank_ising_score(ds, cfg),
        Method::IsingInterScore => rank_ising_inter_score(ds, cfg),
        Method::IsingL1 => rank_ising_l1(ds, cfg),
        Method::BrChi2 => rank_br(ds, cfg, FilterStat::Chi2),
        Method::BrIg => rank_br(ds, cfg, FilterStat::InfoGain),
        Method::LpChi2 => rank_lp(ds, cfg, FilterStat::Chi2),
        Method::LpIg => rank_lp(ds, cfg, FilterStat::InfoGain),
    }
}

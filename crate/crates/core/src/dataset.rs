//! Multi-label datasets: CSV ingestion, splitting, standardization and
//! equal-frequency discretization.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector, DVectorView};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{argument, Error, Result};

/// Feature matrix `X` (n x p) together with a binary label matrix `Y` (n x K).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiLabelDataset {
    features: DMatrix<f64>,
    labels: DMatrix<u8>,
    feature_names: Vec<String>,
    label_names: Vec<String>,
}

impl MultiLabelDataset {
    /// Builds a dataset with default names `x1..xp` and `y1..yK`.
    pub fn new(features: DMatrix<f64>, labels: DMatrix<u8>) -> Result<Self> {
        let feature_names = (1..=features.ncols()).map(|j| format!("x{j}")).collect();
        let label_names = (1..=labels.ncols()).map(|k| format!("y{k}")).collect();
        Self::with_names(features, labels, feature_names, label_names)
    }

    pub fn with_names(
        features: DMatrix<f64>,
        labels: DMatrix<u8>,
        feature_names: Vec<String>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        if features.nrows() != labels.nrows() {
            return Err(Error::Validation(format!(
                "feature matrix has {} rows but label matrix has {}",
                features.nrows(),
                labels.nrows()
            )));
        }
        if features.nrows() == 0 {
            return Err(Error::Validation("dataset has no rows".into()));
        }
        if features.ncols() == 0 {
            return Err(Error::Validation("dataset has no features".into()));
        }
        if labels.ncols() < 2 {
            return Err(Error::Validation(format!(
                "at least two labels are required, got {}",
                labels.ncols()
            )));
        }
        if feature_names.len() != features.ncols() || label_names.len() != labels.ncols() {
            return Err(Error::Validation("name count does not match column count".into()));
        }
        if let Some(idx) = features.iter().position(|v| !v.is_finite()) {
            let (row, col) = (idx % features.nrows(), idx / features.nrows());
            return Err(Error::Validation(format!(
                "non-finite feature value at row {}, feature {}",
                row + 1,
                col + 1
            )));
        }
        if let Some(idx) = labels.iter().position(|&v| v > 1) {
            let (row, col) = (idx % labels.nrows(), idx / labels.nrows());
            return Err(Error::Validation(format!(
                "label value {} at row {}, label {} is not 0 or 1",
                labels[(row, col)],
                row + 1,
                col + 1
            )));
        }
        Ok(Self {
            features,
            labels,
            feature_names,
            label_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn n_labels(&self) -> usize {
        self.labels.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &DMatrix<u8> {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn feature(&self, j: usize) -> DVectorView<'_, f64> {
        self.features.column(j)
    }

    /// Labels as a real matrix of zeros and ones.
    pub fn labels_f64(&self) -> DMatrix<f64> {
        self.labels.map(f64::from)
    }

    pub fn label_column(&self, k: usize) -> DVector<f64> {
        self.labels.column(k).map(f64::from)
    }

    /// Same labels and names with a replacement feature matrix of equal shape.
    pub fn with_features(&self, features: DMatrix<f64>) -> Result<Self> {
        if features.shape() != self.features.shape() {
            return argument(format!(
                "replacement features have shape {:?}, expected {:?}",
                features.shape(),
                self.features.shape()
            ));
        }
        Self::with_names(
            features,
            self.labels.clone(),
            self.feature_names.clone(),
            self.label_names.clone(),
        )
    }

    /// Sub-dataset made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return argument("row selection is empty");
        }
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_rows()) {
            return argument(format!("row index {bad} out of range for {} rows", self.n_rows()));
        }
        Self::with_names(
            self.features.select_rows(rows),
            self.labels.select_rows(rows),
            self.feature_names.clone(),
            self.label_names.clone(),
        )
    }

    /// Sub-dataset made of the given feature columns.
    pub fn select_features(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.n_features()) {
            return argument(format!("feature index {bad} out of range"));
        }
        Self::with_names(
            self.features.select_columns(cols),
            self.labels.clone(),
            cols.iter().map(|&c| self.feature_names[c].clone()).collect(),
            self.label_names.clone(),
        )
    }
}

/// Layout of a dataset CSV file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub label_count: usize,
    pub has_header: bool,
    /// Labels occupy the leading columns instead of the trailing ones.
    pub labels_first: bool,
}

impl CsvOptions {
    pub fn new(label_count: usize) -> Self {
        Self {
            label_count,
            has_header: true,
            labels_first: false,
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<MultiLabelDataset> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file, opts)
}

/// Parses a dataset from any reader. Cells are trimmed; labels must be the
/// literal strings `0` or `1`; empty cells are rejected.
pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<MultiLabelDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);

    let mut header: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    let mut feature_values: Vec<f64> = Vec::new();
    let mut label_values: Vec<u8> = Vec::new();
    let mut n = 0usize;

    for (line_idx, record) in rdr.records().enumerate() {
        let record = record?;
        let row = line_idx + 1;
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Parse {
                row,
                column: record.len().min(w) + 1,
                message: format!("expected {w} columns, found {}", record.len()),
            });
        }
        if w <= opts.label_count {
            return Err(Error::Validation(format!(
                "{w} columns leave no room for features alongside {} labels",
                opts.label_count
            )));
        }
        if opts.has_header && header.is_none() {
            header = Some(record.iter().map(|s| s.trim().to_string()).collect());
            continue;
        }
        let p = w - opts.label_count;
        for (c, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            let is_label = if opts.labels_first {
                c < opts.label_count
            } else {
                c >= p
            };
            if is_label {
                match cell {
                    "0" => label_values.push(0),
                    "1" => label_values.push(1),
                    other => {
                        return Err(Error::Validation(format!(
                            "label value {other:?} at row {row}, column {} is not 0 or 1",
                            c + 1
                        )))
                    }
                }
            } else {
                if cell.is_empty() {
                    return Err(Error::Parse {
                        row,
                        column: c + 1,
                        message: "missing value".into(),
                    });
                }
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row,
                    column: c + 1,
                    message: format!("cannot parse {cell:?} as a number"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row,
                        column: c + 1,
                        message: format!("non-finite value {cell:?}"),
                    });
                }
                feature_values.push(v);
            }
        }
        n += 1;
    }

    let w = width.ok_or_else(|| Error::Validation("empty CSV input".into()))?;
    if n == 0 {
        return Err(Error::Validation("CSV contains no data rows".into()));
    }
    let k = opts.label_count;
    let p = w - k;
    let features = DMatrix::from_row_slice(n, p, &feature_values);
    let labels = DMatrix::from_row_slice(n, k, &label_values);
    match header {
        Some(h) => {
            let (label_names, feature_names) = if opts.labels_first {
                (h[..k].to_vec(), h[k..].to_vec())
            } else {
                (h[p..].to_vec(), h[..p].to_vec())
            };
            MultiLabelDataset::with_names(features, labels, feature_names, label_names)
        }
        None => MultiLabelDataset::new(features, labels),
    }
}

/// Writes a header row followed by features then labels. Reals use the
/// shortest representation that parses back to the identical value.
pub fn write_csv(ds: &MultiLabelDataset, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())?;
    let mut out = std::io::BufWriter::new(file);
    write_csv_to(ds, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_csv_to<W: Write>(ds: &MultiLabelDataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let header: Vec<&str> = ds
        .feature_names
        .iter()
        .chain(ds.label_names.iter())
        .map(String::as_str)
        .collect();
    wtr.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for i in 0..ds.n_rows() {
        row.clear();
        row.extend(ds.features.row(i).iter().map(|v| v.to_string()));
        row.extend(ds.labels.row(i).iter().map(|v| v.to_string()));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Disjoint row index sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataSplit {
    pub train_idx: Vec<usize>,
    pub val_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
}

pub fn split(ds: &MultiLabelDataset, train_frac: f64, val_frac: f64, seed: u64) -> Result<DataSplit> {
    split_rows(ds.n_rows(), train_frac, val_frac, seed)
}

/// Shuffles `0..n` with a seeded generator and cuts it into train,
/// validation and test parts of sizes `round(train_frac*n)`,
/// `round(val_frac*n)` and the remainder.
pub fn split_rows(n: usize, train_frac: f64, val_frac: f64, seed: u64) -> Result<DataSplit> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return argument(format!("train fraction {train_frac} must lie in (0, 1)"));
    }
    if !(0.0..1.0).contains(&val_frac) {
        return argument(format!("validation fraction {val_frac} must lie in [0, 1)"));
    }
    if train_frac + val_frac > 1.0 + 1e-12 {
        return argument("train and validation fractions sum to more than 1");
    }
    let n_train = (train_frac * n as f64).round() as usize;
    let n_val = ((val_frac * n as f64).round() as usize).min(n - n_train.min(n));
    if n_train == 0 {
        return argument(format!("training part is empty for n = {n}"));
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut train_idx = idx[..n_train].to_vec();
    let mut val_idx = idx[n_train..n_train + n_val].to_vec();
    let mut test_idx = idx[n_train + n_val..].to_vec();
    train_idx.sort_unstable();
    val_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok(DataSplit {
        train_idx,
        val_idx,
        test_idx,
    })
}

/// Centers each column and divides by its population standard deviation.
/// Constant columns become all zeros.
pub fn standardize(ds: &MultiLabelDataset) -> MultiLabelDataset {
    let features = standardize_matrix(ds.features());
    MultiLabelDataset {
        features,
        ..ds.clone()
    }
}

pub fn standardize_matrix(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    let n = x.nrows() as f64;
    for mut col in out.column_iter_mut() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let sd = var.sqrt();
        if sd <= 1e-12 * (1.0 + mean.abs()) {
            col.fill(0.0);
        } else {
            col.apply(|v| *v = (*v - mean) / sd);
        }
    }
    out
}

/// Per-feature cut points of an equal-frequency binning. A value `v` gets
/// code `#{cut < v}`, so ties always land in the same bin.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationMap {
    boundaries: Vec<Vec<f64>>,
}

impl DiscretizationMap {
    pub fn fit(features: &DMatrix<f64>, bins: usize) -> Result<Self> {
        if bins < 2 {
            return argument(format!("bin count must be at least 2, got {bins}"));
        }
        let n = features.nrows();
        let boundaries = features
            .column_iter()
            .map(|col| {
                let mut sorted: Vec<f64> = col.iter().copied().collect();
                sorted.sort_by(f64::total_cmp);
                let max = sorted[n - 1];
                let mut cuts: Vec<f64> = Vec::with_capacity(bins - 1);
                for b in 1..bins {
                    let pos = b * n / bins;
                    if pos == 0 {
                        continue;
                    }
                    let cut = sorted[pos - 1];
                    if cut < max && cuts.last().is_none_or(|&last| cut > last) {
                        cuts.push(cut);
                    }
                }
                cuts
            })
            .collect();
        Ok(Self { boundaries })
    }

    pub fn boundaries(&self, j: usize) -> &[f64] {
        &self.boundaries[j]
    }

    pub fn n_bins(&self, j: usize) -> usize {
        self.boundaries[j].len() + 1
    }

    pub fn code(&self, j: usize, value: f64) -> usize {
        self.boundaries[j].partition_point(|&c| c < value)
    }

    /// Codes for every value of feature column `j` of `features`.
    pub fn encode_column(&self, j: usize, column: DVectorView<'_, f64>) -> Vec<usize> {
        column.iter().map(|&v| self.code(j, v)).collect()
    }

    /// Applies the map to a matrix with the same number of columns.
    pub fn apply(&self, features: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if features.ncols() != self.boundaries.len() {
            return argument("column count does not match the discretization map");
        }
        Ok(DMatrix::from_fn(features.nrows(), features.ncols(), |i, j| {
            self.code(j, features[(i, j)]) as f64
        }))
    }
}

/// Equal-frequency discretization of every feature into at most `bins` bins.
/// Returns a dataset whose features are the integer codes.
pub fn discretize(ds: &MultiLabelDataset, bins: usize) -> Result<(MultiLabelDataset, DiscretizationMap)> {
    let map = DiscretizationMap::fit(ds.features(), bins)?;
    let coded = map.apply(ds.features())?;
    Ok((
        MultiLabelDataset {
            features: coded,
            ..ds.clone()
        },
        map,
    ))
}

//! Synthetic multi-label benchmarks.
//!
//! ArtData1 and ArtData2 draw labels from an Ising model conditioned on
//! Gaussian features using a Gibbs sampler, so the normalizer never has to be
//! evaluated. ArtData3 and ArtData4 are rule-based constructions over uniform
//! features. Two small toys (XOR and OR) exercise the score statistics and
//! the classifier chains.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;

use crate::dataset::MultiLabelDataset;
use crate::error::{argument, Error, Result};
use crate::linalg::sigmoid;

/// Parameters `(a, beta, b)` of the Ising model
/// `P(y | x) ∝ exp[sum_k a_k^T x y_k + sum_{k<l} (beta_kl + b_kl^T x) y_k y_l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingParams {
    n_labels: usize,
    n_features: usize,
    a: DMatrix<f64>,
    beta: DMatrix<f64>,
    // Flattened K x K x p tensor, index (k * K + l) * p + s.
    b: Vec<f64>,
}

impl IsingParams {
    pub fn zeros(n_labels: usize, n_features: usize) -> Self {
        Self {
            n_labels,
            n_features,
            a: DMatrix::zeros(n_labels, n_features),
            beta: DMatrix::zeros(n_labels, n_labels),
            b: vec![0.0; n_labels * n_labels * n_features],
        }
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn a(&self, k: usize, s: usize) -> f64 {
        self.a[(k, s)]
    }

    pub fn beta(&self, k: usize, l: usize) -> f64 {
        self.beta[(k, l)]
    }

    pub fn b(&self, k: usize, l: usize, s: usize) -> f64 {
        self.b[(k * self.n_labels + l) * self.n_features + s]
    }

    pub fn set_a(&mut self, k: usize, s: usize, value: f64) {
        self.a[(k, s)] = value;
    }

    /// Sets `beta_kl` and `beta_lk`. Diagonal entries stay zero.
    pub fn set_beta(&mut self, k: usize, l: usize, value: f64) {
        if k != l {
            self.beta[(k, l)] = value;
            self.beta[(l, k)] = value;
        }
    }

    /// Sets `b_kls` and `b_lks`. Diagonal entries stay zero.
    pub fn set_b(&mut self, k: usize, l: usize, s: usize, value: f64) {
        if k != l {
            let p = self.n_features;
            let kk = self.n_labels;
            self.b[(k * kk + l) * p + s] = value;
            self.b[(l * kk + k) * p + s] = value;
        }
    }

    /// Unnormalized log-probability of a label vector given features.
    pub fn log_potential(&self, x: &[f64], y: &[u8]) -> f64 {
        let kk = self.n_labels;
        let mut total = 0.0;
        for k in 0..kk {
            if y[k] == 0 {
                continue;
            }
            total += (0..self.n_features).map(|s| self.a[(k, s)] * x[s]).sum::<f64>();
            for (l, &yl) in y.iter().enumerate().take(kk).skip(k + 1) {
                if yl == 1 {
                    total += self.coupling(x, k, l);
                }
            }
        }
        total
    }

    /// `beta_kl + b_kl^T x`.
    pub fn coupling(&self, x: &[f64], k: usize, l: usize) -> f64 {
        let p = self.n_features;
        let base = (k * self.n_labels + l) * p;
        self.beta[(k, l)] + self.b[base..base + p].iter().zip(x).map(|(b, x)| b * x).sum::<f64>()
    }

    fn check_row(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return argument(format!(
                "feature row has length {}, parameters expect {}",
                x.len(),
                self.n_features
            ));
        }
        Ok(())
    }
}

/// Draws one label vector by Gibbs sampling: labels start iid Bernoulli(1/2)
/// and every sweep redraws `y_1, ..., y_K` in order from
/// `P(y_k = 1 | x, y_{-k}) = sigmoid(a_k^T x + sum_{l != k} (beta_kl + b_kl^T x) y_l)`.
/// Returns the state after the last sweep.
pub fn gibbs_sample_labels<R: Rng + ?Sized>(x_row: &[f64], params: &IsingParams, sweeps: usize, rng: &mut R) -> Result<Vec<u8>> {
    params.check_row(x_row)?;
    if sweeps == 0 {
        return argument("at least one Gibbs sweep is required");
    }
    let kk = params.n_labels;
    let field: Vec<f64> = (0..kk)
        .map(|k| (0..params.n_features).map(|s| params.a[(k, s)] * x_row[s]).sum())
        .collect();
    let mut couplings = vec![0.0; kk * kk];
    for k in 0..kk {
        for l in (k + 1)..kk {
            let c = params.coupling(x_row, k, l);
            couplings[k * kk + l] = c;
            couplings[l * kk + k] = c;
        }
    }
    let mut y: Vec<u8> = (0..kk).map(|_| rng.random_bool(0.5) as u8).collect();
    for _ in 0..sweeps {
        for k in 0..kk {
            let mut logit = field[k];
            for l in 0..kk {
                if l != k && y[l] == 1 {
                    logit += couplings[k * kk + l];
                }
            }
            y[k] = (rng.random::<f64>() < sigmoid(logit)) as u8;
        }
    }
    Ok(y)
}

/// Samples labels for every row of `features` with independent per-row
/// random streams derived from `seed`.
pub fn sample_ising_labels(features: &DMatrix<f64>, params: &IsingParams, sweeps: usize, seed: u64) -> Result<DMatrix<u8>> {
    if features.ncols() != params.n_features {
        return argument("feature matrix does not match the parameter dimensions");
    }
    let n = features.nrows();
    let kk = params.n_labels;
    let rows: Vec<Vec<u8>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let x: Vec<f64> = features.row(i).iter().copied().collect();
            gibbs_sample_labels(&x, params, sweeps, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(n, kk, |i, k| rows[i][k]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    ArtData1,
    ArtData2,
    ArtData3,
    ArtData4,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::ArtData1, Scenario::ArtData2, Scenario::ArtData3, Scenario::ArtData4];
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Scenario::ArtData1 => "artdata1",
            Scenario::ArtData2 => "artdata2",
            Scenario::ArtData3 => "artdata3",
            Scenario::ArtData4 => "artdata4",
        };
        f.write_str(name)
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Argument(format!("unknown scenario {s:?}; expected artdata1, artdata2, artdata3 or artdata4")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub n: usize,
    pub p: usize,
    pub n_labels: usize,
    pub seed: u64,
    pub gibbs_sweeps: usize,
}

impl ScenarioSpec {
    /// Default sizes: n=1000, p=50, K=10 for the Ising scenarios; n=100,
    /// p=50, K=4 for the rule-based ones. Gibbs sampling uses 30 sweeps.
    pub fn new(scenario: Scenario, seed: u64) -> Self {
        let (n, p, n_labels) = match scenario {
            Scenario::ArtData1 | Scenario::ArtData2 => (1000, 50, 10),
            Scenario::ArtData3 | Scenario::ArtData4 => (100, 50, 4),
        };
        Self {
            scenario,
            n,
            p,
            n_labels,
            seed,
            gibbs_sweeps: 30,
        }
    }
}

/// Number of leading features that carry signal in the synthetic scenarios.
pub const N_SIGNAL_FEATURES: usize = 10;

/// Parameters of ArtData1 (`direct = true`) or ArtData2 (`direct = false`):
/// `a_ks = 0.2` on the first ten features (zero in ArtData2),
/// `beta_kl = 0.1` for all pairs, and `b_12s = 0.2` on the first ten features.
pub fn artdata_params(n_labels: usize, p: usize, direct: bool) -> IsingParams {
    let mut params = IsingParams::zeros(n_labels, p);
    for k in 0..n_labels {
        for l in (k + 1)..n_labels {
            params.set_beta(k, l, 0.1);
        }
        if direct {
            for s in 0..N_SIGNAL_FEATURES.min(p) {
                params.set_a(k, s, 0.2);
            }
        }
    }
    for s in 0..N_SIGNAL_FEATURES.min(p) {
        params.set_b(0, 1, s, 0.2);
    }
    params
}

/// Generates a scenario dataset and its 0-based set of relevant features.
pub fn make_artdata(spec: &ScenarioSpec) -> Result<(MultiLabelDataset, Vec<usize>)> {
    if spec.n == 0 {
        return argument("sample size must be positive");
    }
    if spec.p < N_SIGNAL_FEATURES {
        return argument(format!("{} needs at least {N_SIGNAL_FEATURES} features", spec.scenario));
    }
    if spec.gibbs_sweeps == 0 {
        return argument("at least one Gibbs sweep is required");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    match spec.scenario {
        Scenario::ArtData1 | Scenario::ArtData2 => {
            if spec.n_labels < 2 {
                return argument("Ising scenarios need at least two labels");
            }
            let features = DMatrix::from_fn(spec.n, spec.p, |_, _| StandardNormal.sample(&mut rng));
            let params = artdata_params(spec.n_labels, spec.p, spec.scenario == Scenario::ArtData1);
            let labels = sample_ising_labels(&features, &params, spec.gibbs_sweeps, spec.seed)?;
            Ok((MultiLabelDataset::new(features, labels)?, (0..N_SIGNAL_FEATURES).collect()))
        }
        Scenario::ArtData3 | Scenario::ArtData4 => {
            if spec.n_labels != 4 {
                return argument(format!("{} always has 4 labels", spec.scenario));
            }
            let noisy = spec.scenario == Scenario::ArtData4;
            let eps = Normal::new(0.0, 0.3).expect("valid normal");
            let mut features = DMatrix::zeros(spec.n, spec.p);
            let mut labels = DMatrix::zeros(spec.n, 4);
            for i in 0..spec.n {
                let base: [f64; 5] = std::array::from_fn(|_| rng.random::<f64>());
                let derived: [f64; 5] = if noisy {
                    std::array::from_fn(|s| base[s] + eps.sample(&mut rng))
                } else {
                    [
                        (base[0] - base[1]) / 2.0,
                        (base[0] + base[1]) / 2.0,
                        base[2] + 0.1,
                        base[3] - 0.2,
                        2.0 * base[4],
                    ]
                };
                for s in 0..5 {
                    features[(i, s)] = base[s];
                    features[(i, s + 5)] = derived[s];
                }
                for s in N_SIGNAL_FEATURES..spec.p {
                    features[(i, s)] = rng.random::<f64>();
                }
                let mut noise = || if noisy { eps.sample(&mut rng) } else { 0.0 };
                let y1 = base[0] > base[1] + noise();
                let y2 = base[3] > base[2] + noise();
                let y3 = y1 != y2;
                let y4 = base[4] + noise() > 0.8;
                for (k, v) in [y1, y2, y3, y4].into_iter().enumerate() {
                    labels[(i, k)] = v as u8;
                }
            }
            let relevant = if noisy {
                (0..N_SIGNAL_FEATURES).collect()
            } else {
                vec![0, 1, 2, 3, 4, 5, 7, 8, 9]
            };
            Ok((MultiLabelDataset::new(features, labels)?, relevant))
        }
    }
}

/// XOR toy: two labels with all four combinations represented as evenly as
/// `n` allows, `x1 = 1` exactly when the labels differ, followed by
/// `noise_features` iid standard Gaussian columns.
pub fn make_xor_toy(noise_features: usize, n: usize, seed: u64) -> Result<MultiLabelDataset> {
    if n < 4 {
        return argument("the XOR toy needs at least 4 rows");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut combos: Vec<(u8, u8)> = (0..n).map(|i| (((i >> 1) & 1) as u8, (i & 1) as u8)).collect();
    combos.shuffle(&mut rng);
    let p = 1 + noise_features;
    let mut features = DMatrix::zeros(n, p);
    let mut labels = DMatrix::zeros(n, 2);
    for (i, &(y1, y2)) in combos.iter().enumerate() {
        labels[(i, 0)] = y1;
        labels[(i, 1)] = y2;
        features[(i, 0)] = (y1 != y2) as u8 as f64;
        for s in 1..p {
            features[(i, s)] = StandardNormal.sample(&mut rng);
        }
    }
    MultiLabelDataset::new(features, labels)
}

/// OR toy: `y2 ~ Bernoulli(1/2)` and `x1 ~ Bernoulli(1/2)` independent,
/// `y1 = I(y2 + x1 > 0)`. A second, pure-noise Gaussian feature is appended
/// so that `x1` can be left out of a model.
pub fn make_or_toy(n: usize, seed: u64) -> Result<MultiLabelDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = DMatrix::zeros(n, 2);
    let mut labels = DMatrix::zeros(n, 2);
    for i in 0..n {
        let y2 = rng.random_bool(0.5);
        let x1 = rng.random_bool(0.5);
        features[(i, 0)] = x1 as u8 as f64;
        features[(i, 1)] = StandardNormal.sample(&mut rng);
        labels[(i, 0)] = (y2 || x1) as u8;
        labels[(i, 1)] = y2 as u8;
    }
    MultiLabelDataset::new(features, labels)
}

/// Single-feature benchmark: `y_2..y_K` iid Bernoulli(1/2), `x1` standard
/// Gaussian, and `y_1` drawn from the node-wise conditional
/// `logit P(y_1 = 1) = beta * sum_{l > 1} y_l + a1 * x1`.
pub fn make_single_feature_data(n: usize, n_labels: usize, a1: f64, beta: f64, seed: u64) -> Result<MultiLabelDataset> {
    if n_labels < 2 {
        return argument("at least two labels are required");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = DMatrix::zeros(n, 1);
    let mut labels = DMatrix::zeros(n, n_labels);
    for i in 0..n {
        let x: f64 = StandardNormal.sample(&mut rng);
        features[(i, 0)] = x;
        let mut logit = a1 * x;
        for l in 1..n_labels {
            let y = rng.random_bool(0.5) as u8;
            labels[(i, l)] = y;
            logit += beta * y as f64;
        }
        labels[(i, 0)] = (rng.random::<f64>() < sigmoid(logit)) as u8;
    }
    MultiLabelDataset::new(features, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_are_symmetric() {
        let params = artdata_params(4, 12, true);
        assert_eq!(params.beta(0, 3), 0.1);
        assert_eq!(params.beta(3, 0), 0.1);
        assert_eq!(params.beta(2, 2), 0.0);
        assert_eq!(params.b(0, 1, 4), 0.2);
        assert_eq!(params.b(1, 0, 4), 0.2);
        assert_eq!(params.b(1, 0, 10), 0.0);
        assert_eq!(params.b(2, 3, 4), 0.0);
        assert_eq!(params.a(3, 9), 0.2);
        assert_eq!(params.a(3, 10), 0.0);
        assert_eq!(artdata_params(4, 12, false).a(0, 0), 0.0);
    }

    #[test]
    fn zero_params_give_fair_coins() {
        let params = IsingParams::zeros(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut sums = [0usize; 3];
        for _ in 0..10_000 {
            let y = gibbs_sample_labels(&[0.3, -1.0], &params, 30, &mut rng).unwrap();
            for k in 0..3 {
                sums[k] += y[k] as usize;
            }
        }
        for s in sums {
            let mean = s as f64 / 10_000.0;
            assert!((0.47..=0.53).contains(&mean), "{mean}");
        }
    }

    #[test]
    fn shapes_and_relevance() {
        let (ds, t) = make_artdata(&ScenarioSpec::new(Scenario::ArtData1, 3)).unwrap();
        assert_eq!((ds.n_rows(), ds.n_features(), ds.n_labels()), (1000, 50, 10));
        assert_eq!(t, (0..10).collect::<Vec<_>>());
        let (ds, t) = make_artdata(&ScenarioSpec::new(Scenario::ArtData3, 3)).unwrap();
        assert_eq!((ds.n_rows(), ds.n_features(), ds.n_labels()), (100, 50, 4));
        assert!(!t.contains(&6));
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = ScenarioSpec::new(Scenario::ArtData1, 1);
        spec.p = 5;
        assert!(make_artdata(&spec).is_err());
        let mut spec = ScenarioSpec::new(Scenario::ArtData3, 1);
        spec.n_labels = 5;
        assert!(make_artdata(&spec).is_err());
        assert!("artdata9".parse::<Scenario>().is_err());
        assert_eq!("ArtData2".parse::<Scenario>().unwrap(), Scenario::ArtData2);
        assert!(make_xor_toy(0, 3, 1).is_err());
    }

    #[test]
    fn xor_toy_rule() {
        let ds = make_xor_toy(3, 100, 5).unwrap();
        for i in 0..100 {
            let (y1, y2) = (ds.labels()[(i, 0)], ds.labels()[(i, 1)]);
            assert_eq!(ds.features()[(i, 0)], if y1 != y2 { 1.0 } else { 0.0 });
        }
        let x = ds.feature(0);
        let y = ds.label_column(0);
        let xm = x.mean();
        let ym = y.mean();
        let cov: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a - xm) * (b - ym)).sum();
        assert!(cov.abs() < 1e-12);
    }
}

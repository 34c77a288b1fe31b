//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use mlrank::synth::make_single_feature_data;
use mlrank::{
    build_null_cache, classification_metrics, fit_l1, lambda_max, make_artdata, make_or_toy, make_xor_toy,
    predict_chain_teacher_forced, rank, ranking_roc, score_multivariate, score_univariate, train_chain, ChainConfig,
    FeatureRanking, L1Config, LogisticConfig, Method, MultiLabelDataset, RankerConfig, Scenario, ScenarioSpec,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(id: usize, title: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = f();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let passed = outcome.passed && in_time;
    let timing = match limit {
        Some(l) => format!("{:.1}s of {}s", elapsed.as_secs_f64(), l.as_secs()),
        None => format!("{:.1}s", elapsed.as_secs_f64()),
    };
    println!(
        "AC{id:<2} {} {title}: {} [{timing}]",
        if passed { "PASS" } else { "FAIL" },
        outcome.detail
    );
    passed
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn oracle_equivalence() -> Outcome {
    let cfg = LogisticConfig::default();
    let mut rng = common::rng(1);
    let (mut worst, mut worst_reduction, mut done) = (0.0f64, 0.0f64, 0);
    while done < 100 {
        let n = rng.random_range(30..=100);
        let kk = rng.random_range(3..=5);
        let labels = common::random_labels(n, kk, &mut rng);
        let cache = build_null_cache(&labels, rng.random_range(0..kk), &cfg).unwrap();
        if cache.is_singular() {
            continue;
        }
        let m = common::gaussian_matrix(n, 1, &mut rng);
        let u = score_univariate(&cache, m.as_slice()).unwrap().value;
        let oracle = common::full_information_score(&cache, &labels, m.as_slice());
        worst = worst.max((u - oracle).abs() / oracle.abs());
        let big_u = score_multivariate(&cache, &m).unwrap().value;
        worst_reduction = worst_reduction.max((big_u - u).abs() / u.abs());
        done += 1;
    }
    Outcome {
        passed: worst < 1e-8 && worst_reduction < 1e-10,
        detail: format!("max rel. error {worst:.2e} vs oracle, {worst_reduction:.2e} multivariate reduction"),
    }
}

fn null_score(n: usize, a1: f64, seed: u64) -> f64 {
    let ds = make_single_feature_data(n, 5, a1, 0.1, seed).unwrap();
    let cache = build_null_cache(ds.labels(), 0, &LogisticConfig::default()).unwrap();
    score_univariate(&cache, ds.feature(0).as_slice()).unwrap().value
}

fn null_calibration() -> Outcome {
    let mut us: Vec<f64> = (0..500).map(|rep| null_score(2000, 0.0, 10_000 + rep)).collect();
    let mean = us.iter().sum::<f64>() / us.len() as f64;
    let chi2 = ChiSquared::new(1.0).unwrap();
    let d = common::ks_distance(&mut us, |v| chi2.cdf(v));
    let critical = 1.6276 / (us.len() as f64).sqrt();
    Outcome {
        passed: (0.85..=1.15).contains(&mean) && d < critical,
        detail: format!("mean u {mean:.3}, KS D {d:.4} (critical {critical:.4})"),
    }
}

fn signal_monotonicity() -> Outcome {
    let median_at = |n: usize, a1: f64, base: u64| {
        let mut us: Vec<f64> = (0..50).map(|rep| null_score(n, a1, base + rep)).collect();
        common::median(&mut us)
    };
    let by_effect: Vec<f64> = [0.0, 0.5, 1.0]
        .iter()
        .enumerate()
        .map(|(i, &a)| median_at(1000, a, 20_000 + 100 * i as u64))
        .collect();
    let by_size: Vec<f64> = [250, 1000, 4000]
        .iter()
        .enumerate()
        .map(|(i, &n)| median_at(n, 1.0, 30_000 + 100 * i as u64))
        .collect();
    let increasing = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
    Outcome {
        passed: increasing(&by_effect) && increasing(&by_size),
        detail: format!("medians over a1 {by_effect:.2?}, over n {by_size:.2?}"),
    }
}

fn mean_auc(scenario: Scenario, methods: &[Method]) -> Vec<f64> {
    let mut totals = vec![0.0; methods.len()];
    for seed in 0..20 {
        let (ds, relevant) = make_artdata(&ScenarioSpec::new(scenario, seed)).unwrap();
        for (total, &method) in totals.iter_mut().zip(methods) {
            let ranking = rank(&ds, &RankerConfig::new(method)).unwrap();
            *total += ranking_roc(&ranking, &relevant).unwrap().auc;
        }
    }
    totals.iter().map(|t| t / 20.0).collect()
}

fn artdata1_ordering() -> Outcome {
    let auc = mean_auc(Scenario::ArtData1, &[Method::IsingScore, Method::LpChi2]);
    Outcome {
        passed: auc[0] >= 0.90 && auc[0] > auc[1] + 0.05,
        detail: format!("mean AUC ising+score {:.3}, lp-chi2 {:.3}", auc[0], auc[1]),
    }
}

fn artdata2_ordering() -> Outcome {
    let auc = mean_auc(Scenario::ArtData2, &[Method::IsingInterScore, Method::BrIg, Method::LpIg]);
    Outcome {
        passed: auc[0] > auc[1] && auc[0] > auc[2],
        detail: format!(
            "mean AUC ising-inter+score {:.3}, br-ig {:.3}, lp-ig {:.3}",
            auc[0], auc[1], auc[2]
        ),
    }
}

fn xor_discrimination() -> Outcome {
    let (mut inter_first, mut plain_below_median) = (0, 0);
    for seed in 0..20 {
        let ds = make_xor_toy(20, 400, seed).unwrap();
        if rank(&ds, &RankerConfig::new(Method::IsingInterScore)).unwrap().order[0] == 0 {
            inter_first += 1;
        }
        let plain = rank(&ds, &RankerConfig::new(Method::IsingScore)).unwrap();
        let mut noise = plain.importances[1..].to_vec();
        if plain.importances[0] < common::median(&mut noise) {
            plain_below_median += 1;
        }
    }
    Outcome {
        passed: inter_first >= 18 && plain_below_median >= 15,
        detail: format!("x1 first under interactions {inter_first}/20, below noise median without {plain_below_median}/20"),
    }
}

fn l1_boundary() -> Outcome {
    let mut rng = common::rng(7);
    let mut exact = 0;
    for _ in 0..50 {
        let n = rng.random_range(20..200);
        let d = rng.random_range(1..12);
        let z = common::gaussian_matrix(n, d, &mut rng);
        let w = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let y = (&z * w).map(|e| (rng.random::<f64>() < common::sigmoid(e)) as u8 as f64);
        let fit = fit_l1(&z, &y, lambda_max(&z, &y), &L1Config::default()).unwrap();
        if fit.coefficients.iter().all(|&c| c == 0.0) {
            exact += 1;
        }
    }
    Outcome {
        passed: exact == 50,
        detail: format!("{exact}/50 fits exactly zero at lambda_max"),
    }
}

fn or_toy_accuracy() -> Outcome {
    let train = make_or_toy(2000, 100).unwrap();
    let test = make_or_toy(2000, 101).unwrap();
    let accuracy = |subset: &[usize]| {
        let model = train_chain(train.features(), train.labels(), subset, &[1, 0], &ChainConfig::default()).unwrap();
        let pred = predict_chain_teacher_forced(&model, test.features(), test.labels()).unwrap();
        (0..test.n_rows()).filter(|&i| pred[(i, 0)] == test.labels()[(i, 0)]).count() as f64 / test.n_rows() as f64
    };
    let with = accuracy(&[0, 1]);
    let without = accuracy(&[1]);
    Outcome {
        passed: with >= 0.99 && (0.70..=0.80).contains(&without),
        detail: format!("y1 accuracy {with:.4} with x1, {without:.4} without"),
    }
}

fn metric_exactness() -> Outcome {
    let y = DMatrix::from_row_slice(1, 3, &[1u8, 0, 1]);
    let yh = DMatrix::from_row_slice(1, 3, &[1u8, 1, 0]);
    let m = classification_metrics(&y, &yh).unwrap();
    let metrics_ok = m.subset_accuracy == 0.0 && m.hamming == 1.0 / 3.0 && m.jaccard == 1.0 / 3.0;
    let ranking = FeatureRanking::from_importances(vec![4.0, 2.0, 3.0, 1.0], Method::IsingScore, None);
    let roc = ranking_roc(&ranking, &[0, 1]).unwrap();
    let roc_ok = roc.auc == 0.75 && roc.points == vec![(0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)];
    Outcome {
        passed: metrics_ok && roc_ok,
        detail: format!(
            "subset {}, hamming {}, jaccard {}, AUC {}",
            m.subset_accuracy, m.hamming, m.jaccard, roc.auc
        ),
    }
}

fn scaling_data(p: usize, seed: u64) -> MultiLabelDataset {
    let mut rng = common::rng(seed);
    let x = common::gaussian_matrix(500, p, &mut rng);
    MultiLabelDataset::new(x, common::random_labels(500, 5, &mut rng)).unwrap()
}

fn min_time(ds: &MultiLabelDataset, repeats: usize) -> f64 {
    let cfg = RankerConfig::new(Method::IsingScore);
    (0..repeats)
        .map(|_| {
            let start = Instant::now();
            let r = rank(ds, &cfg).unwrap();
            let t = start.elapsed().as_secs_f64();
            assert_eq!(r.len(), ds.n_features());
            t
        })
        .fold(f64::INFINITY, f64::min)
}

fn scaling() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    pool.install(|| {
        let sizes = [1000usize, 2000, 4000];
        let data: Vec<MultiLabelDataset> = sizes.iter().map(|&p| scaling_data(p, p as u64)).collect();
        min_time(&data[0], 2);
        let times: Vec<f64> = data.iter().map(|ds| min_time(ds, 7)).collect();
        let xs: Vec<f64> = sizes.iter().map(|&p| p as f64).collect();
        let r2 = common::linear_r2(&xs, &times);
        let big = scaling_data(5000, 5000);
        let start = Instant::now();
        rank(&big, &RankerConfig::new(Method::IsingScore)).unwrap();
        let full = start.elapsed().as_secs_f64();
        Outcome {
            passed: r2 >= 0.95 && full < 10.0,
            detail: format!(
                "times {:.1?} ms for p = 1000/2000/4000, R^2 {r2:.4}; p = 5000 in {:.3}s",
                times.iter().map(|t| t * 1e3).collect::<Vec<_>>(),
                full
            ),
        }
    })
}

#[test]
fn acceptance_criteria() {
    println!();
    let results = [
        check(1, "score oracle equivalence", secs(10), oracle_equivalence),
        check(2, "null calibration", secs(60), null_calibration),
        check(3, "score grows with effect and sample size", secs(120), signal_monotonicity),
        check(4, "ArtData1 ordering", secs(300), artdata1_ordering),
        check(5, "ArtData2 ordering", secs(600), artdata2_ordering),
        check(6, "XOR discrimination", None, xor_discrimination),
        check(7, "l1 boundary", None, l1_boundary),
        check(8, "toy chain accuracy", None, or_toy_accuracy),
        check(9, "metric exactness", None, metric_exactness),
        check(10, "linear scaling in p", None, scaling),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, &ok)| !ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

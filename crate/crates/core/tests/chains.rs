mod common;

use mlrank::chains::chain_probabilities;
use mlrank::{
    classification_metrics, make_or_toy, predict_chain, predict_chain_teacher_forced, train_chain, ChainConfig, ChainModel,
};
use nalgebra::DMatrix;
use rand::Rng;

/// Labels are thresholded linear functions of the features, so every chain
/// link is linearly separable.
fn separable(n: usize, seed: u64) -> (DMatrix<f64>, DMatrix<u8>) {
    let mut rng = common::rng(seed);
    let x = common::gaussian_matrix(n, 4, &mut rng);
    let w: Vec<[f64; 4]> = (0..3)
        .map(|_| std::array::from_fn(|_| rng.random_range(-2.0..2.0)))
        .collect();
    let y = DMatrix::from_fn(n, 3, |i, k| ((0..4).map(|s| w[k][s] * x[(i, s)]).sum::<f64>() > 0.0) as u8);
    (x, y)
}

#[test]
fn separable_round_trip() {
    for seed in 0..5 {
        let (x, y) = separable(300, seed);
        let model = train_chain(&x, &y, &[0, 1, 2, 3], &[0, 1, 2], &ChainConfig::default()).unwrap();
        let pred = predict_chain(&model, &x).unwrap();
        let report = classification_metrics(&y, &pred).unwrap();
        assert!(report.subset_accuracy >= 0.99, "seed {seed}: {}", report.subset_accuracy);
    }
}

#[test]
fn or_toy_accuracy() {
    let train = make_or_toy(2000, 1).unwrap();
    let test = make_or_toy(2000, 2).unwrap();
    let cfg = ChainConfig::default();
    let y1_accuracy = |subset: &[usize]| {
        let model = train_chain(train.features(), train.labels(), subset, &[1, 0], &cfg).unwrap();
        let pred = predict_chain_teacher_forced(&model, test.features(), test.labels()).unwrap();
        (0..2000).filter(|&i| pred[(i, 0)] == test.labels()[(i, 0)]).count() as f64 / 2000.0
    };
    assert!(y1_accuracy(&[0, 1]) >= 0.99);
    let without = y1_accuracy(&[1]);
    assert!((0.70..=0.80).contains(&without), "{without}");
}

#[test]
fn saved_models_predict_identically() {
    let (x, y) = separable(120, 9);
    let model = train_chain(&x, &y, &[3, 1], &[2, 0, 1], &ChainConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    model.save(&path).unwrap();
    let loaded = ChainModel::load(&path).unwrap();
    assert_eq!(loaded, model);
    assert_eq!(predict_chain(&loaded, &x).unwrap(), predict_chain(&model, &x).unwrap());
    let probs = chain_probabilities(&model, &x).unwrap();
    assert!(probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
}

#[test]
fn teacher_forcing_checks_shapes() {
    let (x, y) = separable(50, 1);
    let model = train_chain(&x, &y, &[0], &[0, 1, 2], &ChainConfig::default()).unwrap();
    assert!(predict_chain_teacher_forced(&model, &x, &DMatrix::zeros(50, 2)).is_err());
    assert!(predict_chain(&model, &DMatrix::zeros(50, 3)).is_err());
}

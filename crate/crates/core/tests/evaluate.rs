//! Random-forest accuracy on data with known separability.

use gp4nldr_core::evaluate::{cv_accuracy, encode_labels, stratified_folds, ForestConfig};
use gp4nldr_core::{examples, Matrix};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Three well-separated Gaussian blobs in 4-D.
fn blobs(per_class: usize, seed: u64) -> (Matrix, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let centers = [[0.2, 0.2, 0.8, 0.5], [0.8, 0.2, 0.2, 0.5], [0.5, 0.8, 0.5, 0.1]];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_class {
            rows.push(center.iter().map(|v| v + noise.sample(&mut rng)).collect::<Vec<f64>>());
            labels.push(format!("c{c}"));
        }
    }
    (Matrix::from_rows(&rows).unwrap(), labels)
}

/// Leave-one-out nearest-centroid accuracy, an independent separability check.
fn nearest_centroid(x: &Matrix, labels: &[String]) -> f64 {
    let (codes, k) = encode_labels(labels);
    let mut correct = 0;
    for i in 0..x.rows() {
        let mut best = (f64::INFINITY, 0);
        for c in 0..k {
            let members: Vec<usize> = (0..x.rows()).filter(|&j| j != i && codes[j] == c).collect();
            let centroid: Vec<f64> = (0..x.cols())
                .map(|d| members.iter().map(|&j| x.get(j, d)).sum::<f64>() / members.len() as f64)
                .collect();
            let dist: f64 = x.row(i).iter().zip(&centroid).map(|(a, b)| (a - b).powi(2)).sum();
            if dist < best.0 {
                best = (dist, c);
            }
        }
        correct += usize::from(best.1 == codes[i]);
    }
    correct as f64 / x.rows() as f64
}

#[test]
fn separable_blobs_are_classified() {
    let (x, y) = blobs(40, 1);
    assert_eq!(nearest_centroid(&x, &y), 1.0);
    let acc = cv_accuracy(&x, &y, &ForestConfig::with_seed(0), 10).unwrap();
    assert!(acc >= 0.98, "{acc}");
}

#[test]
fn shuffled_labels_fall_to_chance() {
    let (x, mut y) = blobs(40, 2);
    y.shuffle(&mut ChaCha8Rng::seed_from_u64(99));
    let acc = cv_accuracy(&x, &y, &ForestConfig::with_seed(0), 10).unwrap();
    assert!(acc < 0.7, "{acc}");
}

#[test]
fn accuracy_is_deterministic_per_seed() {
    let (x, y) = blobs(20, 3);
    let a = cv_accuracy(&x, &y, &ForestConfig::with_seed(9), 5).unwrap();
    let b = cv_accuracy(&x, &y, &ForestConfig::with_seed(9), 5).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
}

#[test]
fn identical_inputs_give_identical_accuracy() {
    let wine = examples::wine();
    let cfg = ForestConfig::with_seed(0);
    let a = cv_accuracy(wine.scaled(), wine.labels(), &cfg, 10).unwrap();
    let b = cv_accuracy(&wine.scaled().clone(), wine.labels(), &cfg, 10).unwrap();
    assert_eq!(a, b);
}

#[test]
fn folds_are_stratified_and_balanced() {
    let wine = examples::wine();
    let (codes, k) = encode_labels(wine.labels());
    let folds = stratified_folds(&codes, k, 10, 0);
    let sizes: Vec<usize> = (0..10).map(|f| folds.iter().filter(|&&x| x == f).count()).collect();
    assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1, "{sizes:?}");
    for c in 0..k {
        let per: Vec<usize> = (0..10)
            .map(|f| (0..codes.len()).filter(|&i| codes[i] == c && folds[i] == f).count())
            .collect();
        assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1, "{per:?}");
    }
}

#[test]
fn invalid_fold_counts_are_rejected() {
    let (x, y) = blobs(2, 4);
    assert!(cv_accuracy(&x, &y, &ForestConfig::default(), 1).is_err());
    assert!(cv_accuracy(&x, &y, &ForestConfig::default(), 7).is_err());
    assert!(cv_accuracy(&x, &y[..3], &ForestConfig::default(), 2).is_err());
}

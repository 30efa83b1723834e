mod support;

use proptest::prelude::*;
use sumdiff::corpus::PredictionTable;
use sumdiff::features::FeatureMatrix;
use sumdiff::ranker::{
    aggregate_ranking, pair_probabilities, predict, train_pairwise, train_regression, train_validation_split, Model,
    PairwiseConfig, PairwiseProbabilities, DEFAULT_RIDGE,
};
use sumdiff::stats;
use support::synth::{planted, subset, PLANTED_BIAS, PLANTED_WEIGHTS};

fn aligned(pred: &PredictionTable, matrix: &FeatureMatrix) -> Vec<f64> {
    matrix.doc_ids.iter().map(|id| pred.get(id).unwrap()).collect()
}

#[test]
fn regression_recovers_planted_weights() {
    let data = planted(200, 0.0, 1);
    let model = train_regression(&data.matrix, &data.targets, DEFAULT_RIDGE).unwrap();
    let (weights, bias) = model.raw_coefficients();
    let worst = weights
        .iter()
        .zip(PLANTED_WEIGHTS)
        .map(|(w, t)| (w - t).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "max weight error {worst}");
    assert!((bias - PLANTED_BIAS).abs() < 1e-4);

    let pred = predict(&model, &data.matrix).unwrap();
    for (p, t) in aligned(&pred, &data.matrix).iter().zip(&data.targets) {
        assert!((p - t).abs() < 1e-6);
    }
}

#[test]
fn regression_with_noise_tracks_gold() {
    let data = planted(200, 0.01, 2);
    let model = train_regression(&data.matrix, &data.targets, DEFAULT_RIDGE).unwrap();
    let pred = predict(&model, &data.matrix).unwrap();
    let r = stats::pearson(&aligned(&pred, &data.matrix), &data.targets).unwrap();
    assert!(r > 0.99, "pearson {r}");
}

#[test]
fn pairwise_separable_data() {
    let data = planted(100, 0.0, 3);
    let (train, val) = train_validation_split(100, 0.7, 3).unwrap();
    let train_m = subset(&data.matrix, &train);
    let train_t: Vec<f64> = train.iter().map(|&i| data.targets[i]).collect();
    let model = train_pairwise(&train_m, &train_t, PairwiseConfig::default()).unwrap();

    let mut correct = 0;
    let mut total = 0;
    for &i in &val {
        for &j in &val {
            if i != j && data.targets[i] != data.targets[j] {
                let p = model.pair_probability(&data.matrix.rows[i], &data.matrix.rows[j]);
                correct += usize::from((p > 0.5) == (data.targets[i] > data.targets[j]));
                total += 1;
            }
        }
    }
    let accuracy = correct as f64 / total as f64;
    assert!(accuracy >= 0.95, "held-out pairwise accuracy {accuracy}");

    let ranked = Model::Pairwise(model).predict(&data.matrix).unwrap();
    let tau = stats::kendall_tau(&aligned(&ranked, &data.matrix), &data.targets).unwrap();
    assert!(tau >= 0.9, "kendall {tau}");
}

#[test]
fn regression_end_to_end_ranking() {
    let data = planted(100, 0.0, 4);
    let model = Model::Regression(train_regression(&data.matrix, &data.targets, DEFAULT_RIDGE).unwrap());
    let pred = model.predict(&data.matrix).unwrap();
    let tau = stats::kendall_tau(&aligned(&pred, &data.matrix), &data.targets).unwrap();
    assert!(tau >= 0.9);
}

#[test]
fn borda_reproduces_a_total_order() {
    let ids: Vec<String> = ["e", "b", "d", "a", "c"].iter().map(|s| s.to_string()).collect();
    let mut probs = PairwiseProbabilities::new(ids.clone()).unwrap();
    for (i, a) in ids.iter().enumerate() {
        for (j, b) in ids.iter().enumerate() {
            if i != j {
                probs.set(a, b, if i < j { 1.0 } else { 0.0 }).unwrap();
            }
        }
    }
    let scores = aggregate_ranking(&probs).unwrap();
    assert_eq!(scores.ranking(), ids.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(scores.get("e"), Some(4.0));
    assert_eq!(scores.get("c"), Some(0.0));
}

#[test]
fn pairwise_probabilities_are_antisymmetric() {
    let data = planted(30, 0.0, 5);
    let model = train_pairwise(&data.matrix, &data.targets, PairwiseConfig::default()).unwrap();
    let probs = pair_probabilities(&model, &data.matrix).unwrap();
    for a in &data.matrix.doc_ids {
        for b in &data.matrix.doc_ids {
            if a != b {
                let s = probs.get(a, b).unwrap() + probs.get(b, a).unwrap();
                assert!((s - 1.0).abs() < 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn rescaling_a_column_leaves_predictions(col in 0usize..5, factor in 1e-3f64..1e3, seed in 0u64..1000) {
        let data = planted(40, 0.05, seed);
        let mut scaled = data.matrix.clone();
        for row in &mut scaled.rows {
            row[col] *= factor;
        }
        let a = predict(&train_regression(&data.matrix, &data.targets, DEFAULT_RIDGE).unwrap(), &data.matrix).unwrap();
        let b = predict(&train_regression(&scaled, &data.targets, DEFAULT_RIDGE).unwrap(), &scaled).unwrap();
        for ((_, x), (_, y)) in a.iter().zip(b.iter()) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }
}

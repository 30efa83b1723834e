//! Seeded synthetic feature matrices with planted linear targets.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sumdiff::features::{FeatureMatrix, FeatureSchema};

pub const PLANTED_WEIGHTS: [f64; 5] = [0.5, -1.2, 0.3, 2.0, -0.7];
pub const PLANTED_BIAS: f64 = 0.1;

pub struct Planted {
    pub matrix: FeatureMatrix,
    pub targets: Vec<f64>,
}

/// `n` rows of five features on mixed scales, targets `w . x + b` plus
/// Gaussian noise of standard deviation `noise`.
pub fn planted(n: usize, noise: f64, seed: u64) -> Planted {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scales = [500.0, 20.0, 10.0, 1.0, 100.0];
    let gauss = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).unwrap();
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = scales.iter().map(|s| rng.random_range(0.0..*s)).collect();
        let clean: f64 = row.iter().zip(PLANTED_WEIGHTS).map(|(x, w)| x * w).sum::<f64>() + PLANTED_BIAS;
        targets.push(if noise > 0.0 {
            clean + gauss.sample(&mut rng)
        } else {
            clean
        });
        rows.push(row);
    }
    let ids = (0..n).map(|i| format!("doc{i:03}")).collect();
    Planted {
        matrix: FeatureMatrix::from_rows(FeatureSchema::source_only(), ids, rows).unwrap(),
        targets,
    }
}

pub fn subset(matrix: &FeatureMatrix, idx: &[usize]) -> FeatureMatrix {
    FeatureMatrix::from_rows(
        matrix.schema.clone(),
        idx.iter().map(|&i| matrix.doc_ids[i].clone()).collect(),
        idx.iter().map(|&i| matrix.rows[i].clone()).collect(),
    )
    .unwrap()
}

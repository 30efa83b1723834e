//! Feature-based difficulty predictors.
//!
//! [`LinearModel`] regresses the gold document score on standardized
//! features with a closed-form ridge solve. [`PairwiseModel`] learns which of
//! two documents scores higher from their feature difference and turns the
//! pairwise probabilities into a global ranking by soft Borda count.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::PredictionTable;
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureSchema, SCHEMA_VERSION};
use crate::stats::{self, CorrelationReport};

pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Per-feature centering and scaling fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    /// Population standard deviations; constant columns get 1.
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>], width: usize) -> Self {
        let n = rows.len() as f64;
        let mut means = vec![0.0; width];
        let mut stds = vec![1.0; width];
        for j in 0..width {
            if rows.iter().all(|r| r[j] == rows[0][j]) {
                means[j] = rows[0][j];
                continue;
            }
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
            means[j] = mean;
            if var > 0.0 && var.is_finite() {
                stds[j] = var.sqrt();
            }
        }
        Standardizer { means, stds }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

fn check_training_data(matrix: &FeatureMatrix, targets: &[f64]) -> Result<()> {
    if matrix.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: matrix.len(),
            right: targets.len(),
        });
    }
    if matrix.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: matrix.len(),
        });
    }
    let finite = targets
        .iter()
        .chain(matrix.rows.iter().flatten())
        .all(|v| v.is_finite());
    if !finite {
        return Err(Error::invalid("training data must be finite"));
    }
    Ok(())
}

fn check_schema(model: &FeatureSchema, matrix: &FeatureSchema) -> Result<()> {
    if model != matrix {
        return Err(Error::SchemaMismatch {
            expected: model.to_string(),
            got: matrix.to_string(),
        });
    }
    Ok(())
}

/// Linear regressor over standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub schema: FeatureSchema,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub standardizer: Standardizer,
}

impl LinearModel {
    pub fn score_row(&self, row: &[f64]) -> f64 {
        let z = self.standardizer.apply(row);
        self.bias + z.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Weights and intercept on the unstandardized feature scale.
    pub fn raw_coefficients(&self) -> (Vec<f64>, f64) {
        let raw: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.standardizer.stds)
            .map(|(w, s)| w / s)
            .collect();
        let intercept = self.bias
            - raw
                .iter()
                .zip(&self.standardizer.means)
                .map(|(w, m)| w * m)
                .sum::<f64>();
        (raw, intercept)
    }
}

/// Solves the symmetric positive semi-definite system, falling back to the
/// pseudo-inverse when it is singular.
fn solve_normal_equations(a: DMatrix<f64>, b: DVector<f64>) -> DVector<f64> {
    match a.clone().cholesky() {
        Some(ch) => ch.solve(&b),
        None => a
            .svd(true, true)
            .solve(&b, 1e-12)
            .unwrap_or_else(|_| DVector::zeros(b.len())),
    }
}

/// Least-squares fit of `targets` on standardized features with an L2
/// penalty `ridge` on the standardized weights.
pub fn train_regression(matrix: &FeatureMatrix, targets: &[f64], ridge: f64) -> Result<LinearModel> {
    check_training_data(matrix, targets)?;
    if !ridge.is_finite() || ridge < 0.0 {
        return Err(Error::invalid("ridge must be a finite non-negative number"));
    }
    let p = matrix.schema.len();
    let n = matrix.len();
    let standardizer = Standardizer::fit(&matrix.rows, p);
    let z = DMatrix::from_fn(n, p, |i, j| {
        (matrix.rows[i][j] - standardizer.means[j]) / standardizer.stds[j]
    });
    let mean_y = targets.iter().sum::<f64>() / n as f64;
    let yc = DVector::from_iterator(n, targets.iter().map(|y| y - mean_y));
    let zt = z.transpose();
    let a = &zt * &z + DMatrix::identity(p, p) * ridge;
    let weights = solve_normal_equations(a, &zt * yc);
    Ok(LinearModel {
        schema: matrix.schema.clone(),
        weights: weights.iter().copied().collect(),
        bias: mean_y,
        standardizer,
    })
}

pub fn predict(model: &LinearModel, matrix: &FeatureMatrix) -> Result<PredictionTable> {
    check_schema(&model.schema, &matrix.schema)?;
    let mut out = PredictionTable::new();
    for (id, row) in matrix.doc_ids.iter().zip(&matrix.rows) {
        out.insert(id.clone(), model.score_row(row))?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for PairwiseConfig {
    fn default() -> Self {
        PairwiseConfig {
            epochs: 5,
            learning_rate: 0.1,
            seed: 0,
        }
    }
}

/// Pairwise preference model: p(i over j) = sigmoid(w . (z_i - z_j)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseModel {
    pub schema: FeatureSchema,
    pub weights: Vec<f64>,
    /// Cancels in every pair; kept so both model kinds share one layout.
    pub bias: f64,
    pub standardizer: Standardizer,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl PairwiseModel {
    /// Latent per-document score; only differences are meaningful.
    pub fn score_row(&self, row: &[f64]) -> f64 {
        let z = self.standardizer.apply(row);
        self.bias + z.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn pair_probability(&self, first: &[f64], second: &[f64]) -> f64 {
        sigmoid(self.score_row(first) - self.score_row(second))
    }
}

/// Trains on every ordered pair of documents with distinct targets, labelled
/// 1 when the first document's target is higher. Plain SGD on binary
/// cross-entropy, pairs reshuffled every epoch from `seed`.
pub fn train_pairwise(matrix: &FeatureMatrix, targets: &[f64], config: PairwiseConfig) -> Result<PairwiseModel> {
    check_training_data(matrix, targets)?;
    if !config.learning_rate.is_finite() || config.learning_rate <= 0.0 {
        return Err(Error::invalid("learning rate must be positive"));
    }
    let p = matrix.schema.len();
    let standardizer = Standardizer::fit(&matrix.rows, p);
    let z: Vec<Vec<f64>> = matrix.rows.iter().map(|r| standardizer.apply(r)).collect();

    let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..targets.len() {
        for j in 0..targets.len() {
            if i != j && targets[i] != targets[j] {
                pairs.push((i, j, if targets[i] > targets[j] { 1.0 } else { 0.0 }));
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::Degenerate("all targets are equal; no trainable pairs".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut w = vec![0.0; p];
    let mut diff = vec![0.0; p];
    for _ in 0..config.epochs {
        pairs.shuffle(&mut rng);
        for &(i, j, label) in &pairs {
            for k in 0..p {
                diff[k] = z[i][k] - z[j][k];
            }
            let margin: f64 = w.iter().zip(&diff).map(|(a, b)| a * b).sum();
            let g = sigmoid(margin) - label;
            for k in 0..p {
                w[k] -= config.learning_rate * g * diff[k];
            }
        }
    }
    Ok(PairwiseModel {
        schema: matrix.schema.clone(),
        weights: w,
        bias: 0.0,
        standardizer,
    })
}

/// Probabilities p(i, j) that document i ranks above document j.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseProbabilities {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    probs: Vec<Option<f64>>,
}

pub const ANTISYMMETRY_TOLERANCE: f64 = 1e-9;

impl PairwiseProbabilities {
    pub fn new(ids: Vec<String>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate document `{id}`")));
            }
        }
        let n = ids.len();
        Ok(PairwiseProbabilities {
            ids,
            index,
            probs: vec![None; n * n],
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    fn slot(&self, first: &str, second: &str) -> Result<usize> {
        let i = self
            .index
            .get(first)
            .ok_or_else(|| Error::MissingDocument(first.into()))?;
        let j = self
            .index
            .get(second)
            .ok_or_else(|| Error::MissingDocument(second.into()))?;
        Ok(i * self.ids.len() + j)
    }

    pub fn set(&mut self, first: &str, second: &str, p: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
        }
        let s = self.slot(first, second)?;
        self.probs[s] = Some(p);
        Ok(())
    }

    pub fn get(&self, first: &str, second: &str) -> Option<f64> {
        self.slot(first, second).ok().and_then(|s| self.probs[s])
    }
}

/// Every ordered pair's preference probability under the model.
pub fn pair_probabilities(model: &PairwiseModel, matrix: &FeatureMatrix) -> Result<PairwiseProbabilities> {
    check_schema(&model.schema, &matrix.schema)?;
    let scores: Vec<f64> = matrix.rows.iter().map(|r| model.score_row(r)).collect();
    let mut out = PairwiseProbabilities::new(matrix.doc_ids.clone())?;
    let n = scores.len();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.probs[i * n + j] = Some(sigmoid(scores[i] - scores[j]));
            }
        }
    }
    Ok(out)
}

/// Soft Borda count: S(i) = sum over j != i of p(i, j).
pub fn aggregate_ranking(probs: &PairwiseProbabilities) -> Result<PredictionTable> {
    let n = probs.ids.len();
    let mut out = PredictionTable::new();
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let (a, b) = (&probs.ids[i], &probs.ids[j]);
            let pij =
                probs.probs[i * n + j].ok_or_else(|| Error::invalid(format!("missing probability for ({a}, {b})")))?;
            let pji =
                probs.probs[j * n + i].ok_or_else(|| Error::invalid(format!("missing probability for ({b}, {a})")))?;
            if (pij + pji - 1.0).abs() > ANTISYMMETRY_TOLERANCE {
                return Err(Error::invalid(format!(
                    "p({a}, {b}) + p({b}, {a}) = {} is not 1",
                    pij + pji
                )));
            }
            s += pij;
        }
        out.insert(probs.ids[i].clone(), s)?;
    }
    Ok(out)
}

/// Correlation of predictions with gold scores over the shared documents.
pub fn evaluate_predictions(pred: &PredictionTable, gold: &PredictionTable) -> Result<CorrelationReport> {
    let (p, g): (Vec<f64>, Vec<f64>) = pred.iter().filter_map(|(id, s)| gold.get(id).map(|t| (s, t))).unzip();
    if p.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: p.len(),
        });
    }
    stats::correlation_report(&p, &g)
}

/// Gold targets aligned with the matrix rows.
pub fn aligned_targets(matrix: &FeatureMatrix, gold: &PredictionTable) -> Result<Vec<f64>> {
    matrix
        .doc_ids
        .iter()
        .map(|id| gold.get(id).ok_or_else(|| Error::MissingDocument(id.clone())))
        .collect()
}

/// Seeded shuffle of `0..n` split into (train, validation) index sets.
pub fn train_validation_split(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::invalid("train fraction must lie in [0, 1]"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = (train_fraction * n as f64).round() as usize;
    let val = idx.split_off(cut.min(n));
    Ok((idx, val))
}

/// Either trained predictor, as stored in a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Regression(LinearModel),
    Pairwise(PairwiseModel),
}

impl Model {
    pub fn schema(&self) -> &FeatureSchema {
        match self {
            Model::Regression(m) => &m.schema,
            Model::Pairwise(m) => &m.schema,
        }
    }

    /// Regression scores, or Borda-aggregated pairwise scores over the matrix.
    pub fn predict(&self, matrix: &FeatureMatrix) -> Result<PredictionTable> {
        match self {
            Model::Regression(m) => predict(m, matrix),
            Model::Pairwise(m) => aggregate_ranking(&pair_probabilities(m, matrix)?),
        }
    }

    /// Score of a single row: the regression output or the pairwise latent score.
    pub fn score_row(&self, row: &[f64]) -> f64 {
        match self {
            Model::Regression(m) => m.score_row(row),
            Model::Pairwise(m) => m.score_row(row),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    /// Loads a model file, refusing feature definitions other than the current ones.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: Model = serde_json::from_str(&raw).map_err(|e| Error::Malformed {
            line: e.line(),
            message: e.to_string(),
        })?;
        let schema = model.schema();
        if schema.version != SCHEMA_VERSION {
            return Err(Error::SchemaMismatch {
                expected: SCHEMA_VERSION.to_string(),
                got: schema.version.clone(),
            });
        }
        let (weights, stds) = match &model {
            Model::Regression(m) => (&m.weights, &m.standardizer.stds),
            Model::Pairwise(m) => (&m.weights, &m.standardizer.stds),
        };
        if weights.len() != schema.len() || stds.len() != schema.len() {
            return Err(Error::invalid("model weights do not match its feature schema"));
        }
        if stds.iter().any(|s| s.is_nan() || *s <= 0.0) {
            return Err(Error::invalid("model has a non-positive feature scale"));
        }
        Ok(model)
    }
}

//! Per-document feature vectors: length, numerals, entities, readability and
//! the location of the sentences most similar to the reference summary.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, PredictionTable};
use crate::error::{Error, Result};
use crate::rouge::{self, RougeScore};
use crate::stats::{self, CorrelationMethod};
use crate::textseg::{self, EntityTagger, HeuristicTagger, SurfaceStats};

/// Version of the feature definitions. Models record it and refuse other versions.
pub const SCHEMA_VERSION: &str = "docfeat-v1";

/// Salient-location cutoffs used for the two location features.
pub const SALIENT_TOP_K: [usize; 2] = [5, 10];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub length_words: usize,
    pub numeral_count: usize,
    pub unique_entity_count: usize,
    pub flesch_reading_ease: f64,
    pub flesch_kincaid_grade: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub salient_loc_top5: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub salient_loc_top10: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    LengthWords,
    NumeralCount,
    UniqueEntityCount,
    FleschReadingEase,
    FleschKincaidGrade,
    SalientLocTop5,
    SalientLocTop10,
}

impl Feature {
    /// Fixed schema order.
    pub const ALL: [Feature; 7] = [
        Feature::LengthWords,
        Feature::NumeralCount,
        Feature::UniqueEntityCount,
        Feature::FleschReadingEase,
        Feature::FleschKincaidGrade,
        Feature::SalientLocTop5,
        Feature::SalientLocTop10,
    ];

    /// Features computable without a reference summary.
    pub const SOURCE_ONLY: [Feature; 5] = [
        Feature::LengthWords,
        Feature::NumeralCount,
        Feature::UniqueEntityCount,
        Feature::FleschReadingEase,
        Feature::FleschKincaidGrade,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::LengthWords => "length_words",
            Feature::NumeralCount => "numeral_count",
            Feature::UniqueEntityCount => "unique_entity_count",
            Feature::FleschReadingEase => "flesch_reading_ease",
            Feature::FleschKincaidGrade => "flesch_kincaid_grade",
            Feature::SalientLocTop5 => "salient_loc_top5",
            Feature::SalientLocTop10 => "salient_loc_top10",
        }
    }

    pub fn value(self, v: &FeatureVector) -> Option<f64> {
        match self {
            Feature::LengthWords => Some(v.length_words as f64),
            Feature::NumeralCount => Some(v.numeral_count as f64),
            Feature::UniqueEntityCount => Some(v.unique_entity_count as f64),
            Feature::FleschReadingEase => Some(v.flesch_reading_ease),
            Feature::FleschKincaidGrade => Some(v.flesch_kincaid_grade),
            Feature::SalientLocTop5 => v.salient_loc_top5,
            Feature::SalientLocTop10 => v.salient_loc_top10,
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown feature `{s}`")))
    }
}

fn check_readability_input(stats: &SurfaceStats) -> Result<(f64, f64)> {
    if stats.word_count == 0 || stats.sentence_count == 0 {
        return Err(Error::invalid("readability needs at least one word and one sentence"));
    }
    let w = stats.word_count as f64;
    Ok((w / stats.sentence_count as f64, stats.syllable_count as f64 / w))
}

/// Flesch Reading Ease; not clamped to [1, 100].
pub fn flesch_reading_ease(stats: &SurfaceStats) -> Result<f64> {
    let (words_per_sentence, syllables_per_word) = check_readability_input(stats)?;
    Ok(206.835 - 1.015 * words_per_sentence - 84.6 * syllables_per_word)
}

/// Flesch-Kincaid U.S. grade level.
pub fn flesch_kincaid_grade(stats: &SurfaceStats) -> Result<f64> {
    let (words_per_sentence, syllables_per_word) = check_readability_input(stats)?;
    Ok(0.39 * words_per_sentence + 11.8 * syllables_per_word - 15.59)
}

/// How a sentence's similarity to the reference summary is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SalienceMetric {
    /// Mean of ROUGE-1 F1 and ROUGE-2 F1.
    #[default]
    MeanRouge12,
    Rouge1,
    Rouge2,
    RougeL,
}

impl SalienceMetric {
    fn score(self, sentence: &[String], reference: &[String]) -> f64 {
        let n = |k| rouge::rouge_n(sentence, reference, k).map_or(0.0, |s: RougeScore| s.f1);
        match self {
            SalienceMetric::MeanRouge12 => (n(1) + n(2)) / 2.0,
            SalienceMetric::Rouge1 => n(1),
            SalienceMetric::Rouge2 => n(2),
            SalienceMetric::RougeL => rouge::rouge_l(sentence, reference).f1,
        }
    }
}

/// Sentence indices (0-based) from most to least salient; ties keep document order.
pub fn salient_sentence_ranking(doc: &Document, metric: SalienceMetric) -> Result<Vec<usize>> {
    let reference = doc
        .reference_summary
        .as_deref()
        .ok_or_else(|| Error::MissingReference(doc.id.clone()))?;
    let reference = textseg::tokens(reference);
    if !reference.iter().any(|t| textseg::is_word(t)) {
        return Err(Error::invalid(format!(
            "reference summary of `{}` has no words",
            doc.id
        )));
    }
    let tokenized = textseg::tokenize(&doc.text)?;
    let scores: Vec<f64> = (0..tokenized.sentence_spans().len())
        .map(|i| metric.score(tokenized.sentence(i), &reference))
        .collect();
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(order)
}

pub fn salient_location(doc: &Document, k: usize) -> Result<f64> {
    salient_location_with(doc, k, SalienceMetric::default())
}

/// Mean 1-based position of the `k` most salient sentences, divided by the
/// sentence count.
pub fn salient_location_with(doc: &Document, k: usize, metric: SalienceMetric) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("salient location needs k >= 1"));
    }
    let order = salient_sentence_ranking(doc, metric)?;
    let n = order.len();
    let top = &order[..k.min(n)];
    let mean_position = top.iter().map(|&i| (i + 1) as f64).sum::<f64>() / top.len() as f64;
    Ok(mean_position / n as f64)
}

/// Computes feature vectors with a chosen entity tagger and salience metric.
pub struct FeatureExtractor<'a> {
    tagger: &'a dyn EntityTagger,
    metric: SalienceMetric,
}

impl Default for FeatureExtractor<'static> {
    fn default() -> Self {
        FeatureExtractor {
            tagger: &HeuristicTagger,
            metric: SalienceMetric::default(),
        }
    }
}

impl<'a> FeatureExtractor<'a> {
    pub fn new(tagger: &'a dyn EntityTagger, metric: SalienceMetric) -> Self {
        FeatureExtractor { tagger, metric }
    }

    pub fn metric(&self) -> SalienceMetric {
        self.metric
    }

    pub fn tagger(&self) -> &'a dyn EntityTagger {
        self.tagger
    }

    pub fn extract(&self, doc: &Document) -> Result<FeatureVector> {
        let stats = SurfaceStats::compute(&doc.id, &doc.text, self.tagger)?;
        let (salient_loc_top5, salient_loc_top10) = if doc.reference_summary.is_some() {
            let [k5, k10] = SALIENT_TOP_K;
            (
                Some(salient_location_with(doc, k5, self.metric)?),
                Some(salient_location_with(doc, k10, self.metric)?),
            )
        } else {
            (None, None)
        };
        Ok(FeatureVector {
            length_words: stats.word_count,
            numeral_count: stats.numeral_count,
            unique_entity_count: stats.unique_entity_count,
            flesch_reading_ease: flesch_reading_ease(&stats)?,
            flesch_kincaid_grade: flesch_kincaid_grade(&stats)?,
            salient_loc_top5,
            salient_loc_top10,
        })
    }

    /// Features for every document, in corpus order.
    pub fn extract_all<'d>(&self, docs: impl IntoIterator<Item = &'d Document>) -> Result<Vec<FeatureRecord>> {
        docs.into_iter()
            .map(|d| {
                Ok(FeatureRecord {
                    doc_id: d.id.clone(),
                    features: self.extract(d)?,
                })
            })
            .collect()
    }
}

/// Features with the default heuristic tagger and salience metric.
pub fn doc_features(doc: &Document) -> Result<FeatureVector> {
    FeatureExtractor::default().extract(doc)
}

/// One line of a feature matrix export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub doc_id: String,
    #[serde(flatten)]
    pub features: FeatureVector,
}

/// Ordered selection of features a model is trained on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub version: String,
    pub features: Vec<Feature>,
}

impl FeatureSchema {
    pub fn new(features: impl Into<Vec<Feature>>) -> Self {
        FeatureSchema {
            version: SCHEMA_VERSION.to_string(),
            features: features.into(),
        }
    }

    pub fn source_only() -> Self {
        Self::new(Feature::SOURCE_ONLY)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

impl fmt::Display for FeatureSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.features.iter().map(|f| f.name()).collect();
        write!(f, "{}[{}]", self.version, names.join(","))
    }
}

/// Dense rows of selected feature values, one per document.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub schema: FeatureSchema,
    pub doc_ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn from_records(records: &[FeatureRecord], schema: FeatureSchema) -> Result<Self> {
        let mut doc_ids = Vec::with_capacity(records.len());
        let mut rows = Vec::with_capacity(records.len());
        for r in records {
            let row = schema
                .features
                .iter()
                .map(|f| {
                    f.value(&r.features)
                        .ok_or_else(|| Error::invalid(format!("document `{}` lacks feature `{f}`", r.doc_id)))
                })
                .collect::<Result<Vec<f64>>>()?;
            doc_ids.push(r.doc_id.clone());
            rows.push(row);
        }
        Ok(FeatureMatrix { schema, doc_ids, rows })
    }

    /// Builds a matrix from raw rows, for features computed elsewhere.
    pub fn from_rows(schema: FeatureSchema, doc_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if doc_ids.len() != rows.len() {
            return Err(Error::LengthMismatch {
                left: doc_ids.len(),
                right: rows.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != schema.len()) {
            return Err(Error::LengthMismatch {
                left: bad.len(),
                right: schema.len(),
            });
        }
        Ok(FeatureMatrix { schema, doc_ids, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Correlations of one feature with a per-document target. A coefficient is
/// `None` when it is undefined, e.g. for a constant feature column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCorrelation {
    pub feature: Feature,
    pub n: usize,
    pub kendall: Option<f64>,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
}

pub fn feature_correlations(
    records: &[FeatureRecord],
    features: &[Feature],
    targets: &PredictionTable,
) -> Result<Vec<FeatureCorrelation>> {
    let mut out = Vec::with_capacity(features.len());
    for &feature in features {
        let (xs, ys): (Vec<f64>, Vec<f64>) = records
            .iter()
            .filter_map(|r| Some((feature.value(&r.features)?, targets.get(&r.doc_id)?)))
            .unzip();
        if xs.len() < 3 {
            return Err(Error::TooFewSamples {
                needed: 3,
                got: xs.len(),
            });
        }
        let coef = |m| match stats::correlate(m, &xs, &ys) {
            Ok(v) => Ok(Some(v)),
            Err(Error::Degenerate(_)) => Ok(None),
            Err(e) => Err(e),
        };
        out.push(FeatureCorrelation {
            feature,
            n: xs.len(),
            kendall: coef(CorrelationMethod::Kendall)?,
            pearson: coef(CorrelationMethod::Pearson)?,
            spearman: coef(CorrelationMethod::Spearman)?,
        });
    }
    Ok(out)
}

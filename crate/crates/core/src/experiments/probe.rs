//! Scoring documents before and after a transform.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, PredictionTable};
use crate::error::{Error, Result};
use crate::features::FeatureExtractor;
use crate::ranker::Model;

use super::transform::{apply_transform_with, TransformContext, TransformSpec};

/// Anything that can score a single document.
pub trait DocScorer: Sync {
    fn score(&self, doc: &Document) -> Result<f64>;
}

impl<F> DocScorer for F
where
    F: Fn(&Document) -> Result<f64> + Sync,
{
    fn score(&self, doc: &Document) -> Result<f64> {
        self(doc)
    }
}

/// A trained model applied to freshly extracted features.
///
/// Pairwise models contribute their latent score, since a Borda count over a
/// single document carries no information.
pub struct ModelScorer<'a> {
    pub model: &'a Model,
    pub extractor: FeatureExtractor<'a>,
}

impl DocScorer for ModelScorer<'_> {
    fn score(&self, doc: &Document) -> Result<f64> {
        let features = self.extractor.extract(doc)?;
        let row = self
            .model
            .schema()
            .features
            .iter()
            .map(|f| {
                f.value(&features)
                    .ok_or_else(|| Error::invalid(format!("document `{}` lacks feature `{f}`", doc.id)))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.model.score_row(&row))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeDelta {
    pub doc_id: String,
    pub before: f64,
    pub after: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub transform: TransformSpec,
    pub label: String,
    pub n: usize,
    pub mean_before: f64,
    pub mean_after: f64,
    pub delta: f64,
    /// Largest absolute change first.
    pub per_doc: Vec<ProbeDelta>,
}

fn by_magnitude(a: f64, b: f64) -> std::cmp::Ordering {
    b.abs().total_cmp(&a.abs())
}

fn report(spec: &TransformSpec, mut per_doc: Vec<ProbeDelta>) -> Result<ProbeReport> {
    if per_doc.is_empty() {
        return Err(Error::invalid("probe over an empty corpus"));
    }
    let n = per_doc.len();
    let mean_before = per_doc.iter().map(|d| d.before).sum::<f64>() / n as f64;
    let mean_after = per_doc.iter().map(|d| d.after).sum::<f64>() / n as f64;
    per_doc.sort_by(|a, b| by_magnitude(a.delta, b.delta).then_with(|| a.doc_id.cmp(&b.doc_id)));
    Ok(ProbeReport {
        transform: *spec,
        label: spec.to_string(),
        n,
        mean_before,
        mean_after,
        delta: mean_after - mean_before,
        per_doc,
    })
}

pub fn transform_probe(
    scorer: &dyn DocScorer,
    corpus: &Corpus,
    spec: &TransformSpec,
    ctx: &TransformContext,
) -> Result<ProbeReport> {
    let per_doc = corpus
        .documents()
        .par_iter()
        .map(|doc| {
            let before = scorer.score(doc)?;
            let after = scorer.score(&apply_transform_with(doc, spec, ctx)?)?;
            Ok(ProbeDelta {
                doc_id: doc.id.clone(),
                before,
                after,
                delta: after - before,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    report(spec, per_doc)
}

/// A probe from scores produced elsewhere for the original and transformed corpora.
pub fn probe_from_tables(
    spec: &TransformSpec,
    before: &PredictionTable,
    after: &PredictionTable,
) -> Result<ProbeReport> {
    let per_doc = before
        .iter()
        .map(|(id, b)| {
            let a = after.get(id).ok_or_else(|| Error::MissingDocument(id.to_string()))?;
            Ok(ProbeDelta {
                doc_id: id.to_string(),
                before: b,
                after: a,
                delta: a - b,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    report(spec, per_doc)
}

/// One probe per spec, the largest mean change first.
pub fn probe_suite(
    scorer: &dyn DocScorer,
    corpus: &Corpus,
    specs: &[TransformSpec],
    ctx: &TransformContext,
) -> Result<Vec<ProbeReport>> {
    let mut reports = specs
        .iter()
        .map(|s| transform_probe(scorer, corpus, s, ctx))
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by(|a, b| by_magnitude(a.delta, b.delta));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::transform::{probe_suite_kinds, TransformKind};
    use crate::textseg;

    fn corpus() -> Corpus {
        Corpus::from_documents([
            Document::new("a", "Alpha went to Rome. It was sunny there. The team walked home."),
            Document::new("b", "Beta is small. Gamma is large. Delta stopped by. Epsilon said no."),
            Document::new("c", "One two three four five six seven eight nine ten."),
        ])
        .unwrap()
    }

    fn length(doc: &Document) -> Result<f64> {
        Ok(textseg::tokenize(&doc.text)?.word_count() as f64)
    }

    #[test]
    fn identity_and_constant_scorers() {
        let c = corpus();
        let ctx = TransformContext::default();
        let id = TransformSpec::new(TransformKind::Identity, 0);
        let r = transform_probe(&length, &c, &id, &ctx).unwrap();
        assert!(r.per_doc.iter().all(|d| d.delta == 0.0));
        assert_eq!(r.n, 3);

        let constant = |_: &Document| Ok(0.528);
        for kind in probe_suite_kinds() {
            if matches!(
                kind,
                TransformKind::RemoveSalient { .. } | TransformKind::MoveSalientToEnd { .. }
            ) {
                continue;
            }
            let r = transform_probe(&constant, &c, &TransformSpec::new(kind, 1), &ctx);
            if let Ok(r) = r {
                assert_eq!(r.delta, 0.0, "{kind}");
            }
        }
    }

    #[test]
    fn linear_length_scorer_closed_form() {
        let c = corpus();
        let w = -0.02;
        let scorer = |d: &Document| Ok(0.5 + w * length(d)?);
        let spec = TransformSpec::new(TransformKind::DeleteWords { p: 0.3 }, 3);
        let r = transform_probe(&scorer, &c, &spec, &TransformContext::default()).unwrap();
        for d in &r.per_doc {
            let words = length(c.get(&d.doc_id).unwrap()).unwrap();
            let removed = (0.3 * words + 0.5).floor();
            assert!((d.delta - (-w * removed)).abs() < 1e-12);
        }
        assert!(r.per_doc.windows(2).all(|p| p[0].delta.abs() >= p[1].delta.abs()));
    }

    #[test]
    fn tables() {
        let spec = TransformSpec::new(TransformKind::KeepFirst { n: 3 }, 0);
        let before: PredictionTable = [("a".to_string(), 0.4), ("b".to_string(), 0.6)].into_iter().collect();
        let after: PredictionTable = [("a".to_string(), 0.5), ("b".to_string(), 0.3)].into_iter().collect();
        let r = probe_from_tables(&spec, &before, &after).unwrap();
        assert_eq!(r.per_doc[0].doc_id, "b");
        assert!((r.delta - (-0.1)).abs() < 1e-12);
        let short: PredictionTable = [("a".to_string(), 0.5)].into_iter().collect();
        assert!(probe_from_tables(&spec, &before, &short).is_err());
    }
}

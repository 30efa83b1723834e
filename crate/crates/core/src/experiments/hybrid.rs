//! Routing the hardest documents to human summarizers.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::{PredictionTable, SystemScoreTable};
use crate::error::{Error, Result};
use crate::stats::{paired_bootstrap, BootstrapResult};

/// Score credited to a document whose summary is written by a person.
pub const MANUAL_SCORE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridOutcome {
    pub selected_doc_ids: BTreeSet<String>,
    pub fraction: f64,
    pub n: usize,
    pub mean_score_before: f64,
    pub mean_score_after: f64,
}

fn check_fraction(fraction: f64) -> Result<()> {
    if (0.0..=1.0).contains(&fraction) {
        Ok(())
    } else {
        Err(Error::invalid(format!("fraction {fraction} is outside [0, 1]")))
    }
}

/// Number of documents a budget of `fraction` buys out of `n`.
pub fn selection_size(fraction: f64, n: usize) -> usize {
    // The epsilon keeps 0.3 * 10 at 3 despite binary rounding.
    ((fraction * n as f64 + 1e-9).floor() as usize).min(n)
}

/// The lowest-predicted `floor(fraction * n)` documents; ties go to the smaller id.
pub fn hybrid_select(pred: &PredictionTable, fraction: f64) -> Result<BTreeSet<String>> {
    check_fraction(fraction)?;
    let k = selection_size(fraction, pred.len());
    let mut order: Vec<(&str, f64)> = pred.iter().collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    Ok(order.into_iter().take(k).map(|(id, _)| id.to_string()).collect())
}

/// Mean system score with every selected document credited [`MANUAL_SCORE`].
pub fn hybrid_evaluate(
    table: &SystemScoreTable,
    system_id: &str,
    selected: &BTreeSet<String>,
) -> Result<HybridOutcome> {
    let doc_ids = table.doc_ids();
    if doc_ids.is_empty() {
        return Err(Error::invalid("score table is empty"));
    }
    if let Some(stray) = selected.iter().find(|id| !doc_ids.contains(&id.as_str())) {
        return Err(Error::MissingDocument(stray.clone()));
    }
    let mut before = 0.0;
    let mut after = 0.0;
    for id in &doc_ids {
        let score = table.get(id, system_id).ok_or_else(|| Error::MissingSystemScore {
            doc_id: id.to_string(),
            system_id: system_id.to_string(),
        })?;
        before += score;
        after += if selected.contains(*id) { MANUAL_SCORE } else { score };
    }
    let n = doc_ids.len();
    Ok(HybridOutcome {
        selected_doc_ids: selected.clone(),
        fraction: selected.len() as f64 / n as f64,
        n,
        mean_score_before: before / n as f64,
        mean_score_after: after / n as f64,
    })
}

/// Selection followed by evaluation, recording the requested fraction.
pub fn hybrid_run(
    table: &SystemScoreTable,
    system_id: &str,
    pred: &PredictionTable,
    fraction: f64,
) -> Result<HybridOutcome> {
    let restricted: PredictionTable = table
        .doc_ids()
        .into_iter()
        .map(|id| {
            pred.get(id)
                .map(|p| (id.to_string(), p))
                .ok_or_else(|| Error::MissingDocument(id.to_string()))
        })
        .collect::<Result<_>>()?;
    let selected = hybrid_select(&restricted, fraction)?;
    let mut outcome = hybrid_evaluate(table, system_id, &selected)?;
    outcome.fraction = fraction;
    Ok(outcome)
}

/// Per-document inputs to a hybrid comparison, aligned by position.
struct Instances<'a> {
    ids: Vec<&'a str>,
    scores: Vec<f64>,
    priority_a: Vec<f64>,
    priority_b: Vec<f64>,
}

/// Hybrid mean of a resample: its `floor(fraction * len)` lowest-priority
/// instances score [`MANUAL_SCORE`], the rest keep their own score.
fn resample_mean(inst: &Instances, priority: &[f64], sample: &[usize], fraction: f64) -> f64 {
    let k = selection_size(fraction, sample.len());
    let mut order: Vec<usize> = (0..sample.len()).collect();
    order.sort_by(|&x, &y| {
        let (dx, dy) = (sample[x], sample[y]);
        priority[dx]
            .total_cmp(&priority[dy])
            .then_with(|| inst.ids[dx].cmp(inst.ids[dy]))
            .then(x.cmp(&y))
    });
    let mut total: f64 = sample.iter().map(|&d| inst.scores[d]).sum();
    for &pos in &order[..k] {
        total += MANUAL_SCORE - inst.scores[sample[pos]];
    }
    total / sample.len() as f64
}

/// Paired bootstrap test that selector `a` yields a higher hybrid mean than `b`.
///
/// Both selections are recomputed inside every resample, so a document drawn
/// twice is two instances that may both be routed to a person.
pub fn compare_selectors(
    table: &SystemScoreTable,
    system_id: &str,
    selector_a: &PredictionTable,
    selector_b: &PredictionTable,
    fraction: f64,
    iterations: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    check_fraction(fraction)?;
    let ids = table.doc_ids();
    let mut inst = Instances {
        scores: Vec::with_capacity(ids.len()),
        priority_a: Vec::with_capacity(ids.len()),
        priority_b: Vec::with_capacity(ids.len()),
        ids,
    };
    for id in &inst.ids {
        let score = table.get(id, system_id).ok_or_else(|| Error::MissingSystemScore {
            doc_id: id.to_string(),
            system_id: system_id.to_string(),
        })?;
        let prio = |sel: &PredictionTable| sel.get(id).ok_or_else(|| Error::MissingDocument(id.to_string()));
        inst.scores.push(score);
        inst.priority_a.push(prio(selector_a)?);
        inst.priority_b.push(prio(selector_b)?);
    }
    paired_bootstrap(inst.ids.len(), iterations, seed, |sample| {
        resample_mean(&inst, &inst.priority_a, sample, fraction)
            - resample_mean(&inst, &inst.priority_b, sample, fraction)
    })
}

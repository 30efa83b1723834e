//! ROUGE-N and ROUGE-L over token sequences.
//!
//! Tokens are lowercased and standalone punctuation is dropped before
//! matching. Stemming is available through [`RougeOptions`] and is off by
//! default.

use std::collections::HashMap;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textseg;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    pub const ZERO: RougeScore = RougeScore {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };

    pub fn from_counts(overlap: usize, candidate_total: usize, reference_total: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(overlap, candidate_total);
        let recall = ratio(overlap, reference_total);
        RougeScore {
            precision,
            recall,
            f1: harmonic_mean(precision, recall),
        }
    }
}

pub fn harmonic_mean(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RougeOptions {
    pub stem: bool,
}

/// Which ROUGE flavour to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RougeVariant {
    N(usize),
    L,
}

impl Default for RougeVariant {
    fn default() -> Self {
        RougeVariant::N(2)
    }
}

impl std::str::FromStr for RougeVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let body = lower.strip_prefix("rouge-").unwrap_or(&lower);
        match body {
            "l" => Ok(RougeVariant::L),
            n => n
                .parse::<usize>()
                .ok()
                .filter(|&n| n >= 1)
                .map(RougeVariant::N)
                .ok_or_else(|| Error::invalid(format!("unknown ROUGE variant `{s}`"))),
        }
    }
}

pub fn normalize<S: AsRef<str>>(tokens: &[S], options: RougeOptions) -> Vec<String> {
    let stemmer = options.stem.then(|| Stemmer::create(Algorithm::English));
    tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| textseg::is_word(t))
        .map(|t| {
            let lower = t.to_lowercase();
            match &stemmer {
                Some(s) => s.stem(&lower).into_owned(),
                None => lower,
            }
        })
        .collect()
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

fn rouge_n_normalized(candidate: &[String], reference: &[String], n: usize) -> RougeScore {
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let overlap = cand
        .iter()
        .map(|(gram, &c)| refs.get(gram).map_or(0, |&r| c.min(r)))
        .sum();
    let total = |len: usize| (len + 1).saturating_sub(n);
    RougeScore::from_counts(overlap, total(candidate.len()), total(reference.len()))
}

pub fn rouge_n<S: AsRef<str>>(candidate: &[S], reference: &[S], n: usize) -> Result<RougeScore> {
    rouge_n_with(candidate, reference, n, RougeOptions::default())
}

/// Clipped n-gram overlap between candidate and reference.
pub fn rouge_n_with<S: AsRef<str>>(
    candidate: &[S],
    reference: &[S],
    n: usize,
    options: RougeOptions,
) -> Result<RougeScore> {
    if n == 0 {
        return Err(Error::invalid("ROUGE-N requires n >= 1"));
    }
    Ok(rouge_n_normalized(
        &normalize(candidate, options),
        &normalize(reference, options),
        n,
    ))
}

pub(crate) fn lcs_len(a: &[String], b: &[String]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> RougeScore {
    rouge_l_with(candidate, reference, RougeOptions::default())
}

/// Longest-common-subsequence precision, recall and F1.
pub fn rouge_l_with<S: AsRef<str>>(candidate: &[S], reference: &[S], options: RougeOptions) -> RougeScore {
    let c = normalize(candidate, options);
    let r = normalize(reference, options);
    RougeScore::from_counts(lcs_len(&c, &r), c.len(), r.len())
}

pub fn rouge<S: AsRef<str>>(
    candidate: &[S],
    reference: &[S],
    variant: RougeVariant,
    options: RougeOptions,
) -> Result<RougeScore> {
    match variant {
        RougeVariant::N(n) => rouge_n_with(candidate, reference, n, options),
        RougeVariant::L => Ok(rouge_l_with(candidate, reference, options)),
    }
}

/// Best score over several references, compared by F1.
pub fn rouge_multi<S: AsRef<str>, R: AsRef<[S]>>(
    candidate: &[S],
    references: &[R],
    variant: RougeVariant,
    options: RougeOptions,
) -> Result<RougeScore> {
    let mut best: Option<RougeScore> = None;
    for r in references {
        let s = rouge(candidate, r.as_ref(), variant, options)?;
        if best.is_none_or(|b| s.f1 > b.f1) {
            best = Some(s);
        }
    }
    best.ok_or_else(|| Error::invalid("no reference summaries given"))
}

/// Scores two raw texts after tokenizing them.
pub fn rouge_text(
    candidate: &str,
    reference: &str,
    variant: RougeVariant,
    options: RougeOptions,
) -> Result<RougeScore> {
    rouge(
        &textseg::tokens(candidate),
        &textseg::tokens(reference),
        variant,
        options,
    )
}

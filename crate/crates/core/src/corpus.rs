//! Documents, gold system scores and prediction tables.
//!
//! Every table is persisted as line-delimited JSON. A corpus line looks like
//!
//! ```text
//! {"id":"d1","text":"...","reference_summary":"...","set_id":"topic-7"}
//! ```
//!
//! A scores file starts with a header record declaring the scale, followed by
//! one record per (document, system) pair:
//!
//! ```text
//! {"scale":"unit_interval"}
//! {"doc_id":"d1","system_id":"bart","score":0.42}
//! ```
//!
//! A predictions file holds `{"doc_id":"d1","score":0.5}` records.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

/// One source text, optionally with its reference summary and topic set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_summary: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_id: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            reference_summary: None,
            set_id: None,
        }
    }

    pub fn with_reference(mut self, reference: impl Into<String>) -> Self {
        self.reference_summary = Some(reference.into());
        self
    }

    pub fn with_set(mut self, set_id: impl Into<String>) -> Self {
        self.set_id = Some(set_id.into());
        self
    }
}

/// An ordered collection of documents with unique ids.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_documents(docs: impl IntoIterator<Item = Document>) -> Result<Self> {
        let mut corpus = Corpus::new();
        for (i, doc) in docs.into_iter().enumerate() {
            corpus.push_at_line(doc, i + 1)?;
        }
        Ok(corpus)
    }

    pub fn push(&mut self, doc: Document) -> Result<()> {
        let line = self.documents.len() + 1;
        self.push_at_line(doc, line)
    }

    fn push_at_line(&mut self, doc: Document, line: usize) -> Result<()> {
        if doc.id.is_empty() {
            return Err(Error::Malformed {
                line,
                message: "empty document id".into(),
            });
        }
        if doc.text.trim().is_empty() {
            return Err(Error::Malformed {
                line,
                message: format!("document `{}` has empty text", doc.id),
            });
        }
        if self.index.contains_key(&doc.id) {
            return Err(Error::DuplicateId { line, id: doc.id });
        }
        self.index.insert(doc.id.clone(), self.documents.len());
        self.documents.push(doc);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.index.get(id).map(|&i| &self.documents[i])
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.documents.iter()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Documents grouped by `set_id`, sets in first-appearance order.
    pub fn sets(&self) -> IndexMap<&str, Vec<&Document>> {
        let mut sets: IndexMap<&str, Vec<&Document>> = IndexMap::new();
        for doc in &self.documents {
            if let Some(set) = &doc.set_id {
                sets.entry(set.as_str()).or_default().push(doc);
            }
        }
        sets
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Document;
    type IntoIter = std::slice::Iter<'a, Document>;

    fn into_iter(self) -> Self::IntoIter {
        self.documents.iter()
    }
}

pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let mut corpus = Corpus::new();
    for (line, raw) in jsonl::read_lines(path)? {
        let doc: Document = jsonl::parse_line(line, &raw)?;
        corpus.push_at_line(doc, line)?;
    }
    Ok(corpus)
}

pub fn save_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    jsonl::write_records(path, corpus.documents())
}

/// Declared range of a score table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    UnitInterval,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub doc_id: String,
    pub system_id: String,
    pub score: f64,
}

#[derive(Deserialize, Serialize)]
struct ScaleHeader {
    scale: Scale,
}

/// Gold scores of systems on documents.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemScoreTable {
    scale: Scale,
    entries: Vec<ScoreEntry>,
    index: HashMap<(String, String), usize>,
}

impl SystemScoreTable {
    pub fn new(scale: Scale) -> Self {
        SystemScoreTable {
            scale,
            entries: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn from_entries(scale: Scale, entries: impl IntoIterator<Item = ScoreEntry>) -> Result<Self> {
        let mut table = Self::new(scale);
        for (i, e) in entries.into_iter().enumerate() {
            table.insert_at_line(e, i + 1)?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, doc_id: &str, system_id: &str, score: f64) -> Result<()> {
        let line = self.entries.len() + 1;
        self.insert_at_line(
            ScoreEntry {
                doc_id: doc_id.to_string(),
                system_id: system_id.to_string(),
                score,
            },
            line,
        )
    }

    fn insert_at_line(&mut self, entry: ScoreEntry, line: usize) -> Result<()> {
        if !entry.score.is_finite() {
            return Err(Error::Malformed {
                line,
                message: format!("non-finite score {}", entry.score),
            });
        }
        if self.scale == Scale::UnitInterval && !(0.0..=1.0).contains(&entry.score) {
            return Err(Error::ScoreOutOfRange {
                line,
                score: entry.score,
            });
        }
        let key = (entry.doc_id.clone(), entry.system_id.clone());
        if self.index.contains_key(&key) {
            return Err(Error::DuplicateScore {
                line,
                doc_id: entry.doc_id,
                system_id: entry.system_id,
            });
        }
        self.index.insert(key, self.entries.len());
        self.entries.push(entry);
        Ok(())
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn entries(&self) -> &[ScoreEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, doc_id: &str, system_id: &str) -> Option<f64> {
        self.index
            .get(&(doc_id.to_string(), system_id.to_string()))
            .map(|&i| self.entries[i].score)
    }

    /// Distinct document ids in first-appearance order.
    pub fn doc_ids(&self) -> Vec<&str> {
        let mut seen = indexmap::IndexSet::new();
        for e in &self.entries {
            seen.insert(e.doc_id.as_str());
        }
        seen.into_iter().collect()
    }

    /// Distinct system ids, sorted.
    pub fn system_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.entries.iter().map(|e| e.system_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Scores of one system keyed by document, in table order.
    pub fn system_column(&self, system_id: &str) -> IndexMap<&str, f64> {
        self.entries
            .iter()
            .filter(|e| e.system_id == system_id)
            .map(|e| (e.doc_id.as_str(), e.score))
            .collect()
    }

    /// Every document's gold score, in first-appearance order.
    pub fn gold_scores(&self) -> PredictionTable {
        let mut sums: IndexMap<&str, (f64, usize)> = IndexMap::new();
        for e in &self.entries {
            let slot = sums.entry(e.doc_id.as_str()).or_insert((0.0, 0));
            slot.0 += e.score;
            slot.1 += 1;
        }
        let mut out = PredictionTable::new();
        for (doc, (sum, n)) in sums {
            out.scores.insert(doc.to_string(), sum / n as f64);
        }
        out
    }
}

/// Loads a scores file. An explicit `scale` overrides the file's header; when
/// neither is given the table is unbounded.
pub fn load_scores(path: &Path, scale: Option<Scale>) -> Result<SystemScoreTable> {
    let lines = jsonl::read_lines(path)?;
    let mut rest = lines.as_slice();
    let mut header_scale = None;
    if let Some((n, first)) = lines.first() {
        let value: serde_json::Value = jsonl::parse_line(*n, first)?;
        if value.get("scale").is_some() && value.get("doc_id").is_none() {
            let header: ScaleHeader = jsonl::parse_line(*n, first)?;
            header_scale = Some(header.scale);
            rest = &lines[1..];
        }
    }
    let mut table = SystemScoreTable::new(scale.or(header_scale).unwrap_or(Scale::Unbounded));
    for (n, raw) in rest {
        let entry: ScoreEntry = jsonl::parse_line(*n, raw)?;
        table.insert_at_line(entry, *n)?;
    }
    Ok(table)
}

pub fn save_scores(path: &Path, table: &SystemScoreTable) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    serde_json::to_writer(&mut w, &ScaleHeader { scale: table.scale })?;
    w.write_all(b"\n").map_err(io)?;
    jsonl::write_records_to(&mut w, table.entries())?;
    w.flush().map_err(io)
}

/// Per-document scores, either predicted or derived from gold tables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PredictionTable {
    scores: IndexMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct PredictionRecord<'a> {
    doc_id: std::borrow::Cow<'a, str>,
    score: f64,
}

impl PredictionTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, doc_id: impl Into<String>, score: f64) -> Result<()> {
        let doc_id = doc_id.into();
        if !score.is_finite() {
            return Err(Error::invalid(format!("non-finite prediction {score} for `{doc_id}`")));
        }
        if self.scores.contains_key(&doc_id) {
            return Err(Error::invalid(format!("duplicate prediction for `{doc_id}`")));
        }
        self.scores.insert(doc_id, score);
        Ok(())
    }

    pub fn get(&self, doc_id: &str) -> Option<f64> {
        self.scores.get(doc_id).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.scores.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.scores.keys().map(String::as_str)
    }

    /// Document ids ordered by descending score, ties by ascending id.
    pub fn ranking(&self) -> Vec<&str> {
        let mut ids: Vec<(&str, f64)> = self.iter().collect();
        ids.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ids.into_iter().map(|(id, _)| id).collect()
    }
}

impl FromIterator<(String, f64)> for PredictionTable {
    /// Later duplicates overwrite earlier ones; non-finite values are kept as given.
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        PredictionTable {
            scores: iter.into_iter().collect(),
        }
    }
}

pub fn load_predictions(path: &Path) -> Result<PredictionTable> {
    let mut table = PredictionTable::new();
    for (n, raw) in jsonl::read_lines(path)? {
        let rec: PredictionRecord = jsonl::parse_line(n, &raw)?;
        table
            .insert(rec.doc_id.into_owned(), rec.score)
            .map_err(|e| Error::Malformed {
                line: n,
                message: e.to_string(),
            })?;
    }
    Ok(table)
}

pub fn save_predictions(path: &Path, table: &PredictionTable) -> Result<()> {
    let records: Vec<PredictionRecord> = table
        .iter()
        .map(|(id, score)| PredictionRecord {
            doc_id: id.into(),
            score,
        })
        .collect();
    jsonl::write_records(path, &records)
}

/// Matched and total atomic content units of one summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AcuCount {
    matched: u32,
    total: u32,
}

impl AcuCount {
    pub fn new(matched: u32, total: u32) -> Result<Self> {
        if total == 0 {
            return Err(Error::invalid("ACU total must be at least 1"));
        }
        if matched > total {
            return Err(Error::invalid(format!(
                "matched ACUs ({matched}) exceed total ({total})"
            )));
        }
        Ok(AcuCount { matched, total })
    }

    pub fn matched(&self) -> u32 {
        self.matched
    }

    pub fn total(&self) -> u32 {
        self.total
    }
}

/// Fraction of reference units matched by a summary.
pub fn acu_score(count: AcuCount) -> f64 {
    f64::from(count.matched) / f64::from(count.total)
}

/// Mean score over all systems that scored `doc_id`.
pub fn gold_doc_score(table: &SystemScoreTable, doc_id: &str) -> Result<f64> {
    let scores: Vec<f64> = table
        .entries
        .iter()
        .filter(|e| e.doc_id == doc_id)
        .map(|e| e.score)
        .collect();
    if scores.is_empty() {
        return Err(Error::MissingDocument(doc_id.to_string()));
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Mean per-document score of each document set, sets in corpus order.
pub fn set_score_average(corpus: &Corpus, scores: &PredictionTable) -> Result<IndexMap<String, f64>> {
    let mut out = IndexMap::new();
    for (set, docs) in corpus.sets() {
        let mut sum = 0.0;
        for doc in &docs {
            sum += scores
                .get(&doc.id)
                .ok_or_else(|| Error::MissingDocument(doc.id.clone()))?;
        }
        out.insert(set.to_string(), sum / docs.len() as f64);
    }
    Ok(out)
}

/// Averages per-summary metric scores into one score per document.
pub fn metric_doc_average(scores: &[ScoreEntry]) -> Result<PredictionTable> {
    if scores.is_empty() {
        return Err(Error::invalid("no metric scores to average"));
    }
    let table = SystemScoreTable::from_entries(Scale::Unbounded, scores.iter().cloned())?;
    Ok(table.gold_scores())
}

//! Reordering and truncating multi-document inputs.

use serde::{Deserialize, Serialize};

use crate::corpus::{Document, PredictionTable};
use crate::error::{Error, Result};
use crate::textseg;

/// Line placed between documents in a concatenated input.
pub const DOC_SEPARATOR: &str = "|||||";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MdsOrdering {
    #[default]
    Original,
    /// Highest predicted score first, so the hardest documents are cut first.
    Predicted,
}

impl std::str::FromStr for MdsOrdering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "original" => Ok(MdsOrdering::Original),
            "predicted" | "presumm" => Ok(MdsOrdering::Predicted),
            _ => Err(Error::invalid(format!("unknown ordering `{s}`"))),
        }
    }
}

pub fn mds_order<'a>(
    docs: &[&'a Document],
    pred: &PredictionTable,
    ordering: MdsOrdering,
) -> Result<Vec<&'a Document>> {
    let mut keyed = docs
        .iter()
        .map(|d| {
            pred.get(&d.id)
                .map(|p| (p, *d))
                .ok_or_else(|| Error::MissingDocument(d.id.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    if ordering == MdsOrdering::Predicted {
        // sort_by is stable, so equal predictions keep their input order.
        keyed.sort_by(|a, b| b.0.total_cmp(&a.0));
    }
    Ok(keyed.into_iter().map(|(_, d)| d).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdsInput {
    pub text: String,
    /// Ids of the documents that contributed at least one token, in order.
    pub doc_ids: Vec<String>,
    pub token_count: usize,
    pub total_tokens: usize,
}

impl MdsInput {
    pub fn truncated(&self) -> bool {
        self.token_count < self.total_tokens
    }
}

/// The first `token_limit` tokens of the documents in order.
///
/// Tokens are joined with single spaces and documents are separated by a
/// [`DOC_SEPARATOR`] line. A document that starts past the limit is left out.
pub fn mds_concat_truncate(docs: &[&Document], token_limit: usize) -> Result<MdsInput> {
    if token_limit == 0 {
        return Err(Error::invalid("token limit must be at least 1"));
    }
    let mut parts = Vec::new();
    let mut doc_ids = Vec::new();
    let mut budget = token_limit;
    let mut total_tokens = 0;
    for doc in docs {
        let toks = textseg::tokens(&doc.text);
        total_tokens += toks.len();
        let take = toks.len().min(budget);
        if take > 0 {
            parts.push(toks[..take].join(" "));
            doc_ids.push(doc.id.clone());
            budget -= take;
        }
    }
    Ok(MdsInput {
        text: parts.join(&format!("\n{DOC_SEPARATOR}\n")),
        doc_ids,
        token_count: token_limit - budget,
        total_tokens,
    })
}

/// Content tokens of a concatenated input, ignoring separator lines.
pub fn count_mds_tokens(text: &str) -> usize {
    text.lines()
        .filter(|l| l.trim() != DOC_SEPARATOR)
        .map(|l| textseg::tokens(l).len())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs() -> Vec<Document> {
        vec![
            Document::new("A", "one two three four"),
            Document::new("B", "five six seven eight"),
            Document::new("C", "nine ten"),
        ]
    }

    fn ids(v: &[&Document]) -> Vec<String> {
        v.iter().map(|d| d.id.clone()).collect()
    }

    #[test]
    fn ordering() {
        let d = docs();
        let refs: Vec<&Document> = d.iter().collect();
        let p: PredictionTable = [("A", 0.1), ("B", 0.9), ("C", 0.5)]
            .iter()
            .map(|(i, s)| (i.to_string(), *s))
            .collect();
        assert_eq!(
            ids(&mds_order(&refs, &p, MdsOrdering::Predicted).unwrap()),
            ["B", "C", "A"]
        );
        assert_eq!(
            ids(&mds_order(&refs, &p, MdsOrdering::Original).unwrap()),
            ["A", "B", "C"]
        );

        let flat: PredictionTable = ["A", "B", "C"].iter().map(|i| (i.to_string(), 0.3)).collect();
        assert_eq!(
            ids(&mds_order(&refs, &flat, MdsOrdering::Predicted).unwrap()),
            ["A", "B", "C"]
        );

        let partial: PredictionTable = [("A".to_string(), 0.1)].into_iter().collect();
        assert!(mds_order(&refs, &partial, MdsOrdering::Predicted).is_err());
    }

    #[test]
    fn truncation() {
        let d = docs();
        let two = [&d[0], &d[1]];
        let out = mds_concat_truncate(&two, 6).unwrap();
        assert_eq!(out.text, "one two three four\n|||||\nfive six");
        assert_eq!(out.token_count, 6);
        assert_eq!(count_mds_tokens(&out.text), 6);
        assert!(out.truncated());

        let full = mds_concat_truncate(&two, 100).unwrap();
        assert_eq!(full.text, "one two three four\n|||||\nfive six seven eight");
        assert!(!full.truncated());

        let single = Document::new("x", "a b c d e f g h i j");
        assert_eq!(mds_concat_truncate(&[&single], 5).unwrap().text, "a b c d e");
        assert!(mds_concat_truncate(&two, 0).is_err());

        let exact = mds_concat_truncate(&two, 4).unwrap();
        assert_eq!(exact.doc_ids, ["A"]);
    }
}

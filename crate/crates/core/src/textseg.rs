//! Deterministic tokenization, sentence splitting and surface statistics.
//!
//! Tokens are maximal runs of alphanumeric characters (an apostrophe between
//! two alphanumerics stays inside the token, so `don't` is one token); every
//! other non-whitespace character is a token of its own.
//!
//! Sentences end at `.`, `!` or `?` followed by whitespace and an uppercase
//! letter, a digit or an opening quote, unless the period belongs to a word
//! from the committed abbreviation list. A newline always ends a sentence.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::ops::Range;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;

static ABBREVIATIONS: LazyLock<HashSet<&'static str>> =
    LazyLock::new(|| fixture_words(include_str!("../data/abbreviations.txt")));

static FUNCTION_WORDS: LazyLock<HashSet<&'static str>> =
    LazyLock::new(|| fixture_words(include_str!("../data/function_words.txt")));

static NUMERAL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"[\p{Alphabetic}\p{Nd}]*\p{Nd}[\p{Alphabetic}\p{Nd}]*(?:[.,/:\-]\p{Nd}[\p{Alphabetic}\p{Nd}]*)*")
        .unwrap()
});

pub(crate) fn fixture_words(src: &'static str) -> HashSet<&'static str> {
    fixture_lines(src).collect()
}

pub(crate) fn fixture_lines(src: &'static str) -> impl Iterator<Item = &'static str> {
    src.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | '\u{201D}' | '\u{2019}' | ')' | ']' | '\u{00BB}')
}

fn is_sentence_starter(c: char) -> bool {
    c.is_uppercase() || c.is_numeric() || matches!(c, '"' | '\'' | '\u{201C}' | '\u{2018}' | '\u{00AB}')
}

/// True when the token carries at least one alphanumeric character.
pub fn is_word(token: &str) -> bool {
    token.chars().any(char::is_alphanumeric)
}

/// Tokens of a text with their byte offsets and sentence grouping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedText {
    tokens: Vec<String>,
    offsets: Vec<Range<usize>>,
    sentence_spans: Vec<Range<usize>>,
}

impl TokenizedText {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Byte range of each token in the source text.
    pub fn offsets(&self) -> &[Range<usize>] {
        &self.offsets
    }

    /// Half-open token-index ranges, one per sentence.
    pub fn sentence_spans(&self) -> &[Range<usize>] {
        &self.sentence_spans
    }

    pub fn sentence(&self, i: usize) -> &[String] {
        &self.tokens[self.sentence_spans[i].clone()]
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens that are not standalone punctuation.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str).filter(|t| is_word(t))
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }
}

fn scan_tokens(text: &str, range: Range<usize>, tokens: &mut Vec<String>, offsets: &mut Vec<Range<usize>>) {
    let base = range.start;
    let chars: Vec<(usize, char)> = text[range.clone()].char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = base + pos;
        if c.is_alphanumeric() {
            let mut j = i + 1;
            while j < chars.len() {
                let cj = chars[j].1;
                let joined = is_apostrophe(cj) && chars.get(j + 1).is_some_and(|&(_, n)| n.is_alphanumeric());
                if cj.is_alphanumeric() {
                    j += 1;
                } else if joined {
                    j += 2;
                } else {
                    break;
                }
            }
            let end = chars.get(j).map_or(range.end, |&(p, _)| base + p);
            tokens.push(text[start..end].to_string());
            offsets.push(start..end);
            i = j;
        } else {
            let end = start + c.len_utf8();
            tokens.push(c.to_string());
            offsets.push(start..end);
            i += 1;
        }
    }
}

pub fn tokenize(text: &str) -> Result<TokenizedText> {
    if text.trim().is_empty() {
        return Err(Error::invalid("cannot tokenize empty text"));
    }
    let mut tokens = Vec::new();
    let mut offsets = Vec::new();
    let mut sentence_spans = Vec::new();
    for range in sentence_ranges(text) {
        let first = tokens.len();
        scan_tokens(text, range, &mut tokens, &mut offsets);
        if tokens.len() > first {
            sentence_spans.push(first..tokens.len());
        }
    }
    Ok(TokenizedText {
        tokens,
        offsets,
        sentence_spans,
    })
}

/// Tokens without sentence structure; empty input gives an empty list.
pub fn tokens(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut offsets = Vec::new();
    scan_tokens(text, 0..text.len(), &mut tokens, &mut offsets);
    tokens
}

fn abbreviation_before(chars: &[(usize, char)], period: usize) -> bool {
    let mut start = period;
    while start > 0 && !chars[start - 1].1.is_whitespace() {
        start -= 1;
    }
    let word: String = chars[start..period]
        .iter()
        .map(|&(_, c)| c)
        .skip_while(|c| !c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect();
    !word.is_empty() && ABBREVIATIONS.contains(word.as_str())
}

/// Byte ranges of sentences, trimmed of surrounding whitespace.
pub fn sentence_ranges(text: &str) -> Vec<Range<usize>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(p, _)| p);
    let mut raw = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        if c == '\n' {
            raw.push(start..chars[i].0);
            start = chars[i].0 + 1;
            i += 1;
            continue;
        }
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && (is_terminator(chars[j].1) || is_closer(chars[j].1)) {
            j += 1;
        }
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() && chars[k].1 != '\n' {
            k += 1;
        }
        let splits = k > j
            && k < chars.len()
            && is_sentence_starter(chars[k].1)
            && !(c == '.' && abbreviation_before(&chars, i));
        if splits {
            raw.push(start..byte_at(j));
            start = byte_at(j);
            i = k;
        } else {
            i = j;
        }
    }
    raw.push(start..text.len());

    raw.into_iter()
        .filter_map(|r| {
            let s = &text[r.clone()];
            let trimmed_start = r.start + (s.len() - s.trim_start().len());
            let trimmed_end = r.start + s.trim_end().len();
            (trimmed_start < trimmed_end).then_some(trimmed_start..trimmed_end)
        })
        .collect()
}

pub fn split_sentences(text: &str) -> Vec<String> {
    sentence_ranges(text).into_iter().map(|r| text[r].to_string()).collect()
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel-group syllable estimate with silent-e handling; never below 1.
pub fn count_syllables(word: &str) -> Result<usize> {
    let letters: Vec<char> = word
        .chars()
        .filter(|c| c.is_alphabetic())
        .flat_map(char::to_lowercase)
        .collect();
    if letters.is_empty() {
        return Err(Error::invalid(format!("`{word}` has no alphabetic characters")));
    }
    let mut groups = 0usize;
    let mut in_group = false;
    for &c in &letters {
        let v = is_vowel(c);
        if v && !in_group {
            groups += 1;
        }
        in_group = v;
    }
    let n = letters.len();
    if n >= 2 && letters[n - 1] == 'e' && !is_vowel(letters[n - 2]) {
        let consonant_le = letters[n - 2] == 'l' && n >= 3 && !is_vowel(letters[n - 3]);
        if !consonant_le {
            groups = groups.saturating_sub(1);
        }
    }
    Ok(groups.max(1))
}

/// Numbers written with digits; `3.14`, `2,000` and `10-20` count once each.
pub fn count_numerals(text: &str) -> usize {
    NUMERAL.find_iter(text).count()
}

/// Source of named-entity mentions for a document.
pub trait EntityTagger: Send + Sync {
    fn entities(&self, doc_id: &str, text: &str) -> Result<BTreeSet<String>>;
}

/// Capitalization-based tagger with no model dependency.
///
/// A maximal run of capitalized words is an entity. A run that opens a
/// sentence loses its first word when that word is a function word, so
/// "The" or "However" at sentence start are never entities.
#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicTagger;

fn strip_possessive(s: &str) -> &str {
    s.strip_suffix("'s")
        .or_else(|| s.strip_suffix("\u{2019}s"))
        .unwrap_or(s)
}

fn is_capitalized(token: &str) -> bool {
    token.chars().next().is_some_and(char::is_uppercase)
}

impl HeuristicTagger {
    pub fn extract(&self, text: &str) -> BTreeSet<String> {
        let mut found = BTreeSet::new();
        for range in sentence_ranges(text) {
            let toks = tokens(&text[range]);
            let first_word = toks.iter().position(|t| is_word(t));
            let mut i = 0;
            while i < toks.len() {
                if !(is_word(&toks[i]) && is_capitalized(&toks[i])) {
                    i += 1;
                    continue;
                }
                let mut j = i;
                while j < toks.len() && is_word(&toks[j]) && is_capitalized(&toks[j]) {
                    j += 1;
                }
                let mut run = &toks[i..j];
                if Some(i) == first_word {
                    let lower = toks[i].to_lowercase();
                    if FUNCTION_WORDS.contains(lower.as_str()) {
                        run = &run[1..];
                    }
                }
                if !run.is_empty() {
                    let joined = run.join(" ");
                    found.insert(strip_possessive(&joined).to_string());
                }
                i = j;
            }
        }
        found
    }
}

impl EntityTagger for HeuristicTagger {
    fn entities(&self, _doc_id: &str, text: &str) -> Result<BTreeSet<String>> {
        Ok(self.extract(text))
    }
}

pub fn extract_unique_entities(text: &str) -> BTreeSet<String> {
    HeuristicTagger.extract(text)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntityAnnotation {
    pub doc_id: String,
    pub entities: Vec<String>,
}

/// Entities supplied by an external tagger, one annotation record per document.
#[derive(Debug, Clone, Default)]
pub struct AnnotatedTagger {
    by_doc: HashMap<String, BTreeSet<String>>,
}

impl AnnotatedTagger {
    pub fn from_annotations(records: impl IntoIterator<Item = EntityAnnotation>) -> Self {
        let by_doc = records
            .into_iter()
            .map(|r| (r.doc_id, r.entities.into_iter().collect()))
            .collect();
        AnnotatedTagger { by_doc }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(Self::from_annotations(jsonl::read_records::<EntityAnnotation>(path)?))
    }
}

impl EntityTagger for AnnotatedTagger {
    fn entities(&self, doc_id: &str, _text: &str) -> Result<BTreeSet<String>> {
        self.by_doc
            .get(doc_id)
            .cloned()
            .ok_or_else(|| Error::MissingAnnotation(doc_id.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceStats {
    pub word_count: usize,
    pub sentence_count: usize,
    pub syllable_count: usize,
    pub numeral_count: usize,
    pub unique_entity_count: usize,
}

impl SurfaceStats {
    /// Words without letters (bare numbers) count as one syllable.
    pub fn compute(doc_id: &str, text: &str, tagger: &dyn EntityTagger) -> Result<Self> {
        let tokenized = tokenize(text)?;
        let mut syllable_count = 0;
        for w in tokenized.words() {
            syllable_count += count_syllables(w).unwrap_or(1);
        }
        Ok(SurfaceStats {
            word_count: tokenized.word_count(),
            sentence_count: tokenized.sentence_spans().len(),
            syllable_count,
            numeral_count: count_numerals(text),
            unique_entity_count: tagger.entities(doc_id, text)?.len(),
        })
    }
}

//! Document perturbations for probing what a difficulty scorer relies on.
//!
//! Sentence-level transforms rebuild the text from the segmenter's sentences,
//! one per line. Word-level transforms edit the original text in place, so
//! untouched spans keep their exact spelling and spacing.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::Range;
use std::sync::LazyLock;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};
use crate::features::{salient_sentence_ranking, SalienceMetric};
use crate::textseg::{self, fixture_lines, EntityTagger, HeuristicTagger};

static NAME_BANK: LazyLock<Vec<&'static str>> =
    LazyLock::new(|| fixture_lines(include_str!("../../data/name_bank.txt")).collect());

static IRREGULAR_VERBS: LazyLock<HashMap<&'static str, &'static str>> = LazyLock::new(|| {
    fixture_lines(include_str!("../../data/irregular_verbs.txt"))
        .filter_map(|l| l.split_once(char::is_whitespace))
        .map(|(form, base)| (form, base.trim()))
        .collect()
});

struct SuffixRule {
    suffix: &'static str,
    replacement: &'static str,
    min_stem: usize,
}

static LEMMA_RULES: LazyLock<Vec<SuffixRule>> = LazyLock::new(|| {
    fixture_lines(include_str!("../../data/lemma_rules.txt"))
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            SuffixRule {
                suffix: f[0],
                replacement: if f[1] == "-" { "" } else { f[1] },
                min_stem: f[2].parse().expect("lemma rule stem length"),
            }
        })
        .collect()
});

/// Words the contradiction transform may add.
pub const NEGATION_WORDS: [&str; 2] = ["not", "did"];

const AUXILIARIES: [&str; 20] = [
    "am", "is", "are", "was", "were", "has", "have", "had", "do", "does", "did", "will", "would", "can", "could",
    "shall", "should", "may", "might", "must",
];

/// Placeholder prefix for anonymized names: `ENTITY1`, `ENTITY2`, ...
pub const PLACEHOLDER_PREFIX: &str = "ENTITY";

pub fn name_bank() -> &'static [&'static str] {
    &NAME_BANK
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NameMode {
    Bank,
    Placeholder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TransformKind {
    Identity,
    RemoveFirstSentence,
    RemoveSalient { k: usize },
    DeleteWords { p: f64 },
    DeleteSentences { p: f64 },
    KeepFirst { n: usize },
    KeepLast { n: usize },
    MoveSalientToEnd { k: usize },
    ShuffleSentences,
    ReplaceNames { mode: NameMode },
    CorruptGrammar,
    AppendContradictions,
}

impl TransformKind {
    pub fn name(&self) -> &'static str {
        match self {
            TransformKind::Identity => "identity",
            TransformKind::RemoveFirstSentence => "remove_first_sentence",
            TransformKind::RemoveSalient { .. } => "remove_salient",
            TransformKind::DeleteWords { .. } => "delete_words",
            TransformKind::DeleteSentences { .. } => "delete_sentences",
            TransformKind::KeepFirst { .. } => "keep_first",
            TransformKind::KeepLast { .. } => "keep_last",
            TransformKind::MoveSalientToEnd { .. } => "move_salient_to_end",
            TransformKind::ShuffleSentences => "shuffle_sentences",
            TransformKind::ReplaceNames { .. } => "replace_names",
            TransformKind::CorruptGrammar => "corrupt_grammar",
            TransformKind::AppendContradictions => "append_contradictions",
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            TransformKind::DeleteWords { .. }
                | TransformKind::DeleteSentences { .. }
                | TransformKind::ShuffleSentences
                | TransformKind::ReplaceNames { mode: NameMode::Bank }
        )
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TransformKind::DeleteWords { p } | TransformKind::DeleteSentences { p } if !(p > 0.0 && p < 1.0) => Err(
                Error::invalid(format!("{}: proportion {p} is outside (0, 1)", self.name())),
            ),
            TransformKind::RemoveSalient { k: 0 }
            | TransformKind::MoveSalientToEnd { k: 0 }
            | TransformKind::KeepFirst { n: 0 }
            | TransformKind::KeepLast { n: 0 } => {
                Err(Error::invalid(format!("{}: count must be at least 1", self.name())))
            }
            _ => Ok(()),
        }
    }
}

/// Written as `name` or `name:param`, e.g. `delete_words:0.3` or `replace_names:bank`.
impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.name();
        match self {
            TransformKind::RemoveSalient { k } | TransformKind::MoveSalientToEnd { k } => write!(f, "{name}:{k}"),
            TransformKind::KeepFirst { n } | TransformKind::KeepLast { n } => write!(f, "{name}:{n}"),
            TransformKind::DeleteWords { p } | TransformKind::DeleteSentences { p } => write!(f, "{name}:{p}"),
            TransformKind::ReplaceNames { mode: NameMode::Bank } => write!(f, "{name}:bank"),
            TransformKind::ReplaceNames {
                mode: NameMode::Placeholder,
            } => write!(f, "{name}:placeholder"),
            _ => f.write_str(name),
        }
    }
}

impl std::str::FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let bad = || Error::invalid(format!("cannot parse transform `{s}`"));
        let count = || param.and_then(|p| p.parse::<usize>().ok()).ok_or_else(bad);
        let prop = || param.and_then(|p| p.parse::<f64>().ok()).ok_or_else(bad);
        let kind = match name {
            "identity" => TransformKind::Identity,
            "remove_first_sentence" => TransformKind::RemoveFirstSentence,
            "remove_salient" => TransformKind::RemoveSalient { k: count()? },
            "delete_words" => TransformKind::DeleteWords { p: prop()? },
            "delete_sentences" => TransformKind::DeleteSentences { p: prop()? },
            "keep_first" => TransformKind::KeepFirst { n: count()? },
            "keep_last" => TransformKind::KeepLast { n: count()? },
            "move_salient_to_end" => TransformKind::MoveSalientToEnd { k: count()? },
            "shuffle_sentences" => TransformKind::ShuffleSentences,
            "replace_names" => TransformKind::ReplaceNames {
                mode: match param {
                    Some("bank") | None => NameMode::Bank,
                    Some("placeholder") => NameMode::Placeholder,
                    _ => return Err(bad()),
                },
            },
            "corrupt_grammar" => TransformKind::CorruptGrammar,
            "append_contradictions" => TransformKind::AppendContradictions,
            _ => return Err(bad()),
        };
        if param.is_some() && kind.to_string().split_once(':').is_none() {
            return Err(bad());
        }
        kind.validate()?;
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    #[serde(flatten)]
    pub kind: TransformKind,
    #[serde(default)]
    pub seed: u64,
}

impl TransformSpec {
    pub fn new(kind: TransformKind, seed: u64) -> Self {
        TransformSpec { kind, seed }
    }
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

/// The perturbations of the published probe table, most disruptive first.
pub fn probe_suite_kinds() -> Vec<TransformKind> {
    use TransformKind::*;
    vec![
        RemoveSalient { k: 10 },
        KeepLast { n: 3 },
        DeleteWords { p: 0.3 },
        RemoveSalient { k: 5 },
        ShuffleSentences,
        MoveSalientToEnd { k: 10 },
        KeepFirst { n: 3 },
        RemoveFirstSentence,
        MoveSalientToEnd { k: 5 },
        ReplaceNames { mode: NameMode::Bank },
        ReplaceNames {
            mode: NameMode::Placeholder,
        },
        CorruptGrammar,
        AppendContradictions,
        DeleteSentences { p: 0.3 },
    ]
}

/// Collaborators a transform may need.
#[derive(Clone, Copy)]
pub struct TransformContext<'a> {
    pub tagger: &'a dyn EntityTagger,
    pub metric: SalienceMetric,
}

impl Default for TransformContext<'static> {
    fn default() -> Self {
        TransformContext {
            tagger: &HeuristicTagger,
            metric: SalienceMetric::default(),
        }
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5 + 1e-9).floor() as usize
}

fn infeasible(spec: &TransformSpec, doc: &Document, reason: impl Into<String>) -> Error {
    Error::InfeasibleTransform {
        transform: spec.to_string(),
        doc_id: doc.id.clone(),
        reason: reason.into(),
    }
}

fn with_text(doc: &Document, text: String) -> Document {
    Document { text, ..doc.clone() }
}

fn sentences(text: &str) -> Vec<&str> {
    textseg::sentence_ranges(text).into_iter().map(|r| &text[r]).collect()
}

/// Replaces each byte range by its text; ranges must not overlap.
fn splice(text: &str, mut edits: Vec<(Range<usize>, String)>) -> String {
    edits.sort_by_key(|e| e.0.start);
    let mut out = String::with_capacity(text.len());
    let mut at = 0;
    for (range, replacement) in edits {
        out.push_str(&text[at..range.start]);
        out.push_str(&replacement);
        at = range.end;
    }
    out.push_str(&text[at..]);
    out
}

pub fn apply_transform(doc: &Document, spec: &TransformSpec) -> Result<Document> {
    apply_transform_with(doc, spec, &TransformContext::default())
}

pub fn apply_transform_with(doc: &Document, spec: &TransformSpec, ctx: &TransformContext) -> Result<Document> {
    spec.kind.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sents = sentences(&doc.text);
    if sents.is_empty() {
        return Err(infeasible(spec, doc, "document has no sentences"));
    }
    let rebuilt = |kept: Vec<&str>| with_text(doc, kept.join("\n"));
    let out = match spec.kind {
        TransformKind::Identity => doc.clone(),
        TransformKind::RemoveFirstSentence => {
            if sents.len() < 2 {
                return Err(infeasible(spec, doc, "needs at least 2 sentences"));
            }
            rebuilt(sents[1..].to_vec())
        }
        TransformKind::RemoveSalient { k } => {
            let top = salient_set(doc, k, ctx)?;
            if top.len() == sents.len() {
                return Err(infeasible(spec, doc, "would remove every sentence"));
            }
            rebuilt(keep_indices(&sents, |i| !top.contains(&i)))
        }
        TransformKind::MoveSalientToEnd { k } => {
            let top = salient_set(doc, k, ctx)?;
            let mut order = keep_indices(&sents, |i| !top.contains(&i));
            order.extend(keep_indices(&sents, |i| top.contains(&i)));
            rebuilt(order)
        }
        TransformKind::KeepFirst { n } => rebuilt(sents[..n.min(sents.len())].to_vec()),
        TransformKind::KeepLast { n } => rebuilt(sents[sents.len() - n.min(sents.len())..].to_vec()),
        TransformKind::ShuffleSentences => {
            let mut shuffled = sents.clone();
            shuffled.shuffle(&mut rng);
            rebuilt(shuffled)
        }
        TransformKind::DeleteSentences { p } => {
            let m = round_half_up(p * sents.len() as f64);
            if m >= sents.len() {
                return Err(infeasible(spec, doc, "would delete every sentence"));
            }
            let gone: HashSet<usize> = index::sample(&mut rng, sents.len(), m).into_iter().collect();
            rebuilt(keep_indices(&sents, |i| !gone.contains(&i)))
        }
        TransformKind::DeleteWords { p } => with_text(doc, delete_words(doc, spec, p, &mut rng)?),
        TransformKind::ReplaceNames { mode } => with_text(doc, replace_names(doc, mode, ctx, &mut rng)?),
        TransformKind::CorruptGrammar => with_text(doc, corrupt_grammar(&doc.text)?),
        TransformKind::AppendContradictions => {
            let negated: Vec<String> = sents.iter().filter_map(|s| negate_sentence(s)).take(3).collect();
            if negated.is_empty() {
                return Err(infeasible(spec, doc, "no declarative sentence with a finite verb"));
            }
            with_text(doc, format!("{}\n{}", doc.text.trim_end(), negated.join("\n")))
        }
    };
    Ok(out)
}

fn keep_indices<'t>(sents: &[&'t str], keep: impl Fn(usize) -> bool) -> Vec<&'t str> {
    sents
        .iter()
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .map(|(_, s)| *s)
        .collect()
}

fn salient_set(doc: &Document, k: usize, ctx: &TransformContext) -> Result<HashSet<usize>> {
    let ranking = salient_sentence_ranking(doc, ctx.metric)?;
    Ok(ranking.into_iter().take(k).collect())
}

fn delete_words(doc: &Document, spec: &TransformSpec, p: f64, rng: &mut ChaCha8Rng) -> Result<String> {
    let text = doc.text.as_str();
    let tokenized = textseg::tokenize(text)?;
    let words: Vec<Range<usize>> = tokenized
        .tokens()
        .iter()
        .zip(tokenized.offsets())
        .filter(|(t, _)| textseg::is_word(t))
        .map(|(_, r)| r.clone())
        .collect();
    let m = round_half_up(p * words.len() as f64);
    if m >= words.len() && !words.is_empty() {
        return Err(infeasible(spec, doc, "would delete every word"));
    }
    let bytes = text.as_bytes();
    let blank = |b: u8| b == b' ' || b == b'\t';
    let mut dropped = vec![false; text.len()];
    for i in index::sample(rng, words.len(), m) {
        let Range { mut start, mut end } = words[i].clone();
        // Swallow the following spaces, or the preceding ones at a line or
        // punctuation boundary, so no double spaces are left behind.
        if end < bytes.len() && blank(bytes[end]) {
            while end < bytes.len() && blank(bytes[end]) {
                end += 1;
            }
        } else {
            while start > 0 && blank(bytes[start - 1]) {
                start -= 1;
            }
        }
        dropped[start..end].iter_mut().for_each(|d| *d = true);
    }
    let kept: Vec<u8> = bytes
        .iter()
        .zip(&dropped)
        .filter(|(_, d)| !**d)
        .map(|(b, _)| *b)
        .collect();
    // Only whole tokens and ASCII blanks are dropped, so the rest stays UTF-8.
    Ok(String::from_utf8(kept).expect("token boundaries are char boundaries"))
}

fn possessive_suffix(token: &str, stem: &str) -> Option<usize> {
    let rest = token.strip_prefix(stem)?;
    matches!(rest, "" | "'s" | "\u{2019}s").then_some(rest.len())
}

fn replace_names(doc: &Document, mode: NameMode, ctx: &TransformContext, rng: &mut ChaCha8Rng) -> Result<String> {
    let mut entities: Vec<Vec<String>> = ctx
        .tagger
        .entities(&doc.id, &doc.text)?
        .iter()
        .map(|e| textseg::tokens(e))
        .filter(|t| !t.is_empty())
        .collect();
    // Longest mention wins where entities overlap.
    entities.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));

    let mut bank: Vec<&str> = NAME_BANK.clone();
    bank.shuffle(rng);

    let tokenized = textseg::tokenize(&doc.text)?;
    let toks = tokenized.tokens();
    let offs = tokenized.offsets();
    let mut assigned: HashMap<usize, String> = HashMap::new();
    let mut edits = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let hit = entities.iter().enumerate().find_map(|(e, ent)| {
            let end = i + ent.len();
            if end > toks.len() || toks[i..end - 1] != ent[..ent.len() - 1] {
                return None;
            }
            possessive_suffix(&toks[end - 1], &ent[ent.len() - 1]).map(|suffix| (e, end, suffix))
        });
        let Some((e, end, suffix)) = hit else {
            i += 1;
            continue;
        };
        let next = assigned.len();
        let name = assigned
            .entry(e)
            .or_insert_with(|| match mode {
                NameMode::Bank => bank[next % bank.len()].to_string(),
                NameMode::Placeholder => format!("{PLACEHOLDER_PREFIX}{}", next + 1),
            })
            .clone();
        edits.push((offs[i].start..offs[end - 1].end - suffix, name));
        i = end;
    }
    Ok(splice(&doc.text, edits))
}

fn restore_case(original: &str, lemma: &str) -> String {
    let mut chars = original.chars();
    let upper_all = original.chars().count() > 1 && original.chars().all(|c| !c.is_lowercase());
    if upper_all {
        lemma.to_uppercase()
    } else if chars.next().is_some_and(char::is_uppercase) {
        let mut l = lemma.chars();
        l.next()
            .map(|c| c.to_uppercase().chain(l).collect())
            .unwrap_or_default()
    } else {
        lemma.to_string()
    }
}

fn has_vowel(s: &str) -> bool {
    s.chars().any(|c| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y'))
}

/// Base form of an inflected verb, from the irregular list or the suffix
/// rules. `None` when the word is not recognized as inflected.
pub fn lemma(word: &str) -> Option<String> {
    if !word.chars().all(char::is_alphabetic) {
        return None;
    }
    let lower = word.to_lowercase();
    let base = if let Some(base) = IRREGULAR_VERBS.get(lower.as_str()) {
        base.to_string()
    } else {
        LEMMA_RULES.iter().find_map(|r| {
            let stem = lower.strip_suffix(r.suffix)?;
            (stem.chars().count() >= r.min_stem && has_vowel(stem)).then(|| format!("{stem}{}", r.replacement))
        })?
    };
    (base != lower).then(|| restore_case(word, &base))
}

fn is_past_form(lower: &str) -> bool {
    if lower.ends_with("ing") || lower.ends_with('s') {
        return false;
    }
    IRREGULAR_VERBS.contains_key(lower) || lower.ends_with("ed")
}

fn corrupt_grammar(text: &str) -> Result<String> {
    let tokenized = textseg::tokenize(text)?;
    let sentence_starts: HashSet<usize> = tokenized.sentence_spans().iter().map(|s| s.start).collect();
    let mut edits = Vec::new();
    for (i, tok) in tokenized.tokens().iter().enumerate() {
        // Capitalized words inside a sentence are usually names.
        if textseg::is_word(tok) && (sentence_starts.contains(&i) || !tok.starts_with(char::is_uppercase)) {
            if let Some(base) = lemma(tok) {
                edits.push((tokenized.offsets()[i].clone(), base));
            }
        }
    }
    Ok(splice(text, edits))
}

fn is_declarative(sentence: &str) -> bool {
    let body = sentence.trim_end_matches(['"', '\'', '\u{201D}', '\u{2019}', ')']);
    body.ends_with('.')
}

/// The sentence with its first finite verb negated, if it has one.
fn negate_sentence(sentence: &str) -> Option<String> {
    if !is_declarative(sentence) {
        return None;
    }
    let tokenized = textseg::tokenize(sentence).ok()?;
    for (i, tok) in tokenized.tokens().iter().enumerate() {
        if !textseg::is_word(tok) || (i > 0 && tok.starts_with(char::is_uppercase)) {
            continue;
        }
        let span = tokenized.offsets()[i].clone();
        let lower = tok.to_lowercase();
        if AUXILIARIES.contains(&lower.as_str()) {
            return Some(splice(sentence, vec![(span.end..span.end, " not".to_string())]));
        }
        if is_past_form(&lower) {
            if let Some(base) = lemma(&lower) {
                let did = if i == 0 { "Did" } else { "did" };
                return Some(splice(sentence, vec![(span, format!("{did} not {base}"))]));
            }
        }
    }
    None
}

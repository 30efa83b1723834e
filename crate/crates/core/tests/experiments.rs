use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;
use sumdiff::corpus::{Document, PredictionTable, Scale, SystemScoreTable};
use sumdiff::experiments::{
    apply_transform, count_mds_tokens, hybrid_evaluate, hybrid_select, lemma, mds_concat_truncate, mds_order,
    name_bank, MdsOrdering, NameMode, TransformKind, TransformSpec, NEGATION_WORDS, PLACEHOLDER_PREFIX,
};
use sumdiff::textseg::{self, split_sentences};

fn unit_table() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=30).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..=1.0, n),
            prop::collection::vec(-10.0f64..10.0, n),
        )
    })
}

fn build(scores: &[f64], prio: &[f64]) -> (SystemScoreTable, PredictionTable) {
    let mut t = SystemScoreTable::new(Scale::UnitInterval);
    let mut p = PredictionTable::new();
    for (i, (s, q)) in scores.iter().zip(prio).enumerate() {
        t.insert(&format!("d{i:02}"), "sys", *s).unwrap();
        p.insert(format!("d{i:02}"), *q).unwrap();
    }
    (t, p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn hybrid_is_monotone_in_fraction((scores, prio) in unit_table()) {
        let (t, p) = build(&scores, &prio);
        let mut last = f64::NEG_INFINITY;
        for step in 0..=20 {
            let fraction = step as f64 / 20.0;
            let selected = hybrid_select(&p, fraction).unwrap();
            prop_assert_eq!(selected.len(), (fraction * scores.len() as f64 + 1e-9).floor() as usize);
            let out = hybrid_evaluate(&t, "sys", &selected).unwrap();
            prop_assert!(out.mean_score_after >= out.mean_score_before);
            prop_assert!(out.mean_score_after >= last);
            last = out.mean_score_after;
        }
    }

    #[test]
    fn gold_selection_is_subset_optimal(scores in prop::collection::vec(0.0f64..=1.0, 1..=8), fraction in 0.0f64..=1.0) {
        let (t, gold) = build(&scores, &scores);
        let chosen = hybrid_select(&gold, fraction).unwrap();
        let best = hybrid_evaluate(&t, "sys", &chosen).unwrap().mean_score_after;
        let n = scores.len();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != chosen.len() {
                continue;
            }
            let subset: BTreeSet<String> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| format!("d{i:02}")).collect();
            let other = hybrid_evaluate(&t, "sys", &subset).unwrap().mean_score_after;
            prop_assert!(other <= best + 1e-12);
        }
    }

    #[test]
    fn mds_token_budget_is_exact(lens in prop::collection::vec(1usize..400, 1..6), limit in 1usize..1500) {
        let docs: Vec<Document> = lens
            .iter()
            .enumerate()
            .map(|(d, &n)| Document::new(format!("d{d}"), (0..n).map(|i| if i % 9 == 8 { "x." } else { "word" }).collect::<Vec<_>>().join(" ")))
            .collect();
        let refs: Vec<&Document> = docs.iter().collect();
        let total: usize = docs.iter().map(|d| textseg::tokens(&d.text).len()).sum();
        for l in [limit, 256, 512, 1024] {
            let out = mds_concat_truncate(&refs, l).unwrap();
            prop_assert_eq!(out.token_count, l.min(total));
            prop_assert_eq!(count_mds_tokens(&out.text), l.min(total));
        }
    }

    #[test]
    fn lowest_prediction_goes_last(preds in prop::collection::vec(-5.0f64..5.0, 2..8)) {
        let docs: Vec<Document> = (0..preds.len()).map(|i| Document::new(format!("d{i}"), "text")).collect();
        let refs: Vec<&Document> = docs.iter().collect();
        let table: PredictionTable = preds.iter().enumerate().map(|(i, p)| (format!("d{i}"), *p)).collect();
        let ordered = mds_order(&refs, &table, MdsOrdering::Predicted).unwrap();
        let last = table.get(&ordered.last().unwrap().id).unwrap();
        prop_assert!(preds.iter().all(|p| *p >= last));
    }
}

const WORDS: [&str; 14] = [
    "the", "council", "voted", "Maria", "Lopez", "was", "walking", "report", "stopped", "is", "river", "Paris",
    "created", "went",
];

fn document() -> impl Strategy<Value = Document> {
    prop::collection::vec(prop::collection::vec(prop::sample::select(WORDS.to_vec()), 2..9), 1..9).prop_map(|sents| {
        let text = sents
            .iter()
            .map(|s| {
                let mut words: Vec<String> = s.iter().map(|w| w.to_string()).collect();
                words[0] = words[0][..1].to_uppercase() + &words[0][1..];
                words.join(" ") + "."
            })
            .collect::<Vec<_>>()
            .join(" ");
        let reference = sents[0].join(" ");
        Document::new("d", text).with_reference(reference)
    })
}

fn kinds() -> Vec<TransformKind> {
    vec![
        TransformKind::RemoveFirstSentence,
        TransformKind::RemoveSalient { k: 2 },
        TransformKind::DeleteWords { p: 0.3 },
        TransformKind::DeleteSentences { p: 0.3 },
        TransformKind::KeepFirst { n: 3 },
        TransformKind::KeepLast { n: 3 },
        TransformKind::MoveSalientToEnd { k: 2 },
        TransformKind::ShuffleSentences,
        TransformKind::ReplaceNames { mode: NameMode::Bank },
        TransformKind::ReplaceNames {
            mode: NameMode::Placeholder,
        },
        TransformKind::CorruptGrammar,
        TransformKind::AppendContradictions,
    ]
}

fn strip_possessive(t: &str) -> &str {
    t.strip_suffix("'s")
        .or_else(|| t.strip_suffix("\u{2019}s"))
        .unwrap_or(t)
}

fn allowed_vocabulary(doc: &Document) -> HashSet<String> {
    let mut v: HashSet<String> = textseg::tokens(&doc.text).into_iter().collect();
    let lemmas: Vec<String> = v.iter().filter_map(|t| lemma(t)).collect();
    v.extend(lemmas.iter().flat_map(|l| [l.clone(), l.to_lowercase()]));
    v.extend(name_bank().iter().flat_map(|n| textseg::tokens(n)));
    v.extend(
        NEGATION_WORDS
            .iter()
            .flat_map(|w| [w.to_string(), w[..1].to_uppercase() + &w[1..]]),
    );
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn transforms_are_seeded_and_introduce_no_foreign_tokens(doc in document(), seed in any::<u64>()) {
        let vocab = allowed_vocabulary(&doc);
        for kind in kinds() {
            let spec = TransformSpec::new(kind, seed);
            let first = apply_transform(&doc, &spec);
            let second = apply_transform(&doc, &spec);
            prop_assert_eq!(first.as_ref().ok(), second.as_ref().ok());
            let Ok(out) = first else { continue };
            for tok in textseg::tokens(&out.text) {
                let bare = strip_possessive(&tok);
                let placeholder = bare
                    .strip_prefix(PLACEHOLDER_PREFIX)
                    .is_some_and(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_digit()));
                prop_assert!(vocab.contains(bare) || placeholder, "{kind}: `{tok}` in {:?}", out.text);
            }
        }
    }

    #[test]
    fn sentence_transforms_obey_counts(doc in document(), seed in any::<u64>()) {
        let sents = split_sentences(&doc.text);
        let spec = |kind| TransformSpec::new(kind, seed);

        let shuffled = apply_transform(&doc, &spec(TransformKind::ShuffleSentences)).unwrap();
        let mut a = sents.clone();
        let mut b = split_sentences(&shuffled.text);
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);

        let kept = apply_transform(&doc, &spec(TransformKind::KeepFirst { n: 3 })).unwrap();
        prop_assert_eq!(split_sentences(&kept.text), sents[..sents.len().min(3)].to_vec());

        let words = textseg::tokenize(&doc.text).unwrap().word_count();
        let removed = (0.3 * words as f64 + 0.5 + 1e-9).floor() as usize;
        match apply_transform(&doc, &spec(TransformKind::DeleteWords { p: 0.3 })) {
            Ok(out) => prop_assert_eq!(textseg::tokenize(&out.text).unwrap().word_count(), words - removed),
            Err(_) => prop_assert!(removed >= words),
        }
    }
}

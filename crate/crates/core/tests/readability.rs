mod support;

use sumdiff::features::{flesch_kincaid_grade, flesch_reading_ease};
use sumdiff::textseg::{HeuristicTagger, SurfaceStats};

use support::readability_fixtures::FIXTURES;

#[test]
fn fixture_documents() {
    for (text, words, sentences, syllables, ease, grade) in FIXTURES {
        let stats = SurfaceStats::compute("d", text, &HeuristicTagger).unwrap();
        assert_eq!(
            (stats.word_count, stats.sentence_count, stats.syllable_count),
            (words, sentences, syllables),
            "{text}"
        );
        assert!((flesch_reading_ease(&stats).unwrap() - ease).abs() < 1e-9, "{text}");
        assert!((flesch_kincaid_grade(&stats).unwrap() - grade).abs() < 1e-9, "{text}");
    }
}

fn counts(word_count: usize, sentence_count: usize, syllable_count: usize) -> SurfaceStats {
    SurfaceStats {
        word_count,
        sentence_count,
        syllable_count,
        numeral_count: 0,
        unique_entity_count: 0,
    }
}

#[test]
fn formula_examples() {
    let s = counts(10, 1, 13);
    assert!((flesch_reading_ease(&s).unwrap() - 86.705).abs() < 1e-9);
    assert!((flesch_kincaid_grade(&s).unwrap() - 3.65).abs() < 1e-9);
    assert!((flesch_reading_ease(&counts(10, 10, 10)).unwrap() - 121.22).abs() < 1e-9);
    assert!((flesch_kincaid_grade(&counts(100, 5, 150)).unwrap() - 9.91).abs() < 1e-9);
    assert!(flesch_reading_ease(&counts(0, 0, 0)).is_err());
}

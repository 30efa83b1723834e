//! Downstream uses of difficulty scores: hybrid human/model summarization,
//! multi-document input preparation and perturbation probes.

mod hybrid;
mod mds;
mod probe;
mod transform;

pub use hybrid::{
    compare_selectors, hybrid_evaluate, hybrid_run, hybrid_select, selection_size, HybridOutcome, MANUAL_SCORE,
};
pub use mds::{count_mds_tokens, mds_concat_truncate, mds_order, MdsInput, MdsOrdering, DOC_SEPARATOR};
pub use probe::{probe_from_tables, probe_suite, transform_probe, DocScorer, ModelScorer, ProbeDelta, ProbeReport};
pub use transform::{
    apply_transform, apply_transform_with, lemma, name_bank, probe_suite_kinds, NameMode, TransformContext,
    TransformKind, TransformSpec, NEGATION_WORDS, PLACEHOLDER_PREFIX,
};

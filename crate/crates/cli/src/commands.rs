use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sumdiff::corpus::{
    load_corpus, load_predictions, load_scores, metric_doc_average, save_corpus, save_predictions, set_score_average,
    Corpus, Document, PredictionTable, Scale, SystemScoreTable,
};
use sumdiff::experiments::{
    apply_transform_with, compare_selectors, hybrid_run, mds_concat_truncate, mds_order, probe_from_tables,
    probe_suite, probe_suite_kinds, transform_probe, HybridOutcome, MdsOrdering, ModelScorer, ProbeReport,
    TransformContext, TransformKind, TransformSpec,
};
use sumdiff::features::{feature_correlations, Feature, FeatureExtractor, FeatureMatrix, FeatureRecord, FeatureSchema};
use sumdiff::jsonl;
use sumdiff::ranker::{
    aligned_targets, evaluate_predictions, train_pairwise, train_regression, train_validation_split, Model,
    PairwiseConfig,
};
use sumdiff::rouge::{rouge_multi, RougeOptions, RougeVariant};
use sumdiff::stats::{self, BootstrapResult, CorrelationMethod, CorrelationReport, WilcoxonMethod};
use sumdiff::textseg::{self, AnnotatedTagger, EntityTagger, HeuristicTagger};
use sumdiff::Error;

use crate::output::{emit, write_plot, PlotRow, Run};
use crate::*;

/// Attaches the file name to data errors raised while reading it.
fn from_file<T>(path: &Path, r: sumdiff::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| match e {
        e if e.is_io() => Failure::Lib(e),
        e => Failure::InFile(path.to_path_buf(), e),
    })
}

fn corpus(path: &Path) -> Result<Corpus, Failure> {
    from_file(path, load_corpus(path))
}

fn scores(opts: &ScoresOpts) -> Result<SystemScoreTable, Failure> {
    from_file(&opts.scores, load_scores(&opts.scores, opts.scale.map(Into::into)))
}

fn predictions(path: &Path) -> Result<PredictionTable, Failure> {
    from_file(path, load_predictions(path))
}

fn tagger(entities: Option<&PathBuf>) -> Result<Box<dyn EntityTagger>, Failure> {
    Ok(match entities {
        Some(p) => Box::new(from_file(p, AnnotatedTagger::load(p))?),
        None => Box::new(HeuristicTagger),
    })
}

fn extract(corpus: &Corpus, opts: &ExtractOpts) -> Result<Vec<FeatureRecord>, Failure> {
    let tagger = tagger(opts.entities.as_ref())?;
    let extractor = FeatureExtractor::new(tagger.as_ref(), opts.salience.into());
    Ok(extractor.extract_all(corpus)?)
}

fn feature_records(input: &FeatureInput, opts: &ExtractOpts) -> Result<Vec<FeatureRecord>, Failure> {
    match (&input.features, &input.corpus) {
        (Some(f), _) => from_file(f, jsonl::read_records(f)),
        (None, Some(c)) => extract(&corpus(c)?, opts),
        (None, None) => Err(Failure::Usage("either --features or --corpus is required".into())),
    }
}

pub fn features(_: &Run, args: &FeaturesArgs) -> Result<(), Failure> {
    let records = extract(&corpus(&args.corpus)?, &args.extract)?;
    Ok(jsonl::write_records(&args.out, &records)?)
}

#[derive(Serialize)]
struct EvalResult {
    kendall: f64,
    pearson: f64,
    spearman: f64,
    n: usize,
    kendall_variant: &'static str,
}

impl From<CorrelationReport> for EvalResult {
    fn from(r: CorrelationReport) -> Self {
        EvalResult {
            kendall: r.kendall,
            pearson: r.pearson,
            spearman: r.spearman,
            n: r.n,
            kendall_variant: "tau-b",
        }
    }
}

pub fn eval(run: &Run, args: &EvalArgs) -> Result<(), Failure> {
    let pred = predictions(&args.pred)?;
    let gold = scores(&args.scores)?.gold_scores();
    let report = evaluate_predictions(&pred, &gold)?;
    let plot: Vec<PlotRow> = pred
        .iter()
        .filter_map(|(id, p)| gold.get(id).map(|g| PlotRow::new(id, p, g)))
        .collect();
    write_plot(args.plot.as_ref(), &plot)?;
    emit(args.out.as_ref(), &run.report("eval", args, EvalResult::from(report)))
}

pub fn agreement(run: &Run, args: &AgreementArgs) -> Result<(), Failure> {
    let table = scores(&args.scores)?;
    let methods: Vec<CorrelationMethod> = match args.method {
        MethodArg::Kendall => vec![CorrelationMethod::Kendall],
        MethodArg::Pearson => vec![CorrelationMethod::Pearson],
        MethodArg::Spearman => vec![CorrelationMethod::Spearman],
        MethodArg::All => CorrelationMethod::ALL.to_vec(),
    };
    let mut result = serde_json::Map::new();
    for m in methods {
        result.insert(m.to_string(), stats::system_agreement(&table, m)?.into());
    }
    result.insert("systems".into(), table.system_ids().len().into());
    result.insert("documents".into(), table.doc_ids().len().into());
    emit(args.out.as_ref(), &run.report("agreement", args, result))
}

pub fn average(_: &Run, args: &AverageArgs) -> Result<(), Failure> {
    let table = from_file(&args.scores, load_scores(&args.scores, Some(Scale::Unbounded)))?;
    let per_doc = metric_doc_average(table.entries())?;
    let table = match &args.sets {
        Some(path) => set_score_average(&corpus(path)?, &per_doc)?.into_iter().collect(),
        None => per_doc,
    };
    Ok(save_predictions(&args.out, &table)?)
}

fn schema(arg: SchemaArg) -> FeatureSchema {
    match arg {
        SchemaArg::Source => FeatureSchema::source_only(),
        SchemaArg::Full => FeatureSchema::new(Feature::ALL.to_vec()),
    }
}

pub fn analyze(run: &Run, args: &AnalyzeArgs) -> Result<(), Failure> {
    let records: Vec<FeatureRecord> = from_file(&args.features, jsonl::read_records(&args.features))?;
    let gold = scores(&args.scores)?.gold_scores();
    let present: Vec<Feature> = Feature::ALL
        .iter()
        .copied()
        .filter(|f| records.iter().any(|r| f.value(&r.features).is_some()))
        .collect();
    let rows = feature_correlations(&records, &present, &gold)?;
    let plot: Vec<PlotRow> = rows
        .iter()
        .map(|r| {
            PlotRow::new(
                r.feature.name(),
                r.kendall.unwrap_or(f64::NAN),
                r.spearman.unwrap_or(f64::NAN),
            )
        })
        .collect();
    write_plot(args.plot.as_ref(), &plot)?;
    emit(args.out.as_ref(), &run.report("analyze", args, rows))
}

fn subset(m: &FeatureMatrix, idx: &[usize]) -> sumdiff::Result<FeatureMatrix> {
    let mut sorted = idx.to_vec();
    sorted.sort_unstable();
    FeatureMatrix::from_rows(
        m.schema.clone(),
        sorted.iter().map(|&i| m.doc_ids[i].clone()).collect(),
        sorted.iter().map(|&i| m.rows[i].clone()).collect(),
    )
}

#[derive(Serialize)]
struct TrainResult {
    train_documents: usize,
    validation_documents: usize,
    train: Option<EvalResult>,
    validation: Option<EvalResult>,
    model: PathBuf,
}

pub fn train(run: &Run, args: &TrainArgs) -> Result<(), Failure> {
    let records = feature_records(&args.input, &args.extract)?;
    let gold = scores(&args.scores)?.gold_scores();
    let scored: Vec<FeatureRecord> = records.into_iter().filter(|r| gold.get(&r.doc_id).is_some()).collect();
    let matrix = FeatureMatrix::from_records(&scored, schema(args.schema))?;
    let (train_idx, val_idx) = train_validation_split(matrix.len(), args.train_fraction, run.seed)?;
    let train_m = subset(&matrix, &train_idx)?;
    let targets = aligned_targets(&train_m, &gold)?;
    let model = match args.kind {
        ModelKind::Regression => Model::Regression(train_regression(&train_m, &targets, args.ridge)?),
        ModelKind::Pairwise => Model::Pairwise(train_pairwise(
            &train_m,
            &targets,
            PairwiseConfig {
                epochs: args.epochs,
                learning_rate: args.learning_rate,
                seed: run.seed,
            },
        )?),
    };
    model.save(&args.model_out)?;
    let score = |m: &FeatureMatrix| -> Result<Option<EvalResult>, Failure> {
        if m.len() < 3 {
            return Ok(None);
        }
        match evaluate_predictions(&model.predict(m)?, &gold) {
            Ok(r) => Ok(Some(r.into())),
            Err(Error::Degenerate(_)) => Ok(None),
            Err(e) => Err(e.into()),
        }
    };
    let val_m = subset(&matrix, &val_idx)?;
    let result = TrainResult {
        train_documents: train_m.len(),
        validation_documents: val_m.len(),
        train: score(&train_m)?,
        validation: score(&val_m)?,
        model: args.model_out.clone(),
    };
    emit(args.out.as_ref(), &run.report("train", args, result))
}

pub fn predict(_: &Run, args: &PredictArgs) -> Result<(), Failure> {
    let model = from_file(&args.model, Model::load(&args.model))?;
    let records = feature_records(&args.input, &args.extract)?;
    let matrix = FeatureMatrix::from_records(&records, model.schema().clone())?;
    Ok(save_predictions(&args.out, &model.predict(&matrix)?)?)
}

#[derive(Serialize)]
struct HybridArm {
    fraction: f64,
    outcome: HybridOutcome,
    baseline: Option<HybridOutcome>,
    bootstrap: Option<BootstrapResult>,
}

pub fn hybrid(run: &Run, args: &HybridArgs) -> Result<(), Failure> {
    let table = scores(&args.scores)?;
    let pred = predictions(&args.pred)?;
    let baseline = args.baseline.as_deref().map(predictions).transpose()?;
    let mut arms = Vec::new();
    let mut plot = Vec::new();
    for &fraction in &args.fractions {
        let outcome = hybrid_run(&table, &args.system, &pred, fraction)?;
        plot.push(PlotRow::new("pred", fraction, outcome.mean_score_after));
        let (base, boot) = match &baseline {
            Some(b) => {
                let base = hybrid_run(&table, &args.system, b, fraction)?;
                plot.push(PlotRow::new("baseline", fraction, base.mean_score_after));
                let boot = compare_selectors(&table, &args.system, &pred, b, fraction, args.iterations, run.seed)?;
                (Some(base), Some(boot))
            }
            None => (None, None),
        };
        arms.push(HybridArm {
            fraction,
            outcome,
            baseline: base,
            bootstrap: boot,
        });
    }
    write_plot(args.plot.as_ref(), &plot)?;
    emit(args.out.as_ref(), &run.report("hybrid", args, arms))
}

pub fn bootstrap(run: &Run, args: &BootstrapArgs) -> Result<(), Failure> {
    let table = scores(&args.scores)?;
    let a = predictions(&args.a)?;
    let b = predictions(&args.b)?;
    let result = compare_selectors(&table, &args.system, &a, &b, args.fraction, args.iterations, run.seed)?;
    emit(args.out.as_ref(), &run.report("bootstrap", args, result))
}

#[derive(Serialize)]
struct MdsRecord {
    set_id: String,
    ordering: MdsOrdering,
    limit: usize,
    doc_ids: Vec<String>,
    token_count: usize,
    total_tokens: usize,
    text: String,
}

pub fn mds(_: &Run, args: &MdsArgs) -> Result<(), Failure> {
    let corpus = corpus(&args.corpus)?;
    let pred = predictions(&args.pred)?;
    let mut sets = corpus.sets();
    if sets.is_empty() && !corpus.is_empty() {
        sets.insert("all", corpus.iter().collect());
    }
    let mut out = Vec::new();
    for (set_id, docs) in &sets {
        for &ordering in &args.orderings {
            let ordering = match ordering {
                OrderingArg::Original => MdsOrdering::Original,
                OrderingArg::Predicted => MdsOrdering::Predicted,
            };
            let ordered = mds_order(docs, &pred, ordering)?;
            for &limit in &args.limits {
                let input = mds_concat_truncate(&ordered, limit)?;
                out.push(MdsRecord {
                    set_id: set_id.to_string(),
                    ordering,
                    limit,
                    doc_ids: input.doc_ids,
                    token_count: input.token_count,
                    total_tokens: input.total_tokens,
                    text: input.text,
                });
            }
        }
    }
    Ok(jsonl::write_records(&args.out, &out)?)
}

fn parse_kind(s: &str) -> Result<TransformKind, Failure> {
    s.parse().map_err(|e: Error| Failure::Usage(e.to_string()))
}

pub fn transform(run: &Run, args: &TransformArgs) -> Result<(), Failure> {
    let corpus = corpus(&args.corpus)?;
    let spec = TransformSpec::new(parse_kind(&args.spec)?, run.seed);
    let tagger = tagger(args.entities.as_ref())?;
    let ctx = TransformContext {
        tagger: tagger.as_ref(),
        metric: Default::default(),
    };
    let mut out: Vec<Document> = Vec::with_capacity(corpus.len());
    let mut skipped = 0;
    for doc in &corpus {
        match apply_transform_with(doc, &spec, &ctx) {
            Ok(d) => out.push(d),
            Err(Error::InfeasibleTransform { .. }) if args.skip_infeasible => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    if skipped > 0 {
        eprintln!("sumdiff transform: skipped {skipped} document(s) where `{spec}` does not apply");
    }
    Ok(save_corpus(&args.out, &Corpus::from_documents(out)?)?)
}

pub fn probe(run: &Run, args: &ProbeArgs) -> Result<(), Failure> {
    let kinds = if args.specs.is_empty() {
        probe_suite_kinds()
    } else {
        args.specs.iter().map(|s| parse_kind(s)).collect::<Result<_, _>>()?
    };
    let specs: Vec<TransformSpec> = kinds.into_iter().map(|k| TransformSpec::new(k, run.seed)).collect();
    let reports: Vec<ProbeReport> = match (&args.model, &args.before, &args.after) {
        (Some(model_path), _, _) => {
            let corpus_path = args
                .corpus
                .as_ref()
                .ok_or_else(|| Failure::Usage("--model requires --corpus".into()))?;
            let corpus = corpus(corpus_path)?;
            let model = from_file(model_path, Model::load(model_path))?;
            let tagger = tagger(args.extract.entities.as_ref())?;
            let scorer = ModelScorer {
                model: &model,
                extractor: FeatureExtractor::new(tagger.as_ref(), args.extract.salience.into()),
            };
            let ctx = TransformContext {
                tagger: tagger.as_ref(),
                metric: args.extract.salience.into(),
            };
            if specs.len() == 1 {
                vec![transform_probe(&scorer, &corpus, &specs[0], &ctx)?]
            } else {
                probe_suite(&scorer, &corpus, &specs, &ctx)?
            }
        }
        (None, Some(before), Some(after)) => {
            let [spec] = specs[..] else {
                return Err(Failure::Usage("--before/--after take exactly one --spec".into()));
            };
            vec![probe_from_tables(&spec, &predictions(before)?, &predictions(after)?)?]
        }
        _ => {
            return Err(Failure::Usage(
                "give either --model with --corpus, or --before and --after".into(),
            ))
        }
    };
    let plot: Vec<PlotRow> = reports
        .iter()
        .map(|r| PlotRow::new(&r.label, r.mean_before, r.mean_after))
        .collect();
    write_plot(args.plot.as_ref(), &plot)?;
    emit(args.out.as_ref(), &run.report("probe", args, reports))
}

pub fn wilcoxon(run: &Run, args: &WilcoxonArgs) -> Result<(), Failure> {
    let x = predictions(&args.x)?;
    let y = predictions(&args.y)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = x.iter().filter_map(|(id, a)| y.get(id).map(|b| (a, b))).unzip();
    if xs.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 }.into());
    }
    let method = match args.method {
        WilcoxonArg::Auto => WilcoxonMethod::Auto,
        WilcoxonArg::Exact => WilcoxonMethod::Exact,
        WilcoxonArg::Normal => WilcoxonMethod::Normal,
    };
    let result = stats::wilcoxon_signed_rank_with(&xs, &ys, method)?;
    emit(args.out.as_ref(), &run.report("wilcoxon", args, result))
}

#[derive(Deserialize)]
struct Label {
    id: String,
    label: serde_json::Value,
}

#[derive(Serialize)]
struct KappaResult {
    kappa: f64,
    n: usize,
}

pub fn kappa(run: &Run, args: &KappaArgs) -> Result<(), Failure> {
    let a: Vec<Label> = from_file(&args.a, jsonl::read_records(&args.a))?;
    let b: Vec<Label> = from_file(&args.b, jsonl::read_records(&args.b))?;
    let by_id: std::collections::HashMap<&str, String> =
        b.iter().map(|l| (l.id.as_str(), l.label.to_string())).collect();
    let (la, lb): (Vec<String>, Vec<String>) = a
        .iter()
        .filter_map(|l| {
            by_id
                .get(l.id.as_str())
                .map(|other| (l.label.to_string(), other.clone()))
        })
        .unzip();
    if la.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 }.into());
    }
    let result = KappaResult {
        kappa: stats::cohen_kappa(&la, &lb)?,
        n: la.len(),
    };
    emit(args.out.as_ref(), &run.report("kappa", args, result))
}

#[derive(Deserialize)]
struct RougePair {
    id: String,
    candidate: String,
    references: Vec<String>,
}

#[derive(Serialize)]
struct RougeResult {
    n: usize,
    mean_precision: f64,
    mean_recall: f64,
    mean_f1: f64,
}

pub fn rouge(run: &Run, args: &RougeArgs) -> Result<(), Failure> {
    let variant: RougeVariant = args.variant.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    let pairs: Vec<RougePair> = from_file(&args.pairs, jsonl::read_records(&args.pairs))?;
    if pairs.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 }.into());
    }
    let options = RougeOptions { stem: args.stem };
    let mut per_item = PredictionTable::new();
    let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
    for pair in &pairs {
        let refs: Vec<Vec<String>> = pair.references.iter().map(|s| textseg::tokens(s)).collect();
        let s = rouge_multi(&textseg::tokens(&pair.candidate), &refs, variant, options)?;
        per_item.insert(pair.id.clone(), s.f1)?;
        p += s.precision;
        r += s.recall;
        f += s.f1;
    }
    if let Some(path) = &args.scores_out {
        save_predictions(path, &per_item)?;
    }
    let n = pairs.len() as f64;
    let result = RougeResult {
        n: pairs.len(),
        mean_precision: p / n,
        mean_recall: r / n,
        mean_f1: f / n,
    };
    emit(args.out.as_ref(), &run.report("rouge", args, result))
}

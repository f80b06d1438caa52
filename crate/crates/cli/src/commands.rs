//! Subcommand implementations. Inputs are read fully, parsed by content
//! sniffing, and every report embeds its run manifest; files are written via
//! a temp-and-rename so output appears atomically.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::Serialize;

use corefeval::anaphoricity::{
    confusion_by_width_corpus, confusion_index_corpus, confusion_index_shared_text_corpus,
};
use corefeval::jsonl::{self, parse_auto, parse_predictions, serialize_predictions};
use corefeval::metrics::{self, ClusterStatsTally, MetricOptions, MetricTally};
use corefeval::model::{
    AnnotatedDocument, Clustering, Corpus, Document, GoldAnnotation, PredictionSet, Span,
};
use corefeval::oracle::{
    self, budget_matched_precision, count_operations, oracle_linker, oracle_linker_pruned,
    perfect_both, perfect_precision, perfect_recall, OracleOps,
};
use corefeval::report::{
    confusion_csv, error_report_tsv, metric_report_tsv, subtype_tsv, sweep_tsv,
    ClusterStatsJson, ConfusionReportJson, ErrorReportJson, HeuristicStatsJson, MetricReportJson,
    OracleOpsJson, ScoreDiagnosticsJson, SweepRowJson,
};
use corefeval::sim::{
    self, generate_synthetic, pair_score, sweep as run_sweep, LinkerWeights, PipelineConfig,
    SweepGrid, SynthesisConfig,
};
use corefeval::taxonomy::{self, ConflationSubkind, SUBKIND_ORDER};

use crate::manifest::{wrap, RunManifest};
use crate::{CmdResult, Failure, GoldArg, OracleMode, PipelineArgs};

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::InputOutput(format!("{}: {e}", path.display())))
}

fn write_atomic(dir: &Path, name: &str, content: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!("{name}.tmp"));
    fs::write(&tmp, content)?;
    fs::rename(&tmp, &target)?;
    Ok(())
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::InputOutput(e.to_string()))?;
    text.push('\n');
    write_atomic(dir, name, &text)
}

fn load_corpus(path: &Path, manifest: &mut RunManifest) -> Result<Corpus, Failure> {
    let text = read_text(path)?;
    manifest.input(path, &text);
    let parsed = parse_auto(&text)?;
    for w in &parsed.warnings {
        eprintln!("warning: {} (line {}): {}", w.doc_id, w.line, w.msg);
    }
    Ok(parsed.corpus)
}

/// Predictions from either format; column text yields clusterings only.
fn load_predictions(
    path: &Path,
    manifest: &mut RunManifest,
) -> Result<Vec<(Document, PredictionSet)>, Failure> {
    let text = read_text(path)?;
    manifest.input(path, &text);
    if jsonl::looks_like_conll(&text) {
        let parsed = corefeval::conll::parse_conll(&text)?;
        Ok(parsed
            .corpus
            .docs
            .into_iter()
            .map(|ad| {
                let pred = PredictionSet {
                    doc_id: ad.doc.doc_id().to_string(),
                    candidates: None,
                    decisions: None,
                    clustering: Some(ad.gold.anaphoric().clone()),
                };
                (ad.doc, pred)
            })
            .collect())
    } else {
        let preds = parse_predictions(&text)?;
        for (_, pred) in &preds {
            pred.validate()?;
        }
        Ok(preds)
    }
}

/// Pair gold documents with predictions by doc id; both sides must match.
fn align<'a>(
    corpus: &'a Corpus,
    preds: &'a [(Document, PredictionSet)],
) -> Result<Vec<(&'a AnnotatedDocument, &'a PredictionSet)>, Failure> {
    let mut by_id: BTreeMap<&str, &PredictionSet> = BTreeMap::new();
    for (doc, pred) in preds {
        if by_id.insert(doc.doc_id(), pred).is_some() {
            return Err(Failure::Validation(format!(
                "duplicate prediction for document {}",
                doc.doc_id()
            )));
        }
    }
    let mut out = Vec::with_capacity(corpus.len());
    for ad in &corpus.docs {
        let Some(pred) = by_id.remove(ad.doc.doc_id()) else {
            return Err(Failure::Validation(format!(
                "no prediction for document {}",
                ad.doc.doc_id()
            )));
        };
        out.push((ad, pred));
    }
    if let Some((id, _)) = by_id.into_iter().next() {
        return Err(Failure::Validation(format!(
            "prediction for unknown document {id}"
        )));
    }
    Ok(out)
}

/// Anaphoric clusters plus singletons as size-1 clusters.
fn full_clustering(gold: &GoldAnnotation) -> Clustering {
    let mut clusters: Vec<Vec<Span>> = gold.anaphoric().clusters().to_vec();
    clusters.extend(gold.singletons().into_iter().map(|s| vec![s]));
    Clustering::new(clusters).expect("gold layers are disjoint")
}

fn response_of(pred: &PredictionSet) -> Result<&Clustering, Failure> {
    pred.clustering.as_ref().ok_or_else(|| {
        Failure::Validation(format!("prediction {} carries no clustering", pred.doc_id))
    })
}

fn candidates_of(pred: &PredictionSet) -> Result<&oracle::ScoredCandidateSet, Failure> {
    pred.candidates.as_ref().ok_or_else(|| {
        Failure::Validation(format!(
            "prediction {} carries no candidate spans",
            pred.doc_id
        ))
    })
}

pub fn score(
    gold: &Path,
    pred: &Path,
    keep_singletons: bool,
    tsv: bool,
    out: &Path,
) -> CmdResult {
    let mut manifest = RunManifest::new("score");
    manifest.flag("keep_singletons", keep_singletons);
    let corpus = load_corpus(gold, &mut manifest)?;
    let preds = load_predictions(pred, &mut manifest)?;
    let aligned = align(&corpus, &preds)?;

    let opts = MetricOptions { keep_singletons };
    let mut tally = MetricTally::zero();
    for (ad, pred) in &aligned {
        tally.merge(&metrics::accumulate(
            &full_clustering(&ad.gold),
            response_of(pred)?,
            opts,
        ));
    }
    let report = tally.report();
    write_json(out, "score_report.json", &wrap(manifest, MetricReportJson::from(&report)))?;
    if tsv {
        write_atomic(out, "score_report.tsv", &metric_report_tsv(&report))?;
    }
    println!("avg_f1\t{:.4}", report.avg_f1);
    Ok(())
}

#[derive(Serialize)]
struct DocOps {
    doc_id: String,
    additions: usize,
    removals: usize,
}

#[derive(Serialize)]
struct OracleReportJson {
    mode: &'static str,
    gold: &'static str,
    totals: OracleOpsJson,
    per_doc: Vec<DocOps>,
}

pub fn oracle(
    corpus_path: &Path,
    pred: &Path,
    mode: OracleMode,
    gold_arg: GoldArg,
    k: usize,
    out: &Path,
) -> CmdResult {
    let mut manifest = RunManifest::new("oracle");
    manifest.flag("mode", mode.name());
    manifest.flag("gold", gold_arg.name());
    manifest.flag("k", k);
    let corpus = load_corpus(corpus_path, &mut manifest)?;
    let preds = load_predictions(pred, &mut manifest)?;
    let aligned = align(&corpus, &preds)?;

    let mut emitted: Vec<(Document, PredictionSet)> = Vec::with_capacity(aligned.len());
    let mut per_doc = Vec::with_capacity(aligned.len());
    let mut totals = OracleOps::default();
    for (ad, pred) in &aligned {
        let cands = candidates_of(pred)?;
        let target = ad.gold.target(gold_arg.mode());
        let ops = count_operations(cands, &target);
        totals.merge(&ops);
        per_doc.push(DocOps {
            doc_id: ad.doc.doc_id().to_string(),
            additions: ops.additions,
            removals: ops.removals,
        });

        let (candidates, clustering) = match mode {
            OracleMode::PerfectP => (perfect_precision(cands, &target), None),
            OracleMode::PerfectR => (perfect_recall(cands, &target), None),
            OracleMode::PerfectPr => (perfect_both(cands, &target), None),
            OracleMode::BudgetP => (budget_matched_precision(cands, &target), None),
            OracleMode::OracleLinker => (
                cands.clone(),
                Some(oracle_linker(cands, ad.gold.anaphoric())),
            ),
            OracleMode::OracleLinkerPruned => {
                let order = cands.spans_textual();
                let weights = LinkerWeights::default();
                let mut coarse: BTreeMap<(Span, Span), f64> = BTreeMap::new();
                for (i, span) in order.iter().enumerate() {
                    for ant in order.iter().take(i) {
                        coarse.insert((*span, *ant), pair_score(&ad.doc, span, ant, &weights));
                    }
                }
                (
                    cands.clone(),
                    Some(oracle_linker_pruned(cands, ad.gold.anaphoric(), &coarse, k)),
                )
            }
        };
        emitted.push((
            ad.doc.clone(),
            PredictionSet {
                doc_id: ad.doc.doc_id().to_string(),
                candidates: Some(candidates),
                decisions: None,
                clustering: Some(clustering.unwrap_or_else(Clustering::empty)),
            },
        ));
    }

    write_atomic(out, "oracle_predictions.jsonl", &serialize_predictions(&emitted)?)?;
    let report = OracleReportJson {
        mode: mode.name(),
        gold: gold_arg.name(),
        totals: OracleOpsJson::from(&totals),
        per_doc,
    };
    write_json(out, "oracle_ops.json", &wrap(manifest, report))?;
    println!(
        "{}\tadditions {}\tremovals {}",
        mode.name(),
        totals.additions,
        totals.removals
    );
    Ok(())
}

#[derive(Serialize)]
struct ErrorsReportJson {
    #[serde(flatten)]
    errors: ErrorReportJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    conflation_subtypes: Option<BTreeMap<&'static str, usize>>,
}

fn subtype_names(counts: &BTreeMap<ConflationSubkind, usize>) -> BTreeMap<&'static str, usize> {
    SUBKIND_ORDER
        .iter()
        .map(|k| (k.name(), counts.get(k).copied().unwrap_or(0)))
        .collect()
}

pub fn errors(gold: &Path, pred: &Path, subtype: bool, tsv: bool, out: &Path) -> CmdResult {
    let mut manifest = RunManifest::new("errors");
    manifest.flag("subtype", subtype);
    let corpus = load_corpus(gold, &mut manifest)?;
    let preds = load_predictions(pred, &mut manifest)?;
    let aligned = align(&corpus, &preds)?;

    let items: Vec<(Clustering, GoldAnnotation, Document)> = aligned
        .iter()
        .map(|(ad, pred)| {
            Ok((
                response_of(pred)?.clone(),
                ad.gold.clone(),
                ad.doc.clone(),
            ))
        })
        .collect::<Result<_, Failure>>()?;
    let report = taxonomy::delta_f1_report_corpus(&items);

    let subtypes = if subtype {
        let mut counts: BTreeMap<ConflationSubkind, usize> = BTreeMap::new();
        for (system, gold, doc) in &items {
            for (kind, n) in taxonomy::subtype_report(system, gold, doc) {
                *counts.entry(kind).or_insert(0) += n;
            }
        }
        Some(counts)
    } else {
        None
    };

    if tsv {
        write_atomic(out, "error_report.tsv", &error_report_tsv(&report))?;
        if let Some(counts) = &subtypes {
            write_atomic(out, "subtype_report.tsv", &subtype_tsv(counts))?;
        }
    }
    let body = ErrorsReportJson {
        errors: ErrorReportJson::from(&report),
        conflation_subtypes: subtypes.as_ref().map(subtype_names),
    };
    write_json(out, "error_report.json", &wrap(manifest, body))?;
    println!(
        "baseline_f1\t{:.4}\tspan_fixed_f1\t{:.4}",
        report.baseline_f1, report.span_fixed_f1
    );
    Ok(())
}

fn accepted_spans(pred: &PredictionSet) -> BTreeSet<Span> {
    match &pred.candidates {
        Some(c) => c.spans(),
        None => pred
            .clustering
            .as_ref()
            .map(|c| c.span_set())
            .unwrap_or_default(),
    }
}

pub fn confusion(
    gold: &Path,
    accepted: &Path,
    by_width: Option<usize>,
    shared_text: bool,
    out: &Path,
) -> CmdResult {
    if by_width.is_some() && shared_text {
        return Err(Failure::Validation(
            "--by-width and --shared-text cannot be combined".to_string(),
        ));
    }
    let mut manifest = RunManifest::new("confusion");
    if let Some(w) = by_width {
        manifest.flag("by_width", w);
    }
    manifest.flag("shared_text", shared_text);
    let corpus = load_corpus(gold, &mut manifest)?;
    let preds = load_predictions(accepted, &mut manifest)?;
    let aligned = align(&corpus, &preds)?;

    let report = if shared_text {
        let items: Vec<(BTreeSet<Span>, GoldAnnotation, Document)> = aligned
            .iter()
            .map(|(ad, pred)| (accepted_spans(pred), ad.gold.clone(), ad.doc.clone()))
            .collect();
        confusion_index_shared_text_corpus(&items)?
    } else {
        let items: Vec<(BTreeSet<Span>, GoldAnnotation)> = aligned
            .iter()
            .map(|(ad, pred)| (accepted_spans(pred), ad.gold.clone()))
            .collect();
        match by_width {
            Some(w) => confusion_by_width_corpus(&items, w)?,
            None => confusion_index_corpus(&items)?,
        }
    };

    if report.bins.is_some() {
        write_atomic(out, "confusion_curve.csv", &confusion_csv(&report))?;
    }
    let body = ConfusionReportJson::from(&report);
    write_json(out, "confusion_report.json", &wrap(manifest, body))?;
    match report.confusion_index() {
        Some(ix) => println!("confusion_index\t{ix:.4}"),
        None => println!("confusion_index\tundefined (no singletons)"),
    }
    Ok(())
}

pub fn mentions_heuristic(corpus_path: &Path, stats: bool, out: &Path) -> CmdResult {
    let mut manifest = RunManifest::new("mentions-heuristic");
    manifest.flag("stats", stats);
    let corpus = load_corpus(corpus_path, &mut manifest)?;

    let mut mention_docs = Vec::with_capacity(corpus.len());
    for ad in &corpus.docs {
        let mentions = corefeval::heuristics::heuristic_all_mentions(&ad.doc, &ad.gold)?;
        let gold = GoldAnnotation::new(Clustering::empty(), mentions)
            .expect("span set forms a valid singleton annotation");
        mention_docs.push(AnnotatedDocument {
            doc: ad.doc.clone(),
            gold,
        });
    }
    write_atomic(
        out,
        "mentions.jsonl",
        &jsonl::serialize_jsonl(&Corpus::new(mention_docs))?,
    )?;

    if stats {
        let items: Vec<(Document, GoldAnnotation)> = corpus
            .docs
            .iter()
            .map(|ad| (ad.doc.clone(), ad.gold.clone()))
            .collect();
        let stats = corefeval::heuristics::heuristic_stats_corpus(&items)?;
        write_json(out, "heuristic_stats.json", &wrap(manifest, HeuristicStatsJson::from(&stats)))?;
        match (stats.premerge_recall(), stats.anaphoric_share()) {
            (Some(r), Some(s)) => {
                println!("premerge_recall\t{:.4}", r);
                println!("anaphoric_share\t{:.4}", s);
            }
            _ => println!("premerge set or gold anaphoric set empty"),
        }
    }
    Ok(())
}

pub fn simulate(
    seed: u64,
    docs: usize,
    tokens: (usize, usize),
    singleton_rate: f64,
    pronoun_rate: f64,
    pipeline: &PipelineArgs,
    out: &Path,
) -> CmdResult {
    if tokens.0 > tokens.1 {
        return Err(Failure::Validation(
            "--min-tokens exceeds --max-tokens".to_string(),
        ));
    }
    let mut manifest = RunManifest::new("simulate");
    manifest.seed = Some(seed);
    manifest.flag("docs", docs);
    manifest.flag("min_tokens", tokens.0);
    manifest.flag("max_tokens", tokens.1);
    manifest.flag("singleton_rate", singleton_rate);
    manifest.flag("pronoun_rate", pronoun_rate);
    let config = pipeline.config();
    config.validate()?;
    manifest.flag("l", config.l);
    manifest.flag("lambda", config.lambda);
    manifest.flag("k", config.k);
    manifest.flag("dummy_threshold", config.dummy_threshold);

    let synth = SynthesisConfig {
        seed,
        documents: docs,
        tokens_per_doc: tokens,
        singleton_rate,
        pronoun_rate,
        ..Default::default()
    };
    let corpus = generate_synthetic(&synth)?;
    write_atomic(out, "corpus.jsonl", &jsonl::serialize_jsonl(&corpus)?)?;

    let docs_only: Vec<Document> = corpus.docs.iter().map(|ad| ad.doc.clone()).collect();
    let preds = sim::run_pipeline_corpus(&docs_only, &config)?;
    let items: Vec<(Document, PredictionSet)> =
        docs_only.into_iter().zip(preds).collect();
    write_atomic(out, "predictions.jsonl", &serialize_predictions(&items)?)?;
    write_json(out, "manifest.json", &manifest)?;
    println!("simulated {} documents into {}", corpus.len(), out.display());
    Ok(())
}

pub fn sweep(
    corpus_path: &Path,
    l: &[usize],
    lambda: &[f64],
    k: &[usize],
    out: &Path,
) -> CmdResult {
    let mut manifest = RunManifest::new("sweep");
    let join = |xs: &[f64]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    manifest.flag("l", l.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
    manifest.flag("lambda", join(lambda));
    manifest.flag("k", k.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
    let corpus = load_corpus(corpus_path, &mut manifest)?;

    let base = PipelineConfig::default();
    let grid = SweepGrid {
        l: l.to_vec(),
        lambda: lambda.to_vec(),
        k: k.to_vec(),
    };
    let rows = run_sweep(&corpus, &base, &grid)?;
    write_atomic(out, "sweep.tsv", &sweep_tsv(&rows))?;
    let body: Vec<SweepRowJson> = rows.iter().map(SweepRowJson::from).collect();
    write_json(out, "sweep.json", &wrap(manifest, body))?;
    println!("{} grid points written to {}", rows.len(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct CombinedReportJson {
    metrics: MetricReportJson,
    system_cluster_stats: ClusterStatsJson,
    gold_cluster_stats: ClusterStatsJson,
    errors: ErrorReportJson,
    conflation_subtypes: BTreeMap<&'static str, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    link_diagnostics: Option<ScoreDiagnosticsJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    confusion: Option<ConfusionReportJson>,
}

pub fn report(gold: &Path, pred: &Path, tsv: bool, out: &Path) -> CmdResult {
    let mut manifest = RunManifest::new("report");
    let corpus = load_corpus(gold, &mut manifest)?;
    let preds = load_predictions(pred, &mut manifest)?;
    let aligned = align(&corpus, &preds)?;

    let opts = MetricOptions::default();
    let mut tally = MetricTally::zero();
    let mut system_stats = ClusterStatsTally::default();
    let mut gold_stats = ClusterStatsTally::default();
    let mut pair_scores: BTreeMap<(Span, Span), f64> = BTreeMap::new();
    let mut correct_pairs: BTreeSet<(Span, Span)> = BTreeSet::new();
    let mut any_decisions = false;
    for (ad, pred) in &aligned {
        let response = response_of(pred)?;
        tally.merge(&metrics::accumulate(&full_clustering(&ad.gold), response, opts));
        system_stats.merge(&ClusterStatsTally::count(response));
        gold_stats.merge(&ClusterStatsTally::count(ad.gold.anaphoric()));
        if let Some(decisions) = &pred.decisions {
            any_decisions = true;
            let gold_index = ad.gold.anaphoric().span_index();
            for d in decisions {
                if let Some(ant) = d.antecedent {
                    pair_scores.insert((d.span, ant), d.score);
                    let same_cluster = matches!(
                        (gold_index.get(&d.span), gold_index.get(&ant)),
                        (Some(a), Some(b)) if a == b
                    );
                    if same_cluster {
                        correct_pairs.insert((d.span, ant));
                    }
                }
            }
        }
    }
    let metrics_report = tally.report();

    let items: Vec<(Clustering, GoldAnnotation, Document)> = aligned
        .iter()
        .map(|(ad, pred)| {
            Ok((
                response_of(pred)?.clone(),
                ad.gold.clone(),
                ad.doc.clone(),
            ))
        })
        .collect::<Result<_, Failure>>()?;
    let error_report = taxonomy::delta_f1_report_corpus(&items);
    let mut subtype_counts: BTreeMap<ConflationSubkind, usize> = BTreeMap::new();
    for (system, gold, doc) in &items {
        for (kind, n) in taxonomy::subtype_report(system, gold, doc) {
            *subtype_counts.entry(kind).or_insert(0) += n;
        }
    }

    let diagnostics = any_decisions
        .then(|| metrics::score_diagnostics(&pair_scores, &correct_pairs));

    // confusion is only measurable when the gold annotation has singletons
    let has_singletons = corpus.docs.iter().any(|ad| !ad.gold.singletons().is_empty());
    let confusion = if has_singletons {
        let items: Vec<(BTreeSet<Span>, GoldAnnotation)> = aligned
            .iter()
            .map(|(ad, pred)| (accepted_spans(pred), ad.gold.clone()))
            .collect();
        confusion_index_corpus(&items).ok()
    } else {
        None
    };

    if tsv {
        write_atomic(out, "score_report.tsv", &metric_report_tsv(&metrics_report))?;
        write_atomic(out, "error_report.tsv", &error_report_tsv(&error_report))?;
        write_atomic(out, "subtype_report.tsv", &subtype_tsv(&subtype_counts))?;
    }
    let body = CombinedReportJson {
        metrics: MetricReportJson::from(&metrics_report),
        system_cluster_stats: ClusterStatsJson::from(&system_stats.stats()),
        gold_cluster_stats: ClusterStatsJson::from(&gold_stats.stats()),
        errors: ErrorReportJson::from(&error_report),
        conflation_subtypes: subtype_names(&subtype_counts),
        link_diagnostics: diagnostics.as_ref().map(ScoreDiagnosticsJson::from),
        confusion: confusion.as_ref().map(ConfusionReportJson::from),
    };
    write_json(out, "report.json", &wrap(manifest, body))?;
    println!("avg_f1\t{:.4}", metrics_report.avg_f1);
    Ok(())
}

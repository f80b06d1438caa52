//! Parallel vs. sequential corpus operations. The `*/parallel` benches go
//! through the corpus-level APIs, which fan out per document when the
//! `parallel` feature (default) is on; the `*/sequential` benches fold the
//! same per-document primitives in a plain loop. Build with
//! `--no-default-features` to measure the sequential fallback under the
//! corpus APIs as well.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use corefeval::metrics::{self, MetricOptions, MetricTally};
use corefeval::model::{Clustering, Corpus, Document, GoldAnnotation};
use corefeval::sim::{
    generate_synthetic, run_pipeline, run_pipeline_corpus, run_pipeline_corpus_seq,
    PipelineConfig, SynthesisConfig,
};
use corefeval::taxonomy;

fn bench_corpus() -> Corpus {
    generate_synthetic(&SynthesisConfig {
        seed: 31,
        documents: 80,
        tokens_per_doc: (120, 220),
        entities_per_doc: (3, 7),
        ..Default::default()
    })
    .unwrap()
}

fn scored_pairs(corpus: &Corpus, config: &PipelineConfig) -> Vec<(Clustering, Clustering)> {
    corpus
        .docs
        .iter()
        .map(|ad| {
            let pred = run_pipeline(&ad.doc, config).unwrap();
            (ad.gold.anaphoric().clone(), pred.clustering.unwrap())
        })
        .collect()
}

fn bench_scoring(c: &mut Criterion) {
    let corpus = bench_corpus();
    let pairs = scored_pairs(&corpus, &PipelineConfig::default());
    let opts = MetricOptions::default();

    let mut group = c.benchmark_group("score_corpus");
    group.sample_size(20);
    group.bench_with_input(BenchmarkId::new("parallel", pairs.len()), &pairs, |b, pairs| {
        b.iter(|| black_box(metrics::evaluate_corpus(pairs, opts)));
    });
    group.bench_with_input(
        BenchmarkId::new("sequential", pairs.len()),
        &pairs,
        |b, pairs| {
            b.iter(|| {
                let mut tally = MetricTally::zero();
                for (key, resp) in pairs {
                    tally.merge(&metrics::accumulate(key, resp, opts));
                }
                black_box(tally.report())
            });
        },
    );
    group.finish();
}

fn bench_pipeline(c: &mut Criterion) {
    let corpus = bench_corpus();
    let docs: Vec<Document> = corpus.docs.iter().map(|ad| ad.doc.clone()).collect();
    let config = PipelineConfig::default();

    let mut group = c.benchmark_group("toy_pipeline");
    group.sample_size(20);
    group.bench_with_input(BenchmarkId::new("parallel", docs.len()), &docs, |b, docs| {
        b.iter(|| black_box(run_pipeline_corpus(docs, &config).unwrap()));
    });
    group.bench_with_input(BenchmarkId::new("sequential", docs.len()), &docs, |b, docs| {
        b.iter(|| black_box(run_pipeline_corpus_seq(docs, &config).unwrap()));
    });
    group.finish();
}

fn bench_taxonomy(c: &mut Criterion) {
    let corpus = bench_corpus();
    let config = PipelineConfig::default();
    let items: Vec<(Clustering, GoldAnnotation, Document)> = corpus
        .docs
        .iter()
        .map(|ad| {
            let pred = run_pipeline(&ad.doc, &config).unwrap();
            (pred.clustering.unwrap(), ad.gold.clone(), ad.doc.clone())
        })
        .collect();

    let mut group = c.benchmark_group("error_taxonomy");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("parallel", items.len()), &items, |b, items| {
        b.iter(|| black_box(taxonomy::delta_f1_report_corpus(items)));
    });
    // per-document reports folded in a loop; the corpus variant merges the
    // same tallies into one report instead
    group.bench_with_input(
        BenchmarkId::new("sequential", items.len()),
        &items,
        |b, items| {
            b.iter(|| {
                let mut last = None;
                for (system, gold, doc) in items {
                    last = Some(taxonomy::delta_f1_report(system, gold, doc));
                }
                black_box(last)
            });
        },
    );
    group.finish();
}

criterion_group!(benches, bench_scoring, bench_pipeline, bench_taxonomy);
criterion_main!(benches);

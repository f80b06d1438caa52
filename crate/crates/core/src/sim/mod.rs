//! Deterministic two-stage toy pipeline and synthetic-corpus generator.
//!
//! The detector scores every within-sentence span up to width `L` with a
//! fixed interpretable rule and keeps the floor(lambda * T) best; the linker
//! picks the best of the `K` nearest preceding candidates, linking when the
//! pair score clears the dummy threshold. Nothing is learned; the point is
//! producing structured, imperfect predictions that exercise the analysis
//! machinery at desk scale.

mod detect;
mod link;
mod synth;
mod sweep;

pub use detect::{enumerate_spans, prune_topk, toy_detect, DetectorWeights};
pub use link::{pair_score, toy_link, toy_link_decisions, LinkerWeights};
pub use synth::{generate_synthetic, SynthesisConfig};
pub use sweep::{sweep, SweepGrid, SweepRow};

use crate::error::{CorefError, Result};
use crate::exec;
use crate::model::{AntecedentDecision, Clustering, Document, PredictionSet};
use crate::oracle::ScoredCandidateSet;

/// Pipeline hyperparameters: max span width, candidates kept per word,
/// antecedents considered per candidate, and the dummy threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub l: usize,
    pub lambda: f64,
    pub k: usize,
    pub dummy_threshold: f64,
    pub detector: DetectorWeights,
    pub linker: LinkerWeights,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            l: 30,
            lambda: 0.4,
            k: 50,
            dummy_threshold: 0.5,
            detector: DetectorWeights::default(),
            linker: LinkerWeights::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l < 1 {
            return Err(CorefError::invalid("L must be at least 1"));
        }
        if self.lambda.is_nan() || self.lambda <= 0.0 {
            return Err(CorefError::invalid("lambda must be positive"));
        }
        Ok(())
    }

    /// Candidate budget for a document of `t` tokens.
    pub fn budget(&self, t: usize) -> usize {
        (self.lambda * t as f64).floor() as usize
    }
}

/// Detect, prune, and link one document.
pub fn run_pipeline(doc: &Document, config: &PipelineConfig) -> Result<PredictionSet> {
    config.validate()?;
    let scored = toy_detect(doc, config.l, &config.detector);
    let cands = prune_topk(&scored, config.lambda, doc.token_count());
    let (decisions, clustering) =
        toy_link_decisions(&cands, doc, config.k, config.dummy_threshold, &config.linker);
    Ok(PredictionSet {
        doc_id: doc.doc_id().to_string(),
        candidates: Some(cands),
        decisions: Some(decisions),
        clustering: Some(clustering),
    })
}

/// Run the pipeline over a corpus, parallel per document.
pub fn run_pipeline_corpus(docs: &[Document], config: &PipelineConfig) -> Result<Vec<PredictionSet>> {
    config.validate()?;
    exec::map_docs(docs, |doc| run_pipeline(doc, config)).into_iter().collect()
}

/// Sequential reference run over a corpus; same output as
/// [`run_pipeline_corpus`], used for comparison benchmarks.
pub fn run_pipeline_corpus_seq(
    docs: &[Document],
    config: &PipelineConfig,
) -> Result<Vec<PredictionSet>> {
    config.validate()?;
    docs.iter().map(|doc| run_pipeline(doc, config)).collect()
}

/// Convenience for tests and the CLI: candidates and final clustering only.
pub fn detect_and_link(
    doc: &Document,
    config: &PipelineConfig,
) -> Result<(ScoredCandidateSet, Vec<AntecedentDecision>, Clustering)> {
    let pred = run_pipeline(doc, config)?;
    Ok((
        pred.candidates.unwrap(),
        pred.decisions.unwrap(),
        pred.clustering.unwrap(),
    ))
}

//! Coreference evaluation toolkit.
//!
//! The crate is organized around a shared document/clustering data model
//! ([`model`]) with two interchange formats ([`conll`] column text and
//! line-delimited JSON in [`jsonl`]), the standard coreference metric suite
//! ([`metrics`]), gold-informed candidate and linker transforms ([`oracle`]),
//! a clustering error taxonomy with per-type score deltas ([`taxonomy`]),
//! anaphoricity diagnostics ([`anaphoricity`]), a syntax-based mention
//! generator ([`heuristics`]), and a deterministic two-stage toy pipeline
//! plus synthetic-corpus generator ([`sim`]).
//!
//! Corpus-level operations run data-parallel per document when the
//! `parallel` feature (default) is enabled; disabling it yields a fully
//! sequential build with identical results.

pub mod anaphoricity;
mod assignment;
pub mod conll;
pub mod error;
mod exec;
pub mod heuristics;
pub mod jsonl;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod report;
pub mod sim;
pub mod taxonomy;
mod union_find;

pub use error::{CorefError, Result};
pub use model::{
    AnnotatedDocument, Clustering, Corpus, Document, GoldAnnotation, GoldMode, ParseSpan, Span,
};

/// Cap the data-parallel worker count (no-op in sequential builds). Call
/// before the first corpus-level operation.
#[cfg(feature = "parallel")]
pub fn configure_thread_pool(threads: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CorefError::invalid(format!("thread pool: {e}")))
}

#[cfg(not(feature = "parallel"))]
pub fn configure_thread_pool(_threads: usize) -> Result<()> {
    Ok(())
}

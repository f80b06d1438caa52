//! Confusion index: singleton recall divided by anaphoric mention recall.
//!
//! A detector that accepts spans blindly with respect to anaphoricity scores
//! 1; one that accepts only anaphoric mentions scores 0. Variants restrict
//! the measurement to surface strings that occur both as a singleton and as
//! an anaphoric mention within one document, or bin spans by width.

use std::collections::BTreeSet;

use crate::error::{CorefError, Result};
use crate::exec;
use crate::metrics::Prf;
use crate::model::{Document, GoldAnnotation, Span};

/// Acceptance counts over the two gold span classes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub singleton_accepted: usize,
    pub singleton_total: usize,
    pub anaphoric_accepted: usize,
    pub anaphoric_total: usize,
}

impl ConfusionCounts {
    pub fn count(accepted: &BTreeSet<Span>, singletons: &BTreeSet<Span>, anaphoric: &BTreeSet<Span>) -> Self {
        ConfusionCounts {
            singleton_accepted: singletons.intersection(accepted).count(),
            singleton_total: singletons.len(),
            anaphoric_accepted: anaphoric.intersection(accepted).count(),
            anaphoric_total: anaphoric.len(),
        }
    }

    pub fn merge(&mut self, other: &ConfusionCounts) {
        self.singleton_accepted += other.singleton_accepted;
        self.singleton_total += other.singleton_total;
        self.anaphoric_accepted += other.anaphoric_accepted;
        self.anaphoric_total += other.anaphoric_total;
    }

    pub fn singleton_recall(&self) -> Option<f64> {
        (self.singleton_total > 0)
            .then(|| self.singleton_accepted as f64 / self.singleton_total as f64)
    }

    pub fn anaphoric_recall(&self) -> Option<f64> {
        (self.anaphoric_total > 0)
            .then(|| self.anaphoric_accepted as f64 / self.anaphoric_total as f64)
    }

    /// `singleton_recall / anaphoric_recall`; `None` when there are no
    /// singletons to measure.
    pub fn index(&self) -> Option<f64> {
        match (self.singleton_recall(), self.anaphoric_recall()) {
            (Some(s), Some(a)) if a > 0.0 => Some(s / a),
            _ => None,
        }
    }
}

/// Confusion index report, with optional per-width bins.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionReport {
    pub overall: ConfusionCounts,
    /// `(width, counts)` pairs, 1..=max_width, wider spans in the last bin.
    pub bins: Option<Vec<(usize, ConfusionCounts)>>,
}

impl ConfusionReport {
    pub fn singleton_recall(&self) -> Option<f64> {
        self.overall.singleton_recall()
    }

    pub fn anaphoric_recall(&self) -> Option<f64> {
        self.overall.anaphoric_recall()
    }

    pub fn confusion_index(&self) -> Option<f64> {
        self.overall.index()
    }
}

fn finalize(overall: ConfusionCounts, bins: Option<Vec<(usize, ConfusionCounts)>>) -> Result<ConfusionReport> {
    if overall.anaphoric_total == 0 {
        return Err(CorefError::invalid(
            "confusion index undefined: no anaphoric mentions in gold",
        ));
    }
    if overall.anaphoric_accepted == 0 {
        return Err(CorefError::invalid(
            "confusion index undefined: anaphoric recall is zero",
        ));
    }
    Ok(ConfusionReport { overall, bins })
}

/// Confusion index of an acceptor over one document's gold annotation.
pub fn confusion_index(accepted: &BTreeSet<Span>, gold: &GoldAnnotation) -> Result<ConfusionReport> {
    confusion_index_corpus(std::slice::from_ref(&(accepted.clone(), gold.clone())))
}

/// Micro-aggregated confusion index over documents.
pub fn confusion_index_corpus(items: &[(BTreeSet<Span>, GoldAnnotation)]) -> Result<ConfusionReport> {
    let counts = exec::map_docs(items, |(accepted, gold)| {
        ConfusionCounts::count(accepted, &gold.singletons(), &gold.anaphoric_spans())
    });
    let mut overall = ConfusionCounts::default();
    for c in &counts {
        overall.merge(c);
    }
    finalize(overall, None)
}

/// Surface strings that occur in `doc` both as a singleton and as an
/// anaphoric mention (case-folded exact match).
fn shared_surfaces(doc: &Document, gold: &GoldAnnotation) -> BTreeSet<String> {
    let fold = |spans: &BTreeSet<Span>| -> BTreeSet<String> {
        spans.iter().map(|s| doc.surface_folded(s)).collect()
    };
    let singles = fold(&gold.singletons());
    let ana = fold(&gold.anaphoric_spans());
    singles.intersection(&ana).cloned().collect()
}

/// Confusion index restricted to shared-text spans (see [`shared_surfaces`]).
pub fn confusion_index_shared_text(
    accepted: &BTreeSet<Span>,
    gold: &GoldAnnotation,
    doc: &Document,
) -> Result<ConfusionReport> {
    confusion_index_shared_text_corpus(std::slice::from_ref(&(
        accepted.clone(),
        gold.clone(),
        doc.clone(),
    )))
}

pub fn confusion_index_shared_text_corpus(
    items: &[(BTreeSet<Span>, GoldAnnotation, Document)],
) -> Result<ConfusionReport> {
    let counts = exec::map_docs(items, |(accepted, gold, doc)| {
        let shared = shared_surfaces(doc, gold);
        let restrict = |spans: BTreeSet<Span>| -> BTreeSet<Span> {
            spans
                .into_iter()
                .filter(|s| shared.contains(&doc.surface_folded(s)))
                .collect()
        };
        ConfusionCounts::count(
            accepted,
            &restrict(gold.singletons()),
            &restrict(gold.anaphoric_spans()),
        )
    });
    let mut overall = ConfusionCounts::default();
    for c in &counts {
        overall.merge(c);
    }
    finalize(overall, None)
}

fn bin_of(width: usize, max_width: usize) -> usize {
    width.min(max_width)
}

/// Per-width confusion indices; widths above `max_width` collapse into the
/// last bin. Bins with an undefined index simply report their counts.
pub fn confusion_by_width(
    accepted: &BTreeSet<Span>,
    gold: &GoldAnnotation,
    max_width: usize,
) -> Result<ConfusionReport> {
    confusion_by_width_corpus(
        std::slice::from_ref(&(accepted.clone(), gold.clone())),
        max_width,
    )
}

pub fn confusion_by_width_corpus(
    items: &[(BTreeSet<Span>, GoldAnnotation)],
    max_width: usize,
) -> Result<ConfusionReport> {
    if max_width == 0 {
        return Err(CorefError::invalid("max_width must be at least 1"));
    }
    let per_doc = exec::map_docs(items, |(accepted, gold)| {
        let mut bins = vec![ConfusionCounts::default(); max_width];
        let singles = gold.singletons();
        let ana = gold.anaphoric_spans();
        for s in &singles {
            let b = bin_of(s.width(), max_width) - 1;
            bins[b].singleton_total += 1;
            if accepted.contains(s) {
                bins[b].singleton_accepted += 1;
            }
        }
        for s in &ana {
            let b = bin_of(s.width(), max_width) - 1;
            bins[b].anaphoric_total += 1;
            if accepted.contains(s) {
                bins[b].anaphoric_accepted += 1;
            }
        }
        bins
    });
    let mut bins = vec![ConfusionCounts::default(); max_width];
    for doc_bins in &per_doc {
        for (b, c) in doc_bins.iter().enumerate() {
            bins[b].merge(c);
        }
    }
    let mut overall = ConfusionCounts::default();
    for c in &bins {
        overall.merge(c);
    }
    let bins = bins
        .into_iter()
        .enumerate()
        .map(|(i, c)| (i + 1, c))
        .collect();
    finalize(overall, Some(bins))
}

/// Span classification precision/recall; same arithmetic as mention scoring,
/// exposed for classifier evaluation workflows.
pub fn classification_prf(predicted: &BTreeSet<Span>, target: &BTreeSet<Span>) -> Prf {
    crate::metrics::mention_prf(predicted, target)
}

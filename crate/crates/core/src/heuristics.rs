//! Recall-oriented mention generation from gold syntax: the union of NP/NML
//! constituents, single tokens with pronoun/proper-noun/verb tags, and the
//! gold anaphoric mentions (merged last so anaphoric recall is total).

use std::collections::BTreeSet;

use crate::error::{CorefError, Result};
use crate::exec;
use crate::model::{Document, GoldAnnotation, Span};

/// Constituent labels harvested as mentions (function-tag suffixes such as
/// `NP-SBJ` or `NP=2` match on the base label).
const PHRASE_LABELS: [&str; 2] = ["NP", "NML"];

const WORD_TAGS: [&str; 12] = [
    "PRP", "PRP$", "WP", "WDT", "WRB", "NNP", "VB", "VBD", "VBN", "VBG", "VBZ", "VBP",
];

fn base_label(label: &str) -> &str {
    label.split(['-', '=']).next().unwrap_or(label)
}

/// The syntax-derived span set before merging gold mentions in.
pub fn premerge_mentions(doc: &Document) -> Result<BTreeSet<Span>> {
    let parse = doc.parse_spans().ok_or_else(|| {
        CorefError::doc(doc.doc_id(), "constituency layer absent; cannot harvest phrases")
    })?;
    if doc.pos_tags().is_none() {
        return Err(CorefError::doc(
            doc.doc_id(),
            "POS layer absent; cannot harvest tagged words",
        ));
    }
    let mut out: BTreeSet<Span> = parse
        .iter()
        .filter(|p| PHRASE_LABELS.contains(&base_label(&p.label)))
        .map(|p| p.span)
        .collect();
    for tok in 0..doc.token_count() {
        if WORD_TAGS.contains(&doc.pos_of(tok).unwrap_or("")) {
            out.insert(Span::new(tok, tok));
        }
    }
    Ok(out)
}

/// Syntax-derived mentions merged with the gold anaphoric mentions.
pub fn heuristic_all_mentions(doc: &Document, gold: &GoldAnnotation) -> Result<BTreeSet<Span>> {
    let mut out = premerge_mentions(doc)?;
    out.extend(gold.anaphoric_spans());
    Ok(out)
}

/// Recall and composition of the pre-merge set against gold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HeuristicStats {
    pub premerge_size: usize,
    pub anaphoric_hits: usize,
    pub anaphoric_total: usize,
}

impl HeuristicStats {
    pub fn merge(&mut self, other: &HeuristicStats) {
        self.premerge_size += other.premerge_size;
        self.anaphoric_hits += other.anaphoric_hits;
        self.anaphoric_total += other.anaphoric_total;
    }

    /// Fraction of gold anaphoric mentions already in the pre-merge set.
    pub fn premerge_recall(&self) -> Option<f64> {
        (self.anaphoric_total > 0)
            .then(|| self.anaphoric_hits as f64 / self.anaphoric_total as f64)
    }

    /// Fraction of the pre-merge set that is a gold anaphoric mention.
    pub fn anaphoric_share(&self) -> Option<f64> {
        (self.premerge_size > 0)
            .then(|| self.anaphoric_hits as f64 / self.premerge_size as f64)
    }
}

pub fn heuristic_stats(doc: &Document, gold: &GoldAnnotation) -> Result<HeuristicStats> {
    let premerge = premerge_mentions(doc)?;
    let ana = gold.anaphoric_spans();
    Ok(HeuristicStats {
        premerge_size: premerge.len(),
        anaphoric_hits: premerge.intersection(&ana).count(),
        anaphoric_total: ana.len(),
    })
}

/// Corpus aggregation of [`heuristic_stats`], parallel per document.
pub fn heuristic_stats_corpus(items: &[(Document, GoldAnnotation)]) -> Result<HeuristicStats> {
    let per_doc = exec::map_docs(items, |(doc, gold)| heuristic_stats(doc, gold));
    let mut total = HeuristicStats::default();
    for s in per_doc {
        total.merge(&s?);
    }
    Ok(total)
}

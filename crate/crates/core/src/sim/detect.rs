//! Toy span detector: enumerate within-sentence spans up to width L, score
//! them with a fixed surface rule, keep the floor(lambda * T) best.

use crate::model::{Document, Span};
use crate::oracle::ScoredCandidateSet;

pub(crate) const PRONOUNS: [&str; 24] = [
    "he", "she", "it", "they", "him", "her", "them", "his", "hers", "its", "their", "theirs",
    "i", "you", "we", "me", "us", "my", "your", "our", "this", "that", "these", "those",
];

const DETERMINERS: [&str; 7] = ["the", "a", "an", "this", "that", "these", "those"];

/// Fixed scoring constants for the detector rule.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorWeights {
    /// Width-1 span whose token is in the pronoun lexicon.
    pub pronoun: f64,
    /// Every token in the span starts with an uppercase letter.
    pub capitalized: f64,
    /// Multi-token span starting with a determiner.
    pub determiner: f64,
    /// Penalty per token beyond the first.
    pub width_penalty: f64,
}

impl Default for DetectorWeights {
    fn default() -> Self {
        DetectorWeights {
            pronoun: 4.0,
            capitalized: 2.5,
            determiner: 2.0,
            width_penalty: 0.6,
        }
    }
}

/// All spans of width <= `l` that stay inside one sentence, in (start, end)
/// lexicographic order.
pub fn enumerate_spans(doc: &Document, l: usize) -> Vec<Span> {
    let mut out = Vec::new();
    for (si, sentence) in doc.sentences().iter().enumerate() {
        let base = doc.sentence_offset(si);
        let len = sentence.len();
        for start in 0..len {
            for end in start..len.min(start + l) {
                out.push(Span::new(base + start, base + end));
            }
        }
    }
    out
}

pub(crate) fn is_pronoun_token(token: &str) -> bool {
    PRONOUNS.contains(&token.to_lowercase().as_str())
}

fn is_capitalized(token: &str) -> bool {
    token.chars().next().is_some_and(|c| c.is_uppercase())
}

fn score_span(doc: &Document, span: &Span, w: &DetectorWeights) -> f64 {
    let mut score = 0.0;
    if span.width() == 1 && is_pronoun_token(doc.token(span.start)) {
        score += w.pronoun;
    }
    if (span.start..=span.end).all(|t| is_capitalized(doc.token(t))) {
        score += w.capitalized;
    }
    if span.width() >= 2 && DETERMINERS.contains(&doc.token(span.start).to_lowercase().as_str()) {
        score += w.determiner;
    }
    score - w.width_penalty * (span.width() - 1) as f64
}

/// Score every enumerated span. Candidate order is score descending with
/// (start, end) tiebreaks, so the ranking is total and deterministic.
pub fn toy_detect(doc: &Document, l: usize, weights: &DetectorWeights) -> ScoredCandidateSet {
    let entries = enumerate_spans(doc, l)
        .into_iter()
        .map(|s| (s, score_span(doc, &s, weights)))
        .collect();
    ScoredCandidateSet::new(entries).expect("enumerated spans are unique and scores finite")
}

/// Keep the floor(lambda * t) highest-ranked candidates.
pub fn prune_topk(scored: &ScoredCandidateSet, lambda: f64, t: usize) -> ScoredCandidateSet {
    let budget = (lambda * t as f64).floor() as usize;
    ScoredCandidateSet::new(
        scored
            .entries()
            .iter()
            .take(budget)
            .copied()
            .collect(),
    )
    .expect("prefix of a valid candidate set")
}

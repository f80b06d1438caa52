//! Gold-informed transforms over detector candidates and an oracle linker.
//!
//! The candidate transforms bound detector headroom: drop every non-gold
//! span (perfect precision), add every missing gold span (perfect recall),
//! both, or a budget-matched variant that removes only as many top-scoring
//! extra spans as there are missing gold spans. The oracle linker bounds
//! linker headroom by linking each candidate to its nearest preceding
//! candidate from the same gold cluster.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{CorefError, Result};
use crate::model::{Clustering, Span};
use crate::union_find::UnionFind;

/// Detector output: spans with scores, ordered by score descending, ties by
/// (start, end) ascending. Spans are unique; scores may be +inf (the sentinel
/// for gold-added spans) but never NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidateSet {
    entries: Vec<(Span, f64)>,
}

impl ScoredCandidateSet {
    pub fn new(entries: Vec<(Span, f64)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (span, score) in &entries {
            if score.is_nan() {
                return Err(CorefError::invalid(format!("candidate {span} has NaN score")));
            }
            if !seen.insert(*span) {
                return Err(CorefError::invalid(format!("duplicate candidate span {span}")));
            }
        }
        let mut entries = entries;
        sort_entries(&mut entries);
        Ok(ScoredCandidateSet { entries })
    }

    pub fn empty() -> Self {
        ScoredCandidateSet { entries: Vec::new() }
    }

    pub fn entries(&self) -> &[(Span, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn spans(&self) -> BTreeSet<Span> {
        self.entries.iter().map(|(s, _)| *s).collect()
    }

    /// Spans in textual (start, end) order, the order the linker consumes.
    pub fn spans_textual(&self) -> Vec<Span> {
        let mut v: Vec<Span> = self.entries.iter().map(|(s, _)| *s).collect();
        v.sort();
        v
    }

    pub fn score_of(&self, span: &Span) -> Option<f64> {
        self.entries.iter().find(|(s, _)| s == span).map(|(_, c)| *c)
    }
}

fn sort_entries(entries: &mut [(Span, f64)]) {
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
}

/// Keep only candidates that are gold mentions; scores preserved.
pub fn perfect_precision(cands: &ScoredCandidateSet, gold: &BTreeSet<Span>) -> ScoredCandidateSet {
    ScoredCandidateSet {
        entries: cands
            .entries
            .iter()
            .filter(|(s, _)| gold.contains(s))
            .copied()
            .collect(),
    }
}

/// Add every missing gold mention with a +inf sentinel score, ordering them
/// ahead of all real candidates (positional ties within the additions).
pub fn perfect_recall(cands: &ScoredCandidateSet, gold: &BTreeSet<Span>) -> ScoredCandidateSet {
    let present = cands.spans();
    let mut entries = cands.entries.clone();
    entries.extend(
        gold.iter()
            .filter(|s| !present.contains(s))
            .map(|s| (*s, f64::INFINITY)),
    );
    sort_entries(&mut entries);
    ScoredCandidateSet { entries }
}

/// Candidates become exactly the gold mention set.
pub fn perfect_both(cands: &ScoredCandidateSet, gold: &BTreeSet<Span>) -> ScoredCandidateSet {
    perfect_recall(&perfect_precision(cands, gold), gold)
}

/// Remove min(#missing gold, #extras) of the highest-scoring non-gold spans;
/// nothing is added.
pub fn budget_matched_precision(
    cands: &ScoredCandidateSet,
    gold: &BTreeSet<Span>,
) -> ScoredCandidateSet {
    let present = cands.spans();
    let missing = gold.difference(&present).count();
    // entries are already score-descending, so the first `missing` extras
    // encountered are the top-scoring ones
    let mut removed = 0usize;
    let entries = cands
        .entries
        .iter()
        .filter(|(s, _)| {
            if removed < missing && !gold.contains(s) {
                removed += 1;
                false
            } else {
                true
            }
        })
        .copied()
        .collect();
    ScoredCandidateSet { entries }
}

/// Addition/removal operation counts for turning `cands` into `gold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OracleOps {
    pub additions: usize,
    pub removals: usize,
}

impl OracleOps {
    pub fn total(&self) -> usize {
        self.additions + self.removals
    }

    pub fn merge(&mut self, other: &OracleOps) {
        self.additions += other.additions;
        self.removals += other.removals;
    }
}

pub fn count_operations(cands: &ScoredCandidateSet, gold: &BTreeSet<Span>) -> OracleOps {
    let present = cands.spans();
    OracleOps {
        additions: gold.difference(&present).count(),
        removals: present.difference(gold).count(),
    }
}

/// F1 gain amortized over the operations that produced it.
pub fn per_op_effect(delta_f1: f64, ops: &OracleOps) -> Result<f64> {
    if ops.total() == 0 {
        return Err(CorefError::invalid(
            "per-operation effect undefined: zero operations",
        ));
    }
    Ok(delta_f1 / ops.total() as f64)
}

/// How per-operation effects aggregate over a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OpAggregation {
    /// Corpus-level delta divided by corpus-total operations.
    #[default]
    CorpusLevel,
    /// Mean of per-document effects; zero-operation documents are skipped.
    PerDocumentMean,
}

/// Aggregates per-document (delta_f1, ops) pairs. For [`OpAggregation::CorpusLevel`]
/// the caller passes the corpus-level delta; per-document deltas are ignored.
pub fn per_op_effect_aggregate(
    corpus_delta_f1: f64,
    per_doc: &[(f64, OracleOps)],
    mode: OpAggregation,
) -> Result<f64> {
    match mode {
        OpAggregation::CorpusLevel => {
            let mut total = OracleOps::default();
            for (_, ops) in per_doc {
                total.merge(ops);
            }
            per_op_effect(corpus_delta_f1, &total)
        }
        OpAggregation::PerDocumentMean => {
            let effects: Vec<f64> = per_doc
                .iter()
                .filter(|(_, ops)| ops.total() > 0)
                .map(|(delta, ops)| delta / ops.total() as f64)
                .collect();
            if effects.is_empty() {
                return Err(CorefError::invalid(
                    "per-operation effect undefined: zero operations in every document",
                ));
            }
            Ok(effects.iter().sum::<f64>() / effects.len() as f64)
        }
    }
}

/// Links each candidate to its nearest preceding candidate from the same gold
/// cluster (dummy otherwise) and returns the transitive closure with size-1
/// clusters dropped.
pub fn oracle_linker(cands: &ScoredCandidateSet, gold_clusters: &Clustering) -> Clustering {
    link_with(cands, gold_clusters, |_, _| true)
}

/// As [`oracle_linker`], but a candidate may only link within its top-`k`
/// preceding candidates by coarse score (missing pairs score -inf; ties break
/// toward the nearer antecedent).
pub fn oracle_linker_pruned(
    cands: &ScoredCandidateSet,
    gold_clusters: &Clustering,
    coarse_scores: &BTreeMap<(Span, Span), f64>,
    k: usize,
) -> Clustering {
    let order = cands.spans_textual();
    let allowed: Vec<BTreeSet<usize>> = order
        .iter()
        .enumerate()
        .map(|(i, span)| top_k_antecedents(&order, i, span, coarse_scores, k))
        .collect();
    link_with(cands, gold_clusters, |i, j| allowed[i].contains(&j))
}

/// Indices of the top-`k` preceding candidates for candidate `i` by coarse
/// score, descending, nearer antecedent first on ties.
fn top_k_antecedents(
    order: &[Span],
    i: usize,
    span: &Span,
    coarse_scores: &BTreeMap<(Span, Span), f64>,
    k: usize,
) -> BTreeSet<usize> {
    let mut scored: Vec<(f64, usize)> = (0..i)
        .map(|j| {
            let s = coarse_scores
                .get(&(*span, order[j]))
                .copied()
                .unwrap_or(f64::NEG_INFINITY);
            (s, j)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)));
    scored.into_iter().take(k).map(|(_, j)| j).collect()
}

fn link_with(
    cands: &ScoredCandidateSet,
    gold_clusters: &Clustering,
    may_link: impl Fn(usize, usize) -> bool,
) -> Clustering {
    let order = cands.spans_textual();
    let gold_index = gold_clusters.span_index();
    let mut uf = UnionFind::new(order.len());
    for (i, span) in order.iter().enumerate() {
        let Some(cluster) = gold_index.get(span) else {
            continue; // non-gold candidate: dummy
        };
        for j in (0..i).rev() {
            if gold_index.get(&order[j]) == Some(cluster) && may_link(i, j) {
                uf.union(i, j);
                break;
            }
        }
    }
    let groups = uf
        .groups()
        .into_iter()
        .filter(|g| g.len() >= 2)
        .map(|g| g.into_iter().map(|i| order[i]).collect())
        .collect();
    Clustering::new(groups).expect("candidate spans are unique")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(i: usize) -> Span {
        Span::new(i, i)
    }

    fn cands(entries: &[(usize, f64)]) -> ScoredCandidateSet {
        ScoredCandidateSet::new(entries.iter().map(|&(i, c)| (span(i), c)).collect()).unwrap()
    }

    fn gold_set(v: &[usize]) -> BTreeSet<Span> {
        v.iter().map(|&i| span(i)).collect()
    }

    #[test]
    fn candidate_order_is_score_then_position() {
        let c = cands(&[(3, 0.5), (1, 0.9), (2, 0.5)]);
        let spans: Vec<usize> = c.entries().iter().map(|(s, _)| s.start).collect();
        assert_eq!(spans, vec![1, 2, 3]);
    }

    #[test]
    fn perfect_precision_filters_non_gold() {
        let c = cands(&[(0, 0.9), (8, 0.5)]);
        let out = perfect_precision(&c, &gold_set(&[0, 1]));
        assert_eq!(out.spans(), gold_set(&[0]));
        assert_eq!(out.score_of(&span(0)), Some(0.9));
        // already-perfect input unchanged
        let sub = cands(&[(0, 0.9)]);
        assert_eq!(perfect_precision(&sub, &gold_set(&[0, 1])), sub);
    }

    #[test]
    fn perfect_recall_adds_with_sentinel_at_head() {
        let c = cands(&[(8, 0.5)]);
        let out = perfect_recall(&c, &gold_set(&[0]));
        assert_eq!(out.spans(), gold_set(&[0, 8]));
        assert_eq!(out.entries()[0], (span(0), f64::INFINITY));
        // superset input unchanged
        let sup = cands(&[(0, 0.5), (1, 0.4)]);
        assert_eq!(perfect_recall(&sup, &gold_set(&[0])), sup);
    }

    #[test]
    fn perfect_both_is_exactly_gold() {
        let c = cands(&[(0, 0.9), (8, 0.5)]);
        assert_eq!(perfect_both(&c, &gold_set(&[0, 1])).spans(), gold_set(&[0, 1]));
        assert!(perfect_both(&c, &BTreeSet::new()).is_empty());
    }

    #[test]
    fn budget_matched_removes_top_scoring_extras() {
        // extras x:0.9, y:0.2; one missing gold span -> only x removed
        let c = cands(&[(8, 0.9), (9, 0.2), (0, 0.8)]);
        let out = budget_matched_precision(&c, &gold_set(&[0, 1]));
        assert_eq!(out.spans(), gold_set(&[0, 9]));
        // no missing golds -> unchanged
        let full = cands(&[(0, 0.8), (1, 0.7), (8, 0.9)]);
        assert_eq!(budget_matched_precision(&full, &gold_set(&[0, 1])), full);
    }

    #[test]
    fn operation_counts_and_effect() {
        let c = cands(&[(0, 1.0), (1, 0.9), (8, 0.2)]);
        let ops = count_operations(&c, &gold_set(&[0, 1, 2]));
        assert_eq!(ops, OracleOps { additions: 1, removals: 1 });
        assert_eq!(per_op_effect(0.10, &OracleOps { additions: 2, removals: 3 }).unwrap(), 0.02);
        assert!(per_op_effect(0.10, &OracleOps::default()).is_err());
    }

    #[test]
    fn linker_recovers_gold_from_candidates() {
        let gold = Clustering::new(vec![
            vec![span(0), span(2)],
            vec![span(4), span(6)],
        ])
        .unwrap();
        let c = cands(&[(0, 0.9), (2, 0.8), (4, 0.7), (6, 0.6), (9, 0.5)]);
        assert_eq!(oracle_linker(&c, &gold), gold);
        assert_eq!(oracle_linker(&ScoredCandidateSet::empty(), &gold), Clustering::empty());
    }

    #[test]
    fn linker_drops_clusters_restricted_to_one_candidate() {
        let gold = Clustering::new(vec![
            vec![span(0), span(2)],
            vec![span(4), span(6)],
        ])
        .unwrap();
        // span 2 missing: cluster {0,2} shrinks to a dropped singleton
        let c = cands(&[(0, 0.9), (4, 0.7), (6, 0.6)]);
        let out = oracle_linker(&c, &gold);
        assert_eq!(out, Clustering::new(vec![vec![span(4), span(6)]]).unwrap());
    }

    #[test]
    fn pruned_linker_matches_full_when_k_large() {
        let gold = Clustering::new(vec![vec![span(0), span(2), span(4)]]).unwrap();
        let c = cands(&[(0, 0.9), (2, 0.8), (4, 0.7), (3, 0.1)]);
        let coarse: BTreeMap<(Span, Span), f64> = c
            .spans_textual()
            .iter()
            .flat_map(|a| c.spans_textual().into_iter().map(|b| ((*a, b), 1.0)))
            .collect();
        assert_eq!(
            oracle_linker_pruned(&c, &gold, &coarse, 10),
            oracle_linker(&c, &gold)
        );
        assert_eq!(
            oracle_linker_pruned(&c, &gold, &coarse, 0),
            Clustering::empty()
        );
    }

    #[test]
    fn pruned_linker_respects_the_antecedent_budget() {
        let gold = Clustering::new(vec![vec![span(0), span(4)]]).unwrap();
        let c = cands(&[(0, 0.9), (2, 0.8), (3, 0.7), (4, 0.6)]);
        // coarse scores rank non-gold antecedents above span 0 for span 4
        let coarse: BTreeMap<(Span, Span), f64> = [
            ((span(4), span(3)), 3.0),
            ((span(4), span(2)), 2.0),
            ((span(4), span(0)), 1.0),
        ]
        .into_iter()
        .collect();
        // top-2 for span 4 is {3, 2}: gold antecedent pruned away -> dummy
        assert_eq!(oracle_linker_pruned(&c, &gold, &coarse, 2), Clustering::empty());
        // top-3 includes span 0 -> link survives
        assert_eq!(
            oracle_linker_pruned(&c, &gold, &coarse, 3),
            Clustering::new(vec![vec![span(0), span(4)]]).unwrap()
        );
    }
}

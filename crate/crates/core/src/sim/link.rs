//! Toy linker: for each candidate in textual order, score the K nearest
//! preceding candidates (exact match above head match above pronoun-distance)
//! and link to the best one above the dummy threshold.

use crate::model::{AntecedentDecision, Clustering, Document, Span};
use crate::oracle::ScoredCandidateSet;
use crate::union_find::UnionFind;

use super::detect::is_pronoun_token;

/// Fixed pair-scoring constants for the linker rule.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkerWeights {
    /// Case-folded surface strings equal.
    pub exact: f64,
    /// Last tokens equal (case-folded).
    pub head: f64,
    /// Base score when the candidate is a pronoun.
    pub pronoun_base: f64,
    /// Score lost per token of distance on pronoun links.
    pub pronoun_decay: f64,
}

impl Default for LinkerWeights {
    fn default() -> Self {
        LinkerWeights {
            exact: 3.0,
            head: 1.8,
            pronoun_base: 1.2,
            pronoun_decay: 0.02,
        }
    }
}

/// Score one span/antecedent pair with the fixed linker rule. Also serves as
/// the coarse scorer for the budgeted oracle linker.
pub fn pair_score(doc: &Document, cand: &Span, ant: &Span, w: &LinkerWeights) -> f64 {
    let cand_surface = doc.surface_folded(cand);
    let ant_surface = doc.surface_folded(ant);
    if cand_surface == ant_surface {
        return w.exact;
    }
    if doc.token(cand.end).to_lowercase() == doc.token(ant.end).to_lowercase() {
        return w.head;
    }
    if cand.width() == 1 && is_pronoun_token(doc.token(cand.start)) {
        let distance = cand.start.saturating_sub(ant.end);
        return w.pronoun_base - w.pronoun_decay * distance as f64;
    }
    0.0
}

/// Antecedent decisions plus the resulting clustering (transitive closure of
/// the links, size-1 clusters dropped).
pub fn toy_link_decisions(
    cands: &ScoredCandidateSet,
    doc: &Document,
    k: usize,
    dummy_threshold: f64,
    weights: &LinkerWeights,
) -> (Vec<AntecedentDecision>, Clustering) {
    let order = cands.spans_textual();
    let mut decisions = Vec::with_capacity(order.len());
    let mut uf = UnionFind::new(order.len());
    for (i, span) in order.iter().enumerate() {
        let window_start = i.saturating_sub(k);
        let mut best: Option<(f64, usize)> = None;
        // iterate nearest-first so ties resolve to the nearer antecedent
        for j in (window_start..i).rev() {
            let score = pair_score(doc, span, &order[j], weights);
            if best.is_none_or(|(b, _)| score > b) {
                best = Some((score, j));
            }
        }
        match best {
            Some((score, j)) if score > dummy_threshold => {
                uf.union(i, j);
                decisions.push(AntecedentDecision {
                    span: *span,
                    antecedent: Some(order[j]),
                    score,
                });
            }
            Some((score, _)) => decisions.push(AntecedentDecision {
                span: *span,
                antecedent: None,
                score,
            }),
            None => decisions.push(AntecedentDecision {
                span: *span,
                antecedent: None,
                score: 0.0,
            }),
        }
    }
    let groups = uf
        .groups()
        .into_iter()
        .filter(|g| g.len() >= 2)
        .map(|g| g.into_iter().map(|i| order[i]).collect())
        .collect();
    let clustering = Clustering::new(groups).expect("candidate spans are unique");
    (decisions, clustering)
}

/// Final clustering only.
pub fn toy_link(
    cands: &ScoredCandidateSet,
    doc: &Document,
    k: usize,
    dummy_threshold: f64,
    weights: &LinkerWeights,
) -> Clustering {
    toy_link_decisions(cands, doc, k, dummy_threshold, weights).1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(words: &[&str]) -> Document {
        Document::new(
            "d",
            vec![words.iter().map(|w| w.to_string()).collect()],
            None,
            None,
        )
        .unwrap()
    }

    fn cands(spans: &[(usize, usize)]) -> ScoredCandidateSet {
        ScoredCandidateSet::new(
            spans
                .iter()
                .enumerate()
                .map(|(i, &(s, e))| (Span::new(s, e), 1.0 - 0.01 * i as f64))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_strings_link() {
        let d = doc(&["Ada", "met", "Ada", "today"]);
        let c = cands(&[(0, 0), (2, 2)]);
        let out = toy_link(&c, &d, 50, 0.5, &LinkerWeights::default());
        assert_eq!(out.len(), 1);
        assert_eq!(out.clusters()[0], vec![Span::new(0, 0), Span::new(2, 2)]);
    }

    #[test]
    fn k_zero_links_nothing() {
        let d = doc(&["Ada", "met", "Ada", "today"]);
        let c = cands(&[(0, 0), (2, 2)]);
        assert!(toy_link(&c, &d, 0, 0.5, &LinkerWeights::default()).is_empty());
    }

    #[test]
    fn window_limits_antecedent_distance() {
        let d = doc(&["Ada", "a", "b", "c", "Ada"]);
        let c = cands(&[(0, 0), (1, 1), (2, 2), (3, 3), (4, 4)]);
        // K=1: only the immediately preceding candidate is visible
        let out = toy_link(&c, &d, 1, 0.5, &LinkerWeights::default());
        assert!(out.is_empty());
        let out = toy_link(&c, &d, 4, 0.5, &LinkerWeights::default());
        assert_eq!(out.len(), 1);
    }

    #[test]
    fn pronoun_links_decay_with_distance() {
        let w = LinkerWeights::default();
        let d = doc(&["Ada", "waved", "and", "then", "she", "left"]);
        let c = cands(&[(0, 0), (4, 4)]);
        let (decisions, out) = toy_link_decisions(&c, &d, 50, 0.5, &w);
        assert_eq!(out.len(), 1);
        let link = decisions.iter().find(|d| d.span == Span::new(4, 4)).unwrap();
        assert_eq!(link.antecedent, Some(Span::new(0, 0)));
        assert!((link.score - (w.pronoun_base - 4.0 * w.pronoun_decay)).abs() < 1e-12);
    }

    /// Closure by repeated set merging until fixpoint; no shared machinery
    /// with the union-find the linker uses.
    fn naive_closure(decisions: &[crate::model::AntecedentDecision]) -> Clustering {
        let mut sets: Vec<std::collections::BTreeSet<Span>> = decisions
            .iter()
            .map(|d| [d.span].into_iter().collect())
            .collect();
        let links: Vec<(Span, Span)> = decisions
            .iter()
            .filter_map(|d| d.antecedent.map(|a| (d.span, a)))
            .collect();
        loop {
            let mut merged = false;
            'outer: for i in 0..sets.len() {
                for j in i + 1..sets.len() {
                    let connected = links.iter().any(|(a, b)| {
                        (sets[i].contains(a) && sets[j].contains(b))
                            || (sets[i].contains(b) && sets[j].contains(a))
                    });
                    if connected {
                        let other = sets.remove(j);
                        sets[i].extend(other);
                        merged = true;
                        break 'outer;
                    }
                }
            }
            if !merged {
                break;
            }
        }
        Clustering::from_sets(sets.into_iter().filter(|s| s.len() >= 2).collect()).unwrap()
    }

    #[test]
    fn closure_matches_naive_recomputation() {
        let d = doc(&["Ada", "saw", "Ada", "and", "Ben", "greet", "Ben", "ok"]);
        let c = cands(&[(0, 0), (2, 2), (4, 4), (6, 6), (7, 7)]);
        let (decisions, clustering) =
            toy_link_decisions(&c, &d, 50, 0.5, &LinkerWeights::default());
        assert_eq!(clustering, naive_closure(&decisions));
        assert_eq!(clustering.len(), 2);

        // longer chain through pronouns and repeats
        let d = doc(&["Ada", "met", "Ada", "then", "she", "and", "she", "left"]);
        let c = cands(&[(0, 0), (2, 2), (4, 4), (6, 6)]);
        let (decisions, clustering) =
            toy_link_decisions(&c, &d, 50, 0.5, &LinkerWeights::default());
        assert_eq!(clustering, naive_closure(&decisions));
        assert_eq!(clustering.len(), 1);
    }
}

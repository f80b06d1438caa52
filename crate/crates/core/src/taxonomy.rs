//! Clustering error taxonomy: categorize system-vs-gold discrepancies into
//! seven error types, fix each type, and report the score delta per type.
//!
//! Span (boundary) errors are fixed first; the six cluster-level types are
//! then categorized and independently fixed from that span-fixed state.
//! Definitions, with `gold` the anaphoric clustering:
//!
//! * conflated entities — a system cluster intersecting >= 2 gold clusters
//! * extra mention — a non-gold span in a cluster that intersects gold
//! * extra entity — a system cluster with no gold span at all
//! * divided entity — a gold cluster spread over >= 2 system clusters
//! * missing mention — an absent gold span whose cluster is partially present
//! * missing entity — a gold cluster with no span present
//!
//! Applying all fixes in [`FIX_ORDER`] (after span fixing) always reproduces
//! the gold clustering exactly.

use std::collections::{BTreeMap, BTreeSet};

use crate::exec;
use crate::metrics::{self, MetricOptions, MetricTally};
use crate::model::{Clustering, Document, GoldAnnotation, Span};
use crate::union_find::UnionFind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ErrorKind {
    SpanError,
    ConflatedEntities,
    ExtraMention,
    ExtraEntity,
    DividedEntity,
    MissingMention,
    MissingEntity,
}

impl ErrorKind {
    pub fn name(&self) -> &'static str {
        match self {
            ErrorKind::SpanError => "span_error",
            ErrorKind::ConflatedEntities => "conflated_entities",
            ErrorKind::ExtraMention => "extra_mention",
            ErrorKind::ExtraEntity => "extra_entity",
            ErrorKind::DividedEntity => "divided_entity",
            ErrorKind::MissingMention => "missing_mention",
            ErrorKind::MissingEntity => "missing_entity",
        }
    }
}

/// All kinds in report-column order.
pub const REPORT_ORDER: [ErrorKind; 7] = [
    ErrorKind::SpanError,
    ErrorKind::ConflatedEntities,
    ErrorKind::ExtraMention,
    ErrorKind::ExtraEntity,
    ErrorKind::DividedEntity,
    ErrorKind::MissingMention,
    ErrorKind::MissingEntity,
];

/// Cluster-level kinds in the order the all-fixes sequence applies them.
pub const FIX_ORDER: [ErrorKind; 6] = [
    ErrorKind::ConflatedEntities,
    ErrorKind::DividedEntity,
    ErrorKind::ExtraEntity,
    ErrorKind::ExtraMention,
    ErrorKind::MissingEntity,
    ErrorKind::MissingMention,
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ErrorPayload {
    SpanRemap { from: Span, to: Span },
    /// Partition of a conflated cluster by gold cluster, plus non-gold spans.
    Conflation { parts: Vec<Vec<Span>>, extras: Vec<Span> },
    ExtraMention { span: Span },
    ExtraEntity { cluster: Vec<Span> },
    Divided { gold: Vec<Span>, system_parts: Vec<Vec<Span>> },
    MissingMention { span: Span },
    MissingEntity { cluster: Vec<Span> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorInstance {
    pub kind: ErrorKind,
    pub payload: ErrorPayload,
}

/// Re-maps each non-gold system span to the unique unmatched gold mention it
/// overlaps within the same sentence, iterating until no span qualifies, so
/// the operation is a fixpoint (applying it twice changes nothing).
pub fn fix_span_errors(
    system: &Clustering,
    gold: &GoldAnnotation,
    doc: &Document,
) -> (Clustering, Vec<ErrorInstance>) {
    let gold_spans = gold.anaphoric_spans();
    let mut clusters: Vec<Vec<Span>> = system.clusters().to_vec();
    let mut matched: BTreeSet<Span> = system
        .spans()
        .filter(|s| gold_spans.contains(s))
        .collect();
    let mut errors = Vec::new();

    loop {
        let mut changed = false;
        let mut positions: Vec<(Span, usize)> = clusters
            .iter()
            .enumerate()
            .flat_map(|(ci, c)| c.iter().map(move |s| (*s, ci)))
            .collect();
        positions.sort();
        for (span, ci) in positions {
            if gold_spans.contains(&span) || !doc.span_in_one_sentence(&span) {
                continue;
            }
            let sent = doc.sentence_of(span.start);
            let mut candidates = gold_spans.iter().filter(|g| {
                !matched.contains(g)
                    && doc.sentence_of(g.start) == sent
                    && g.overlaps(&span)
            });
            let (Some(g), None) = (candidates.next(), candidates.next()) else {
                continue; // no candidate, or ambiguous
            };
            let g = *g;
            let slot = clusters[ci].iter().position(|s| *s == span).unwrap();
            clusters[ci][slot] = g;
            matched.insert(g);
            errors.push(ErrorInstance {
                kind: ErrorKind::SpanError,
                payload: ErrorPayload::SpanRemap { from: span, to: g },
            });
            changed = true;
        }
        if !changed {
            break;
        }
    }
    (
        Clustering::new(clusters).expect("remap targets are unmatched gold spans"),
        errors,
    )
}

/// Partition of one system cluster by gold cluster index, plus non-gold spans.
fn split_by_gold(
    cluster: &[Span],
    gold_index: &BTreeMap<Span, usize>,
) -> (BTreeMap<usize, Vec<Span>>, Vec<Span>) {
    let mut parts: BTreeMap<usize, Vec<Span>> = BTreeMap::new();
    let mut extras = Vec::new();
    for span in cluster {
        match gold_index.get(span) {
            Some(g) => parts.entry(*g).or_default().push(*span),
            None => extras.push(*span),
        }
    }
    (parts, extras)
}

/// Categorizes the six cluster-level error types (span errors are produced by
/// [`fix_span_errors`]). Instances are deterministic and ordered by kind.
pub fn categorize(system: &Clustering, gold: &Clustering) -> Vec<ErrorInstance> {
    let gold_index = gold.span_index();
    let mut out = Vec::new();

    for cluster in system.clusters() {
        let (parts, extras) = split_by_gold(cluster, &gold_index);
        if parts.len() >= 2 {
            out.push(ErrorInstance {
                kind: ErrorKind::ConflatedEntities,
                payload: ErrorPayload::Conflation {
                    parts: parts.values().cloned().collect(),
                    extras: extras.clone(),
                },
            });
        }
        if parts.is_empty() {
            out.push(ErrorInstance {
                kind: ErrorKind::ExtraEntity,
                payload: ErrorPayload::ExtraEntity {
                    cluster: cluster.clone(),
                },
            });
        } else {
            for span in extras {
                out.push(ErrorInstance {
                    kind: ErrorKind::ExtraMention,
                    payload: ErrorPayload::ExtraMention { span },
                });
            }
        }
    }

    for gold_cluster in gold.clusters() {
        let mut present_by_system: BTreeMap<usize, Vec<Span>> = BTreeMap::new();
        let mut absent = Vec::new();
        for span in gold_cluster {
            match system.cluster_of(span) {
                Some(ci) => present_by_system.entry(ci).or_default().push(*span),
                None => absent.push(*span),
            }
        }
        if present_by_system.is_empty() {
            out.push(ErrorInstance {
                kind: ErrorKind::MissingEntity,
                payload: ErrorPayload::MissingEntity {
                    cluster: gold_cluster.clone(),
                },
            });
            continue;
        }
        if present_by_system.len() >= 2 {
            out.push(ErrorInstance {
                kind: ErrorKind::DividedEntity,
                payload: ErrorPayload::Divided {
                    gold: gold_cluster.clone(),
                    system_parts: present_by_system.values().cloned().collect(),
                },
            });
        }
        for span in absent {
            out.push(ErrorInstance {
                kind: ErrorKind::MissingMention,
                payload: ErrorPayload::MissingMention { span },
            });
        }
    }
    out.sort_by_key(|e| e.kind);
    out
}

/// Fixes every instance of one cluster-level error kind.
///
/// Panics on [`ErrorKind::SpanError`]; span fixing needs the document and is
/// exposed separately as [`fix_span_errors`].
pub fn fix(system: &Clustering, gold: &Clustering, kind: ErrorKind) -> Clustering {
    let gold_index = gold.span_index();
    let clusters = match kind {
        ErrorKind::SpanError => panic!("span errors are fixed by fix_span_errors"),
        ErrorKind::ConflatedEntities => {
            let mut out = Vec::new();
            for cluster in system.clusters() {
                let (parts, _) = split_by_gold(cluster, &gold_index);
                if parts.len() >= 2 {
                    // split along gold boundaries; non-gold spans are dropped
                    out.extend(parts.into_values());
                } else {
                    out.push(cluster.clone());
                }
            }
            out
        }
        ErrorKind::ExtraMention => system
            .clusters()
            .iter()
            .map(|cluster| {
                let (parts, _) = split_by_gold(cluster, &gold_index);
                if parts.is_empty() {
                    cluster.clone()
                } else {
                    cluster
                        .iter()
                        .filter(|s| gold_index.contains_key(s))
                        .copied()
                        .collect()
                }
            })
            .collect(),
        ErrorKind::ExtraEntity => system
            .clusters()
            .iter()
            .filter(|c| c.iter().any(|s| gold_index.contains_key(s)))
            .cloned()
            .collect(),
        ErrorKind::DividedEntity => {
            let mut uf = UnionFind::new(system.len());
            for gold_cluster in gold.clusters() {
                let mut first: Option<usize> = None;
                for span in gold_cluster {
                    if let Some(ci) = system.cluster_of(span) {
                        match first {
                            Some(f) => uf.union(f, ci),
                            None => first = Some(ci),
                        }
                    }
                }
            }
            uf.groups()
                .into_iter()
                .map(|g| {
                    g.into_iter()
                        .flat_map(|ci| system.clusters()[ci].iter().copied())
                        .collect()
                })
                .collect()
        }
        ErrorKind::MissingMention => {
            let mut clusters: Vec<Vec<Span>> = system.clusters().to_vec();
            for gold_cluster in gold.clusters() {
                let mut by_cluster: BTreeMap<usize, Vec<Span>> = BTreeMap::new();
                let mut absent = Vec::new();
                for span in gold_cluster {
                    match system.cluster_of(span) {
                        Some(ci) => by_cluster.entry(ci).or_default().push(*span),
                        None => absent.push(*span),
                    }
                }
                if by_cluster.is_empty() || absent.is_empty() {
                    continue;
                }
                // host cluster: most siblings, ties to the textually earliest
                let host = by_cluster
                    .iter()
                    .max_by(|(ci_a, sp_a), (ci_b, sp_b)| {
                        sp_a.len()
                            .cmp(&sp_b.len())
                            .then(sp_b[0].cmp(&sp_a[0]))
                            .then(ci_b.cmp(ci_a))
                    })
                    .map(|(ci, _)| *ci)
                    .unwrap();
                clusters[host].extend(absent);
            }
            clusters
        }
        ErrorKind::MissingEntity => {
            let system_spans = system.span_set();
            let mut clusters: Vec<Vec<Span>> = system.clusters().to_vec();
            for gold_cluster in gold.clusters() {
                if gold_cluster.iter().all(|s| !system_spans.contains(s)) {
                    clusters.push(gold_cluster.clone());
                }
            }
            clusters
        }
    };
    Clustering::new(clusters).expect("fixes preserve span disjointness")
}

/// Span fix followed by every cluster-level fix in [`FIX_ORDER`]; the result
/// always equals the gold anaphoric clustering.
pub fn fix_all(system: &Clustering, gold: &GoldAnnotation, doc: &Document) -> Clustering {
    let (mut current, _) = fix_span_errors(system, gold, doc);
    for kind in FIX_ORDER {
        current = fix(&current, gold.anaphoric(), kind);
    }
    current
}

/// Per-type counts and F1 deltas, Table-style: the span-error delta is
/// measured against the raw baseline, every other delta against the
/// span-fixed state it was categorized in.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub baseline_f1: f64,
    pub span_fixed_f1: f64,
    pub counts: BTreeMap<ErrorKind, usize>,
    pub deltas: BTreeMap<ErrorKind, f64>,
}

struct DocTallies {
    baseline: MetricTally,
    span_fixed: MetricTally,
    per_kind: BTreeMap<ErrorKind, MetricTally>,
    counts: BTreeMap<ErrorKind, usize>,
}

fn doc_tallies(system: &Clustering, gold: &GoldAnnotation, doc: &Document) -> DocTallies {
    let opts = MetricOptions::default();
    let gold_c = gold.anaphoric();
    let baseline = metrics::accumulate(gold_c, system, opts);
    let (span_fixed_c, span_errors) = fix_span_errors(system, gold, doc);
    let span_fixed = metrics::accumulate(gold_c, &span_fixed_c, opts);

    let mut counts: BTreeMap<ErrorKind, usize> = REPORT_ORDER.iter().map(|k| (*k, 0)).collect();
    *counts.get_mut(&ErrorKind::SpanError).unwrap() = span_errors.len();
    for inst in categorize(&span_fixed_c, gold_c) {
        *counts.get_mut(&inst.kind).unwrap() += 1;
    }

    let per_kind = FIX_ORDER
        .iter()
        .map(|kind| {
            let fixed = fix(&span_fixed_c, gold_c, *kind);
            (*kind, metrics::accumulate(gold_c, &fixed, opts))
        })
        .collect();
    DocTallies {
        baseline,
        span_fixed,
        per_kind,
        counts,
    }
}

fn report_from(mut tallies: Vec<DocTallies>) -> ErrorReport {
    let mut baseline = MetricTally::zero();
    let mut span_fixed = MetricTally::zero();
    let mut per_kind: BTreeMap<ErrorKind, MetricTally> =
        FIX_ORDER.iter().map(|k| (*k, MetricTally::zero())).collect();
    let mut counts: BTreeMap<ErrorKind, usize> = REPORT_ORDER.iter().map(|k| (*k, 0)).collect();
    for t in tallies.drain(..) {
        baseline.merge(&t.baseline);
        span_fixed.merge(&t.span_fixed);
        for (k, tally) in &t.per_kind {
            per_kind.get_mut(k).unwrap().merge(tally);
        }
        for (k, n) in &t.counts {
            *counts.get_mut(k).unwrap() += n;
        }
    }
    let baseline_f1 = baseline.report().avg_f1;
    let span_fixed_f1 = span_fixed.report().avg_f1;
    let mut deltas: BTreeMap<ErrorKind, f64> = BTreeMap::new();
    deltas.insert(ErrorKind::SpanError, span_fixed_f1 - baseline_f1);
    for (k, tally) in per_kind {
        deltas.insert(k, tally.report().avg_f1 - span_fixed_f1);
    }
    ErrorReport {
        baseline_f1,
        span_fixed_f1,
        counts,
        deltas,
    }
}

/// Single-document error report.
pub fn delta_f1_report(
    system: &Clustering,
    gold: &GoldAnnotation,
    doc: &Document,
) -> ErrorReport {
    report_from(vec![doc_tallies(system, gold, doc)])
}

/// Corpus error report; deltas use micro-averaged F1, parallel per document.
pub fn delta_f1_report_corpus(
    items: &[(Clustering, GoldAnnotation, Document)],
) -> ErrorReport {
    report_from(exec::map_docs(items, |(s, g, d)| doc_tallies(s, g, d)))
}

// ---------------------------------------------------------------------------
// Conflation sub-typing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConflationSubkind {
    Pronoun,
    ExactMatch,
    HeadMatch,
    OtherMatch,
    SemanticOrOther,
}

impl ConflationSubkind {
    pub fn name(&self) -> &'static str {
        match self {
            ConflationSubkind::Pronoun => "pronoun",
            ConflationSubkind::ExactMatch => "exact_match",
            ConflationSubkind::HeadMatch => "head_match",
            ConflationSubkind::OtherMatch => "other_match",
            ConflationSubkind::SemanticOrOther => "semantic_or_other",
        }
    }
}

pub const SUBKIND_ORDER: [ConflationSubkind; 5] = [
    ConflationSubkind::Pronoun,
    ConflationSubkind::ExactMatch,
    ConflationSubkind::HeadMatch,
    ConflationSubkind::OtherMatch,
    ConflationSubkind::SemanticOrOther,
];

const PRONOUN_POS: [&str; 5] = ["PRP", "PRP$", "WP", "WDT", "WRB"];

/// Deictic terms counted as pronouns regardless of tagging.
const DEICTIC: [&str; 8] = ["this", "that", "these", "those", "here", "there", "then", "now"];

/// Tags that end the head-search region of a flat noun phrase.
const HEAD_BOUNDARY: [&str; 16] = [
    "IN", "TO", "WDT", "WP", "WP$", "WRB", "VB", "VBD", "VBZ", "VBP", "VBN", "VBG", "MD", "CC",
    "POS", ",",
];

const STOPWORDS: [&str; 30] = [
    "a", "an", "the", "of", "in", "on", "at", "to", "for", "with", "by", "from", "and", "or",
    "but", "not", "is", "are", "was", "were", "be", "been", "being", "as", "it", "its", "'s",
    "er", "ah", "uh",
];

fn is_stopword(folded: &str) -> bool {
    STOPWORDS.contains(&folded) || !folded.chars().any(|c| c.is_alphanumeric())
}

fn is_pronoun_span(doc: &Document, span: &Span) -> bool {
    if span.width() != 1 {
        return false;
    }
    if let Some(pos) = doc.pos_of(span.start) {
        if PRONOUN_POS.contains(&pos) {
            return true;
        }
    }
    DEICTIC.contains(&doc.surface_folded(span).as_str())
}

/// Head of a span: the rightmost noun before the first phrase-boundary tag,
/// falling back to the rightmost noun anywhere, then to the last token.
pub fn head_token(doc: &Document, span: &Span) -> String {
    if doc.pos_tags().is_some() {
        let mut bounded: Option<usize> = None;
        for tok in span.start..=span.end {
            let pos = doc.pos_of(tok).unwrap_or("");
            if HEAD_BOUNDARY.contains(&pos) {
                break;
            }
            if pos.starts_with('N') {
                bounded = Some(tok);
            }
        }
        let anywhere =
            (span.start..=span.end).rfind(|t| doc.pos_of(*t).unwrap_or("").starts_with('N'));
        if let Some(tok) = bounded.or(anywhere) {
            return doc.token(tok).to_lowercase();
        }
    }
    doc.token(span.end).to_lowercase()
}

/// Classifies one wrongly-linked span pair.
pub fn classify_pair(doc: &Document, a: &Span, b: &Span) -> ConflationSubkind {
    if is_pronoun_span(doc, a) || is_pronoun_span(doc, b) {
        return ConflationSubkind::Pronoun;
    }
    let sa = doc.surface_folded(a);
    let sb = doc.surface_folded(b);
    if sa == sb {
        return ConflationSubkind::ExactMatch;
    }
    if head_token(doc, a) == head_token(doc, b) {
        return ConflationSubkind::HeadMatch;
    }
    let ta: BTreeSet<String> = sa.split(' ').map(str::to_string).collect();
    let shared = sb
        .split(' ')
        .any(|t| ta.contains(t) && !is_stopword(t));
    if shared {
        return ConflationSubkind::OtherMatch;
    }
    ConflationSubkind::SemanticOrOther
}

/// Token gap between two spans; 0 when they overlap.
fn gap(a: &Span, b: &Span) -> usize {
    b.start
        .saturating_sub(a.end)
        .max(a.start.saturating_sub(b.end))
}

/// For every pair of wrongly-linked sub-entities inside each conflated
/// cluster, picks the textually closest cross pair as the offending link and
/// classifies it.
pub fn subtype_conflations(
    instances: &[ErrorInstance],
    doc: &Document,
) -> BTreeMap<ConflationSubkind, usize> {
    let mut counts: BTreeMap<ConflationSubkind, usize> =
        SUBKIND_ORDER.iter().map(|k| (*k, 0)).collect();
    for inst in instances {
        let ErrorPayload::Conflation { parts, .. } = &inst.payload else {
            continue;
        };
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                let mut best: Option<(usize, Span, Span)> = None;
                for a in &parts[i] {
                    for b in &parts[j] {
                        let key = (gap(a, b), *a.min(b), *a.max(b));
                        if best.is_none_or(|(g, x, y)| key < (g, x, y)) {
                            best = Some(key);
                        }
                    }
                }
                if let Some((_, a, b)) = best {
                    *counts.get_mut(&classify_pair(doc, &a, &b)).unwrap() += 1;
                }
            }
        }
    }
    counts
}

/// Convenience: categorize and sub-type in one pass from a span-fixed state.
pub fn subtype_report(
    system: &Clustering,
    gold: &GoldAnnotation,
    doc: &Document,
) -> BTreeMap<ConflationSubkind, usize> {
    let (span_fixed, _) = fix_span_errors(system, gold, doc);
    let instances = categorize(&span_fixed, gold.anaphoric());
    subtype_conflations(&instances, doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span(i: usize) -> Span {
        Span::new(i, i)
    }

    fn clustering(groups: &[&[usize]]) -> Clustering {
        Clustering::new(
            groups
                .iter()
                .map(|g| g.iter().map(|&i| span(i)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn flat_doc(n: usize) -> Document {
        Document::new(
            "d",
            vec![(0..n).map(|i| format!("w{i}")).collect()],
            None,
            None,
        )
        .unwrap()
    }

    fn kinds(instances: &[ErrorInstance]) -> Vec<ErrorKind> {
        instances.iter().map(|e| e.kind).collect()
    }

    #[test]
    fn conflated_and_divided_definitions() {
        let gold = clustering(&[&[0, 1], &[2, 3]]);
        let merged = clustering(&[&[0, 1, 2, 3]]);
        assert_eq!(kinds(&categorize(&merged, &gold)), vec![ErrorKind::ConflatedEntities]);

        let gold2 = clustering(&[&[0, 1, 2, 3]]);
        let divided = clustering(&[&[0, 1], &[2, 3]]);
        assert_eq!(kinds(&categorize(&divided, &gold2)), vec![ErrorKind::DividedEntity]);
    }

    #[test]
    fn extra_mention_and_missing_entity_fixture() {
        // system {{a,b,x}} vs gold {{a,b},{c,d}}
        let gold = clustering(&[&[0, 1], &[2, 3]]);
        let system = clustering(&[&[0, 1, 8]]);
        let instances = categorize(&system, &gold);
        assert_eq!(
            kinds(&instances),
            vec![ErrorKind::ExtraMention, ErrorKind::MissingEntity]
        );
        assert_eq!(
            instances[0].payload,
            ErrorPayload::ExtraMention { span: span(8) }
        );
    }

    #[test]
    fn categorize_gold_vs_gold_is_empty() {
        let gold = clustering(&[&[0, 1], &[2, 3]]);
        assert!(categorize(&gold, &gold).is_empty());
    }

    #[test]
    fn fix_conflated_splits_along_gold() {
        let gold = clustering(&[&[0, 1], &[2, 3]]);
        let merged = clustering(&[&[0, 1, 2, 3]]);
        assert_eq!(fix(&merged, &gold, ErrorKind::ConflatedEntities), gold);
        // non-gold span in the conflated cluster is dropped
        let with_extra = clustering(&[&[0, 1, 2, 3, 9]]);
        assert_eq!(fix(&with_extra, &gold, ErrorKind::ConflatedEntities), gold);
    }

    #[test]
    fn fix_missing_entity_inserts_whole_cluster() {
        let gold = clustering(&[&[0, 1], &[2, 3]]);
        let system = clustering(&[&[0, 1]]);
        assert_eq!(fix(&system, &gold, ErrorKind::MissingEntity), gold);
    }

    #[test]
    fn fix_missing_mention_joins_siblings() {
        let gold = clustering(&[&[0, 1, 2]]);
        let system = clustering(&[&[0, 1, 9]]);
        let fixed = fix(&system, &gold, ErrorKind::MissingMention);
        assert_eq!(fixed, clustering(&[&[0, 1, 2, 9]]));
    }

    #[test]
    fn fixes_are_idempotent_and_zero_their_category() {
        let gold = clustering(&[&[0, 1], &[2, 3], &[4, 5, 6]]);
        let system = clustering(&[&[0, 1, 2, 3], &[4, 8], &[9, 10]]);
        for kind in FIX_ORDER {
            let once = fix(&system, &gold, kind);
            assert_eq!(fix(&once, &gold, kind), once, "{kind:?} not idempotent");
            assert!(
                categorize(&once, &gold).iter().all(|e| e.kind != kind),
                "{kind:?} not zeroed"
            );
        }
    }

    #[test]
    fn all_fixes_reach_gold() {
        let doc = flat_doc(16);
        let gold_c = clustering(&[&[0, 1], &[2, 3], &[4, 5, 6]]);
        let gold = GoldAnnotation::from_anaphoric(gold_c.clone()).unwrap();
        let system = clustering(&[&[0, 2, 8], &[1, 9], &[10, 11], &[4, 5]]);
        assert_eq!(fix_all(&system, &gold, &doc), gold_c);
    }

    #[test]
    fn span_fix_remaps_unique_overlap() {
        // system span (3,5) overlaps gold (3,4) uniquely -> remapped
        let doc = flat_doc(10);
        let gold_c = Clustering::new(vec![vec![Span::new(0, 0), Span::new(3, 4)]]).unwrap();
        let gold = GoldAnnotation::from_anaphoric(gold_c.clone()).unwrap();
        let system = Clustering::new(vec![vec![Span::new(0, 0), Span::new(3, 5)]]).unwrap();
        let (fixed, errors) = fix_span_errors(&system, &gold, &doc);
        assert_eq!(fixed, gold_c);
        assert_eq!(errors.len(), 1);
        assert_eq!(
            errors[0].payload,
            ErrorPayload::SpanRemap {
                from: Span::new(3, 5),
                to: Span::new(3, 4)
            }
        );
    }

    #[test]
    fn span_fix_leaves_exact_and_ambiguous_spans() {
        let doc = flat_doc(10);
        // two unmatched gold mentions overlap the system span: ambiguous
        let gold_c = Clustering::new(vec![vec![
            Span::new(2, 3),
            Span::new(4, 5),
        ]])
        .unwrap();
        let gold = GoldAnnotation::from_anaphoric(gold_c).unwrap();
        let system = Clustering::new(vec![vec![Span::new(3, 4), Span::new(8, 8)]]).unwrap();
        let (fixed, errors) = fix_span_errors(&system, &gold, &doc);
        assert_eq!(fixed, system);
        assert!(errors.is_empty());
        // an exact gold span is untouched
        let exact = Clustering::new(vec![vec![Span::new(2, 3), Span::new(8, 8)]]).unwrap();
        let gold2 = GoldAnnotation::from_anaphoric(
            Clustering::new(vec![vec![Span::new(2, 3), Span::new(4, 5)]]).unwrap(),
        )
        .unwrap();
        let (fixed2, errors2) = fix_span_errors(&exact, &gold2, &doc);
        assert_eq!(fixed2, exact);
        assert!(errors2.is_empty());
    }

    #[test]
    fn span_fix_reaches_fixpoint() {
        let doc = flat_doc(12);
        let gold_c = Clustering::new(vec![vec![Span::new(0, 1), Span::new(2, 3)]]).unwrap();
        let gold = GoldAnnotation::from_anaphoric(gold_c.clone()).unwrap();
        // (1,2) overlaps both golds at first and is skipped as ambiguous;
        // once (3,4) claims (2,3), a second pass resolves (1,2) to (0,1)
        let system = Clustering::new(vec![vec![Span::new(1, 2), Span::new(3, 4)]]).unwrap();
        let (fixed, errors) = fix_span_errors(&system, &gold, &doc);
        assert_eq!(fixed, gold_c);
        assert_eq!(errors.len(), 2);
        let (fixed_again, more) = fix_span_errors(&fixed, &gold, &doc);
        assert_eq!(fixed, fixed_again);
        assert!(more.is_empty());
    }

    #[test]
    fn delta_report_identity_is_all_zero() {
        let doc = flat_doc(8);
        let gold_c = clustering(&[&[0, 1], &[2, 3]]);
        let gold = GoldAnnotation::from_anaphoric(gold_c.clone()).unwrap();
        let report = delta_f1_report(&gold_c, &gold, &doc);
        assert_eq!(report.baseline_f1, 1.0);
        assert!(report.counts.values().all(|&n| n == 0));
        assert!(report.deltas.values().all(|&d| d == 0.0));
    }

    #[test]
    fn delta_report_conflated_fixture() {
        let doc = flat_doc(8);
        let gold_c = clustering(&[&[0, 1], &[2, 3]]);
        let gold = GoldAnnotation::from_anaphoric(gold_c.clone()).unwrap();
        let system = clustering(&[&[0, 1, 2, 3]]);
        let report = delta_f1_report(&system, &gold, &doc);
        assert_eq!(report.counts[&ErrorKind::ConflatedEntities], 1);
        let expected = 1.0 - report.span_fixed_f1;
        assert!((report.deltas[&ErrorKind::ConflatedEntities] - expected).abs() < 1e-12);
        assert_eq!(report.baseline_f1, report.span_fixed_f1);
    }

    fn tagged_doc(tokens: &[(&str, &str)]) -> Document {
        Document::new(
            "d",
            vec![tokens.iter().map(|(w, _)| w.to_string()).collect()],
            Some(vec![tokens.iter().map(|(_, p)| p.to_string()).collect()]),
            None,
        )
        .unwrap()
    }

    #[test]
    fn pronoun_pair_classified_by_tag_or_deixis() {
        let doc = tagged_doc(&[
            ("their", "PRP$"),
            ("return", "NN"),
            ("Macao", "NNP"),
            ("regions", "NNS"),
        ]);
        assert_eq!(
            classify_pair(&doc, &Span::new(0, 0), &Span::new(2, 3)),
            ConflationSubkind::Pronoun
        );
        let doc2 = tagged_doc(&[("there", "RB"), ("Disney", "NNP")]);
        assert_eq!(
            classify_pair(&doc2, &Span::new(0, 0), &Span::new(1, 1)),
            ConflationSubkind::Pronoun
        );
    }

    #[test]
    fn exact_match_pair() {
        let doc = tagged_doc(&[("Disney", "NNP"), ("visited", "VBD"), ("disney", "NNP")]);
        assert_eq!(
            classify_pair(&doc, &Span::new(0, 0), &Span::new(2, 2)),
            ConflationSubkind::ExactMatch
        );
    }

    #[test]
    fn head_match_pair_with_postmodified_np() {
        let doc = tagged_doc(&[
            ("Ten", "CD"),
            ("landmark", "NN"),
            ("buildings", "NNS"),
            ("located", "VBN"),
            ("on", "IN"),
            ("Hong", "NNP"),
            ("Kong", "NNP"),
            ("Island", "NNP"),
            ("those", "DT"),
            ("private", "JJ"),
            (",", ","),
            ("er", "UH"),
            (",", ","),
            ("buildings", "NNS"),
        ]);
        assert_eq!(head_token(&doc, &Span::new(0, 7)), "buildings");
        assert_eq!(head_token(&doc, &Span::new(8, 13)), "buildings");
        assert_eq!(
            classify_pair(&doc, &Span::new(0, 7), &Span::new(8, 13)),
            ConflationSubkind::HeadMatch
        );
    }

    #[test]
    fn other_match_and_semantic_fallback() {
        let doc = tagged_doc(&[
            ("Dr.", "NNP"),
            ("Andy", "NNP"),
            ("Henry", "NNP"),
            ("Dr.", "NNP"),
            ("Mann", "NNP"),
            ("the", "DT"),
            ("harbor", "NN"),
        ]);
        assert_eq!(
            classify_pair(&doc, &Span::new(0, 2), &Span::new(3, 4)),
            ConflationSubkind::OtherMatch
        );
        assert_eq!(
            classify_pair(&doc, &Span::new(1, 2), &Span::new(5, 6)),
            ConflationSubkind::SemanticOrOther
        );
    }

    #[test]
    fn subtype_counts_use_closest_cross_pair() {
        let doc = tagged_doc(&[
            ("Disney", "NNP"),
            ("meets", "VBZ"),
            ("fans", "NNS"),
            ("near", "IN"),
            ("Disney", "NNP"),
            ("it", "PRP"),
        ]);
        let gold = Clustering::new(vec![
            vec![Span::new(0, 0), Span::new(2, 2)],
            vec![Span::new(4, 4), Span::new(5, 5)],
        ])
        .unwrap();
        let system = Clustering::new(vec![vec![
            Span::new(0, 0),
            Span::new(4, 4),
            Span::new(5, 5),
        ]])
        .unwrap();
        let instances = categorize(&system, &gold);
        let counts = subtype_conflations(&instances, &doc);
        // closest cross pair is (0,0) vs (4,4): Disney/Disney, not Disney/it
        assert_eq!(counts[&ConflationSubkind::ExactMatch], 1);
        assert_eq!(counts.values().sum::<usize>(), 1);
    }
}

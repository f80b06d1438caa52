//! Shared data model: documents, token spans, clusterings, gold annotation.
//!
//! Spans are inclusive token intervals over document-level 0-based indices.
//! Sentence-local exclusive-end triples used by the JSON corpus format are
//! converted at the parse boundary so one convention holds everywhere.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{CorefError, Result};

/// Inclusive token interval `[start, end]` in document-level indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    /// Panics if `end < start`; use for literals and trusted indices.
    pub fn new(start: usize, end: usize) -> Self {
        assert!(start <= end, "span end {end} before start {start}");
        Span { start, end }
    }

    pub fn width(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start <= other.end && other.start <= self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}..{}]", self.start, self.end)
    }
}

/// Labeled constituent span (document-level indices, within one sentence).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ParseSpan {
    pub span: Span,
    pub label: String,
}

/// A tokenized document with optional POS and constituency layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    doc_id: String,
    sentences: Vec<Vec<String>>,
    pos_tags: Option<Vec<Vec<String>>>,
    parse_spans: Option<Vec<ParseSpan>>,
    /// Prefix sums of sentence lengths; last entry is the token count.
    offsets: Vec<usize>,
}

impl Document {
    pub fn new(
        doc_id: impl Into<String>,
        sentences: Vec<Vec<String>>,
        pos_tags: Option<Vec<Vec<String>>>,
        parse_spans: Option<Vec<ParseSpan>>,
    ) -> Result<Self> {
        let doc_id = doc_id.into();
        let mut offsets = Vec::with_capacity(sentences.len() + 1);
        let mut total = 0usize;
        offsets.push(0);
        for s in &sentences {
            total += s.len();
            offsets.push(total);
        }
        if let Some(tags) = &pos_tags {
            if tags.len() != sentences.len()
                || tags.iter().zip(&sentences).any(|(t, s)| t.len() != s.len())
            {
                return Err(CorefError::doc(&doc_id, "POS layer shape differs from tokens"));
            }
        }
        // normalize: an empty optional layer is the same as no layer
        let pos_tags = pos_tags.filter(|t| t.iter().any(|s| !s.is_empty()));
        let mut parse_spans = parse_spans.filter(|p| !p.is_empty());
        let doc = Document {
            doc_id,
            sentences,
            pos_tags,
            parse_spans: None,
            offsets,
        };
        if let Some(spans) = parse_spans.take() {
            let mut canon: Vec<ParseSpan> = Vec::with_capacity(spans.len());
            for p in spans {
                doc.check_span(&p.span)?;
                if doc.sentence_of(p.span.start) != doc.sentence_of(p.span.end) {
                    return Err(CorefError::doc(
                        doc.doc_id.clone(),
                        format!("parse span {} crosses a sentence boundary", p.span),
                    ));
                }
                canon.push(p);
            }
            canon.sort();
            canon.dedup();
            return Ok(Document {
                parse_spans: Some(canon),
                ..doc
            });
        }
        Ok(doc)
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn sentences(&self) -> &[Vec<String>] {
        &self.sentences
    }

    pub fn pos_tags(&self) -> Option<&[Vec<String>]> {
        self.pos_tags.as_deref()
    }

    pub fn parse_spans(&self) -> Option<&[ParseSpan]> {
        self.parse_spans.as_deref()
    }

    pub fn token_count(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Document-level index of the first token of sentence `i`.
    pub fn sentence_offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    /// Index of the sentence containing document-level token `tok`.
    pub fn sentence_of(&self, tok: usize) -> usize {
        debug_assert!(tok < self.token_count());
        self.offsets.partition_point(|&o| o <= tok) - 1
    }

    pub fn token(&self, tok: usize) -> &str {
        let s = self.sentence_of(tok);
        &self.sentences[s][tok - self.offsets[s]]
    }

    pub fn pos_of(&self, tok: usize) -> Option<&str> {
        let tags = self.pos_tags.as_ref()?;
        let s = self.sentence_of(tok);
        Some(&tags[s][tok - self.offsets[s]])
    }

    pub fn check_span(&self, span: &Span) -> Result<()> {
        if span.end >= self.token_count() {
            return Err(CorefError::doc(
                self.doc_id.clone(),
                format!("span {} out of range (T = {})", span, self.token_count()),
            ));
        }
        Ok(())
    }

    pub fn span_in_one_sentence(&self, span: &Span) -> bool {
        span.end < self.token_count() && self.sentence_of(span.start) == self.sentence_of(span.end)
    }

    /// Convert a sentence-local, exclusive-end triple to a document-level span.
    pub fn span_from_local(&self, sent: usize, start: usize, end_excl: usize) -> Result<Span> {
        let fail = |msg: String| Err(CorefError::doc(self.doc_id.clone(), msg));
        if sent >= self.sentences.len() {
            return fail(format!("sentence index {sent} out of range"));
        }
        let len = self.sentences[sent].len();
        if start >= end_excl || end_excl > len {
            return fail(format!(
                "mention [{sent}, {start}, {end_excl}) out of range in {len}-token sentence"
            ));
        }
        let base = self.offsets[sent];
        Ok(Span::new(base + start, base + end_excl - 1))
    }

    /// Inverse of [`span_from_local`]: `(sentence, start, end_exclusive)`.
    pub fn span_to_local(&self, span: &Span) -> Result<(usize, usize, usize)> {
        self.check_span(span)?;
        if !self.span_in_one_sentence(span) {
            return Err(CorefError::doc(
                self.doc_id.clone(),
                format!("span {} crosses a sentence boundary", span),
            ));
        }
        let sent = self.sentence_of(span.start);
        let base = self.offsets[sent];
        Ok((sent, span.start - base, span.end - base + 1))
    }

    /// Space-joined token text of the span.
    pub fn surface(&self, span: &Span) -> String {
        (span.start..=span.end)
            .map(|t| self.token(t))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn surface_folded(&self, span: &Span) -> String {
        self.surface(span).to_lowercase()
    }
}

/// A set of disjoint entity clusters, each a non-empty set of spans.
///
/// Stored in canonical form (spans sorted within clusters, clusters sorted by
/// first span) so equality is structural and serialization is byte-stable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Clustering {
    clusters: Vec<Vec<Span>>,
}

impl Clustering {
    /// Builds a clustering, deduplicating spans within a cluster and rejecting
    /// a span shared across clusters.
    pub fn new(clusters: Vec<Vec<Span>>) -> Result<Self> {
        let mut seen: BTreeSet<Span> = BTreeSet::new();
        let mut canon: Vec<Vec<Span>> = Vec::with_capacity(clusters.len());
        for mut c in clusters {
            c.sort();
            c.dedup();
            if c.is_empty() {
                continue;
            }
            for s in &c {
                if !seen.insert(*s) {
                    return Err(CorefError::invalid(format!(
                        "span {s} appears in more than one cluster"
                    )));
                }
            }
            canon.push(c);
        }
        canon.sort();
        Ok(Clustering { clusters: canon })
    }

    pub fn from_sets(clusters: Vec<BTreeSet<Span>>) -> Result<Self> {
        Self::new(clusters.into_iter().map(|c| c.into_iter().collect()).collect())
    }

    pub fn empty() -> Self {
        Clustering::default()
    }

    pub fn clusters(&self) -> &[Vec<Span>] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn spans(&self) -> impl Iterator<Item = Span> + '_ {
        self.clusters.iter().flatten().copied()
    }

    pub fn span_set(&self) -> BTreeSet<Span> {
        self.spans().collect()
    }

    pub fn mention_count(&self) -> usize {
        self.clusters.iter().map(|c| c.len()).sum()
    }

    pub fn contains_span(&self, span: &Span) -> bool {
        self.clusters.iter().any(|c| c.binary_search(span).is_ok())
    }

    /// Index of the cluster containing `span`, if any.
    pub fn cluster_of(&self, span: &Span) -> Option<usize> {
        self.clusters
            .iter()
            .position(|c| c.binary_search(span).is_ok())
    }

    /// Map from span to cluster index, for repeated lookups.
    pub fn span_index(&self) -> BTreeMap<Span, usize> {
        let mut m = BTreeMap::new();
        for (i, c) in self.clusters.iter().enumerate() {
            for s in c {
                m.insert(*s, i);
            }
        }
        m
    }

    /// Copy with all size-1 clusters removed.
    pub fn without_singletons(&self) -> Clustering {
        Clustering {
            clusters: self
                .clusters
                .iter()
                .filter(|c| c.len() >= 2)
                .cloned()
                .collect(),
        }
    }
}

/// Which gold span set an experiment targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoldMode {
    /// Spans that co-refer with at least one other span.
    Anaphoric,
    /// Union of anaphoric mentions and singletons.
    All,
}

/// Gold annotation for one document: anaphoric clusters (all size >= 2) plus
/// the full mention set; singletons are the difference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldAnnotation {
    anaphoric: Clustering,
    all_mentions: BTreeSet<Span>,
}

impl GoldAnnotation {
    pub fn new(anaphoric: Clustering, mut all_mentions: BTreeSet<Span>) -> Result<Self> {
        if let Some(c) = anaphoric.clusters().iter().find(|c| c.len() < 2) {
            return Err(CorefError::invalid(format!(
                "anaphoric cluster {{{}}} has size {} (< 2)",
                c.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", "),
                c.len()
            )));
        }
        all_mentions.extend(anaphoric.spans());
        Ok(GoldAnnotation {
            anaphoric,
            all_mentions,
        })
    }

    /// Annotation with no singleton information (anaphoric mentions only).
    pub fn from_anaphoric(anaphoric: Clustering) -> Result<Self> {
        Self::new(anaphoric, BTreeSet::new())
    }

    pub fn anaphoric(&self) -> &Clustering {
        &self.anaphoric
    }

    pub fn all_mentions(&self) -> &BTreeSet<Span> {
        &self.all_mentions
    }

    pub fn anaphoric_spans(&self) -> BTreeSet<Span> {
        self.anaphoric.span_set()
    }

    pub fn singletons(&self) -> BTreeSet<Span> {
        let ana = self.anaphoric_spans();
        self.all_mentions.difference(&ana).copied().collect()
    }

    pub fn target(&self, mode: GoldMode) -> BTreeSet<Span> {
        match mode {
            GoldMode::Anaphoric => self.anaphoric_spans(),
            GoldMode::All => self.all_mentions.clone(),
        }
    }

    pub fn validate_against(&self, doc: &Document) -> Result<()> {
        for s in &self.all_mentions {
            doc.check_span(s)?;
        }
        Ok(())
    }
}

/// A document paired with its gold annotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedDocument {
    pub doc: Document,
    pub gold: GoldAnnotation,
}

/// An ordered collection of annotated documents.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pub docs: Vec<AnnotatedDocument>,
}

impl Corpus {
    pub fn new(docs: Vec<AnnotatedDocument>) -> Self {
        Corpus { docs }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, doc_id: &str) -> Option<&AnnotatedDocument> {
        self.docs.iter().find(|d| d.doc.doc_id() == doc_id)
    }
}

/// One antecedent decision: `span` links to `antecedent` (dummy when `None`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntecedentDecision {
    pub span: Span,
    pub antecedent: Option<Span>,
    pub score: f64,
}

/// System output for one document at whatever stages are available.
#[derive(Debug, Clone, Default)]
pub struct PredictionSet {
    pub doc_id: String,
    pub candidates: Option<crate::oracle::ScoredCandidateSet>,
    pub decisions: Option<Vec<AntecedentDecision>>,
    pub clustering: Option<Clustering>,
}

impl PredictionSet {
    /// Checks that, when both are present, the clustering is the transitive
    /// closure of the non-dummy decisions (size-1 closures dropped).
    pub fn validate(&self) -> Result<()> {
        let (Some(decisions), Some(clustering)) = (&self.decisions, &self.clustering) else {
            return Ok(());
        };
        let closed = closure_of_decisions(decisions)?;
        if &closed != clustering {
            return Err(CorefError::doc(
                self.doc_id.clone(),
                "clustering is not the transitive closure of the antecedent decisions",
            ));
        }
        Ok(())
    }
}

/// Transitive closure of non-dummy links; size-1 groups are dropped.
pub fn closure_of_decisions(decisions: &[AntecedentDecision]) -> Result<Clustering> {
    let mut ids: BTreeMap<Span, usize> = BTreeMap::new();
    let mut spans: Vec<Span> = Vec::new();
    let id_of = |s: Span, spans: &mut Vec<Span>, ids: &mut BTreeMap<Span, usize>| -> usize {
        *ids.entry(s).or_insert_with(|| {
            spans.push(s);
            spans.len() - 1
        })
    };
    let mut links: Vec<(usize, usize)> = Vec::new();
    for d in decisions {
        let a = id_of(d.span, &mut spans, &mut ids);
        if let Some(ant) = d.antecedent {
            let b = id_of(ant, &mut spans, &mut ids);
            links.push((a, b));
        }
    }
    let mut uf = crate::union_find::UnionFind::new(spans.len());
    for (a, b) in links {
        uf.union(a, b);
    }
    let groups = uf
        .groups()
        .into_iter()
        .filter(|g| g.len() >= 2)
        .map(|g| g.into_iter().map(|i| spans[i]).collect())
        .collect();
    Clustering::new(groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc3() -> Document {
        Document::new(
            "d",
            vec![
                vec!["Alice".into(), "runs".into()],
                vec!["She".into(), "waves".into(), "back".into()],
            ],
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn token_indexing_crosses_sentences() {
        let d = doc3();
        assert_eq!(d.token_count(), 5);
        assert_eq!(d.sentence_of(1), 0);
        assert_eq!(d.sentence_of(2), 1);
        assert_eq!(d.token(2), "She");
        assert_eq!(d.surface(&Span::new(2, 3)), "She waves");
    }

    #[test]
    fn local_doc_conversion_roundtrips() {
        let d = doc3();
        let s = d.span_from_local(1, 0, 2).unwrap();
        assert_eq!(s, Span::new(2, 3));
        assert_eq!(d.span_to_local(&s).unwrap(), (1, 0, 2));
        assert!(d.span_from_local(0, 3, 5).is_err());
        assert!(d.span_from_local(0, 1, 1).is_err());
    }

    #[test]
    fn clustering_rejects_cross_cluster_duplicates() {
        let a = Span::new(0, 0);
        let b = Span::new(1, 1);
        assert!(Clustering::new(vec![vec![a, b], vec![a]]).is_err());
        // duplicate inside one cluster collapses
        let c = Clustering::new(vec![vec![a, a, b]]).unwrap();
        assert_eq!(c.mention_count(), 2);
    }

    #[test]
    fn gold_annotation_derives_singletons() {
        let a = Span::new(0, 0);
        let b = Span::new(1, 1);
        let s = Span::new(3, 4);
        let gold = GoldAnnotation::new(
            Clustering::new(vec![vec![a, b]]).unwrap(),
            [s].into_iter().collect(),
        )
        .unwrap();
        assert_eq!(gold.singletons(), [s].into_iter().collect());
        assert!(gold.all_mentions().contains(&a));
        assert!(GoldAnnotation::from_anaphoric(Clustering::new(vec![vec![a]]).unwrap()).is_err());
    }

    #[test]
    fn decision_closure_drops_unlinked() {
        let s = |i: usize| Span::new(i, i);
        let decisions = vec![
            AntecedentDecision { span: s(1), antecedent: Some(s(0)), score: 1.0 },
            AntecedentDecision { span: s(2), antecedent: Some(s(1)), score: 1.0 },
            AntecedentDecision { span: s(4), antecedent: None, score: 0.0 },
        ];
        let c = closure_of_decisions(&decisions).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.clusters()[0], vec![s(0), s(1), s(2)]);
    }
}

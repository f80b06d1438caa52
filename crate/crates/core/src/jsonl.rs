//! Line-delimited JSON corpus format.
//!
//! One record per line:
//!
//! ```json
//! {"id": "...",
//!  "sentences": [["tok", ...], ...],
//!  "mention_clusters": [[[sent, start, end], ...], ...],
//!  "pos_tags": [["NNP", ...], ...],
//!  "parse_spans": [[sent, start, end, "NP"], ...],
//!  "candidates": [[[sent, start, end], 0.5], ...],
//!  "antecedent_decisions": [[[sent, start, end], [sent, start, end], 0.5], ...]}
//! ```
//!
//! Mentions are `[sentence, start, end)` triples with sentence-local,
//! exclusive ends; they are converted to document-level inclusive spans at
//! this boundary. In gold corpora, size-1 clusters are singletons and larger
//! ones anaphoric entities. `pos_tags` and `parse_spans` are optional layers;
//! `candidates` and `antecedent_decisions` appear in prediction files (a
//! candidate score of `null` encodes the +inf sentinel of gold-added spans).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{CorefError, Result};
use crate::model::{
    AnnotatedDocument, AntecedentDecision, Clustering, Corpus, Document, GoldAnnotation,
    ParseSpan, PredictionSet, Span,
};
use crate::oracle::ScoredCandidateSet;

pub use crate::conll::{Parsed, ParseWarning};

type Triple = (usize, usize, usize);
type RawParseSpan = (usize, usize, usize, String);

#[derive(Debug, Serialize, Deserialize)]
struct RawRecord {
    id: String,
    sentences: Vec<Vec<String>>,
    mention_clusters: Vec<Vec<Triple>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pos_tags: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parse_spans: Option<Vec<RawParseSpan>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    candidates: Option<Vec<(Triple, Option<f64>)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    antecedent_decisions: Option<Vec<(Triple, Option<Triple>, f64)>>,
}

fn records(text: &str) -> Result<Vec<(usize, RawRecord)>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawRecord = serde_json::from_str(line)
            .map_err(|e| CorefError::parse(idx + 1, e.to_string()))?;
        out.push((idx + 1, rec));
    }
    Ok(out)
}

fn document_of(rec: &RawRecord) -> Result<Document> {
    // build a bare document first so span arithmetic can use it
    let bare = Document::new(rec.id.clone(), rec.sentences.clone(), None, None)?;
    let parse_spans = match &rec.parse_spans {
        None => None,
        Some(raw) => {
            let mut spans = Vec::with_capacity(raw.len());
            for (sent, start, end, label) in raw {
                spans.push(ParseSpan {
                    span: bare.span_from_local(*sent, *start, *end)?,
                    label: label.clone(),
                });
            }
            Some(spans)
        }
    };
    Document::new(
        rec.id.clone(),
        rec.sentences.clone(),
        rec.pos_tags.clone(),
        parse_spans,
    )
}

fn clusters_of(rec: &RawRecord, doc: &Document) -> Result<Vec<Vec<Span>>> {
    let mut clusters = Vec::with_capacity(rec.mention_clusters.len());
    for raw in &rec.mention_clusters {
        let mut cluster = Vec::with_capacity(raw.len());
        for (sent, start, end) in raw {
            cluster.push(doc.span_from_local(*sent, *start, *end)?);
        }
        clusters.push(cluster);
    }
    Ok(clusters)
}

/// Parses a gold corpus: size-1 clusters become singletons, larger ones
/// anaphoric entities. Duplicate spans within one cluster are deduplicated
/// with a warning; across clusters they are an error.
pub fn parse_jsonl(text: &str) -> Result<Parsed> {
    let mut docs = Vec::new();
    let mut warnings = Vec::new();
    for (line, rec) in records(text)? {
        let doc = document_of(&rec)?;
        let mut anaphoric: Vec<Vec<Span>> = Vec::new();
        let mut singles: BTreeSet<Span> = BTreeSet::new();
        for mut cluster in clusters_of(&rec, &doc)? {
            let before = cluster.len();
            cluster.sort();
            cluster.dedup();
            if cluster.len() < before {
                warnings.push(ParseWarning {
                    doc_id: rec.id.clone(),
                    line,
                    msg: "duplicate span within a cluster deduplicated".to_string(),
                });
            }
            match cluster.len() {
                0 => {}
                1 => {
                    singles.insert(cluster[0]);
                }
                _ => anaphoric.push(cluster),
            }
        }
        let clustering = Clustering::new(anaphoric)
            .map_err(|e| CorefError::doc(rec.id.clone(), e.to_string()))?;
        let gold = GoldAnnotation::new(clustering, singles)
            .map_err(|e| CorefError::doc(rec.id.clone(), e.to_string()))?;
        docs.push(AnnotatedDocument { doc, gold });
    }
    Ok(Parsed {
        corpus: Corpus::new(docs),
        warnings,
    })
}

/// Serializes a gold corpus; anaphoric clusters first, then singletons as
/// size-1 clusters.
pub fn serialize_jsonl(corpus: &Corpus) -> Result<String> {
    let mut out = String::new();
    for ad in &corpus.docs {
        let doc = &ad.doc;
        let mut clusters: Vec<Vec<Triple>> = Vec::new();
        for cluster in ad.gold.anaphoric().clusters() {
            clusters.push(triples_of(doc, cluster)?);
        }
        for span in ad.gold.singletons() {
            clusters.push(vec![doc.span_to_local(&span)?]);
        }
        let rec = RawRecord {
            id: doc.doc_id().to_string(),
            sentences: doc.sentences().to_vec(),
            mention_clusters: clusters,
            pos_tags: doc.pos_tags().map(|t| t.to_vec()),
            parse_spans: raw_parse_spans(doc)?,
            candidates: None,
            antecedent_decisions: None,
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serialization"));
        out.push('\n');
    }
    Ok(out)
}

fn triples_of(doc: &Document, spans: &[Span]) -> Result<Vec<Triple>> {
    spans.iter().map(|s| doc.span_to_local(s)).collect()
}

fn raw_parse_spans(doc: &Document) -> Result<Option<Vec<RawParseSpan>>> {
    let Some(spans) = doc.parse_spans() else {
        return Ok(None);
    };
    let mut out = Vec::with_capacity(spans.len());
    for p in spans {
        let (sent, start, end) = doc.span_to_local(&p.span)?;
        out.push((sent, start, end, p.label.clone()));
    }
    Ok(Some(out))
}

/// Parses a prediction file: `mention_clusters` is the system clustering
/// as-is (size-1 clusters kept), plus optional candidates and decisions.
pub fn parse_predictions(text: &str) -> Result<Vec<(Document, PredictionSet)>> {
    let mut out = Vec::new();
    for (_, rec) in records(text)? {
        let doc = document_of(&rec)?;
        let clustering = Clustering::new(clusters_of(&rec, &doc)?)
            .map_err(|e| CorefError::doc(rec.id.clone(), e.to_string()))?;
        let candidates = match &rec.candidates {
            None => None,
            Some(raw) => {
                let mut entries = Vec::with_capacity(raw.len());
                for ((sent, start, end), score) in raw {
                    entries.push((
                        doc.span_from_local(*sent, *start, *end)?,
                        score.unwrap_or(f64::INFINITY),
                    ));
                }
                Some(ScoredCandidateSet::new(entries)?)
            }
        };
        let decisions = match &rec.antecedent_decisions {
            None => None,
            Some(raw) => {
                let mut ds = Vec::with_capacity(raw.len());
                for ((s0, s1, s2), ant, score) in raw {
                    let span = doc.span_from_local(*s0, *s1, *s2)?;
                    let antecedent = match ant {
                        Some((a0, a1, a2)) => Some(doc.span_from_local(*a0, *a1, *a2)?),
                        None => None,
                    };
                    ds.push(AntecedentDecision {
                        span,
                        antecedent,
                        score: *score,
                    });
                }
                Some(ds)
            }
        };
        let pred = PredictionSet {
            doc_id: doc.doc_id().to_string(),
            candidates,
            decisions,
            clustering: Some(clustering),
        };
        out.push((doc, pred));
    }
    Ok(out)
}

/// Serializes prediction sets in the corpus record schema.
pub fn serialize_predictions(items: &[(Document, PredictionSet)]) -> Result<String> {
    let mut out = String::new();
    for (doc, pred) in items {
        let clusters = match &pred.clustering {
            Some(c) => c
                .clusters()
                .iter()
                .map(|cl| triples_of(doc, cl))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        let candidates = match &pred.candidates {
            None => None,
            Some(set) => {
                let mut raw = Vec::with_capacity(set.len());
                for (span, score) in set.entries() {
                    let triple = doc.span_to_local(span)?;
                    raw.push((triple, score.is_finite().then_some(*score)));
                }
                Some(raw)
            }
        };
        let decisions = match &pred.decisions {
            None => None,
            Some(ds) => {
                let mut raw = Vec::with_capacity(ds.len());
                for d in ds {
                    let span = doc.span_to_local(&d.span)?;
                    let ant = match &d.antecedent {
                        Some(a) => Some(doc.span_to_local(a)?),
                        None => None,
                    };
                    raw.push((span, ant, d.score));
                }
                Some(raw)
            }
        };
        let rec = RawRecord {
            id: doc.doc_id().to_string(),
            sentences: doc.sentences().to_vec(),
            mention_clusters: clusters,
            pos_tags: doc.pos_tags().map(|t| t.to_vec()),
            parse_spans: raw_parse_spans(doc)?,
            candidates,
            antecedent_decisions: decisions,
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serialization"));
        out.push('\n');
    }
    Ok(out)
}

/// True when the text looks like the column format rather than JSON lines.
pub fn looks_like_conll(text: &str) -> bool {
    text.lines()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| l.trim_start().starts_with("#begin document"))
}

/// Parses either supported corpus format, sniffing by content.
pub fn parse_auto(text: &str) -> Result<Parsed> {
    if looks_like_conll(text) {
        crate::conll::parse_conll(text)
    } else {
        parse_jsonl(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, body: &str) -> String {
        format!("{{\"id\": \"{id}\", {body}}}\n")
    }

    #[test]
    fn singleton_index_conversion() {
        // [[0,0,1]] in a one-sentence doc is the width-1 span at token 0
        let text = record(
            "d1",
            "\"sentences\": [[\"Rain\", \"falls\"]], \"mention_clusters\": [[[0,0,1]]]",
        );
        let parsed = parse_jsonl(&text).unwrap();
        let gold = &parsed.corpus.docs[0].gold;
        assert!(gold.anaphoric().is_empty());
        assert_eq!(gold.singletons(), [Span::new(0, 0)].into_iter().collect());
    }

    #[test]
    fn offset_arithmetic_across_sentences() {
        // sentence lengths 4 and 2: [0,1,3] -> tokens 1..2, [1,0,1] -> token 4
        let text = record(
            "d1",
            "\"sentences\": [[\"a\",\"b\",\"c\",\"d\"],[\"e\",\"f\"]], \
             \"mention_clusters\": [[[0,1,3],[1,0,1]]]",
        );
        let parsed = parse_jsonl(&text).unwrap();
        let gold = &parsed.corpus.docs[0].gold;
        assert_eq!(
            gold.anaphoric().clusters()[0],
            vec![Span::new(1, 2), Span::new(4, 4)]
        );
    }

    #[test]
    fn out_of_range_mention_is_an_error() {
        let text = record(
            "d9",
            "\"sentences\": [[\"a\",\"b\",\"c\",\"d\"]], \"mention_clusters\": [[[0,3,5]]]",
        );
        let err = parse_jsonl(&text).unwrap_err();
        assert!(err.to_string().contains("d9"), "{err}");
    }

    #[test]
    fn duplicate_span_across_clusters_is_an_error() {
        let text = record(
            "d2",
            "\"sentences\": [[\"a\",\"b\",\"c\"]], \
             \"mention_clusters\": [[[0,0,1],[0,1,2]],[[0,0,1],[0,2,3]]]",
        );
        assert!(parse_jsonl(&text).is_err());
    }

    #[test]
    fn duplicate_span_within_cluster_warns() {
        let text = record(
            "d3",
            "\"sentences\": [[\"a\",\"b\"]], \"mention_clusters\": [[[0,0,1],[0,0,1],[0,1,2]]]",
        );
        let parsed = parse_jsonl(&text).unwrap();
        assert_eq!(parsed.warnings.len(), 1);
        assert_eq!(parsed.corpus.docs[0].gold.anaphoric().clusters()[0].len(), 2);
    }

    #[test]
    fn roundtrip_preserves_all_layers() {
        let text = record(
            "d4",
            "\"sentences\": [[\"He\",\"runs\"],[\"He\",\"rests\"]], \
             \"mention_clusters\": [[[0,0,1],[1,0,1]],[[0,1,2]]], \
             \"pos_tags\": [[\"PRP\",\"VBZ\"],[\"PRP\",\"VBZ\"]], \
             \"parse_spans\": [[0,0,1,\"NP\"],[0,0,2,\"S\"]]",
        );
        let parsed = parse_jsonl(&text).unwrap();
        let emitted = serialize_jsonl(&parsed.corpus).unwrap();
        let reparsed = parse_jsonl(&emitted).unwrap();
        assert_eq!(parsed.corpus, reparsed.corpus);
        assert_eq!(emitted, serialize_jsonl(&reparsed.corpus).unwrap());
    }

    #[test]
    fn prediction_candidates_roundtrip_with_infinite_scores() {
        let doc = Document::new(
            "p1",
            vec![vec!["a".into(), "b".into()]],
            None,
            None,
        )
        .unwrap();
        let cands = ScoredCandidateSet::new(vec![
            (Span::new(0, 0), f64::INFINITY),
            (Span::new(1, 1), 0.25),
        ])
        .unwrap();
        let pred = PredictionSet {
            doc_id: "p1".into(),
            candidates: Some(cands.clone()),
            decisions: None,
            clustering: Some(Clustering::empty()),
        };
        let text = serialize_predictions(&[(doc, pred)]).unwrap();
        assert!(text.contains("null"));
        let back = parse_predictions(&text).unwrap();
        assert_eq!(back[0].1.candidates.as_ref().unwrap(), &cands);
    }
}

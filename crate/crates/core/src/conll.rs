//! CoNLL-2012 column text format.
//!
//! Documents are delimited by `#begin document (<name>); part <n>` and
//! `#end document`; one token per row, blank line between sentences. Rows are
//! whitespace-separated columns: word is column 4, POS column 5, parse bit
//! column 6, coreference the last column. Extra columns (lemmas, framesets,
//! speakers, named entities) are ignored. Coreference cells hold `-` or
//! pipe-separated `(id`, `id)`, `(id)` items; brackets pair LIFO per id and
//! must close within their sentence.
//!
//! This format carries no singleton annotation: size-1 chains are rejected
//! into the warning list on parse, and only anaphoric clusters are written on
//! serialization.

use std::collections::BTreeMap;

use crate::error::{CorefError, Result};
use crate::model::{AnnotatedDocument, Clustering, Corpus, Document, GoldAnnotation, ParseSpan, Span};

/// Non-fatal anomaly encountered while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    pub doc_id: String,
    pub line: usize,
    pub msg: String,
}

/// A parsed corpus plus the warnings accumulated along the way.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub corpus: Corpus,
    pub warnings: Vec<ParseWarning>,
}

const MIN_COLUMNS: usize = 5;

struct RowData {
    word: String,
    pos: Option<String>,
    parse_bit: Option<String>,
    coref: String,
    line: usize,
}

pub fn parse_conll(text: &str) -> Result<Parsed> {
    let mut docs: Vec<AnnotatedDocument> = Vec::new();
    let mut warnings: Vec<ParseWarning> = Vec::new();

    let mut lines = text.lines().enumerate().peekable();
    while let Some((idx, line)) = lines.next() {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let Some(rest) = trimmed.strip_prefix("#begin document") else {
            return Err(CorefError::parse(
                lineno,
                format!("expected '#begin document', found {trimmed:?}"),
            ));
        };
        let (name, part) = parse_begin_header(rest, lineno)?;
        let doc_id = compose_doc_id(&name, part);

        let mut sentences: Vec<Vec<RowData>> = Vec::new();
        let mut current: Vec<RowData> = Vec::new();
        let mut ncols: Option<usize> = None;
        let mut ended = false;
        for (idx, line) in lines.by_ref() {
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed == "#end document" {
                ended = true;
                break;
            }
            if trimmed.is_empty() {
                if !current.is_empty() {
                    sentences.push(std::mem::take(&mut current));
                    ncols = None;
                }
                continue;
            }
            if trimmed.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = trimmed.split_whitespace().collect();
            if cols.len() < MIN_COLUMNS {
                return Err(CorefError::parse(
                    lineno,
                    format!("row has {} columns; at least {MIN_COLUMNS} required", cols.len()),
                ));
            }
            match ncols {
                None => ncols = Some(cols.len()),
                Some(n) if n != cols.len() => {
                    return Err(CorefError::parse(
                        lineno,
                        format!("ragged columns: row has {}, sentence started with {n}", cols.len()),
                    ));
                }
                Some(_) => {}
            }
            let n = cols.len();
            current.push(RowData {
                word: cols[3].to_string(),
                pos: (n >= 6).then(|| cols[4].to_string()),
                parse_bit: (n >= 7).then(|| cols[5].to_string()),
                coref: cols[n - 1].to_string(),
                line: lineno,
            });
        }
        if !current.is_empty() {
            sentences.push(current);
        }
        if !ended {
            return Err(CorefError::parse(
                lineno,
                format!("document {doc_id} has no '#end document'"),
            ));
        }
        docs.push(assemble_document(doc_id, sentences, &mut warnings)?);
    }
    Ok(Parsed {
        corpus: Corpus::new(docs),
        warnings,
    })
}

fn parse_begin_header(rest: &str, lineno: usize) -> Result<(String, usize)> {
    let rest = rest.trim();
    let bad = || CorefError::parse(lineno, format!("malformed document header {rest:?}"));
    let inner = rest.strip_prefix('(').ok_or_else(bad)?;
    let close = inner.rfind(')').ok_or_else(bad)?;
    let name = inner[..close].to_string();
    let tail = inner[close + 1..].trim();
    if tail.is_empty() {
        return Ok((name, 0));
    }
    let part = tail
        .strip_prefix(';')
        .map(str::trim)
        .and_then(|t| t.strip_prefix("part"))
        .map(str::trim)
        .and_then(|t| t.parse::<usize>().ok())
        .ok_or_else(bad)?;
    Ok((name, part))
}

fn compose_doc_id(name: &str, part: usize) -> String {
    if part == 0 {
        name.to_string()
    } else {
        format!("{name}; part {part:03}")
    }
}

fn split_doc_id(doc_id: &str) -> (String, usize) {
    if let Some(pos) = doc_id.rfind("; part ") {
        let (name, tail) = doc_id.split_at(pos);
        if let Ok(part) = tail["; part ".len()..].parse::<usize>() {
            return (name.to_string(), part);
        }
    }
    (doc_id.to_string(), 0)
}

fn assemble_document(
    doc_id: String,
    rows: Vec<Vec<RowData>>,
    warnings: &mut Vec<ParseWarning>,
) -> Result<AnnotatedDocument> {
    let mut sentences: Vec<Vec<String>> = Vec::with_capacity(rows.len());
    let mut pos_tags: Vec<Vec<String>> = Vec::with_capacity(rows.len());
    let mut any_pos = false;
    let mut parse_spans: Vec<ParseSpan> = Vec::new();
    // cluster id -> spans, in first-open order
    let mut chains: BTreeMap<u64, Vec<(Span, usize)>> = BTreeMap::new();

    let mut offset = 0usize;
    for row_sent in &rows {
        let mut tokens = Vec::with_capacity(row_sent.len());
        let mut tags = Vec::with_capacity(row_sent.len());
        // (label, start) for parse; (id, start, line) for coreference
        let mut parse_stack: Vec<(String, usize)> = Vec::new();
        let mut coref_stack: Vec<(u64, usize, usize)> = Vec::new();
        for (i, row) in row_sent.iter().enumerate() {
            let tok = offset + i;
            tokens.push(row.word.clone());
            match &row.pos {
                Some(p) => {
                    if p != "-" {
                        any_pos = true;
                    }
                    tags.push(p.clone());
                }
                None => tags.push("-".to_string()),
            }
            if let Some(bit) = &row.parse_bit {
                read_parse_bit(bit, tok, row.line, &mut parse_stack, &mut parse_spans)?;
            }
            read_coref_cell(&row.coref, tok, row.line, &mut coref_stack, &mut chains)?;
        }
        if let Some((label, start)) = parse_stack.last() {
            return Err(CorefError::parse(
                row_sent.last().unwrap().line,
                format!("parse bracket ({label} opened at token {start} never closed"),
            ));
        }
        if let Some((id, _, line)) = coref_stack.last() {
            return Err(CorefError::parse(
                *line,
                format!("coreference bracket ({id} opened at line {line} never closed"),
            ));
        }
        offset += row_sent.len();
        sentences.push(tokens);
        pos_tags.push(tags);
    }

    let doc = Document::new(
        doc_id.clone(),
        sentences,
        any_pos.then_some(pos_tags),
        (!parse_spans.is_empty()).then_some(parse_spans),
    )?;

    let mut clusters: Vec<Vec<Span>> = Vec::new();
    for (id, mut spans) in chains {
        spans.sort();
        let before = spans.len();
        spans.dedup_by_key(|(s, _)| *s);
        if spans.len() < before {
            warnings.push(ParseWarning {
                doc_id: doc_id.clone(),
                line: spans[0].1,
                msg: format!("duplicate span in chain {id} deduplicated"),
            });
        }
        if spans.len() == 1 {
            warnings.push(ParseWarning {
                doc_id: doc_id.clone(),
                line: spans[0].1,
                msg: format!("chain {id} has a single mention; dropped"),
            });
            continue;
        }
        clusters.push(spans.into_iter().map(|(s, _)| s).collect());
    }
    let clustering = Clustering::new(clusters)
        .map_err(|e| CorefError::doc(doc_id.clone(), e.to_string()))?;
    let gold = GoldAnnotation::from_anaphoric(clustering)
        .map_err(|e| CorefError::doc(doc_id.clone(), e.to_string()))?;
    Ok(AnnotatedDocument { doc, gold })
}

fn read_parse_bit(
    bit: &str,
    tok: usize,
    line: usize,
    stack: &mut Vec<(String, usize)>,
    out: &mut Vec<ParseSpan>,
) -> Result<()> {
    if bit == "-" {
        return Ok(());
    }
    let mut chars = bit.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '(' => {
                let mut label = String::new();
                while let Some(&n) = chars.peek() {
                    if n == '(' || n == ')' || n == '*' {
                        break;
                    }
                    label.push(n);
                    chars.next();
                }
                if label.is_empty() {
                    return Err(CorefError::parse(line, "parse bracket with empty label"));
                }
                stack.push((label, tok));
            }
            '*' => {}
            ')' => {
                let Some((label, start)) = stack.pop() else {
                    return Err(CorefError::parse(line, "unbalanced ')' in parse column"));
                };
                out.push(ParseSpan {
                    span: Span::new(start, tok),
                    label,
                });
            }
            other => {
                return Err(CorefError::parse(
                    line,
                    format!("unexpected {other:?} in parse column"),
                ));
            }
        }
    }
    Ok(())
}

fn read_coref_cell(
    cell: &str,
    tok: usize,
    line: usize,
    stack: &mut Vec<(u64, usize, usize)>,
    chains: &mut BTreeMap<u64, Vec<(Span, usize)>>,
) -> Result<()> {
    if cell == "-" || cell == "_" {
        return Ok(());
    }
    for item in cell.split('|') {
        let opens = item.starts_with('(');
        let closes = item.ends_with(')');
        let digits = item.trim_start_matches('(').trim_end_matches(')');
        let id: u64 = digits.parse().map_err(|_| {
            CorefError::parse(line, format!("malformed coreference item {item:?}"))
        })?;
        match (opens, closes) {
            (true, true) => {
                chains.entry(id).or_default().push((Span::new(tok, tok), line));
            }
            (true, false) => stack.push((id, tok, line)),
            (false, true) => {
                // LIFO per id
                let Some(pos) = stack.iter().rposition(|(open_id, _, _)| *open_id == id) else {
                    return Err(CorefError::parse(
                        line,
                        format!("closing bracket {id}) without matching ({id}"),
                    ));
                };
                let (_, start, _) = stack.remove(pos);
                chains.entry(id).or_default().push((Span::new(start, tok), line));
            }
            (false, false) => {
                return Err(CorefError::parse(
                    line,
                    format!("malformed coreference item {item:?}"),
                ));
            }
        }
    }
    Ok(())
}

/// Writes the anaphoric clusters of each document in the column format.
pub fn serialize_conll(corpus: &Corpus) -> Result<String> {
    let mut out = String::new();
    for ad in &corpus.docs {
        serialize_document(ad, &mut out)?;
    }
    Ok(out)
}

fn serialize_document(ad: &AnnotatedDocument, out: &mut String) -> Result<()> {
    use std::fmt::Write;

    let doc = &ad.doc;
    let (name, part) = split_doc_id(doc.doc_id());
    writeln!(out, "#begin document ({name}); part {part:03}").unwrap();

    let t = doc.token_count();
    let mut opens: Vec<Vec<(usize, usize)>> = vec![Vec::new(); t]; // (end, id) at start token
    let mut singles: Vec<Vec<usize>> = vec![Vec::new(); t];
    let mut closes: Vec<Vec<(usize, usize)>> = vec![Vec::new(); t]; // (start, id) at end token
    for (id, cluster) in ad.gold.anaphoric().clusters().iter().enumerate() {
        for span in cluster {
            doc.check_span(span)?;
            if !doc.span_in_one_sentence(span) {
                return Err(CorefError::doc(
                    doc.doc_id(),
                    format!("span {span} crosses a sentence boundary"),
                ));
            }
            if span.width() == 1 {
                singles[span.start].push(id);
            } else {
                opens[span.start].push((span.end, id));
                closes[span.end].push((span.start, id));
            }
        }
    }

    let mut parse_opens: Vec<Vec<(usize, String)>> = vec![Vec::new(); t];
    let mut parse_close_count: Vec<usize> = vec![0; t];
    if let Some(spans) = doc.parse_spans() {
        for p in spans {
            parse_opens[p.span.start].push((p.span.end, p.label.clone()));
            parse_close_count[p.span.end] += 1;
        }
    }

    for (si, sentence) in doc.sentences().iter().enumerate() {
        let base = doc.sentence_offset(si);
        for (wi, word) in sentence.iter().enumerate() {
            let tok = base + wi;
            let pos = doc.pos_of(tok).unwrap_or("-");
            let parse_bit = if doc.parse_spans().is_some() {
                let mut bit = String::new();
                // outermost first: longer spans, then label descending for stability
                let mut po = parse_opens[tok].clone();
                po.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)));
                for (_, label) in &po {
                    bit.push('(');
                    bit.push_str(label);
                }
                bit.push('*');
                bit.push_str(&")".repeat(parse_close_count[tok]));
                bit
            } else {
                "-".to_string()
            };
            let coref = {
                let mut items: Vec<String> = Vec::new();
                let mut o = opens[tok].clone();
                o.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
                items.extend(o.iter().map(|(_, id)| format!("({id}")));
                let mut s = singles[tok].clone();
                s.sort_unstable();
                items.extend(s.iter().map(|id| format!("({id})")));
                let mut c = closes[tok].clone();
                c.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
                items.extend(c.iter().map(|(_, id)| format!("{id})")));
                if items.is_empty() {
                    "-".to_string()
                } else {
                    items.join("|")
                }
            };
            writeln!(
                out,
                "{name}   {part}   {wi}   {word}   {pos}   {parse_bit}   -   -   -   -   *   {coref}"
            )
            .unwrap();
        }
        out.push('\n');
    }
    out.push_str("#end document\n");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(name: &str, wi: usize, word: &str, coref: &str) -> String {
        format!("{name} 0 {wi} {word} NN * - - - - * {coref}")
    }

    #[test]
    fn minimal_bracket_pairing() {
        // `(0` then `0)` open and close one 2-token span
        let text = format!(
            "#begin document (t); part 000\n{}\n{}\n{}\n\n#end document\n",
            row("t", 0, "New", "(0"),
            row("t", 1, "York", "0)"),
            row("t", 2, "it", "(0)")
        );
        let parsed = parse_conll(&text).unwrap();
        assert_eq!(parsed.corpus.len(), 1);
        let gold = &parsed.corpus.docs[0].gold;
        assert_eq!(gold.anaphoric().len(), 1);
        assert_eq!(
            gold.anaphoric().clusters()[0],
            vec![Span::new(0, 1), Span::new(2, 2)]
        );
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn nested_brackets_from_one_cell() {
        // `(0)|(1` on token 0 plus `1)` on token 2: width-1 span in cluster 0
        // nested inside a 3-token span in cluster 1
        let text = format!(
            "#begin document (t); part 000\n{}\n{}\n{}\n{}\n\n#end document\n",
            row("t", 0, "The", "(0)|(1"),
            row("t", 1, "big", "(0)"),
            row("t", 2, "dog", "1)"),
            row("t", 3, "it", "(1)")
        );
        let parsed = parse_conll(&text).unwrap();
        let gold = &parsed.corpus.docs[0].gold;
        let clusters = gold.anaphoric().clusters();
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0], vec![Span::new(0, 0), Span::new(1, 1)]);
        assert_eq!(clusters[1], vec![Span::new(0, 2), Span::new(3, 3)]);
    }

    #[test]
    fn unclosed_bracket_names_id_and_line() {
        let text = format!(
            "#begin document (t); part 000\n{}\n{}\n\n#end document\n",
            row("t", 0, "a", "(0"),
            row("t", 1, "b", "-")
        );
        let err = parse_conll(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(0"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn ragged_columns_rejected() {
        let text = "#begin document (t); part 000\n\
                    t 0 0 a NN * - - - - * -\n\
                    t 0 1 b NN -\n\n#end document\n";
        let err = parse_conll(text).unwrap_err();
        assert!(err.to_string().contains("ragged"), "{err}");
    }

    #[test]
    fn single_mention_chain_goes_to_warnings() {
        let text = format!(
            "#begin document (t); part 000\n{}\n{}\n{}\n\n#end document\n",
            row("t", 0, "a", "(7)"),
            row("t", 1, "b", "(2"),
            row("t", 2, "c", "2)|(2"),
        );
        // chain 2's second open never closes
        assert!(parse_conll(&text).is_err());
        let ok = format!(
            "#begin document (t); part 000\n{}\n{}\n{}\n\n#end document\n",
            row("t", 0, "a", "(7)"),
            row("t", 1, "b", "(2)"),
            row("t", 2, "c", "(2)"),
        );
        let parsed = parse_conll(&ok).unwrap();
        assert_eq!(parsed.warnings.len(), 1);
        assert!(parsed.warnings[0].msg.contains("chain 7"));
        assert_eq!(parsed.corpus.docs[0].gold.anaphoric().len(), 1);
    }

    #[test]
    fn parse_bits_reconstruct_constituents() {
        let text = "#begin document (t); part 000\n\
                    t 0 0 He PRP (TOP(S(NP*) - - - - * -\n\
                    t 0 1 runs VBZ (VP*))) - - - - * -\n\n#end document\n";
        let parsed = parse_conll(text).unwrap();
        let doc = &parsed.corpus.docs[0].doc;
        let spans = doc.parse_spans().unwrap();
        let labels: Vec<(&str, Span)> =
            spans.iter().map(|p| (p.label.as_str(), p.span)).collect();
        assert!(labels.contains(&("NP", Span::new(0, 0))));
        assert!(labels.contains(&("VP", Span::new(1, 1))));
        assert!(labels.contains(&("S", Span::new(0, 1))));
        assert!(labels.contains(&("TOP", Span::new(0, 1))));
        assert_eq!(doc.pos_of(1), Some("VBZ"));
    }

    #[test]
    fn roundtrip_nested_fixture() {
        let text = format!(
            "#begin document (t); part 000\n{}\n{}\n{}\n{}\n\n#end document\n",
            row("t", 0, "The", "(0)|(1"),
            row("t", 1, "big", "(0)"),
            row("t", 2, "dog", "1)"),
            row("t", 3, "it", "(1)")
        );
        let parsed = parse_conll(&text).unwrap();
        let emitted = serialize_conll(&parsed.corpus).unwrap();
        let reparsed = parse_conll(&emitted).unwrap();
        assert_eq!(parsed.corpus, reparsed.corpus);
        // normalized text is a fixpoint
        assert_eq!(emitted, serialize_conll(&reparsed.corpus).unwrap());
    }
}

//! Seeded synthetic-corpus generator. Gold clusters are built from repeated
//! name mentions and pronoun placeholders, singletons from common-noun
//! phrases; documents are generated independently from per-document seeds so
//! the corpus is identical however the loop is scheduled.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::exec;
use crate::model::{AnnotatedDocument, Clustering, Corpus, Document, GoldAnnotation, ParseSpan, Span};

const FIRST_NAMES: [&str; 16] = [
    "Ada", "Boris", "Carla", "Dmitri", "Elena", "Farid", "Greta", "Hugh", "Irene", "Jonas",
    "Kira", "Lars", "Mona", "Nils", "Olga", "Petra",
];

const LAST_NAMES: [&str; 10] = [
    "Albright", "Becker", "Cho", "Duarte", "Eklund", "Fontaine", "Grieg", "Halvorsen", "Ito",
    "Jansen",
];

const PRONOUN_CHOICES: [&str; 3] = ["he", "she", "they"];

const NOUNS: [&str; 14] = [
    "harbor", "lantern", "ledger", "meadow", "orchard", "parcel", "quarry", "river", "signal",
    "tunnel", "valley", "workshop", "archive", "bridge",
];

const FILLERS: [(&str, &str); 24] = [
    ("slowly", "RB"), ("quietly", "RB"), ("nearly", "RB"), ("often", "RB"),
    ("bright", "JJ"), ("gray", "JJ"), ("narrow", "JJ"), ("steady", "JJ"),
    ("and", "CC"), ("but", "CC"), ("while", "IN"), ("near", "IN"),
    ("under", "IN"), ("beyond", "IN"), ("walks", "VBZ"), ("hums", "VBZ"),
    ("sleeps", "VBZ"), ("turns", "VBZ"), ("waits", "VBZ"), ("drifts", "VBZ"),
    ("opened", "VBD"), ("closed", "VBD"), ("again", "RB"), ("twice", "RB"),
];

/// Knobs for the generator; ranges are inclusive and approximate for token
/// counts (mention placement may overshoot the upper bound slightly).
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    pub seed: u64,
    pub documents: usize,
    pub tokens_per_doc: (usize, usize),
    pub entities_per_doc: (usize, usize),
    pub mentions_per_entity: (usize, usize),
    /// Singletons generated per anaphoric mention.
    pub singleton_rate: f64,
    /// Chance a non-first entity mention is a pronoun.
    pub pronoun_rate: f64,
    /// Cap on the filler vocabulary (clamped to the built-in list).
    pub vocabulary: usize,
    /// Emit POS tags and constituency spans.
    pub with_syntax: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            seed: 7,
            documents: 20,
            tokens_per_doc: (80, 160),
            entities_per_doc: (2, 6),
            mentions_per_entity: (2, 5),
            singleton_rate: 0.3,
            pronoun_rate: 0.35,
            vocabulary: 24,
            with_syntax: true,
        }
    }
}

#[derive(Clone, Copy)]
enum Membership {
    Entity(usize),
    Singleton,
}

/// Tokens of one planned mention plus its POS tags and cluster membership.
struct PlannedMention {
    words: Vec<&'static str>,
    tags: Vec<&'static str>,
    membership: Membership,
}

fn mix(seed: u64, index: u64) -> u64 {
    seed ^ (index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Generates `cfg.documents` documents; the same config always yields the
/// same corpus.
pub fn generate_synthetic(cfg: &SynthesisConfig) -> Result<Corpus> {
    let docs = exec::map_indices(cfg.documents, |i| generate_document(cfg, i));
    Ok(Corpus::new(docs.into_iter().collect::<Result<Vec<_>>>()?))
}

fn generate_document(cfg: &SynthesisConfig, index: usize) -> Result<AnnotatedDocument> {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(cfg.seed, index as u64));
    let doc_id = format!("synth_{index:04}");
    let (lo, hi) = cfg.tokens_per_doc;
    let target = rng.gen_range(lo.min(hi)..=hi.max(lo));

    // plan entities
    let n_entities = rng.gen_range(cfg.entities_per_doc.0..=cfg.entities_per_doc.1);
    let mut mentions: Vec<PlannedMention> = Vec::new();
    let mut anaphoric_planned = 0usize;
    for e in 0..n_entities {
        let first = FIRST_NAMES[rng.gen_range(0..FIRST_NAMES.len())];
        let last = LAST_NAMES[rng.gen_range(0..LAST_NAMES.len())];
        let full_name = rng.gen_bool(0.5);
        let pronoun = PRONOUN_CHOICES[rng.gen_range(0..PRONOUN_CHOICES.len())];
        let count = rng.gen_range(cfg.mentions_per_entity.0.max(2)..=cfg.mentions_per_entity.1.max(2));
        for m in 0..count {
            let planned = if m > 0 && rng.gen_bool(cfg.pronoun_rate) {
                PlannedMention {
                    words: vec![pronoun],
                    tags: vec!["PRP"],
                    membership: Membership::Entity(e),
                }
            } else if full_name && (m == 0 || rng.gen_bool(0.5)) {
                PlannedMention {
                    words: vec![first, last],
                    tags: vec!["NNP", "NNP"],
                    membership: Membership::Entity(e),
                }
            } else {
                PlannedMention {
                    words: vec![first],
                    tags: vec!["NNP"],
                    membership: Membership::Entity(e),
                }
            };
            mentions.push(planned);
            anaphoric_planned += 1;
        }
    }
    let n_singletons = (cfg.singleton_rate * anaphoric_planned as f64).floor() as usize;
    for _ in 0..n_singletons {
        let noun = NOUNS[rng.gen_range(0..NOUNS.len())];
        if rng.gen_bool(0.5) {
            mentions.push(PlannedMention {
                words: vec!["the", noun],
                tags: vec!["DT", "NN"],
                membership: Membership::Singleton,
            });
        } else {
            mentions.push(PlannedMention {
                words: vec![noun],
                tags: vec!["NN"],
                membership: Membership::Singleton,
            });
        }
    }
    mentions.shuffle(&mut rng);

    // lay out sentences
    let vocab = cfg.vocabulary.clamp(1, FILLERS.len());
    let mut sentences: Vec<Vec<String>> = Vec::new();
    let mut tags: Vec<Vec<String>> = Vec::new();
    let mut parse: Vec<ParseSpan> = Vec::new();
    let mut clusters: Vec<Vec<Span>> = vec![Vec::new(); n_entities];
    let mut singletons: BTreeSet<Span> = BTreeSet::new();
    let mut total = 0usize;
    let mut queue = mentions.into_iter().peekable();

    while queue.peek().is_some() || total < lo.min(target) {
        let mut words: Vec<String> = Vec::new();
        let mut sent_tags: Vec<String> = Vec::new();
        let filler = |words: &mut Vec<String>, sent_tags: &mut Vec<String>, rng: &mut ChaCha8Rng| {
            let (w, t) = FILLERS[rng.gen_range(0..vocab)];
            words.push(w.to_string());
            sent_tags.push(t.to_string());
        };
        let planned_here = if queue.peek().is_some() {
            rng.gen_range(1..=3usize)
        } else {
            0
        };
        for _ in 0..planned_here {
            let Some(m) = queue.next() else { break };
            for _ in 0..rng.gen_range(1..=4usize) {
                filler(&mut words, &mut sent_tags, &mut rng);
            }
            let start = total + words.len();
            for (w, t) in m.words.iter().zip(m.tags.iter()) {
                words.push(w.to_string());
                sent_tags.push(t.to_string());
            }
            let span = Span::new(start, start + m.words.len() - 1);
            if cfg.with_syntax {
                parse.push(ParseSpan { span, label: "NP".to_string() });
            }
            match m.membership {
                Membership::Entity(e) => clusters[e].push(span),
                Membership::Singleton => {
                    singletons.insert(span);
                }
            }
        }
        for _ in 0..rng.gen_range(1..=3usize) {
            filler(&mut words, &mut sent_tags, &mut rng);
        }
        if cfg.with_syntax {
            parse.push(ParseSpan {
                span: Span::new(total, total + words.len() - 1),
                label: "S".to_string(),
            });
        }
        total += words.len();
        sentences.push(words);
        tags.push(sent_tags);
    }

    let doc = Document::new(
        doc_id,
        sentences,
        cfg.with_syntax.then_some(tags),
        cfg.with_syntax.then_some(parse),
    )?;
    let clustering = Clustering::new(clusters)?;
    let gold = GoldAnnotation::new(clustering, singletons)?;
    gold.validate_against(&doc)?;
    Ok(AnnotatedDocument { doc, gold })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_corpus() {
        let cfg = SynthesisConfig { documents: 6, ..Default::default() };
        assert_eq!(generate_synthetic(&cfg).unwrap(), generate_synthetic(&cfg).unwrap());
    }

    #[test]
    fn different_seeds_differ() {
        let a = generate_synthetic(&SynthesisConfig { documents: 4, seed: 1, ..Default::default() }).unwrap();
        let b = generate_synthetic(&SynthesisConfig { documents: 4, seed: 2, ..Default::default() }).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn zero_singleton_rate_yields_no_singletons() {
        let cfg = SynthesisConfig {
            documents: 8,
            singleton_rate: 0.0,
            ..Default::default()
        };
        let corpus = generate_synthetic(&cfg).unwrap();
        assert!(corpus.docs.iter().all(|d| d.gold.singletons().is_empty()));
    }

    #[test]
    fn invariants_hold_across_documents() {
        let cfg = SynthesisConfig { documents: 50, ..Default::default() };
        let corpus = generate_synthetic(&cfg).unwrap();
        assert_eq!(corpus.len(), 50);
        for ad in &corpus.docs {
            // every anaphoric cluster has >= 2 mentions
            assert!(ad.gold.anaphoric().clusters().iter().all(|c| c.len() >= 2));
            // all mentions are valid spans within one sentence
            for span in ad.gold.all_mentions() {
                assert!(ad.doc.span_in_one_sentence(span));
            }
            // singletons and anaphoric spans are disjoint
            let ana = ad.gold.anaphoric_spans();
            assert!(ad.gold.singletons().is_disjoint(&ana));
            if cfg.with_syntax {
                let tags = ad.doc.pos_tags().unwrap();
                assert_eq!(tags.len(), ad.doc.sentences().len());
            }
        }
    }

    #[test]
    fn token_counts_reach_the_lower_bound() {
        let cfg = SynthesisConfig {
            documents: 10,
            tokens_per_doc: (60, 90),
            ..Default::default()
        };
        let corpus = generate_synthetic(&cfg).unwrap();
        for ad in &corpus.docs {
            assert!(ad.doc.token_count() >= 60);
        }
    }
}

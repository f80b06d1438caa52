//! Coreference metric suite: MUC (link-based), B³ (mention-based),
//! CEAF_φ4 (entity-based with optimal cluster alignment), and their average
//! F1, plus mention-level precision/recall and clustering diagnostics.
//!
//! Numerators and denominators are accumulated as exact rationals and divided
//! only at report time, so corpus micro-averages are identical regardless of
//! document order or thread count. Singleton clusters are removed from both
//! sides before scoring unless [`MetricOptions::keep_singletons`] is set;
//! a document whose key is empty after removal is excluded from the
//! micro-average.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::assignment::max_assignment;
use crate::error::{CorefError, Result};
use crate::exec;
use crate::model::{Clustering, Document, Span};

fn ratio(n: usize, d: usize) -> BigRational {
    BigRational::new((n as i64).into(), (d as i64).into())
}

fn int(n: usize) -> BigRational {
    BigRational::from_integer((n as i64).into())
}

/// Precision / recall / F1 with the 0/0 -> 0 convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn zero() -> Self {
        Prf {
            precision: 0.0,
            recall: 0.0,
            f1: 0.0,
        }
    }
}

/// The three coreference metrics and their mean F1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub muc: Prf,
    pub b3: Prf,
    pub ceaf_phi4: Prf,
    pub avg_f1: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MetricOptions {
    /// Score size-1 clusters instead of dropping them.
    pub keep_singletons: bool,
}

/// Exact numerator/denominator pairs for one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTally {
    pub recall_num: BigRational,
    pub recall_den: BigRational,
    pub precision_num: BigRational,
    pub precision_den: BigRational,
}

impl PairTally {
    fn zero() -> Self {
        PairTally {
            recall_num: BigRational::zero(),
            recall_den: BigRational::zero(),
            precision_num: BigRational::zero(),
            precision_den: BigRational::zero(),
        }
    }

    fn merge(&mut self, other: &PairTally) {
        self.recall_num += &other.recall_num;
        self.recall_den += &other.recall_den;
        self.precision_num += &other.precision_num;
        self.precision_den += &other.precision_den;
    }

    /// Precision and recall with roles exchanged; `accumulate(k, r)` swapped
    /// equals `accumulate(r, k)` for every metric.
    pub fn swapped(&self) -> PairTally {
        PairTally {
            recall_num: self.precision_num.clone(),
            recall_den: self.precision_den.clone(),
            precision_num: self.recall_num.clone(),
            precision_den: self.recall_den.clone(),
        }
    }

    fn rational_prf(&self) -> (BigRational, BigRational, BigRational) {
        let div = |n: &BigRational, d: &BigRational| {
            if d.is_zero() {
                BigRational::zero()
            } else {
                n / d
            }
        };
        let p = div(&self.precision_num, &self.precision_den);
        let r = div(&self.recall_num, &self.recall_den);
        let sum = &p + &r;
        let f1 = if sum.is_zero() {
            BigRational::zero()
        } else {
            int(2) * &p * &r / sum
        };
        (p, r, f1)
    }

    pub fn prf(&self) -> Prf {
        let (p, r, f1) = self.rational_prf();
        Prf {
            precision: p.to_f64().unwrap_or(0.0),
            recall: r.to_f64().unwrap_or(0.0),
            f1: f1.to_f64().unwrap_or(0.0),
        }
    }
}

/// Micro-average accumulator across documents.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricTally {
    pub muc: PairTally,
    pub b3: PairTally,
    pub ceaf: PairTally,
    /// Documents that contributed (nonempty key after singleton handling).
    pub documents: usize,
}

impl MetricTally {
    pub fn zero() -> Self {
        MetricTally {
            muc: PairTally::zero(),
            b3: PairTally::zero(),
            ceaf: PairTally::zero(),
            documents: 0,
        }
    }

    pub fn merge(&mut self, other: &MetricTally) {
        self.muc.merge(&other.muc);
        self.b3.merge(&other.b3);
        self.ceaf.merge(&other.ceaf);
        self.documents += other.documents;
    }

    pub fn report(&self) -> MetricReport {
        let (_, _, muc_f1) = self.muc.rational_prf();
        let (_, _, b3_f1) = self.b3.rational_prf();
        let (_, _, ceaf_f1) = self.ceaf.rational_prf();
        let avg = (muc_f1 + b3_f1 + ceaf_f1) / int(3);
        MetricReport {
            muc: self.muc.prf(),
            b3: self.b3.prf(),
            ceaf_phi4: self.ceaf.prf(),
            avg_f1: avg.to_f64().unwrap_or(0.0),
        }
    }
}

/// Per-document tallies for key vs. response.
pub fn accumulate(key: &Clustering, response: &Clustering, opts: MetricOptions) -> MetricTally {
    let (key, response) = if opts.keep_singletons {
        (key.clone(), response.clone())
    } else {
        (key.without_singletons(), response.without_singletons())
    };
    if key.is_empty() {
        return MetricTally::zero();
    }
    MetricTally {
        muc: muc_tally(&key, &response),
        b3: b3_tally(&key, &response),
        ceaf: ceaf_tally(&key, &response),
        documents: 1,
    }
}

/// Single-document metric report.
pub fn evaluate(key: &Clustering, response: &Clustering, opts: MetricOptions) -> MetricReport {
    accumulate(key, response, opts).report()
}

/// Corpus micro-average over (key, response) pairs, parallel per document.
pub fn evaluate_corpus(pairs: &[(Clustering, Clustering)], opts: MetricOptions) -> MetricReport {
    corpus_tally(pairs, opts).report()
}

pub fn corpus_tally(pairs: &[(Clustering, Clustering)], opts: MetricOptions) -> MetricTally {
    let tallies = exec::map_docs(pairs, |(k, r)| accumulate(k, r, opts));
    let mut total = MetricTally::zero();
    for t in &tallies {
        total.merge(t);
    }
    total
}

/// One direction of the MUC link count: sum over `from` clusters of
/// |C| - p(C), where p(C) is the number of partitions `against` induces on C
/// (absent mentions count as their own partitions).
fn muc_direction(from: &Clustering, against: &Clustering) -> (BigRational, BigRational) {
    let index = against.span_index();
    let mut num = 0usize;
    let mut den = 0usize;
    for cluster in from.clusters() {
        let mut parts: BTreeSet<usize> = BTreeSet::new();
        let mut absent = 0usize;
        for span in cluster {
            match index.get(span) {
                Some(i) => {
                    parts.insert(*i);
                }
                None => absent += 1,
            }
        }
        num += cluster.len() - (parts.len() + absent);
        den += cluster.len() - 1;
    }
    (int(num), int(den))
}

fn muc_tally(key: &Clustering, response: &Clustering) -> PairTally {
    let (r_num, r_den) = muc_direction(key, response);
    let (p_num, p_den) = muc_direction(response, key);
    PairTally {
        recall_num: r_num,
        recall_den: r_den,
        precision_num: p_num,
        precision_den: p_den,
    }
}

/// One direction of B³: sum over mentions m of |C_m ∩ D_m| / |C_m|.
fn b3_direction(from: &Clustering, against: &Clustering) -> (BigRational, BigRational) {
    let index = against.span_index();
    let mut num = BigRational::zero();
    let mut den = 0usize;
    for cluster in from.clusters() {
        den += cluster.len();
        let mut overlap: BTreeMap<usize, usize> = BTreeMap::new();
        for span in cluster {
            if let Some(i) = index.get(span) {
                *overlap.entry(*i).or_insert(0) += 1;
            }
        }
        for count in overlap.values() {
            num += ratio(count * count, cluster.len());
        }
    }
    (num, int(den))
}

fn b3_tally(key: &Clustering, response: &Clustering) -> PairTally {
    let (r_num, r_den) = b3_direction(key, response);
    let (p_num, p_den) = b3_direction(response, key);
    PairTally {
        recall_num: r_num,
        recall_den: r_den,
        precision_num: p_num,
        precision_den: p_den,
    }
}

/// phi4 similarity: 2|K ∩ R| / (|K| + |R|).
fn phi4(k: &[Span], r: &[Span]) -> BigRational {
    let rset: BTreeSet<&Span> = r.iter().collect();
    let inter = k.iter().filter(|s| rset.contains(s)).count();
    ratio(2 * inter, k.len() + r.len())
}

fn ceaf_tally(key: &Clustering, response: &Clustering) -> PairTally {
    let total = if key.is_empty() || response.is_empty() {
        BigRational::zero()
    } else {
        let weights: Vec<Vec<BigRational>> = key
            .clusters()
            .iter()
            .map(|k| response.clusters().iter().map(|r| phi4(k, r)).collect())
            .collect();
        max_assignment(&weights).0
    };
    PairTally {
        recall_num: total.clone(),
        recall_den: int(key.len()),
        precision_num: total,
        precision_den: int(response.len()),
    }
}

/// Mention intersection counts for micro-averaged precision/recall.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MentionTally {
    pub hits: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl MentionTally {
    pub fn count(predicted: &BTreeSet<Span>, gold: &BTreeSet<Span>) -> Self {
        MentionTally {
            hits: predicted.intersection(gold).count(),
            predicted: predicted.len(),
            gold: gold.len(),
        }
    }

    pub fn merge(&mut self, other: &MentionTally) {
        self.hits += other.hits;
        self.predicted += other.predicted;
        self.gold += other.gold;
    }

    pub fn prf(&self) -> Prf {
        let p = if self.predicted == 0 {
            0.0
        } else {
            self.hits as f64 / self.predicted as f64
        };
        let r = if self.gold == 0 {
            0.0
        } else {
            self.hits as f64 / self.gold as f64
        };
        let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        Prf {
            precision: p,
            recall: r,
            f1,
        }
    }
}

/// Set precision/recall of predicted spans against gold spans.
pub fn mention_prf(predicted: &BTreeSet<Span>, gold: &BTreeSet<Span>) -> Prf {
    MentionTally::count(predicted, gold).prf()
}

/// Mean mentions per cluster and mean token extent per cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterStats {
    pub mean_cluster_size: f64,
    pub mean_token_extent: f64,
}

/// Pooled sums behind [`ClusterStats`], mergeable across documents.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClusterStatsTally {
    pub size_sum: usize,
    pub extent_sum: usize,
    pub clusters: usize,
}

impl ClusterStatsTally {
    pub fn count(clustering: &Clustering) -> Self {
        let mut tally = ClusterStatsTally::default();
        for cluster in clustering.clusters() {
            tally.clusters += 1;
            tally.size_sum += cluster.len();
            let min = cluster.iter().map(|s| s.start).min().unwrap();
            let max = cluster.iter().map(|s| s.end).max().unwrap();
            tally.extent_sum += max - min + 1;
        }
        tally
    }

    pub fn merge(&mut self, other: &ClusterStatsTally) {
        self.size_sum += other.size_sum;
        self.extent_sum += other.extent_sum;
        self.clusters += other.clusters;
    }

    pub fn stats(&self) -> ClusterStats {
        if self.clusters == 0 {
            return ClusterStats {
                mean_cluster_size: 0.0,
                mean_token_extent: 0.0,
            };
        }
        ClusterStats {
            mean_cluster_size: self.size_sum as f64 / self.clusters as f64,
            mean_token_extent: self.extent_sum as f64 / self.clusters as f64,
        }
    }
}

pub fn cluster_stats(clustering: &Clustering, doc: &Document) -> Result<ClusterStats> {
    for span in clustering.spans() {
        doc.check_span(&span)?;
    }
    Ok(ClusterStatsTally::count(clustering).stats())
}

/// Mean pairwise link score over all scored pairs and over correct pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreDiagnostics {
    pub mean_pair_score: Option<f64>,
    pub mean_correct_pair_score: Option<f64>,
}

pub fn score_diagnostics(
    pair_scores: &BTreeMap<(Span, Span), f64>,
    correct_pairs: &BTreeSet<(Span, Span)>,
) -> ScoreDiagnostics {
    let mean = |it: &mut dyn Iterator<Item = f64>| -> Option<f64> {
        let mut sum = 0.0;
        let mut n = 0usize;
        for v in it {
            sum += v;
            n += 1;
        }
        (n > 0).then(|| sum / n as f64)
    };
    let all = mean(&mut pair_scores.values().copied());
    let correct = mean(
        &mut pair_scores
            .iter()
            .filter(|(k, _)| correct_pairs.contains(k))
            .map(|(_, v)| *v),
    );
    ScoreDiagnostics {
        mean_pair_score: all,
        mean_correct_pair_score: correct,
    }
}

/// Guard for operations that need at least one anaphoric mention recalled.
pub fn require_nonzero(label: &str, value: f64) -> Result<()> {
    if value == 0.0 {
        return Err(CorefError::invalid(format!("{label} is zero; result undefined")));
    }
    Ok(())
}

//! Report serialization: JSON shapes with fixed field names and the
//! table-style TSV/CSV companions. Floats are rounded to four decimals in
//! both forms so reports are byte-stable across runs.

use std::fmt::Write as _;

use serde::Serialize;

use crate::anaphoricity::ConfusionReport;
use crate::heuristics::HeuristicStats;
use crate::metrics::{ClusterStats, MetricReport, Prf, ScoreDiagnostics};
use crate::oracle::OracleOps;
use crate::sim::SweepRow;
use crate::taxonomy::{ConflationSubkind, ErrorReport, SUBKIND_ORDER};
use crate::taxonomy::REPORT_ORDER;

/// Round to four decimal places.
pub fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

fn fmt4(x: f64) -> String {
    format!("{:.4}", x)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MetricReportJson {
    pub muc_p: f64,
    pub muc_r: f64,
    pub muc_f1: f64,
    pub b3_p: f64,
    pub b3_r: f64,
    pub b3_f1: f64,
    pub ceaf_p: f64,
    pub ceaf_r: f64,
    pub ceaf_f1: f64,
    pub avg_f1: f64,
}

impl From<&MetricReport> for MetricReportJson {
    fn from(r: &MetricReport) -> Self {
        MetricReportJson {
            muc_p: round4(r.muc.precision),
            muc_r: round4(r.muc.recall),
            muc_f1: round4(r.muc.f1),
            b3_p: round4(r.b3.precision),
            b3_r: round4(r.b3.recall),
            b3_f1: round4(r.b3.f1),
            ceaf_p: round4(r.ceaf_phi4.precision),
            ceaf_r: round4(r.ceaf_phi4.recall),
            ceaf_f1: round4(r.ceaf_phi4.f1),
            avg_f1: round4(r.avg_f1),
        }
    }
}

/// Header row plus one value row, tab-separated.
pub fn metric_report_tsv(r: &MetricReport) -> String {
    let j = MetricReportJson::from(r);
    let mut out = String::new();
    writeln!(
        out,
        "muc_p\tmuc_r\tmuc_f1\tb3_p\tb3_r\tb3_f1\tceaf_p\tceaf_r\tceaf_f1\tavg_f1"
    )
    .unwrap();
    writeln!(
        out,
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        fmt4(j.muc_p),
        fmt4(j.muc_r),
        fmt4(j.muc_f1),
        fmt4(j.b3_p),
        fmt4(j.b3_r),
        fmt4(j.b3_f1),
        fmt4(j.ceaf_p),
        fmt4(j.ceaf_r),
        fmt4(j.ceaf_f1),
        fmt4(j.avg_f1)
    )
    .unwrap();
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorKindJson {
    pub count: usize,
    pub delta_f1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReportJson {
    pub baseline_f1: f64,
    pub span_fixed_f1: f64,
    pub span_error: ErrorKindJson,
    pub conflated_entities: ErrorKindJson,
    pub extra_mention: ErrorKindJson,
    pub extra_entity: ErrorKindJson,
    pub divided_entity: ErrorKindJson,
    pub missing_mention: ErrorKindJson,
    pub missing_entity: ErrorKindJson,
}

impl From<&ErrorReport> for ErrorReportJson {
    fn from(r: &ErrorReport) -> Self {
        let kind = |k| ErrorKindJson {
            count: r.counts[&k],
            delta_f1: round4(r.deltas[&k]),
        };
        let mut it = REPORT_ORDER.iter().copied();
        let span_error = kind(it.next().unwrap());
        let conflated_entities = kind(it.next().unwrap());
        let extra_mention = kind(it.next().unwrap());
        let extra_entity = kind(it.next().unwrap());
        let divided_entity = kind(it.next().unwrap());
        let missing_mention = kind(it.next().unwrap());
        let missing_entity = kind(it.next().unwrap());
        ErrorReportJson {
            baseline_f1: round4(r.baseline_f1),
            span_fixed_f1: round4(r.span_fixed_f1),
            span_error,
            conflated_entities,
            extra_mention,
            extra_entity,
            divided_entity,
            missing_mention,
            missing_entity,
        }
    }
}

/// Table-shaped TSV: one column per error type, a delta row and a count row.
pub fn error_report_tsv(r: &ErrorReport) -> String {
    let mut out = String::new();
    let header: Vec<&str> = REPORT_ORDER.iter().map(|k| k.name()).collect();
    writeln!(out, "row\t{}", header.join("\t")).unwrap();
    let deltas: Vec<String> = REPORT_ORDER.iter().map(|k| fmt4(r.deltas[k])).collect();
    writeln!(out, "delta_f1\t{}", deltas.join("\t")).unwrap();
    let counts: Vec<String> = REPORT_ORDER.iter().map(|k| r.counts[k].to_string()).collect();
    writeln!(out, "count\t{}", counts.join("\t")).unwrap();
    out
}

/// Conflation sub-type counts, one column per sub-type.
pub fn subtype_tsv(counts: &std::collections::BTreeMap<ConflationSubkind, usize>) -> String {
    let mut out = String::new();
    let header: Vec<&str> = SUBKIND_ORDER.iter().map(|k| k.name()).collect();
    writeln!(out, "{}", header.join("\t")).unwrap();
    let row: Vec<String> = SUBKIND_ORDER
        .iter()
        .map(|k| counts.get(k).copied().unwrap_or(0).to_string())
        .collect();
    writeln!(out, "{}", row.join("\t")).unwrap();
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfusionBinJson {
    pub width: usize,
    pub singleton_accepted: usize,
    pub singleton_total: usize,
    pub anaphoric_accepted: usize,
    pub anaphoric_total: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confusion_index: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfusionReportJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singleton_recall: Option<f64>,
    pub anaphoric_recall: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confusion_index: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<Vec<ConfusionBinJson>>,
}

impl From<&ConfusionReport> for ConfusionReportJson {
    fn from(r: &ConfusionReport) -> Self {
        ConfusionReportJson {
            singleton_recall: r.singleton_recall().map(round4),
            anaphoric_recall: round4(r.anaphoric_recall().unwrap_or(0.0)),
            confusion_index: r.confusion_index().map(round4),
            bins: r.bins.as_ref().map(|bins| {
                bins.iter()
                    .map(|(width, c)| ConfusionBinJson {
                        width: *width,
                        singleton_accepted: c.singleton_accepted,
                        singleton_total: c.singleton_total,
                        anaphoric_accepted: c.anaphoric_accepted,
                        anaphoric_total: c.anaphoric_total,
                        confusion_index: c.index().map(round4),
                    })
                    .collect()
            }),
        }
    }
}

/// Two-column CSV of width vs. confusion index; undefined bins print empty.
pub fn confusion_csv(r: &ConfusionReport) -> String {
    let mut out = String::from("width,confusion_index\n");
    if let Some(bins) = &r.bins {
        for (width, counts) in bins {
            match counts.index() {
                Some(ix) => writeln!(out, "{width},{}", fmt4(ix)).unwrap(),
                None => writeln!(out, "{width},").unwrap(),
            }
        }
    }
    out
}

/// Sweep table: one row per grid point.
pub fn sweep_tsv(rows: &[SweepRow]) -> String {
    let mut out = String::from("L\tlambda\tK\tavg_f1\tana_p\tana_r\n");
    for row in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            row.l,
            fmt4(row.lambda),
            row.k,
            fmt4(row.report.avg_f1),
            fmt4(row.mention.precision),
            fmt4(row.mention.recall)
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRowJson {
    pub l: usize,
    pub lambda: f64,
    pub k: usize,
    #[serde(flatten)]
    pub report: MetricReportJson,
    pub ana_p: f64,
    pub ana_r: f64,
    pub ana_f1: f64,
}

impl From<&SweepRow> for SweepRowJson {
    fn from(r: &SweepRow) -> Self {
        SweepRowJson {
            l: r.l,
            lambda: round4(r.lambda),
            k: r.k,
            report: MetricReportJson::from(&r.report),
            ana_p: round4(r.mention.precision),
            ana_r: round4(r.mention.recall),
            ana_f1: round4(r.mention.f1),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PrfJson {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl From<&Prf> for PrfJson {
    fn from(p: &Prf) -> Self {
        PrfJson {
            precision: round4(p.precision),
            recall: round4(p.recall),
            f1: round4(p.f1),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleOpsJson {
    pub additions: usize,
    pub removals: usize,
    pub total: usize,
}

impl From<&OracleOps> for OracleOpsJson {
    fn from(o: &OracleOps) -> Self {
        OracleOpsJson {
            additions: o.additions,
            removals: o.removals,
            total: o.total(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterStatsJson {
    pub mean_cluster_size: f64,
    pub mean_token_extent: f64,
}

impl From<&ClusterStats> for ClusterStatsJson {
    fn from(s: &ClusterStats) -> Self {
        ClusterStatsJson {
            mean_cluster_size: round4(s.mean_cluster_size),
            mean_token_extent: round4(s.mean_token_extent),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoreDiagnosticsJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_pair_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_correct_pair_score: Option<f64>,
}

impl From<&ScoreDiagnostics> for ScoreDiagnosticsJson {
    fn from(d: &ScoreDiagnostics) -> Self {
        ScoreDiagnosticsJson {
            mean_pair_score: d.mean_pair_score.map(round4),
            mean_correct_pair_score: d.mean_correct_pair_score.map(round4),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HeuristicStatsJson {
    pub premerge_size: usize,
    pub anaphoric_hits: usize,
    pub anaphoric_total: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub premerge_recall: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anaphoric_share: Option<f64>,
}

impl From<&HeuristicStats> for HeuristicStatsJson {
    fn from(s: &HeuristicStats) -> Self {
        HeuristicStatsJson {
            premerge_size: s.premerge_size,
            anaphoric_hits: s.anaphoric_hits,
            anaphoric_total: s.anaphoric_total,
            premerge_recall: s.premerge_recall().map(round4),
            anaphoric_share: s.anaphoric_share().map(round4),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{evaluate, MetricOptions};
    use crate::model::{Clustering, Span};

    fn merged_pair_report() -> MetricReport {
        let span = |i: usize| Span::new(i, i);
        let key = Clustering::new(vec![vec![span(0), span(1)], vec![span(2), span(3)]]).unwrap();
        let resp = Clustering::new(vec![vec![span(0), span(1), span(2), span(3)]]).unwrap();
        evaluate(&key, &resp, MetricOptions::default())
    }

    #[test]
    fn metric_json_field_names_and_rounding() {
        let json = serde_json::to_value(MetricReportJson::from(&merged_pair_report())).unwrap();
        assert_eq!(json["muc_f1"], 0.8);
        assert_eq!(json["b3_f1"], 0.6667);
        assert_eq!(json["ceaf_f1"], 0.4444);
        assert_eq!(json["avg_f1"], 0.637);
        for key in [
            "muc_p", "muc_r", "muc_f1", "b3_p", "b3_r", "b3_f1", "ceaf_p", "ceaf_r", "ceaf_f1",
            "avg_f1",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn metric_tsv_shape() {
        let tsv = metric_report_tsv(&merged_pair_report());
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split('\t').count(), 10);
        assert!(lines[1].starts_with("0.6667\t1.0000\t0.8000"));
    }

    #[test]
    fn round4_is_stable() {
        assert_eq!(round4(2.0 / 3.0), 0.6667);
        assert_eq!(round4(1.0), 1.0);
        assert_eq!(round4(0.0), 0.0);
    }
}

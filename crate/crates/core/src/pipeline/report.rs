//! Report schema and the plain-text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::graph::{format_percent, BuildStats, GraphMetrics, MeanMetrics, MetricDeltas, PathMode, StratifyBy};
use crate::ingest::Rejection;
use crate::sequel::{SequelCandidate, SequelThresholds};
use crate::taxonomy::TypeTally;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusOverview {
    pub rows_read: u64,
    pub rejected_rows: u64,
    pub rejection_samples: Vec<Rejection>,
    pub user_conflicts: u64,
    /// Accounts removed by the collection filter.
    pub filtered_users: u64,
    pub users: u64,
    pub users_with_tweets: u64,
    pub active_users: u64,
    pub suspended_t1: u64,
    pub suspended_t2: u64,
    pub tweets: u64,
    pub retweets: u64,
    pub replies: u64,
    pub quotes: u64,
    pub originals: u64,
    pub follow_trains: u64,
    pub follow_trains_dropped: u64,
    pub first_tweet: Option<String>,
    pub last_tweet: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRow {
    pub nodes_by_corpus: BTreeMap<String, usize>,
    pub total_weight: u64,
    pub build: BuildStats,
    pub metrics: GraphMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub name: String,
    pub start: String,
    pub end: String,
    pub corpora: Vec<String>,
    #[serde(flatten)]
    pub row: GraphRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSection {
    pub full: GraphRow,
    pub windows: Vec<WindowRow>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TaxonomySection {
    pub rules: String,
    /// corpus → account type → users.
    pub types_by_corpus: BTreeMap<String, BTreeMap<String, u64>>,
    /// corpus → membership → users.
    pub memberships_by_corpus: BTreeMap<String, BTreeMap<String, u64>>,
    pub group_mentions: u64,
    pub explicit_nodes: usize,
    pub implicit_nodes: usize,
    /// corpus → account type (plus `all`) → tweet counts.
    pub tweet_tally: BTreeMap<String, BTreeMap<String, TypeTally>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SequelSection {
    pub candidates: usize,
    pub sequel_pairs: usize,
    pub skipped_takedown: usize,
    pub skipped_live: usize,
    /// Verdict-true pairs, by username similarity descending.
    pub pairs: Vec<SequelCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub name: String,
    /// Size of the node set the row is built from.
    pub set_size: usize,
    pub metrics: Option<MeanMetrics>,
    /// Per-trial metrics for the random rows.
    pub trials: Vec<GraphMetrics>,
    /// Percent change against the full graph.
    pub deltas: Option<MetricDeltas>,
    /// Why the row has no metrics.
    pub absent_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTable {
    pub seed: u64,
    pub trials: usize,
    pub stratify_by: StratifyBy,
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentTable {
    pub fn row(&self, name: &str) -> Option<&ExperimentRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PredictionSummary {
    pub users: u64,
    pub predicted_positive: u64,
    /// Live accounts with a prediction that were found suspended.
    pub suspended_live: u64,
    pub suspended_live_detected: u64,
    pub recall_on_suspended: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ClassifierSection {
    Absent { reason: String },
    Present { metrics: Option<Value>, predictions: Option<PredictionSummary> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub seed: u64,
    pub trials: usize,
    pub path_mode: PathMode,
    pub thresholds: SequelThresholds,
    pub inputs: BTreeMap<String, InputDigest>,
    pub rules: InputDigest,
    /// Digest of every setting that influences the numbers.
    pub settings_sha256: String,
    pub stage_keys: BTreeMap<String, String>,
    pub generated_at: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub overview: BTreeMap<String, CorpusOverview>,
    pub graph: GraphSection,
    pub taxonomy: TaxonomySection,
    pub sequels: SequelSection,
    pub experiments: ExperimentTable,
    pub classifier: ClassifierSection,
    pub provenance: Provenance,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

fn opt3(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"))
}

fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |out: &mut String, cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    };
    line(out, header.to_vec());
    line(out, widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect());
    for row in rows {
        line(out, row.iter().map(String::as_str).collect());
    }
    out.push('\n');
}

fn metric_cells(m: &GraphMetrics) -> Vec<String> {
    vec![
        m.node_count.to_string(),
        m.edge_count.to_string(),
        format!("{:.3}", m.density),
        m.diameter.map_or_else(|| "-".into(), |d| d.to_string()),
        opt3(m.avg_path_length),
    ]
}

/// Human-readable tables; the JSON report is authoritative.
pub fn render_text(report: &Report) -> String {
    let mut out = String::new();

    out.push_str("Overview\n\n");
    let rows: Vec<Vec<String>> = report
        .overview
        .iter()
        .map(|(corpus, o)| {
            vec![
                corpus.clone(),
                o.users.to_string(),
                o.tweets.to_string(),
                o.retweets.to_string(),
                o.follow_trains.to_string(),
                o.suspended_t1.to_string(),
                o.suspended_t2.to_string(),
                o.first_tweet.clone().unwrap_or_else(|| "-".into()),
                o.last_tweet.clone().unwrap_or_else(|| "-".into()),
                o.rejected_rows.to_string(),
            ]
        })
        .collect();
    table(
        &mut out,
        &["corpus", "users", "tweets", "retweets", "follow_trains", "susp_t1", "susp_t2", "first", "last", "rejected"],
        &rows,
    );

    out.push_str("Account types\n\n");
    let mut rows = Vec::new();
    for (corpus, types) in &report.taxonomy.types_by_corpus {
        for (t, n) in types {
            let tally = report.taxonomy.tweet_tally.get(corpus).and_then(|m| m.get(t));
            rows.push(vec![
                corpus.clone(),
                t.clone(),
                n.to_string(),
                tally.map_or("0".into(), |x| x.total_tweets.to_string()),
                tally.map_or("0".into(), |x| x.retweets.to_string()),
                tally.and_then(|x| x.percent_retweets).map_or_else(|| "-".into(), |p| format!("{p:.1}")),
            ]);
        }
    }
    table(&mut out, &["corpus", "type", "users", "tweets", "retweets", "% retweets"], &rows);
    let _ = writeln!(
        out,
        "explicit nodes: {}  implicit nodes: {}\n",
        report.taxonomy.explicit_nodes, report.taxonomy.implicit_nodes
    );

    out.push_str("Sequel pairs\n\n");
    let rows: Vec<Vec<String>> = report
        .sequels
        .pairs
        .iter()
        .map(|c| {
            vec![
                c.takedown_username.clone().unwrap_or_else(|| c.takedown_user_id.clone()),
                c.live_username.clone().unwrap_or_else(|| c.live_user_id.clone()),
                format!("{:.3}", c.scores.username_ratio),
                opt3(c.scores.bio_ratio),
                opt3(c.scores.name_ratio),
                c.scores.common_interactions.to_string(),
            ]
        })
        .collect();
    table(&mut out, &["takedown", "live", "username", "bio", "name", "common"], &rows);

    out.push_str("Graph statistics\n\n");
    let mut rows = Vec::new();
    let mut full = vec!["full_graph".to_string()];
    full.extend(metric_cells(&report.graph.full.metrics));
    rows.push(full);
    for w in &report.graph.windows {
        let mut r = vec![w.name.clone()];
        r.extend(metric_cells(&w.row.metrics));
        rows.push(r);
    }
    table(&mut out, &["graph", "nodes", "edges", "density", "diameter", "avg_path"], &rows);

    out.push_str("Network experiment\n\n");
    let rows: Vec<Vec<String>> = report
        .experiments
        .rows
        .iter()
        .map(|r| match (&r.metrics, &r.deltas) {
            (Some(m), d) => {
                let pct = |v: Option<f64>| v.map_or_else(|| "-".into(), format_percent);
                vec![
                    r.name.clone(),
                    format!("{:.1}", m.node_count),
                    format!("{:.1}", m.edge_count),
                    format!("{:.3}", m.density),
                    m.diameter.map_or_else(|| "-".into(), |x| format!("{x:.1}")),
                    opt3(m.avg_path_length),
                    pct(d.as_ref().and_then(|d| d.density)),
                    pct(d.as_ref().and_then(|d| d.diameter)),
                    pct(d.as_ref().and_then(|d| d.avg_path_length)),
                ]
            }
            (None, _) => vec![
                r.name.clone(),
                format!("absent: {}", r.absent_reason.clone().unwrap_or_default()),
            ],
        })
        .collect();
    table(
        &mut out,
        &["subnetwork", "nodes", "edges", "density", "diameter", "avg_path", "Δdensity", "Δdiameter", "Δpath"],
        &rows,
    );

    match &report.classifier {
        ClassifierSection::Absent { reason } => {
            let _ = writeln!(out, "Classifier: absent ({reason})");
        }
        ClassifierSection::Present { predictions, .. } => {
            let _ = write!(out, "Classifier: present");
            if let Some(p) = predictions {
                let _ = write!(
                    out,
                    "; {} predictions, {} positive, {}/{} suspended live accounts detected",
                    p.users, p.predicted_positive, p.suspended_live_detected, p.suspended_live
                );
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_align() {
        let mut out = String::new();
        table(&mut out, &["a", "bbb"], &[vec!["xxxx".into(), "y".into()]]);
        assert_eq!(out, "a     bbb\n----  ---\nxxxx  y\n\n");
    }

    #[test]
    fn classifier_section_tags() {
        let absent = ClassifierSection::Absent { reason: "not configured".into() };
        assert_eq!(
            serde_json::to_string(&absent).unwrap(),
            r#"{"status":"absent","reason":"not configured"}"#
        );
    }
}

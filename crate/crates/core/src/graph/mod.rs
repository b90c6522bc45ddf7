//! Directed weighted interaction graph and the node-removal experiments.

mod delta;
mod export;
mod metrics;
mod removal;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, Utc};
use log::debug;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Corpus, InteractionEvent, InteractionKind, SuspensionStatus, UserRecord};

pub use delta::{delta_report, format_percent, mean_delta_report, round_half_up, MetricDeltas};
pub use export::{write_edge_list_csv, write_graphml};
pub use metrics::{metrics, metrics_with, GraphMetrics, MetricsOptions, PathMode};
pub use removal::{
    largest_remainder_quotas, random_removal_baseline, remove_nodes, stratified_sample, BaselineResult, MeanMetrics,
    RemovalExperiment, StratifyBy, TrialResult,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("stratum `{stratum}` has {available} nodes but its quota is {quota}")]
    StratumTooSmall { stratum: String, available: usize, quota: usize },
    #[error("sample of {requested} nodes requested from a graph of {available}")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("node `{0}` is not in the graph")]
    UnknownNode(String),
}

/// Attributes carried by a graph node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeInfo {
    pub user_id: String,
    pub corpus: Corpus,
    pub suspension_status: SuspensionStatus,
    /// Set once the node has been labelled.
    pub explicit: Option<bool>,
}

/// Per-kind interaction counts of one directed pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeCounts {
    pub mention: u64,
    pub retweet: u64,
    pub reply: u64,
    pub quote: u64,
}

impl EdgeCounts {
    pub fn add(&mut self, kind: InteractionKind) {
        match kind {
            InteractionKind::Mention => self.mention += 1,
            InteractionKind::Retweet => self.retweet += 1,
            InteractionKind::Reply => self.reply += 1,
            InteractionKind::Quote => self.quote += 1,
        }
    }

    pub fn weight(&self) -> u64 {
        self.mention + self.retweet + self.reply + self.quote
    }
}

/// Events discarded while building.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildStats {
    pub retained: u64,
    pub self_loops: u64,
    pub external: u64,
    pub out_of_scope: u64,
    pub out_of_window: u64,
}

/// Half-open time interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl TimeWindow {
    pub fn contains(&self, t: &DateTime<Utc>) -> bool {
        *t >= self.start && *t < self.end
    }
}

/// Directed simple graph over users; parallel interactions are folded into
/// per-kind edge counts and self-loops never appear.
///
/// Nodes are kept sorted by user id and edges are keyed by node index, so two
/// graphs over the same data compare equal regardless of build order.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct InteractionGraph {
    nodes: Vec<NodeInfo>,
    edges: BTreeMap<(u32, u32), EdgeCounts>,
    pub stats: BuildStats,
}

impl PartialEq for InteractionGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl InteractionGraph {
    /// Assembles a graph from explicit parts. Edges referencing unknown
    /// nodes and self-loops are dropped; isolated nodes are kept.
    pub fn from_parts(
        nodes: impl IntoIterator<Item = NodeInfo>,
        edges: impl IntoIterator<Item = (String, String, EdgeCounts)>,
    ) -> Self {
        let mut nodes: Vec<NodeInfo> = nodes.into_iter().collect();
        nodes.sort_by(|a, b| a.user_id.cmp(&b.user_id));
        nodes.dedup_by(|a, b| a.user_id == b.user_id);
        let index: HashMap<&str, u32> =
            nodes.iter().enumerate().map(|(i, n)| (n.user_id.as_str(), i as u32)).collect();
        let mut out_edges: BTreeMap<(u32, u32), EdgeCounts> = BTreeMap::new();
        let mut stats = BuildStats::default();
        for (s, t, counts) in edges {
            match (index.get(s.as_str()), index.get(t.as_str())) {
                (Some(&a), Some(&b)) if a != b && counts.weight() > 0 => {
                    let e = out_edges.entry((a, b)).or_default();
                    e.mention += counts.mention;
                    e.retweet += counts.retweet;
                    e.reply += counts.reply;
                    e.quote += counts.quote;
                    stats.retained += counts.weight();
                }
                (Some(a), Some(b)) if a == b => stats.self_loops += counts.weight(),
                _ => stats.out_of_scope += counts.weight(),
            }
        }
        Self { nodes, edges: out_edges, stats }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Distinct directed pairs.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[NodeInfo] {
        &self.nodes
    }

    pub fn node(&self, user_id: &str) -> Option<&NodeInfo> {
        self.index_of(user_id).map(|i| &self.nodes[i])
    }

    pub fn index_of(&self, user_id: &str) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.user_id.as_str().cmp(user_id)).ok()
    }

    pub fn contains(&self, user_id: &str) -> bool {
        self.index_of(user_id).is_some()
    }

    /// `(source, target, counts)` in index order.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, &EdgeCounts)> + '_ {
        self.edges
            .iter()
            .map(|(&(s, t), c)| (self.nodes[s as usize].user_id.as_str(), self.nodes[t as usize].user_id.as_str(), c))
    }

    pub fn edge(&self, source: &str, target: &str) -> Option<&EdgeCounts> {
        let s = self.index_of(source)? as u32;
        let t = self.index_of(target)? as u32;
        self.edges.get(&(s, t))
    }

    pub(crate) fn edge_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.keys().map(|&(s, t)| (s as usize, t as usize))
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().map(EdgeCounts::weight).sum()
    }

    pub fn node_ids(&self) -> BTreeSet<String> {
        self.nodes.iter().map(|n| n.user_id.clone()).collect()
    }

    /// Sets each node's explicit flag from `explicit` (missing ids → `None`).
    pub fn set_explicit_flags(&mut self, explicit: &HashMap<String, bool>) {
        for node in &mut self.nodes {
            node.explicit = explicit.get(&node.user_id).copied();
        }
    }

    /// Subgraph induced by the nodes for which `keep` is true.
    pub fn induced(&self, keep: impl Fn(&NodeInfo) -> bool) -> InteractionGraph {
        let mut remap = vec![u32::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if keep(node) {
                remap[i] = nodes.len() as u32;
                nodes.push(node.clone());
            }
        }
        let edges = self
            .edges
            .iter()
            .filter_map(|(&(s, t), c)| {
                let (s, t) = (remap[s as usize], remap[t as usize]);
                (s != u32::MAX && t != u32::MAX).then_some(((s, t), *c))
            })
            .collect();
        InteractionGraph { nodes, edges, stats: self.stats }
    }
}

/// Corpus and suspension tags for known users. When an id occurs in several
/// corpora the first one in `Corpus::ALL` order wins.
#[derive(Debug, Clone, Default)]
pub struct NodeCatalog {
    tags: HashMap<String, (Corpus, SuspensionStatus)>,
}

impl NodeCatalog {
    pub fn new<'a>(users: impl IntoIterator<Item = &'a UserRecord>) -> Self {
        let mut tags: HashMap<String, (Corpus, SuspensionStatus)> = HashMap::new();
        for u in users {
            tags.entry(u.user_id.clone())
                .and_modify(|slot| {
                    if u.corpus < slot.0 {
                        debug!("user {} present in {} and {}", u.user_id, u.corpus, slot.0);
                        *slot = (u.corpus, u.suspension_status);
                    }
                })
                .or_insert((u.corpus, u.suspension_status));
        }
        Self { tags }
    }

    pub fn get(&self, user_id: &str) -> Option<(Corpus, SuspensionStatus)> {
        self.tags.get(user_id).copied()
    }
}

/// Which events a graph keeps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphScope {
    pub corpora: BTreeSet<Corpus>,
    pub window: Option<TimeWindow>,
}

impl GraphScope {
    pub fn corpora(corpora: impl IntoIterator<Item = Corpus>) -> Self {
        Self { corpora: corpora.into_iter().collect(), window: None }
    }

    pub fn with_window(mut self, window: TimeWindow) -> Self {
        self.window = Some(window);
        self
    }
}

/// Builds the interaction graph from events whose endpoints are both known
/// users of an in-scope corpus and whose timestamp falls in the window.
/// External targets never become nodes.
pub fn build_graph<'a>(
    events: impl IntoIterator<Item = &'a InteractionEvent>,
    catalog: &NodeCatalog,
    scope: &GraphScope,
) -> InteractionGraph {
    let mut stats = BuildStats::default();
    let mut ids: HashMap<&'a str, u32> = HashMap::new();
    let mut names: Vec<&'a str> = Vec::new();
    let mut pair_counts: HashMap<(u32, u32), EdgeCounts> = HashMap::new();

    let mut intern = |id: &'a str| -> u32 {
        *ids.entry(id).or_insert_with(|| {
            names.push(id);
            (names.len() - 1) as u32
        })
    };

    for ev in events {
        if let Some(w) = &scope.window {
            if !w.contains(&ev.timestamp) {
                stats.out_of_window += 1;
                continue;
            }
        }
        if ev.external {
            stats.external += 1;
            continue;
        }
        let in_scope = |id: &str| catalog.get(id).is_some_and(|(c, _)| scope.corpora.contains(&c));
        if !in_scope(&ev.source) || !in_scope(&ev.target) {
            stats.out_of_scope += 1;
            continue;
        }
        if ev.source == ev.target {
            stats.self_loops += 1;
            continue;
        }
        let s = intern(&ev.source);
        let t = intern(&ev.target);
        pair_counts.entry((s, t)).or_default().add(ev.kind);
        stats.retained += 1;
    }

    // re-index by sorted user id
    let mut order: Vec<u32> = (0..names.len() as u32).collect();
    order.sort_by_key(|&i| names[i as usize]);
    let mut rank = vec![0u32; names.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i as usize] = r as u32;
    }
    let nodes = order
        .iter()
        .map(|&i| {
            let id = names[i as usize];
            let (corpus, suspension_status) = catalog.get(id).expect("in-scope node is catalogued");
            NodeInfo { user_id: id.to_string(), corpus, suspension_status, explicit: None }
        })
        .collect();
    let edges = pair_counts.into_iter().map(|((s, t), c)| ((rank[s as usize], rank[t as usize]), c)).collect();
    InteractionGraph { nodes, edges, stats }
}

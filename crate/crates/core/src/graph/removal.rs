//! Targeted node removal and stratified random baselines.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{metrics_with, GraphMetrics, MetricsOptions};
use super::{GraphError, InteractionGraph, NodeInfo};
use crate::ingest::Corpus;

/// Copy of `graph` without `victims`. Ids not in the graph are ignored.
pub fn remove_nodes(graph: &InteractionGraph, victims: &BTreeSet<String>) -> InteractionGraph {
    graph.induced(|n| !victims.contains(&n.user_id))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StratifyBy {
    #[default]
    Corpus,
    None,
}

impl StratifyBy {
    fn label(self, node: &NodeInfo) -> Option<Corpus> {
        match self {
            StratifyBy::Corpus => Some(node.corpus),
            StratifyBy::None => None,
        }
    }
}

/// Random counterpart of a targeted subnetwork: each trial keeps a random
/// node set of `|target_set|` nodes whose stratum counts follow the
/// composition of `target_set`, and removes everything else.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalExperiment {
    pub target_set: BTreeSet<String>,
    pub trials: usize,
    pub seed: u64,
    pub stratify_by: StratifyBy,
}

impl RemovalExperiment {
    pub fn new(target_set: BTreeSet<String>, seed: u64) -> Self {
        Self { target_set, trials: 5, seed, stratify_by: StratifyBy::Corpus }
    }

    /// Trial `i` is seeded with `seed ^ i`.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed ^ trial as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub seed: u64,
    pub strata: BTreeMap<String, usize>,
    pub metrics: GraphMetrics,
}

/// Arithmetic means over trials. Path metrics are present only when every
/// trial defined them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub node_count: f64,
    pub edge_count: f64,
    pub density: f64,
    pub diameter: Option<f64>,
    pub avg_path_length: Option<f64>,
}

impl MeanMetrics {
    pub fn of(all: &[GraphMetrics]) -> Option<MeanMetrics> {
        if all.is_empty() {
            return None;
        }
        let k = all.len() as f64;
        let mean = |f: &dyn Fn(&GraphMetrics) -> f64| all.iter().map(f).sum::<f64>() / k;
        let mean_opt = |f: &dyn Fn(&GraphMetrics) -> Option<f64>| {
            all.iter().map(f).collect::<Option<Vec<f64>>>().map(|v| v.iter().sum::<f64>() / k)
        };
        Some(MeanMetrics {
            node_count: mean(&|m| m.node_count as f64),
            edge_count: mean(&|m| m.edge_count as f64),
            density: mean(&|m| m.density),
            diameter: mean_opt(&|m| m.diameter.map(f64::from)),
            avg_path_length: mean_opt(&|m| m.avg_path_length),
        })
    }

    pub fn as_metrics(&self) -> GraphMetrics {
        GraphMetrics {
            node_count: self.node_count.round() as usize,
            edge_count: self.edge_count.round() as usize,
            density: self.density,
            diameter: self.diameter.map(|d| d.round() as u32),
            avg_path_length: self.avg_path_length,
            component_size: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub trials: Vec<TrialResult>,
    pub mean: Option<MeanMetrics>,
}

/// Splits `sample_size` across strata proportionally to `counts` using
/// largest-remainder rounding; remainder ties go to the smaller key.
pub fn largest_remainder_quotas<K: Ord + Clone>(counts: &BTreeMap<K, usize>, sample_size: usize) -> BTreeMap<K, usize> {
    let total: usize = counts.values().sum();
    if total == 0 {
        return counts.keys().map(|k| (k.clone(), 0)).collect();
    }
    let mut quotas = BTreeMap::new();
    let mut remainders = Vec::new();
    let mut assigned = 0usize;
    for (k, &c) in counts {
        let share = (sample_size as u128) * (c as u128);
        let q = (share / total as u128) as usize;
        remainders.push((share % total as u128, k.clone()));
        quotas.insert(k.clone(), q);
        assigned += q;
    }
    // stable sort keeps key order among equal remainders
    remainders.sort_by(|a, b| b.0.cmp(&a.0));
    for (_, k) in remainders.into_iter().take(sample_size - assigned) {
        *quotas.get_mut(&k).expect("key from counts") += 1;
    }
    quotas
}

fn stratum_name(label: Option<Corpus>) -> String {
    label.map_or_else(|| "all".to_string(), |c| c.as_str().to_string())
}

/// Draws, per stratum, `quota` nodes uniformly without replacement.
pub fn stratified_sample(
    graph: &InteractionGraph,
    quotas: &BTreeMap<Option<Corpus>, usize>,
    stratify_by: StratifyBy,
    seed: u64,
) -> Result<BTreeSet<String>, GraphError> {
    let mut population: BTreeMap<Option<Corpus>, Vec<&str>> = BTreeMap::new();
    for node in graph.nodes() {
        population.entry(stratify_by.label(node)).or_default().push(&node.user_id);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = BTreeSet::new();
    for (label, &quota) in quotas {
        let members = population.get(label).map(Vec::as_slice).unwrap_or(&[]);
        if members.len() < quota {
            return Err(GraphError::StratumTooSmall {
                stratum: stratum_name(*label),
                available: members.len(),
                quota,
            });
        }
        for i in sample(&mut rng, members.len(), quota) {
            picked.insert(members[i].to_string());
        }
    }
    Ok(picked)
}

pub fn random_removal_baseline(
    graph: &InteractionGraph,
    experiment: &RemovalExperiment,
    options: &MetricsOptions,
) -> Result<BaselineResult, GraphError> {
    let size = experiment.target_set.len();
    if size > graph.node_count() {
        return Err(GraphError::SampleTooLarge { requested: size, available: graph.node_count() });
    }
    let mut composition: BTreeMap<Option<Corpus>, usize> = BTreeMap::new();
    for id in &experiment.target_set {
        let node = graph.node(id).ok_or_else(|| GraphError::UnknownNode(id.clone()))?;
        *composition.entry(experiment.stratify_by.label(node)).or_default() += 1;
    }
    let quotas = largest_remainder_quotas(&composition, size);

    let trials = (0..experiment.trials)
        .into_par_iter()
        .map(|i| {
            let seed = experiment.trial_seed(i);
            let keep = stratified_sample(graph, &quotas, experiment.stratify_by, seed)?;
            let sub = graph.induced(|n| keep.contains(&n.user_id));
            Ok(TrialResult {
                seed,
                strata: quotas.iter().map(|(k, v)| (stratum_name(*k), *v)).collect(),
                metrics: metrics_with(&sub, options),
            })
        })
        .collect::<Result<Vec<_>, GraphError>>()?;
    let per_trial: Vec<GraphMetrics> = trials.iter().map(|t| t.metrics.clone()).collect();
    Ok(BaselineResult { mean: MeanMetrics::of(&per_trial), trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_support::{graph, node};
    use crate::graph::{metrics, EdgeCounts};

    #[test]
    fn triangle_minus_one() {
        let g = graph(3, &[(0, 1), (1, 2), (2, 0)]);
        let out = remove_nodes(&g, &["n02".to_string()].into());
        assert_eq!(out.node_count(), 2);
        assert_eq!(out.edge_count(), 1);
        assert!(out.edge("n00", "n01").is_some());
        // input untouched
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn removing_nothing_is_identity() {
        let g = graph(5, &[(0, 1), (1, 2), (3, 4), (4, 0)]);
        let out = remove_nodes(&g, &BTreeSet::new());
        assert_eq!(out, g);
        assert_eq!(metrics(&out), metrics(&g));
        let out = remove_nodes(&g, &["zzz".to_string()].into());
        assert_eq!(out, g);
    }

    #[test]
    fn quotas_largest_remainder() {
        let counts: BTreeMap<&str, usize> = [("a", 6), ("b", 4)].into();
        // 2.4 / 1.6 → 2 / 2
        assert_eq!(largest_remainder_quotas(&counts, 4), [("a", 2), ("b", 2)].into());
        // 3.0 / 2.0
        assert_eq!(largest_remainder_quotas(&counts, 5), [("a", 3), ("b", 2)].into());
        // equal remainders go to the smaller key: 0.5 / 0.5
        let even: BTreeMap<&str, usize> = [("a", 1), ("b", 1)].into();
        assert_eq!(largest_remainder_quotas(&even, 1), [("a", 1), ("b", 0)].into());
        let three: BTreeMap<u8, usize> = [(0, 1), (1, 1), (2, 1)].into();
        assert_eq!(largest_remainder_quotas(&three, 2).values().sum::<usize>(), 2);
    }

    #[test]
    fn quota_of_whole_population_is_its_composition() {
        let counts: BTreeMap<u8, usize> = [(0, 80), (1, 40)].into();
        assert_eq!(largest_remainder_quotas(&counts, 120), counts);
    }

    fn labelled_fixture() -> InteractionGraph {
        // 6 takedown, 4 live
        let nodes = (0..10).map(|i| node(&format!("u{i}"), if i < 6 { Corpus::Takedown } else { Corpus::Live }));
        let edges = (0..10).map(|i| (format!("u{i}"), format!("u{}", (i + 1) % 10), EdgeCounts { retweet: 1, ..Default::default() }));
        InteractionGraph::from_parts(nodes, edges)
    }

    #[test]
    fn seeded_trials_repeat() {
        let g = labelled_fixture();
        let exp = RemovalExperiment::new(["u0", "u1", "u6", "u7"].iter().map(|s| s.to_string()).collect(), 99);
        let a = random_removal_baseline(&g, &exp, &MetricsOptions::default()).unwrap();
        let b = random_removal_baseline(&g, &exp, &MetricsOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trials.len(), 5);
        for t in &a.trials {
            assert_eq!(t.metrics.node_count, 4);
        }
    }

    #[test]
    fn undersized_stratum_is_named() {
        let g = labelled_fixture();
        let quotas: BTreeMap<Option<Corpus>, usize> = [(Some(Corpus::Live), 5)].into();
        let err = stratified_sample(&g, &quotas, StratifyBy::Corpus, 1).unwrap_err();
        assert_eq!(err, GraphError::StratumTooSmall { stratum: "live".into(), available: 4, quota: 5 });
    }

    #[test]
    fn target_outside_graph_is_rejected() {
        let g = labelled_fixture();
        let exp = RemovalExperiment::new(["nope".to_string()].into(), 1);
        assert_eq!(
            random_removal_baseline(&g, &exp, &MetricsOptions::default()).unwrap_err(),
            GraphError::UnknownNode("nope".into())
        );
    }
}

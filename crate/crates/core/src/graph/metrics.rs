//! Density, diameter and average path length.
//!
//! Density is taken on the directed simple graph. Diameter and average path
//! length are taken on the undirected projection of the largest weakly
//! connected component, averaging over all node pairs of that component.
//!
//! Exact path metrics use a bit-parallel multi-source BFS: 64 sources advance
//! together, one bit per source in a `u64` per node, so each BFS level is a
//! single sweep over the adjacency lists for the whole batch.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::InteractionGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMetrics {
    pub node_count: usize,
    pub edge_count: usize,
    pub density: f64,
    pub diameter: Option<u32>,
    pub avg_path_length: Option<f64>,
    /// Nodes in the component the path metrics were measured on.
    pub component_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum PathMode {
    /// BFS from every node of the component.
    #[default]
    Exact,
    /// BFS from `sources` random nodes; diameter becomes a lower bound and
    /// the path length an estimate. Meant for graphs beyond a million nodes.
    Sampled { sources: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsOptions {
    pub path_mode: PathMode,
}

pub fn metrics(graph: &InteractionGraph) -> GraphMetrics {
    metrics_with(graph, &MetricsOptions::default())
}

pub fn metrics_with(graph: &InteractionGraph, options: &MetricsOptions) -> GraphMetrics {
    let n = graph.node_count();
    let m = graph.edge_count();
    let density = if n < 2 { 0.0 } else { m as f64 / (n as f64 * (n as f64 - 1.0)) };
    let mut out = GraphMetrics {
        node_count: n,
        edge_count: m,
        density,
        diameter: None,
        avg_path_length: None,
        component_size: 0,
    };
    if n < 2 {
        out.component_size = n;
        return out;
    }

    let full = UndirectedCsr::from_graph(graph);
    let component = full.largest_component();
    out.component_size = component.len();
    if component.len() < 2 {
        return out;
    }
    let csr = full.restrict(&component);
    let summary = match options.path_mode {
        PathMode::Exact => csr.all_sources_bfs(),
        PathMode::Sampled { sources, seed } => {
            let k = csr.len();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let picked: Vec<u32> = sample(&mut rng, k, sources.min(k)).into_iter().map(|i| i as u32).collect();
            csr.bfs_from(&picked)
        }
    };
    out.diameter = Some(summary.max_distance);
    out.avg_path_length = Some(summary.distance_sum as f64 / summary.pair_count as f64);
    out
}

/// Ordered-pair distance totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct PathSummary {
    distance_sum: u64,
    pair_count: u64,
    max_distance: u32,
}

impl PathSummary {
    fn merge(self, other: PathSummary) -> PathSummary {
        PathSummary {
            distance_sum: self.distance_sum + other.distance_sum,
            pair_count: self.pair_count + other.pair_count,
            max_distance: self.max_distance.max(other.max_distance),
        }
    }
}

/// Compressed adjacency of the undirected projection, without duplicates.
struct UndirectedCsr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl UndirectedCsr {
    fn from_graph(graph: &InteractionGraph) -> Self {
        let n = graph.node_count();
        let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(graph.edge_count() * 2);
        for (s, t) in graph.edge_indices() {
            pairs.push((s as u32, t as u32));
            pairs.push((t as u32, s as u32));
        }
        Self::from_pairs(n, pairs)
    }

    fn from_pairs(n: usize, mut pairs: Vec<(u32, u32)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        let mut offsets = vec![0usize; n + 1];
        for &(s, _) in &pairs {
            offsets[s as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets = pairs.into_iter().map(|(_, t)| t).collect();
        Self { offsets, targets }
    }

    fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    fn neighbours(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Nodes of the largest component, ascending. Ties go to the component
    /// holding the smallest node index.
    fn largest_component(&self) -> Vec<u32> {
        let n = self.len();
        let mut comp = vec![u32::MAX; n];
        let mut best: (usize, u32) = (0, 0);
        let mut stack = Vec::new();
        let mut label = 0u32;
        for start in 0..n {
            if comp[start] != u32::MAX {
                continue;
            }
            let mut size = 0usize;
            comp[start] = label;
            stack.push(start);
            while let Some(v) = stack.pop() {
                size += 1;
                for &w in self.neighbours(v) {
                    if comp[w as usize] == u32::MAX {
                        comp[w as usize] = label;
                        stack.push(w as usize);
                    }
                }
            }
            if size > best.0 {
                best = (size, label);
            }
            label += 1;
        }
        (0..n as u32).filter(|&v| comp[v as usize] == best.1).collect()
    }

    /// Subgraph over `keep` (ascending), renumbered `0..keep.len()`.
    fn restrict(&self, keep: &[u32]) -> UndirectedCsr {
        let mut remap = vec![u32::MAX; self.len()];
        for (i, &v) in keep.iter().enumerate() {
            remap[v as usize] = i as u32;
        }
        let mut pairs = Vec::new();
        for &v in keep {
            for &w in self.neighbours(v as usize) {
                if remap[w as usize] != u32::MAX {
                    pairs.push((remap[v as usize], remap[w as usize]));
                }
            }
        }
        Self::from_pairs(keep.len(), pairs)
    }

    fn all_sources_bfs(&self) -> PathSummary {
        let sources: Vec<u32> = (0..self.len() as u32).collect();
        self.bfs_from(&sources)
    }

    fn bfs_from(&self, sources: &[u32]) -> PathSummary {
        sources
            .par_chunks(64)
            .map(|batch| self.batch_bfs(batch))
            .reduce(PathSummary::default, PathSummary::merge)
    }

    /// BFS from up to 64 sources at once.
    fn batch_bfs(&self, batch: &[u32]) -> PathSummary {
        let n = self.len();
        let mut seen = vec![0u64; n];
        let mut frontier = vec![0u64; n];
        let mut next = vec![0u64; n];
        let mut active: Vec<u32> = Vec::with_capacity(batch.len());
        for (bit, &s) in batch.iter().enumerate() {
            seen[s as usize] |= 1 << bit;
            if frontier[s as usize] == 0 {
                active.push(s);
            }
            frontier[s as usize] |= 1 << bit;
        }

        let mut summary = PathSummary::default();
        let mut touched: Vec<u32> = Vec::new();
        let mut depth = 0u32;
        while !active.is_empty() {
            depth += 1;
            for &u in &active {
                let bits = frontier[u as usize];
                for &w in self.neighbours(u as usize) {
                    let w = w as usize;
                    let fresh = bits & !seen[w];
                    if fresh != 0 {
                        if next[w] == 0 {
                            touched.push(w as u32);
                        }
                        next[w] |= fresh;
                    }
                }
            }
            for &u in &active {
                frontier[u as usize] = 0;
            }
            active.clear();
            let mut reached = 0u64;
            for &w in &touched {
                let w = w as usize;
                let bits = next[w];
                next[w] = 0;
                seen[w] |= bits;
                frontier[w] = bits;
                reached += bits.count_ones() as u64;
                active.push(w as u32);
            }
            touched.clear();
            if reached > 0 {
                summary.distance_sum += reached * depth as u64;
                summary.pair_count += reached;
                summary.max_distance = depth;
            }
        }
        summary
    }
}

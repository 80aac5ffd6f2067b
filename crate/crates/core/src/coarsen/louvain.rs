//! Louvain modularity maximization.
//!
//! Local moves visit nodes in a seed-shuffled order and move each node to
//! the neighboring community with the largest positive gain, until a full
//! pass improves modularity by less than the tolerance. Communities are then
//! condensed into weighted nodes (internal weight kept as a self-loop) and
//! the process repeats on the condensed graph.

use rand::seq::SliceRandom;

use super::canonical_labels;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LouvainConfig {
    /// Minimum modularity gain for a pass or a level to count as progress.
    pub tolerance: f64,
    pub max_passes: usize,
    pub max_levels: usize,
}

impl Default for LouvainConfig {
    fn default() -> Self {
        Self { tolerance: 1e-7, max_passes: 1000, max_levels: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LouvainResult {
    /// Community of each original node, numbered by first appearance.
    pub assignment: Vec<usize>,
    pub num_communities: usize,
    pub modularity: f64,
    /// Modularity after each aggregation level.
    pub level_modularity: Vec<f64>,
}

/// Weighted graph as seen by the optimizer: neighbor lists without
/// self-entries plus per-node internal (self-loop) weight.
struct WorkGraph {
    adj: Vec<Vec<(usize, f64)>>,
    self_w: Vec<f64>,
}

impl WorkGraph {
    fn from_graph(g: &Graph) -> Self {
        let n = g.num_nodes();
        let mut adj = vec![Vec::new(); n];
        let mut self_w = vec![0.0; n];
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            let w = g.weight(e);
            if u == v {
                self_w[u] += w;
            } else {
                adj[u].push((v, w));
                adj[v].push((u, w));
            }
        }
        Self { adj, self_w }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn degree(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.self_w[i]
    }

    fn total_weight(&self) -> f64 {
        (0..self.len()).map(|i| self.degree(i)).sum::<f64>() / 2.0
    }

    fn modularity(&self, comm: &[usize]) -> f64 {
        let m2 = 2.0 * self.total_weight();
        if m2 == 0.0 {
            return 0.0;
        }
        let k = comm.iter().max().map_or(0, |&c| c + 1);
        let mut inside = vec![0.0; k];
        let mut tot = vec![0.0; k];
        for i in 0..self.len() {
            tot[comm[i]] += self.degree(i);
            inside[comm[i]] += 2.0 * self.self_w[i];
            for &(j, w) in &self.adj[i] {
                if comm[j] == comm[i] {
                    inside[comm[i]] += w;
                }
            }
        }
        inside.iter().zip(&tot).map(|(&a, &t)| a / m2 - (t / m2) * (t / m2)).sum()
    }

    /// Local moving phase; returns the (not yet canonical) community map.
    fn local_moves(&self, order: &[usize], cfg: &LouvainConfig) -> Vec<usize> {
        let n = self.len();
        let m = self.total_weight();
        let mut comm: Vec<usize> = (0..n).collect();
        if m == 0.0 {
            return comm;
        }
        let k: Vec<f64> = (0..n).map(|i| self.degree(i)).collect();
        let mut tot = k.clone();
        let mut links = vec![0.0; n];
        let mut marked = vec![false; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut q = self.modularity(&comm);
        for _ in 0..cfg.max_passes {
            let mut moved = false;
            for &i in order {
                let own = comm[i];
                for &c in &touched {
                    links[c] = 0.0;
                    marked[c] = false;
                }
                touched.clear();
                for &(j, w) in &self.adj[i] {
                    let c = comm[j];
                    if !marked[c] {
                        marked[c] = true;
                        touched.push(c);
                    }
                    links[c] += w;
                }
                tot[own] -= k[i];
                let gain = |c: usize, links: &[f64]| links[c] / m - tot[c] * k[i] / (2.0 * m * m);
                let mut best = own;
                let mut best_gain = gain(own, &links);
                touched.sort_unstable();
                for &c in &touched {
                    let g = gain(c, &links);
                    if g > best_gain {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += k[i];
                if best != own {
                    comm[i] = best;
                    moved = true;
                }
            }
            let q_new = self.modularity(&comm);
            let improved = q_new - q;
            q = q_new;
            if !moved || improved < cfg.tolerance {
                break;
            }
        }
        comm
    }

    fn aggregate(&self, comm: &[usize], k: usize) -> WorkGraph {
        let mut self_w = vec![0.0; k];
        let mut acc = vec![std::collections::BTreeMap::new(); k];
        for i in 0..self.len() {
            let ci = comm[i];
            self_w[ci] += self.self_w[i];
            for &(j, w) in &self.adj[i] {
                let cj = comm[j];
                if ci == cj {
                    // each intra edge is seen from both ends
                    self_w[ci] += w / 2.0;
                } else {
                    *acc[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        let adj = acc.into_iter().map(|m| m.into_iter().collect()).collect();
        WorkGraph { adj, self_w }
    }
}

/// Weighted modularity `Σ_c [Σ_in/2m − (Σ_tot/2m)²]` of a partition.
pub fn modularity(g: &Graph, assignment: &[usize]) -> Result<f64> {
    if assignment.len() != g.num_nodes() {
        return Err(Error::input(format!("{} labels for {} nodes", assignment.len(), g.num_nodes())));
    }
    let (comm, _) = canonical_labels(assignment);
    Ok(WorkGraph::from_graph(g).modularity(&comm))
}

/// Community assignment with default settings.
pub fn louvain(g: &Graph, seed: u64) -> Result<Vec<usize>> {
    Ok(louvain_with(g, seed, &LouvainConfig::default())?.assignment)
}

pub fn louvain_with(g: &Graph, seed: u64, cfg: &LouvainConfig) -> Result<LouvainResult> {
    if g.is_empty() {
        return Err(Error::input("louvain on an empty graph"));
    }
    let mut rng = rng::rng(seed);
    let mut work = WorkGraph::from_graph(g);
    let mut assignment: Vec<usize> = (0..g.num_nodes()).collect();
    let mut q = work.modularity(&(0..work.len()).collect::<Vec<_>>());
    let mut level_modularity = Vec::new();
    for _ in 0..cfg.max_levels {
        let mut order: Vec<usize> = (0..work.len()).collect();
        order.shuffle(&mut rng);
        let comm = work.local_moves(&order, cfg);
        let (comm, k) = canonical_labels(&comm);
        let q_new = work.modularity(&comm);
        if k == work.len() || q_new - q < cfg.tolerance {
            break;
        }
        for a in assignment.iter_mut() {
            *a = comm[*a];
        }
        work = work.aggregate(&comm, k);
        q = q_new;
        level_modularity.push(q);
    }
    let (assignment, num_communities) = canonical_labels(&assignment);
    let modularity = WorkGraph::from_graph(g).modularity(&assignment);
    Ok(LouvainResult { assignment, num_communities, modularity, level_modularity })
}

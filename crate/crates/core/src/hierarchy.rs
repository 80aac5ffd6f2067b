//! Multi-level meta-graph over an input graph: the coarsened levels, the
//! coarsening steps between them, and one inter-level edge from every node
//! of a non-top level to its coarse image. Also measures the size and
//! routing-length properties of the construction.

use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng as _;
use serde::Serialize;

use crate::coarsen::{
    contract, edgepool_scores, greedy_maximal_matching, louvain_with, pool_by_communities,
    CoarseningStep, EdgeScoreParams, LouvainConfig, PoolOptions,
};
use crate::error::{Error, Result};
use crate::graph::{connected_components, Graph, NodeId};
use crate::rng;
use crate::tensor::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CoarseningMethod {
    EdgePool,
    Louvain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    pub levels: Vec<Arc<Graph>>,
    pub steps: Vec<CoarseningStep>,
    /// `(level, fine node, coarse node)`, stored fine → coarse.
    pub inter_level_edges: Vec<(usize, NodeId, NodeId)>,
    pub method: CoarseningMethod,
}

impl Hierarchy {
    /// Assembles a hierarchy from consecutive steps, validating that each
    /// step maps the previous level onto the next and strictly shrinks it.
    pub fn from_steps(g0: Arc<Graph>, steps: Vec<CoarseningStep>, method: CoarseningMethod) -> Result<Self> {
        let mut levels = vec![g0];
        let mut inter = Vec::new();
        for (l, step) in steps.iter().enumerate() {
            let fine = &levels[l];
            if step.num_fine() != fine.num_nodes() {
                return Err(Error::input(format!("step {l} maps {} nodes, level has {}", step.num_fine(), fine.num_nodes())));
            }
            if step.num_coarse() >= fine.num_nodes() {
                return Err(Error::input(format!("step {l} does not shrink the graph")));
            }
            inter.extend(step.fine_to_coarse.iter().enumerate().map(|(u, &c)| (l, u, c)));
            levels.push(Arc::clone(&step.coarse_graph));
        }
        Ok(Self { levels, steps, inter_level_edges: inter, method })
    }

    /// Number of coarsening steps actually applied.
    pub fn depth(&self) -> usize {
        self.steps.len()
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|g| g.num_nodes()).collect()
    }

    /// All levels as one graph (level offsets in order) with intra-level and
    /// inter-level edges, both undirected.
    pub fn union_graph(&self) -> (Graph, Vec<usize>) {
        let mut offsets = vec![0];
        for g in &self.levels {
            offsets.push(offsets.last().unwrap() + g.num_nodes());
        }
        let mut edges = Vec::new();
        for (l, g) in self.levels.iter().enumerate() {
            edges.extend(g.edges().iter().filter(|(u, v)| u != v).map(|&(u, v)| (offsets[l] + u, offsets[l] + v)));
        }
        edges.extend(self.inter_level_edges.iter().map(|&(l, u, c)| (offsets[l] + u, offsets[l + 1] + c)));
        let g = Graph::new(*offsets.last().unwrap(), edges).expect("union of a valid hierarchy");
        (g, offsets)
    }
}

/// Which scoring parameters EdgePool uses at each level.
#[derive(Debug, Clone, Copy)]
pub enum EdgePoolParams<'a> {
    PerLevel(&'a [EdgeScoreParams]),
    Shared(&'a EdgeScoreParams),
}

#[derive(Debug, Clone, Copy)]
pub enum HierarchySpec<'a> {
    /// Scores come from the (pooled) features at each level.
    EdgePool { features: &'a Matrix<f64>, params: EdgePoolParams<'a> },
    /// One full Louvain run per level, seeded per level from `seed`.
    Louvain { seed: u64, features: Option<&'a Matrix<f64>>, pool: PoolOptions },
}

#[derive(Debug, Clone)]
pub struct BuiltHierarchy {
    pub hierarchy: Hierarchy,
    /// Pooled features per level (empty for Louvain without features).
    pub features: Vec<Matrix<f64>>,
}

/// Applies up to `levels` coarsening steps, stopping early once a level
/// can no longer shrink.
pub fn build_hierarchy(g: &Graph, levels: usize, spec: HierarchySpec<'_>) -> Result<BuiltHierarchy> {
    if levels == 0 {
        return Err(Error::input("hierarchy needs at least one level"));
    }
    if g.is_empty() {
        return Err(Error::input("cannot build a hierarchy over an empty graph"));
    }
    let g0 = Arc::new(g.clone());
    let mut steps = Vec::new();
    let mut graph = Arc::clone(&g0);
    let mut feats = Vec::new();
    match spec {
        HierarchySpec::EdgePool { features, params } => {
            if let EdgePoolParams::PerLevel(p) = params {
                if p.len() < levels {
                    return Err(Error::input(format!("{} scoring parameter sets for {levels} levels", p.len())));
                }
            }
            let mut x = features.clone();
            for l in 0..levels {
                let p = match params {
                    EdgePoolParams::PerLevel(p) => &p[l],
                    EdgePoolParams::Shared(p) => p,
                };
                let scores = edgepool_scores(&graph, &x, p)?;
                let matching = greedy_maximal_matching(&graph, &scores)?;
                if matching.is_empty() {
                    break;
                }
                let (step, coarse_x) = contract(&graph, &x, &matching, &scores)?;
                feats.push(std::mem::replace(&mut x, coarse_x));
                graph = Arc::clone(&step.coarse_graph);
                steps.push(step);
            }
            feats.push(x);
        }
        HierarchySpec::Louvain { seed, features, pool } => {
            let mut x = features.cloned();
            for l in 0..levels {
                let r = louvain_with(&graph, rng::derive_seed(seed, l as u64), &LouvainConfig::default())?;
                if r.num_communities == graph.num_nodes() {
                    break;
                }
                let fx = x.clone().unwrap_or_else(|| Matrix::zeros(graph.num_nodes(), 0));
                let (step, coarse_x) = pool_by_communities(&graph, &fx, &r.assignment, pool)?;
                if let Some(prev) = x.replace(coarse_x) {
                    feats.push(prev);
                }
                graph = Arc::clone(&step.coarse_graph);
                steps.push(step);
            }
            if let Some(x) = x {
                feats.push(x);
            }
        }
    }
    let method = match spec {
        HierarchySpec::EdgePool { .. } => CoarseningMethod::EdgePool,
        HierarchySpec::Louvain { .. } => CoarseningMethod::Louvain,
    };
    Ok(BuiltHierarchy { hierarchy: Hierarchy::from_steps(g0, steps, method)?, features: feats })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HierarchyStats {
    pub total_nodes: usize,
    pub total_intra_edges: usize,
    pub total_inter_edges: usize,
    /// Longest shortest path between two connected level-0 nodes through
    /// the union of all levels.
    pub max_routed_hops: usize,
    pub per_level_sizes: Vec<usize>,
    pub per_level_edges: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoutingProbe {
    /// BFS from every level-0 node.
    Exhaustive,
    /// Uniformly sampled connected level-0 pairs.
    Sampled { pairs: usize, seed: u64 },
}

pub fn hierarchy_stats(h: &Hierarchy) -> HierarchyStats {
    hierarchy_stats_with(h, RoutingProbe::Exhaustive)
}

pub fn hierarchy_stats_with(h: &Hierarchy, probe: RoutingProbe) -> HierarchyStats {
    let per_level_sizes = h.level_sizes();
    let per_level_edges: Vec<usize> = h.levels.iter().map(|g| g.num_edges()).collect();
    let (union, _) = h.union_graph();
    let g0 = &h.levels[0];
    let n0 = g0.num_nodes();
    let comp = connected_components(g0, None).expect("all nodes valid").labels;
    let mut max_hops = 0;
    match probe {
        RoutingProbe::Exhaustive => {
            for u in 0..n0 {
                let d = bfs_all(&union, u);
                for v in u + 1..n0 {
                    if comp[u] == comp[v] {
                        max_hops = max_hops.max(d[v]);
                    }
                }
            }
        }
        RoutingProbe::Sampled { pairs, seed } => {
            let mut rng = rng::rng(seed);
            let has_pair = {
                let mut sizes = std::collections::HashMap::new();
                comp.iter().for_each(|c| *sizes.entry(*c).or_insert(0) += 1);
                sizes.values().any(|&s| s > 1)
            };
            let mut taken = 0;
            while has_pair && taken < pairs {
                let (u, v) = (rng.random_range(0..n0), rng.random_range(0..n0));
                if u == v || comp[u] != comp[v] {
                    continue;
                }
                taken += 1;
                max_hops = max_hops.max(bfs_all(&union, u)[v]);
            }
        }
    }
    HierarchyStats {
        total_nodes: per_level_sizes.iter().sum(),
        total_intra_edges: per_level_edges.iter().sum(),
        total_inter_edges: h.inter_level_edges.len(),
        max_routed_hops: max_hops,
        per_level_sizes,
        per_level_edges,
    }
}

fn bfs_all(g: &Graph, s: NodeId) -> Vec<usize> {
    let mut dist = vec![usize::MAX; g.num_nodes()];
    dist[s] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for v in g.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    dist
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub m: f64,
    pub nodes_ok: bool,
    pub total_nodes: usize,
    pub node_bound: f64,
    /// Expectation-level bound; reported, not enforced.
    pub edges_ok: bool,
    pub total_intra_edges: usize,
    pub edge_bound: f64,
    pub depth_ok: bool,
    pub depth: usize,
    pub depth_bound: usize,
    pub routing_ok: bool,
    pub max_routed_hops: usize,
    /// `2 · depth` when level 0 is connected and the top is a single node.
    pub routing_bound: Option<usize>,
    /// Fraction of each level's nodes removed by its coarsening step.
    pub matched_fractions: Vec<f64>,
    /// Levels whose matched fraction falls below `1/m`.
    pub violating_levels: Vec<usize>,
}

impl BoundsReport {
    pub fn all_ok(&self) -> bool {
        self.nodes_ok && self.depth_ok && self.routing_ok && self.violating_levels.is_empty()
    }
}

pub fn verify_bounds(h: &Hierarchy, m: f64) -> Result<BoundsReport> {
    verify_bounds_with(h, m, &hierarchy_stats(h))
}

/// Checks the size, depth and routing bounds for a per-round matched
/// fraction of at least `1/m`.
pub fn verify_bounds_with(h: &Hierarchy, m: f64, stats: &HierarchyStats) -> Result<BoundsReport> {
    if !m.is_finite() || m < 2.0 {
        return Err(Error::input(format!("matched-fraction bound m = {m} must be a finite real >= 2")));
    }
    let n0 = h.levels[0].num_nodes();
    let e0 = h.levels[0].num_edges();
    let sizes = &stats.per_level_sizes;
    let matched_fractions: Vec<f64> = sizes.windows(2).map(|w| (w[0] - w[1]) as f64 / w[0] as f64).collect();
    // a round that empties the last contractible level counts as compliant
    let violating_levels = matched_fractions
        .iter()
        .enumerate()
        .filter(|(_, &f)| f < 1.0 / m - 1e-12)
        .map(|(l, _)| l)
        .collect();
    let node_bound = m * n0 as f64;
    let edge_bound = m * m / (2.0 * m - 1.0) * e0 as f64;
    let depth_bound = if n0 <= 1 { 1 } else { ((n0 as f64).ln() / (m / (m - 1.0)).ln() - 1e-9).ceil() as usize + 1 };
    let connected = connected_components(&h.levels[0], None)?.num_components <= 1;
    let single_top = h.levels.last().unwrap().num_nodes() == 1;
    let routing_bound = (connected && single_top).then(|| 2 * h.depth());
    Ok(BoundsReport {
        m,
        nodes_ok: stats.total_nodes as f64 <= node_bound + 1e-9,
        total_nodes: stats.total_nodes,
        node_bound,
        edges_ok: stats.total_intra_edges as f64 <= edge_bound + 1e-9,
        total_intra_edges: stats.total_intra_edges,
        edge_bound,
        depth_ok: h.depth() <= depth_bound,
        depth: h.depth(),
        depth_bound,
        routing_ok: routing_bound.is_none_or(|b| stats.max_routed_hops <= b),
        max_routed_hops: stats.max_routed_hops,
        routing_bound,
        matched_fractions,
        violating_levels,
    })
}

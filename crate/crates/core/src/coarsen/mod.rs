//! Graph coarsening: EdgePool (scored edge contraction) and Louvain
//! (modularity communities with mean pooling).

mod edgepool;
mod louvain;
mod pool;

pub use edgepool::{
    contract, contract_features, contract_structure, edgepool_scores, edgepool_scores_tape,
    greedy_maximal_matching, EdgePoolPlan, EdgeScoreParams,
};
pub use louvain::{louvain, louvain_with, modularity, LouvainConfig, LouvainResult};
pub use pool::{community_mean_operator, pool_by_communities, PoolOptions};

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::graph::{Graph, NodeId};

/// One coarsening round: a total, surjective map from fine to coarse nodes
/// plus the induced coarse graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseningStep {
    pub fine_to_coarse: Vec<NodeId>,
    /// EdgePool: score of the contracted edge, 1.0 for carried-forward
    /// nodes. Louvain: all 1.0.
    pub merge_scores: Vec<f64>,
    /// EdgePool only: fine edge contracted into each coarse node.
    pub merged_edge: Vec<Option<usize>>,
    pub coarse_graph: Arc<Graph>,
}

impl CoarseningStep {
    pub fn num_fine(&self) -> usize {
        self.fine_to_coarse.len()
    }

    pub fn num_coarse(&self) -> usize {
        self.coarse_graph.num_nodes()
    }

    /// Fine nodes mapped onto each coarse node, ascending.
    pub fn preimages(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.num_coarse()];
        for (u, &c) in self.fine_to_coarse.iter().enumerate() {
            out[c].push(u);
        }
        out
    }
}

/// Dense relabeling of arbitrary group labels by first appearance in node
/// order. Returns the relabeled map and the number of groups.
pub(crate) fn canonical_labels(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut remap = BTreeMap::new();
    let out = labels
        .iter()
        .map(|&l| {
            let next = remap.len();
            *remap.entry(l).or_insert(next)
        })
        .collect();
    (out, remap.len())
}

/// Quotient graph: coarse `(a, b)`, `a != b`, exists iff some fine edge
/// joins their preimages. Per coarse pair, the crossing fine edge weights are
/// summarized by `weight` (None: unweighted result). Coarse edges are sorted.
pub(crate) fn quotient_graph(
    g: &Graph,
    fine_to_coarse: &[NodeId],
    num_coarse: usize,
    mean_weights: bool,
    self_loops: bool,
) -> Graph {
    let mut acc: BTreeMap<(NodeId, NodeId), (f64, usize)> = BTreeMap::new();
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let (a, b) = (fine_to_coarse[u], fine_to_coarse[v]);
        if a == b && !self_loops {
            continue;
        }
        let slot = acc.entry((a.min(b), a.max(b))).or_insert((0.0, 0));
        slot.0 += g.weight(e);
        slot.1 += 1;
    }
    let mut b = Graph::builder(num_coarse).edges(acc.keys().copied()).allow_self_loops(self_loops);
    if mean_weights {
        b = b.weights(acc.values().map(|&(s, c)| s / c as f64).collect());
    }
    b.build().expect("quotient of a valid graph is valid")
}

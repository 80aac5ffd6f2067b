//! Immutable undirected graphs with dense `0..n` node ids.
//!
//! Edges are stored once, canonicalized as `(min, max)`, in construction
//! order. Adjacency is kept in CSR form with neighbors sorted by id so every
//! traversal is deterministic.

mod io;
mod traversal;

pub use io::{load_road_network, parse_edge_list, read_edge_list, EdgeListGraph};
pub use traversal::{
    ball, bfs_distances, connected_components, largest_connected_component, random_walk_color,
    shortest_path_hops, ComponentLabeling,
};

use std::collections::HashSet;
use std::hash::Hasher;

use fnv::FnvHasher;

use crate::error::{Error, Result};
use crate::tensor::Matrix;

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub struct Graph {
    num_nodes: usize,
    edges: Vec<(NodeId, NodeId)>,
    weights: Option<Vec<f64>>,
    features: Option<Matrix<f64>>,
    offsets: Vec<usize>,
    // (neighbor, edge index), sorted by neighbor within each node
    adjacency: Vec<(NodeId, usize)>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.num_nodes == other.num_nodes
            && self.edges == other.edges
            && self.weights == other.weights
            && self.features == other.features
    }
}

impl Graph {
    /// Simple unweighted graph. Self-loops and repeated pairs are rejected.
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self> {
        GraphBuilder::new(num_nodes).edges(edges).build()
    }

    pub fn builder(num_nodes: usize) -> GraphBuilder {
        GraphBuilder::new(num_nodes)
    }

    pub fn empty(num_nodes: usize) -> Self {
        Self::new(num_nodes, []).expect("edgeless graph is valid")
    }

    /// Path `0 - 1 - … - (n-1)`.
    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("path is valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3);
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle is valid")
    }

    /// Star with center `0` and `leaves` leaves.
    pub fn star(leaves: usize) -> Self {
        Self::new(leaves + 1, (1..=leaves).map(|i| (0, i))).expect("star is valid")
    }

    pub fn complete(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).expect("clique is valid")
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.num_nodes == 0
    }

    #[inline]
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, e: usize) -> (NodeId, NodeId) {
        self.edges[e]
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Weight of edge `e`; unweighted graphs report 1.
    #[inline]
    pub fn weight(&self, e: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[e])
    }

    pub fn features(&self) -> Option<&Matrix<f64>> {
        self.features.as_ref()
    }

    pub fn with_features(mut self, features: Matrix<f64>) -> Result<Self> {
        if features.rows() != self.num_nodes {
            return Err(Error::input(format!(
                "feature matrix has {} rows for {} nodes",
                features.rows(),
                self.num_nodes
            )));
        }
        self.features = Some(features);
        Ok(self)
    }

    /// Incident `(neighbor, edge index)` pairs of `u`, sorted by neighbor.
    #[inline]
    pub fn incident(&self, u: NodeId) -> &[(NodeId, usize)] {
        &self.adjacency[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn neighbors(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.incident(u).iter().map(|&(v, _)| v)
    }

    #[inline]
    pub fn degree(&self, u: NodeId) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn has_self_loops(&self) -> bool {
        self.edges.iter().any(|&(u, v)| u == v)
    }

    pub fn check_node(&self, u: NodeId) -> Result<()> {
        if u >= self.num_nodes {
            return Err(Error::input(format!("node id {u} out of range 0..{}", self.num_nodes)));
        }
        Ok(())
    }

    /// Index of the edge joining `u` and `v`, if any.
    pub fn find_edge(&self, u: NodeId, v: NodeId) -> Option<usize> {
        let inc = self.incident(u);
        inc.binary_search_by_key(&v, |&(w, _)| w).ok().map(|i| inc[i].1)
    }

    /// 64-bit FNV-1a digest over topology and weights.
    pub fn content_hash(&self) -> u64 {
        let mut h = FnvHasher::default();
        h.write_u64(self.num_nodes as u64);
        for &(u, v) in &self.edges {
            h.write_u64(u as u64);
            h.write_u64(v as u64);
        }
        if let Some(w) = &self.weights {
            for x in w {
                h.write_u64(x.to_bits());
            }
        }
        h.finish()
    }

    /// Subgraph induced on `nodes`; node `nodes[i]` becomes node `i`.
    pub fn induced_subgraph(&self, nodes: &[NodeId]) -> Result<Graph> {
        let mut local = vec![usize::MAX; self.num_nodes];
        for (i, &u) in nodes.iter().enumerate() {
            self.check_node(u)?;
            if local[u] != usize::MAX {
                return Err(Error::input(format!("node {u} listed twice")));
            }
            local[u] = i;
        }
        let mut edges = Vec::new();
        let mut weights = Vec::new();
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if local[u] != usize::MAX && local[v] != usize::MAX {
                edges.push((local[u], local[v]));
                weights.push(self.weight(e));
            }
        }
        let mut b = GraphBuilder::new(nodes.len()).edges(edges).allow_self_loops(self.has_self_loops());
        if self.weights.is_some() {
            b = b.weights(weights);
        }
        if let Some(f) = &self.features {
            let d = f.cols();
            let data = nodes.iter().flat_map(|&u| f.row(u).to_vec()).collect();
            b = b.features(Matrix::from_vec(nodes.len(), d, data)?);
        }
        b.build()
    }

    /// Relabel nodes: old node `u` becomes `perm[u]`. Edge order is preserved.
    pub fn permuted(&self, perm: &[NodeId]) -> Result<Graph> {
        if perm.len() != self.num_nodes {
            return Err(Error::input("permutation length differs from node count"));
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::input("not a permutation"));
            }
        }
        let mut b = GraphBuilder::new(self.num_nodes)
            .edges(self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
            .allow_self_loops(self.has_self_loops());
        if let Some(w) = &self.weights {
            b = b.weights(w.clone());
        }
        if let Some(f) = &self.features {
            let mut out = Matrix::zeros(f.rows(), f.cols());
            for (u, &pu) in perm.iter().enumerate() {
                out.row_mut(pu).copy_from_slice(f.row(u));
            }
            b = b.features(out);
        }
        b.build()
    }
}

#[derive(Debug, Clone)]
pub struct GraphBuilder {
    num_nodes: usize,
    edges: Vec<(NodeId, NodeId)>,
    weights: Option<Vec<f64>>,
    features: Option<Matrix<f64>>,
    allow_self_loops: bool,
}

impl GraphBuilder {
    pub fn new(num_nodes: usize) -> Self {
        Self { num_nodes, edges: Vec::new(), weights: None, features: None, allow_self_loops: false }
    }

    pub fn edges(mut self, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Self {
        self.edges.extend(edges);
        self
    }

    pub fn weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn features(mut self, features: Matrix<f64>) -> Self {
        self.features = Some(features);
        self
    }

    pub fn allow_self_loops(mut self, allow: bool) -> Self {
        self.allow_self_loops = allow;
        self
    }

    pub fn build(self) -> Result<Graph> {
        let n = self.num_nodes;
        let mut seen = HashSet::with_capacity(self.edges.len());
        let mut edges = Vec::with_capacity(self.edges.len());
        for (u, v) in self.edges {
            if u >= n || v >= n {
                return Err(Error::input(format!("edge ({u}, {v}) references a node outside 0..{n}")));
            }
            if u == v && !self.allow_self_loops {
                return Err(Error::input(format!("self-loop on node {u}")));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(Error::input(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
            edges.push(e);
        }
        if let Some(w) = &self.weights {
            if w.len() != edges.len() {
                return Err(Error::input(format!("{} weights for {} edges", w.len(), edges.len())));
            }
            if let Some(bad) = w.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                return Err(Error::input(format!("edge weight {bad} is not a non-negative real")));
            }
        }
        if let Some(f) = &self.features {
            if f.rows() != n {
                return Err(Error::input(format!("feature matrix has {} rows for {n} nodes", f.rows())));
            }
        }

        let mut degree = vec![0usize; n + 1];
        for &(u, v) in &edges {
            degree[u] += 1;
            if u != v {
                degree[v] += 1;
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for u in 0..n {
            offsets[u + 1] = offsets[u] + degree[u];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![(0, 0); offsets[n]];
        for (e, &(u, v)) in edges.iter().enumerate() {
            adjacency[fill[u]] = (v, e);
            fill[u] += 1;
            if u != v {
                adjacency[fill[v]] = (u, e);
                fill[v] += 1;
            }
        }
        for u in 0..n {
            adjacency[offsets[u]..offsets[u + 1]].sort_unstable();
        }
        Ok(Graph { num_nodes: n, edges, weights: self.weights, features: self.features, offsets, adjacency })
    }
}

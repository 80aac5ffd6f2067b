//! Graph layers built from tape primitives.

use std::sync::Arc;

use super::{SparseOp, Tape, Var};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::tensor::Real;

/// `D̃^{-1/2} (A + I) D̃^{-1/2}` with edge weights as adjacency entries.
pub fn gcn_normalized_adjacency<T: Real>(g: &Graph) -> SparseOp<T> {
    let n = g.num_nodes();
    let mut deg = vec![1.0f64; n];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let w = g.weight(e);
        deg[u] += w;
        if u != v {
            deg[v] += w;
        }
    }
    let inv_sqrt: Vec<f64> = deg.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut triplets = Vec::with_capacity(n + 2 * g.num_edges());
    for u in 0..n {
        triplets.push((u, u, T::from_f64(inv_sqrt[u] * inv_sqrt[u])));
        for &(v, e) in g.incident(u) {
            triplets.push((u, v, T::from_f64(g.weight(e) * inv_sqrt[u] * inv_sqrt[v])));
        }
    }
    SparseOp::from_triplets(n, n, &triplets).expect("indices are in range")
}

/// `Â · H · W`; no activation.
pub fn gcn_layer<T: Real>(tape: &mut Tape<T>, adj: &Arc<SparseOp<T>>, h: Var, w: Var) -> Result<Var> {
    let (n, d_in) = tape.shape(h);
    let (w_in, d_out) = tape.shape(w);
    if adj.in_rows() != n || w_in != d_in {
        return Err(Error::input(format!(
            "gcn shapes: operator {}x{}, H {n}x{d_in}, W {w_in}x{d_out}",
            adj.out_rows(),
            adj.in_rows()
        )));
    }
    // propagate through whichever side is narrower
    if d_out < d_in {
        let hw = tape.matmul(h, w)?;
        tape.sparse(adj, hw)
    } else {
        let ah = tape.sparse(adj, h)?;
        tape.matmul(ah, w)
    }
}

/// Directed, relation-tagged edges over one node set, with each relation
/// pre-normalized into a mean aggregation operator.
#[derive(Debug, Clone)]
pub struct RelationalGraph<T> {
    num_nodes: usize,
    relations: Vec<Arc<SparseOp<T>>>,
}

impl<T: Real> RelationalGraph<T> {
    /// `relations[r]` lists `(source, target)` message edges of relation `r`.
    pub fn new(num_nodes: usize, relations: &[Vec<(NodeId, NodeId)>]) -> Result<Self> {
        let relations = relations
            .iter()
            .map(|edges| mean_aggregation(num_nodes, num_nodes, edges).map(Arc::new))
            .collect::<Result<_>>()?;
        Ok(Self { num_nodes, relations })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn relation(&self, r: usize) -> &Arc<SparseOp<T>> {
        &self.relations[r]
    }
}

/// `out[t] = mean over incoming (s → t) of in[s]`; targets without
/// in-neighbors get a zero row.
pub fn mean_aggregation<T: Real>(targets: usize, sources: usize, edges: &[(NodeId, NodeId)]) -> Result<SparseOp<T>> {
    let mut indeg = vec![0usize; targets];
    for &(s, t) in edges {
        if t >= targets || s >= sources {
            return Err(Error::input(format!("relation edge ({s} -> {t}) out of range")));
        }
        indeg[t] += 1;
    }
    let triplets: Vec<_> = edges.iter().map(|&(s, t)| (t, s, T::one() / T::from_f64(indeg[t] as f64))).collect();
    SparseOp::from_triplets(targets, sources, &triplets)
}

/// `h'_i = W_self h_i + Σ_r Σ_{j ∈ N_r(i)} W_r h_j / |N_r(i)|`; no activation.
pub fn rgcn_layer<T: Real>(
    tape: &mut Tape<T>,
    graph: &RelationalGraph<T>,
    h: Var,
    w_self: Var,
    w_rel: &[Var],
) -> Result<Var> {
    if w_rel.len() != graph.num_relations() {
        return Err(Error::input(format!(
            "{} relation weights for {} relations",
            w_rel.len(),
            graph.num_relations()
        )));
    }
    if tape.shape(h).0 != graph.num_nodes() {
        return Err(Error::input("rgcn input rows differ from node count"));
    }
    let mut out = tape.matmul(h, w_self)?;
    for (r, &w) in w_rel.iter().enumerate() {
        let op = graph.relation(r);
        if op.nnz() == 0 {
            continue;
        }
        let agg = tape.sparse(op, h)?;
        let msg = tape.matmul(agg, w)?;
        out = tape.add(out, msg)?;
    }
    Ok(out)
}

/// Mean-pooling operator from node rows to graph rows.
pub fn mean_pool_operator<T: Real>(membership: &[usize], num_graphs: usize) -> Result<SparseOp<T>> {
    let mut sizes = vec![0usize; num_graphs];
    for &g in membership {
        if g >= num_graphs {
            return Err(Error::input(format!("graph index {g} outside 0..{num_graphs}")));
        }
        sizes[g] += 1;
    }
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::input(format!("graph {empty} in the batch has no nodes")));
    }
    let triplets: Vec<_> = membership
        .iter()
        .enumerate()
        .map(|(u, &g)| (g, u, T::one() / T::from_f64(sizes[g] as f64)))
        .collect();
    SparseOp::from_triplets(num_graphs, membership.len(), &triplets)
}

/// Per-graph mean of node rows: `[N x d] -> [B x d]`.
pub fn global_mean_pool<T: Real>(tape: &mut Tape<T>, h: Var, membership: &[usize], num_graphs: usize) -> Result<Var> {
    if membership.len() != tape.shape(h).0 {
        return Err(Error::input("membership must cover every row"));
    }
    let op = Arc::new(mean_pool_operator(membership, num_graphs)?);
    tape.sparse(&op, h)
}

/// `x · W + b`
pub fn linear<T: Real>(tape: &mut Tape<T>, x: Var, w: Var, b: Var) -> Result<Var> {
    let xw = tape.matmul(x, w)?;
    tape.add_broadcast(xw, b)
}

/// `ReLU(x W1 + b1) W2 + b2`
pub fn mlp2<T: Real>(tape: &mut Tape<T>, x: Var, w1: Var, b1: Var, w2: Var, b2: Var) -> Result<Var> {
    let h = linear(tape, x, w1, b1)?;
    let h = tape.relu(h);
    linear(tape, h, w2, b2)
}

pub fn softmax_cross_entropy<T: Real>(tape: &mut Tape<T>, logits: Var, labels: &[usize]) -> Result<Var> {
    tape.softmax_cross_entropy(logits, Arc::from(labels))
}

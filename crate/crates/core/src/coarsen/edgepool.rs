//! EdgePool. Raw edge scores `r(u→v) = W·(x_u ‖ x_v) + b` are softmax-normalized
//! over each node's incident edges and shifted by 0.5; the undirected score
//! of `{u, v}` is the mean of its two directed scores. A greedy maximal
//! matching by descending score is contracted, and each merged node takes
//! `s_uv · (x_u + x_v)`.

use std::cmp::Ordering;
use std::sync::Arc;

use super::{quotient_graph, CoarseningStep};
use crate::autodiff::{SparseOp, Tape, Var};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::tensor::{Matrix, Real};

/// Scoring parameters for one level. `w` has `2d` entries: the first `d`
/// weight the source node's features, the last `d` the target's.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeScoreParams {
    pub w: Vec<f64>,
    pub b: f64,
}

impl EdgeScoreParams {
    pub fn zeros(feature_dim: usize) -> Self {
        Self { w: vec![0.0; 2 * feature_dim], b: 0.0 }
    }
}

/// Graph-dependent sparse operators for scoring one graph.
#[derive(Debug, Clone)]
pub struct EdgePoolPlan<T> {
    num_nodes: usize,
    /// directed edge k (grouped by source) -> source node
    src: Arc<SparseOp<T>>,
    /// directed edge k -> target node
    dst: Arc<SparseOp<T>>,
    /// undirected edge e -> mean of its directed scores
    undirect: Arc<SparseOp<T>>,
    offsets: Arc<[usize]>,
}

impl<T: Real> EdgePoolPlan<T> {
    pub fn new(g: &Graph) -> Self {
        let n = g.num_nodes();
        let mut src = Vec::new();
        let mut dst = Vec::new();
        let mut per_edge: Vec<Vec<usize>> = vec![Vec::new(); g.num_edges()];
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut k = 0;
        for u in 0..n {
            for &(v, e) in g.incident(u) {
                src.push((k, u, T::one()));
                dst.push((k, v, T::one()));
                per_edge[e].push(k);
                k += 1;
            }
            offsets.push(k);
        }
        let undirect: Vec<_> = per_edge
            .iter()
            .enumerate()
            .flat_map(|(e, ks)| {
                let c = T::one() / T::from_f64(ks.len() as f64);
                ks.iter().map(move |&k| (e, k, c))
            })
            .collect();
        Self {
            num_nodes: n,
            src: Arc::new(SparseOp::from_triplets(k, n, &src).unwrap()),
            dst: Arc::new(SparseOp::from_triplets(k, n, &dst).unwrap()),
            undirect: Arc::new(SparseOp::from_triplets(g.num_edges(), k, &undirect).unwrap()),
            offsets: offsets.into(),
        }
    }
}

/// Differentiable undirected edge scores, `[E x 1]` aligned with `g.edges()`.
/// `w` is the `[2d x 1]` column of scoring weights, `b` a `[1 x 1]` bias.
pub fn edgepool_scores_tape<T: Real>(
    tape: &mut Tape<T>,
    plan: &EdgePoolPlan<T>,
    x: Var,
    w: Var,
    b: Var,
) -> Result<Var> {
    let (n, d) = tape.shape(x);
    if n != plan.num_nodes {
        return Err(Error::input(format!("{n} feature rows for {} nodes", plan.num_nodes)));
    }
    if tape.shape(w) != (2 * d, 1) || tape.shape(b) != (1, 1) {
        return Err(Error::input(format!(
            "edge score params {:?}/{:?} do not fit feature dim {d}",
            tape.shape(w),
            tape.shape(b)
        )));
    }
    let take_src = Arc::new(SparseOp::gather(2 * d, &(0..d).collect::<Vec<_>>())?);
    let take_dst = Arc::new(SparseOp::gather(2 * d, &(d..2 * d).collect::<Vec<_>>())?);
    let w_src = tape.sparse(&take_src, w)?;
    let w_dst = tape.sparse(&take_dst, w)?;
    let p = tape.matmul(x, w_src)?;
    let q = tape.matmul(x, w_dst)?;
    let rp = tape.sparse(&plan.src, p)?;
    let rq = tape.sparse(&plan.dst, q)?;
    let raw = tape.add(rp, rq)?;
    let raw = tape.add_broadcast(raw, b)?;
    let soft = tape.segment_softmax(raw, Arc::clone(&plan.offsets))?;
    let directed = tape.add_scalar(soft, T::from_f64(0.5));
    tape.sparse(&plan.undirect, directed)
}

/// Plain evaluation of the undirected EdgePool scores.
pub fn edgepool_scores(g: &Graph, features: &Matrix<f64>, params: &EdgeScoreParams) -> Result<Vec<f64>> {
    if features.rows() != g.num_nodes() {
        return Err(Error::input(format!("{} feature rows for {} nodes", features.rows(), g.num_nodes())));
    }
    if params.w.len() != 2 * features.cols() {
        return Err(Error::input(format!(
            "scoring weight has {} entries, features need {}",
            params.w.len(),
            2 * features.cols()
        )));
    }
    let mut tape = Tape::<f64>::new();
    let plan = EdgePoolPlan::new(g);
    let x = tape.constant(features.clone());
    let w = tape.constant(Matrix::from_vec(params.w.len(), 1, params.w.clone())?);
    let b = tape.constant(Matrix::filled(1, 1, params.b));
    let s = edgepool_scores_tape(&mut tape, &plan, x, w, b)?;
    Ok(tape.value(s).data().to_vec())
}

/// Greedy maximal matching: edges by descending score, ties by the smaller
/// `(min, max)` endpoint pair; an edge is taken iff both endpoints are free.
/// Returns selected edge indices in selection order.
pub fn greedy_maximal_matching(g: &Graph, scores: &[f64]) -> Result<Vec<usize>> {
    if scores.len() != g.num_edges() {
        return Err(Error::input(format!("{} scores for {} edges", scores.len(), g.num_edges())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::input("edge score is NaN"));
    }
    let mut order: Vec<usize> = (0..g.num_edges()).filter(|&e| g.edge(e).0 != g.edge(e).1).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(Ordering::Equal)
            .then_with(|| g.edge(a).cmp(&g.edge(b)))
    });
    let mut matched = vec![false; g.num_nodes()];
    let mut out = Vec::new();
    for e in order {
        let (u, v) = g.edge(e);
        if !matched[u] && !matched[v] {
            matched[u] = true;
            matched[v] = true;
            out.push(e);
        }
    }
    Ok(out)
}

/// Coarsening map for contracting `matching`. Coarse ids follow the smallest
/// fine id of each group.
pub fn contract_structure(g: &Graph, matching: &[usize], scores: &[f64]) -> Result<CoarseningStep> {
    let n = g.num_nodes();
    if scores.len() != g.num_edges() {
        return Err(Error::input(format!("{} scores for {} edges", scores.len(), g.num_edges())));
    }
    let mut partner: Vec<Option<(NodeId, usize)>> = vec![None; n];
    for &e in matching {
        if e >= g.num_edges() {
            return Err(Error::input(format!("matching references unknown edge {e}")));
        }
        let (u, v) = g.edge(e);
        if u == v || partner[u].is_some() || partner[v].is_some() {
            return Err(Error::input(format!("matching is not vertex-disjoint at edge ({u}, {v})")));
        }
        partner[u] = Some((v, e));
        partner[v] = Some((u, e));
    }
    let mut fine_to_coarse = vec![usize::MAX; n];
    let mut merge_scores = Vec::new();
    let mut merged_edge = Vec::new();
    for u in 0..n {
        if fine_to_coarse[u] != usize::MAX {
            continue;
        }
        let c = merge_scores.len();
        fine_to_coarse[u] = c;
        match partner[u] {
            Some((v, e)) => {
                fine_to_coarse[v] = c;
                merge_scores.push(scores[e]);
                merged_edge.push(Some(e));
            }
            None => {
                merge_scores.push(1.0);
                merged_edge.push(None);
            }
        }
    }
    let num_coarse = merge_scores.len();
    let coarse_graph = Arc::new(quotient_graph(g, &fine_to_coarse, num_coarse, false, false));
    Ok(CoarseningStep { fine_to_coarse, merge_scores, merged_edge, coarse_graph })
}

/// Differentiable contraction features: `s_e · (x_u + x_v)` for merged
/// pairs, `x_u` for carried-forward nodes. `scores` is the `[E x 1]` tape
/// value the matching was selected from.
pub fn contract_features<T: Real>(tape: &mut Tape<T>, step: &CoarseningStep, x: Var, scores: Var) -> Result<Var> {
    let n = step.num_fine();
    let c = step.num_coarse();
    if tape.shape(x).0 != n {
        return Err(Error::input(format!("{} feature rows for {n} fine nodes", tape.shape(x).0)));
    }
    let sum: Vec<_> = step.fine_to_coarse.iter().enumerate().map(|(u, &w)| (w, u, T::one())).collect();
    let sum = Arc::new(SparseOp::from_triplets(c, n, &sum)?);
    let pooled = tape.sparse(&sum, x)?;
    if step.merged_edge.iter().all(Option::is_none) {
        return Ok(pooled);
    }
    let num_edges = tape.shape(scores).0;
    let pick: Vec<_> = step
        .merged_edge
        .iter()
        .enumerate()
        .filter_map(|(w, e)| e.map(|e| (w, e, T::one())))
        .collect();
    let pick = Arc::new(SparseOp::from_triplets(c, num_edges, &pick)?);
    let carried = Matrix::from_vec(
        c,
        1,
        step.merged_edge.iter().map(|e| if e.is_some() { T::zero() } else { T::one() }).collect(),
    )?;
    let picked = tape.sparse(&pick, scores)?;
    let carried = tape.constant(carried);
    let factor = tape.add(picked, carried)?;
    tape.scale_rows(pooled, factor)
}

/// Plain contraction of `features` along `matching`.
pub fn contract(
    g: &Graph,
    features: &Matrix<f64>,
    matching: &[usize],
    scores: &[f64],
) -> Result<(CoarseningStep, Matrix<f64>)> {
    if features.rows() != g.num_nodes() {
        return Err(Error::input(format!("{} feature rows for {} nodes", features.rows(), g.num_nodes())));
    }
    let step = contract_structure(g, matching, scores)?;
    let mut tape = Tape::<f64>::new();
    let x = tape.constant(features.clone());
    let s = tape.constant(Matrix::from_vec(scores.len(), 1, scores.to_vec())?);
    let out = contract_features(&mut tape, &step, x, s)?;
    Ok((step, tape.value(out).clone()))
}

use std::sync::Arc;

use super::{canonical_labels, quotient_graph, CoarseningStep};
use crate::autodiff::SparseOp;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tensor::{Matrix, Real};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PoolOptions {
    /// Keep intra-community edges as coarse self-loops (mean weight).
    pub self_loops: bool,
}

/// Average-pools a community assignment into a coarse graph. Coarse nodes
/// are numbered by first appearance; coarse edge weights are the mean of
/// the crossing fine edge weights.
pub fn pool_by_communities(
    g: &Graph,
    features: &Matrix<f64>,
    assignment: &[usize],
    opts: PoolOptions,
) -> Result<(CoarseningStep, Matrix<f64>)> {
    if assignment.len() != g.num_nodes() {
        return Err(Error::input(format!(
            "assignment covers {} nodes, graph has {}",
            assignment.len(),
            g.num_nodes()
        )));
    }
    if features.rows() != g.num_nodes() {
        return Err(Error::input(format!("{} feature rows for {} nodes", features.rows(), g.num_nodes())));
    }
    let (fine_to_coarse, k) = canonical_labels(assignment);
    let coarse_graph = Arc::new(quotient_graph(g, &fine_to_coarse, k, true, opts.self_loops));
    let step = CoarseningStep {
        fine_to_coarse,
        merge_scores: vec![1.0; k],
        merged_edge: vec![None; k],
        coarse_graph,
    };
    let pooled = community_mean_operator::<f64>(&step).apply(features)?;
    Ok((step, pooled))
}

/// `[coarse x fine]` operator averaging each community's rows.
pub fn community_mean_operator<T: Real>(step: &CoarseningStep) -> SparseOp<T> {
    let mut size = vec![0usize; step.num_coarse()];
    for &c in &step.fine_to_coarse {
        size[c] += 1;
    }
    let t: Vec<_> = step
        .fine_to_coarse
        .iter()
        .enumerate()
        .map(|(u, &c)| (c, u, T::one() / T::from_f64(size[c] as f64)))
        .collect();
    SparseOp::from_triplets(step.num_coarse(), step.num_fine(), &t).expect("indices in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_communities_are_identity() {
        let g = Graph::path(2);
        let x = Matrix::from_f64_rows(&[&[1.0], &[5.0]]);
        let (step, f) = pool_by_communities(&g, &x, &[0, 1], PoolOptions::default()).unwrap();
        assert_eq!(&*step.coarse_graph, &Graph::builder(2).edges([(0, 1)]).weights(vec![1.0]).build().unwrap());
        assert_eq!(f, x);
    }

    #[test]
    fn mean_feature() {
        let g = Graph::path(2);
        let x = Matrix::from_f64_rows(&[&[2.0], &[4.0]]);
        let (step, f) = pool_by_communities(&g, &x, &[7, 7], PoolOptions::default()).unwrap();
        assert_eq!(f, Matrix::from_f64_rows(&[&[3.0]]));
        assert_eq!(step.coarse_graph.num_edges(), 0);
        let (step, _) = pool_by_communities(&g, &x, &[7, 7], PoolOptions { self_loops: true }).unwrap();
        assert_eq!(step.coarse_graph.edges(), &[(0, 0)]);
    }

    #[test]
    fn bridged_triangles_pool_to_an_edge() {
        let g = Graph::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]).unwrap();
        let x = Matrix::zeros(6, 1);
        let (step, _) = pool_by_communities(&g, &x, &[0, 0, 0, 1, 1, 1], PoolOptions::default()).unwrap();
        assert_eq!(step.coarse_graph.edges(), &[(0, 1)]);
        assert_eq!(step.coarse_graph.weights().unwrap(), &[1.0]);
    }

    #[test]
    fn mean_weights_of_crossing_edges() {
        let g = Graph::builder(4).edges([(0, 2), (1, 3), (0, 1)]).weights(vec![1.0, 3.0, 9.0]).build().unwrap();
        let x = Matrix::zeros(4, 1);
        let (step, _) = pool_by_communities(&g, &x, &[0, 0, 1, 1], PoolOptions::default()).unwrap();
        assert_eq!(step.coarse_graph.weights().unwrap(), &[2.0]);
        assert!(pool_by_communities(&g, &x, &[0, 0, 1], PoolOptions::default()).is_err());
    }
}

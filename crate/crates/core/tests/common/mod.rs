#![allow(dead_code)]

use hgnet::graph::Graph;
use hgnet::rng;
use hgnet::tensor::Matrix;
use rand::Rng;

pub fn random_matrix(r: &mut rng::Rng, rows: usize, cols: usize) -> Matrix<f64> {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap()
}

/// G(n, p) with optional random positive weights.
pub fn random_graph(r: &mut rng::Rng, n: usize, p: f64, weighted: bool) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if r.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let mut b = Graph::builder(n).edges(edges.clone());
    if weighted {
        b = b.weights(edges.iter().map(|_| r.random_range(0.5..2.0)).collect());
    }
    b.build().unwrap()
}

pub mod gradcases;
pub mod oracles;

/// Graphs on `1..=max_n` nodes with each pair present with probability 1/2.
pub fn arb_graph(max_n: usize) -> impl proptest::strategy::Strategy<Value = Graph> {
    use proptest::prelude::*;
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |mask| {
            let pairs = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
            let edges = pairs.zip(mask).filter(|(_, keep)| *keep).map(|(p, _)| p);
            Graph::new(n, edges).unwrap()
        })
    })
}

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use super::NodeTask;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;
use crate::tensor::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmConfig {
    pub n_per_class: usize,
    pub classes: usize,
    pub p_in: f64,
    pub p_out: f64,
    /// Standard deviation of the Gaussian noise added to one-hot features.
    pub feature_noise: f64,
    pub seed: u64,
}

impl SbmConfig {
    pub fn new(n_per_class: usize, classes: usize, p_in: f64, p_out: f64, seed: u64) -> Self {
        Self { n_per_class, classes, p_in, p_out, feature_noise: 0.1, seed }
    }
}

pub fn make_homophilous_sbm(n_per_class: usize, classes: usize, p_in: f64, p_out: f64, seed: u64) -> Result<NodeTask> {
    make_homophilous_sbm_with(&SbmConfig::new(n_per_class, classes, p_in, p_out, seed))
}

/// Stochastic block model with equal class sizes. Classes are assigned to
/// node ids by a seeded shuffle; features are the class indicator plus noise.
pub fn make_homophilous_sbm_with(cfg: &SbmConfig) -> Result<NodeTask> {
    let SbmConfig { n_per_class, classes, p_in, p_out, feature_noise, seed } = *cfg;
    if classes == 0 || n_per_class == 0 {
        return Err(Error::input("block model needs at least one class and one node per class"));
    }
    if !(0.0 < p_in && p_in <= 1.0 && 0.0 <= p_out && p_out < p_in) {
        return Err(Error::input(format!("need 0 <= p_out < p_in <= 1, got p_in = {p_in}, p_out = {p_out}")));
    }
    if !(feature_noise >= 0.0 && feature_noise.is_finite()) {
        return Err(Error::input(format!("feature noise {feature_noise} must be finite and non-negative")));
    }
    let n = n_per_class * classes;
    let mut rng = rng::rng(seed);
    let mut labels: Vec<usize> = (0..n).map(|i| i / n_per_class).collect();
    labels.shuffle(&mut rng);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if labels[u] == labels[v] { p_in } else { p_out };
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let noise = Normal::new(0.0, feature_noise).expect("validated above");
    let mut x = Matrix::zeros(n, classes);
    for u in 0..n {
        for c in 0..classes {
            x[(u, c)] = if labels[u] == c { 1.0 } else { 0.0 } + noise.sample(&mut rng);
        }
    }
    NodeTask::new(Graph::new(n, edges)?, x, labels)
}

/// Random connected graph: a random recursive tree plus uniformly random
/// extra edges until the average degree reaches `avg_degree` (at least the
/// tree's).
pub fn random_connected_graph(n: usize, avg_degree: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::input("graph needs at least one node"));
    }
    let max_edges = n * (n - 1) / 2;
    let want = ((avg_degree * n as f64 / 2.0).round() as usize).clamp(n - 1, max_edges);
    let mut rng = rng::rng(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut seen = HashSet::new();
    let mut edges = Vec::with_capacity(want);
    for i in 1..n {
        let j = rng.random_range(0..i);
        let e = (perm[i].min(perm[j]), perm[i].max(perm[j]));
        seen.insert(e);
        edges.push(e);
    }
    while edges.len() < want {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        let e = (u.min(v), u.max(v));
        if u != v && seen.insert(e) {
            edges.push(e);
        }
    }
    Graph::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::connected_components;

    #[test]
    fn two_cliques() {
        let t = make_homophilous_sbm(5, 2, 1.0, 0.0, 3).unwrap();
        assert_eq!(t.graph.num_edges(), 20);
        let cc = connected_components(&t.graph, None).unwrap();
        assert_eq!(cc.num_components, 2);
        for &(u, v) in t.graph.edges() {
            assert_eq!(t.labels[u], t.labels[v]);
        }
    }

    #[test]
    fn reproducible() {
        let a = make_homophilous_sbm(10, 3, 0.5, 0.1, 8).unwrap();
        let b = make_homophilous_sbm(10, 3, 0.5, 0.1, 8).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.graph, b.graph);
        assert!(make_homophilous_sbm(10, 3, 0.1, 0.5, 8).is_err());
    }

    #[test]
    fn random_graph_connected_with_requested_edges() {
        for seed in 0..20 {
            let g = random_connected_graph(100, 3.0, seed).unwrap();
            assert_eq!(g.num_edges(), 150);
            assert_eq!(connected_components(&g, None).unwrap().num_components, 1);
        }
        assert_eq!(random_connected_graph(1, 3.0, 0).unwrap().num_edges(), 0);
        assert_eq!(random_connected_graph(4, 10.0, 0).unwrap().num_edges(), 6);
    }
}

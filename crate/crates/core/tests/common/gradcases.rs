//! Randomized finite-difference instances, one generator per
//! differentiable operation.

use std::sync::Arc;

use hgnet::autodiff::layers::{
    gcn_layer, gcn_normalized_adjacency, global_mean_pool, mlp2, rgcn_layer, softmax_cross_entropy, RelationalGraph,
};
use hgnet::autodiff::{check_gradients, GradCheckReport, Tape, Var};
use hgnet::coarsen::{contract_features, contract_structure, edgepool_scores, greedy_maximal_matching, EdgePoolPlan};
use hgnet::coarsen::{edgepool_scores_tape, EdgeScoreParams};
use hgnet::rng;
use hgnet::Result;
use rand::Rng;

use super::{random_graph, random_matrix};

pub const STEP: f64 = 1e-4;
pub const REL: f64 = 1e-3;
pub const FLOOR: f64 = 1e-7;
pub const INSTANCES: u64 = 50;

pub type Case = fn(&mut rng::Rng) -> Result<GradCheckReport>;

pub const CASES: [(&str, Case); 7] = [
    ("gcn", gcn_layer_case),
    ("rgcn", rgcn_layer_case),
    ("mlp2", mlp2_case),
    ("edgepool_scores", edgepool_score_case),
    ("contract_features", contraction_feature_case),
    ("global_mean_pool", global_mean_pool_case),
    ("cross_entropy", cross_entropy_case),
];

/// Worst `(relative, absolute)` error over all instances of `case`, or
/// the first failing seed.
pub fn run(case: Case) -> std::result::Result<(f64, f64), String> {
    let mut worst = (0.0f64, 0.0f64);
    for seed in 0..INSTANCES {
        let mut r = rng::rng(seed);
        let rep = case(&mut r).map_err(|e| format!("seed {seed}: {e}"))?;
        if !rep.passes(REL) {
            return Err(format!("seed {seed}: {rep:?}"));
        }
        worst = (worst.0.max(rep.max_rel_error), worst.1.max(rep.max_abs_error));
    }
    Ok(worst)
}

/// Scalar read-out `sum((out · R)^2)` so every output entry matters.
fn readout(t: &mut Tape<f64>, out: Var, proj: &hgnet::tensor::Matrix<f64>) -> Result<Var> {
    let p = t.constant(proj.clone());
    let y = t.matmul(out, p)?;
    let s = t.square(y);
    Ok(t.sum(s))
}

pub fn gcn_layer_case(r: &mut rng::Rng) -> Result<GradCheckReport> {
    let n = r.random_range(1..8);
    let weighted = r.random_bool(0.5);
    let g = random_graph(r, n, 0.4, weighted);
    let adj = Arc::new(gcn_normalized_adjacency::<f64>(&g));
    let (din, dout) = (r.random_range(1..5), r.random_range(1..5));
    let proj = random_matrix(r, dout, 2);
    let inputs = [random_matrix(r, n, din), random_matrix(r, din, dout)];
    check_gradients(&inputs, STEP, FLOOR, |t, v| {
        let y = gcn_layer(t, &adj, v[0], v[1])?;
        readout(t, y, &proj)
    })
}

pub fn rgcn_layer_case(r: &mut rng::Rng) -> Result<GradCheckReport> {
    let n = r.random_range(1..8);
    let rels: Vec<Vec<(usize, usize)>> = (0..2)
        .map(|_| {
            (0..r.random_range(0..2 * n))
                .map(|_| (r.random_range(0..n), r.random_range(0..n)))
                .collect()
        })
        .collect();
    let rg = RelationalGraph::<f64>::new(n, &rels)?;
    let (din, dout) = (r.random_range(1..4), r.random_range(1..4));
    let proj = random_matrix(r, dout, 2);
    let inputs = [
        random_matrix(r, n, din),
        random_matrix(r, din, dout),
        random_matrix(r, din, dout),
        random_matrix(r, din, dout),
    ];
    check_gradients(&inputs, STEP, FLOOR, |t, v| {
        let y = rgcn_layer(t, &rg, v[0], v[1], &[v[2], v[3]])?;
        readout(t, y, &proj)
    })
}

pub fn mlp2_case(r: &mut rng::Rng) -> Result<GradCheckReport> {
    let (b, d, h, c) = (r.random_range(1..5), r.random_range(1..4), r.random_range(1..6), r.random_range(1..4));
    // resample until no hidden pre-activation sits near the ReLU kink
    let inputs = loop {
        let x = random_matrix(r, b, d);
        let w1 = random_matrix(r, d, h);
        let b1 = random_matrix(r, 1, h);
        let z = x.matmul(&w1).unwrap();
        let near_kink = (0..b).any(|i| (0..h).any(|j| (z[(i, j)] + b1[(0, j)]).abs() < 1e-2));
        if !near_kink {
            break [x, w1, b1, random_matrix(r, h, c), random_matrix(r, 1, c)];
        }
    };
    let proj = random_matrix(r, c, 2);
    check_gradients(&inputs, STEP, FLOOR, |t, v| {
        let y = mlp2(t, v[0], v[1], v[2], v[3], v[4])?;
        readout(t, y, &proj)
    })
}

pub fn edgepool_score_case(r: &mut rng::Rng) -> Result<GradCheckReport> {
    let n = r.random_range(2..8);
    let g = random_graph(r, n, 0.5, false);
    let plan = EdgePoolPlan::<f64>::new(&g);
    let d = r.random_range(1..4);
    let proj = random_matrix(r, 1, 1);
    let inputs = [random_matrix(r, n, d), random_matrix(r, 2 * d, 1), random_matrix(r, 1, 1)];
    check_gradients(&inputs, STEP, FLOOR, |t, v| {
        let s = edgepool_scores_tape(t, &plan, v[0], v[1], v[2])?;
        if t.shape(s).0 == 0 {
            let z = t.scale(v[2], 0.0);
            return Ok(t.sum(z));
        }
        readout(t, s, &proj)
    })
}

pub fn contraction_feature_case(r: &mut rng::Rng) -> Result<GradCheckReport> {
    let n = r.random_range(2..9);
    let g = random_graph(r, n, 0.5, false);
    let d = r.random_range(1..4);
    let x = random_matrix(r, n, d);
    let p = EdgeScoreParams { w: (0..2 * d).map(|_| r.random_range(-1.0..1.0)).collect(), b: 0.1 };
    let scores = edgepool_scores(&g, &x, &p)?;
    let matching = greedy_maximal_matching(&g, &scores)?;
    let step = contract_structure(&g, &matching, &scores)?;
    let s = hgnet::tensor::Matrix::from_vec(scores.len(), 1, scores.clone())?;
    let proj = random_matrix(r, d, 2);
    let inputs = if scores.is_empty() { vec![x] } else { vec![x, s] };
    check_gradients(&inputs, STEP, FLOOR, |t, v| {
        let sv = match v.get(1) {
            Some(&sv) => sv,
            None => t.constant(hgnet::tensor::Matrix::zeros(0, 1)),
        };
        let y = contract_features(t, &step, v[0], sv)?;
        readout(t, y, &proj)
    })
}

pub fn global_mean_pool_case(r: &mut rng::Rng) -> Result<GradCheckReport> {
    let graphs = r.random_range(1..4);
    let mut membership: Vec<usize> = (0..graphs).collect();
    membership.extend((0..r.random_range(0..8)).map(|_| r.random_range(0..graphs)));
    let d = r.random_range(1..4);
    let proj = random_matrix(r, d, 2);
    let inputs = [random_matrix(r, membership.len(), d)];
    check_gradients(&inputs, STEP, FLOOR, |t, v| {
        let y = global_mean_pool(t, v[0], &membership, graphs)?;
        readout(t, y, &proj)
    })
}

pub fn cross_entropy_case(r: &mut rng::Rng) -> Result<GradCheckReport> {
    let (b, c) = (r.random_range(1..6), r.random_range(2..5));
    let labels: Vec<usize> = (0..b).map(|_| r.random_range(0..c)).collect();
    let logits = random_matrix(r, b, c).map(|x| 3.0 * x);
    check_gradients(&[logits], STEP, FLOOR, |t, v| softmax_cross_entropy(t, v[0], &labels))
}

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use log::warn;

use super::prepare::{broadcast_down, neighbor_mean};
use super::{names, ModelConfig, ModelKind, Prepared};
use crate::autodiff::layers::{gcn_layer, gcn_normalized_adjacency};
use crate::autodiff::{Binder, SparseOp, Tape, Var};
use crate::coarsen::{contract_features, contract_structure, edgepool_scores_tape, greedy_maximal_matching, EdgePoolPlan};
use crate::error::{Error, Result};
use crate::tensor::Real;

static WARNED_FLAT: AtomicBool = AtomicBool::new(false);

/// Stacked `ReLU(GCN)` layers. GCN+VN propagates over the graph plus one
/// virtual node (zero input features) and drops the virtual row at the end.
pub fn baseline_forward<T: Real>(
    tape: &mut Tape<T>,
    binder: &mut Binder<'_, T>,
    prepared: &Prepared<T>,
    x: Var,
    cfg: &ModelConfig,
) -> Result<Var> {
    if cfg.model.is_hgnet() {
        return Err(Error::usage(format!("{} is not a baseline model", cfg.model)));
    }
    if (cfg.model == ModelKind::GcnVn) != prepared.vn.is_some() {
        return Err(Error::usage("graph was prepared for a different model"));
    }
    let mut h = x;
    if let Some((embed, _)) = &prepared.vn {
        h = tape.sparse(embed, h)?;
    }
    for l in 0..cfg.levels {
        let w = binder.get(tape, &names::gcn(l))?;
        let z = gcn_layer(tape, &prepared.adj, h, w)?;
        h = tape.relu(z);
    }
    if let Some((_, take)) = &prepared.vn {
        h = tape.sparse(take, h)?;
    }
    Ok(h)
}

struct UpLevel<T> {
    h: Var,
    intra: Arc<SparseOp<T>>,
    /// From the next level up to this one.
    down: Arc<SparseOp<T>>,
}

/// Up pass: `ReLU(GCN)` then pooling at each level, `ReLU(GCN)` at the top.
/// Down pass: per level, one RGCN layer with relations self, intra-level
/// neighbors (both directions) and coarse → fine, followed by ReLU.
///
/// EdgePool levels are rebuilt from the current scoring parameters on every
/// call; a graph whose level has no contractible edge stops early and its
/// top GCN is the one of the level reached.
pub fn hgnet_forward<T: Real>(
    tape: &mut Tape<T>,
    binder: &mut Binder<'_, T>,
    prepared: &Prepared<T>,
    x: Var,
    cfg: &ModelConfig,
) -> Result<Var> {
    if !cfg.model.is_hgnet() {
        return Err(Error::usage(format!("{} is not an HGNet model", cfg.model)));
    }
    let edgepool = cfg.model == ModelKind::HgnetEdgePool;
    let intra0 = prepared.intra.clone().ok_or_else(|| Error::usage("graph was prepared for a different model"))?;
    if edgepool && prepared.plan.is_none() {
        return Err(Error::usage("graph was prepared for a different model"));
    }

    let mut graph = Arc::clone(&prepared.graph);
    let mut adj = Arc::clone(&prepared.adj);
    let mut intra = intra0;
    let mut h = x;
    let mut up: Vec<UpLevel<T>> = Vec::with_capacity(cfg.levels);
    // set when a level cannot shrink: its GCN output is already the top
    let mut top = None;
    for l in 0..cfg.levels {
        let w = binder.get(tape, &names::gcn(l))?;
        let z = gcn_layer(tape, &adj, h, w)?;
        h = tape.relu(z);
        let (next_h, down, next_adj, next_intra) = if edgepool {
            if graph.num_edges() == 0 {
                top = Some(h);
                break;
            }
            let owned;
            let plan = if l == 0 {
                prepared.plan.as_ref().unwrap()
            } else {
                owned = EdgePoolPlan::new(&graph);
                &owned
            };
            let key = (!cfg.share_pool_params).then_some(l);
            let pw = binder.get(tape, &names::pool_w(key))?;
            let pb = binder.get(tape, &names::pool_b(key))?;
            let scores = edgepool_scores_tape(tape, plan, h, pw, pb)?;
            let s: Vec<f64> = tape.value(scores).data().iter().map(|v| v.as_f64()).collect();
            let matching = greedy_maximal_matching(&graph, &s)?;
            if matching.is_empty() {
                top = Some(h);
                break;
            }
            let step = contract_structure(&graph, &matching, &s)?;
            let next_h = contract_features(tape, &step, h, scores)?;
            graph = Arc::clone(&step.coarse_graph);
            (next_h, broadcast_down(&step), Arc::new(gcn_normalized_adjacency(&graph)), neighbor_mean(&graph))
        } else {
            let Some(lv) = prepared.levels.get(l) else {
                top = Some(h);
                break;
            };
            let next_h = tape.sparse(&lv.pool, h)?;
            (next_h, Arc::clone(&lv.down), Arc::clone(&lv.adj), Arc::clone(&lv.intra))
        };
        up.push(UpLevel { h, intra: std::mem::replace(&mut intra, next_intra), down });
        adj = next_adj;
        h = next_h;
    }
    let depth = up.len();
    if depth == 0 && !WARNED_FLAT.swap(true, Ordering::Relaxed) {
        warn!("hierarchy has depth 0; HGNet reduces to a single GCN layer");
    }
    let mut cur = match top {
        Some(h) => h,
        None => {
            let w = binder.get(tape, &names::gcn(depth))?;
            let z = gcn_layer(tape, &adj, h, w)?;
            tape.relu(z)
        }
    };

    for (l, lv) in up.iter().enumerate().rev() {
        let ws = binder.get(tape, &names::rgcn(l, "self"))?;
        let wi = binder.get(tape, &names::rgcn(l, "intra"))?;
        let wx = binder.get(tape, &names::rgcn(l, "inter"))?;
        let mut out = tape.matmul(lv.h, ws)?;
        if lv.intra.nnz() > 0 {
            let agg = tape.sparse(&lv.intra, lv.h)?;
            let msg = tape.matmul(agg, wi)?;
            out = tape.add(out, msg)?;
        }
        // transform on the coarse side, which has fewer rows
        let cw = tape.matmul(cur, wx)?;
        let msg = tape.sparse(&lv.down, cw)?;
        out = tape.add(out, msg)?;
        cur = tape.relu(out);
    }
    Ok(cur)
}

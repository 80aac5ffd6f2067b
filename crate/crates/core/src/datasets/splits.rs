use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ball, bfs_distances, Graph, NodeId};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplitCounts {
    pub train_per_class: usize,
    pub val: usize,
    pub test: usize,
}

impl Default for SplitCounts {
    fn default() -> Self {
        Self { train_per_class: 20, val: 500, test: 1000 }
    }
}

/// Disjoint train/validation/test node sets of a transductive task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitSpec {
    pub train: Vec<NodeId>,
    pub val: Vec<NodeId>,
    pub test: Vec<NodeId>,
    /// Every pair of selected nodes is more than `k` hops apart.
    pub k: usize,
    pub seed: u64,
}

impl SplitSpec {
    /// Plain split without a distance guarantee (`k = 0`).
    pub fn new(train: Vec<NodeId>, val: Vec<NodeId>, test: Vec<NodeId>) -> Self {
        Self { train, val, test, k: 0, seed: 0 }
    }

    pub fn selected(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.train.iter().chain(&self.val).chain(&self.test).copied()
    }

    /// Checks that the three sets are in range and pairwise disjoint.
    pub fn check_disjoint(&self, num_nodes: usize) -> Result<()> {
        let mut seen = vec![false; num_nodes];
        for u in self.selected() {
            if u >= num_nodes {
                return Err(Error::input(format!("split node {u} outside graph of {num_nodes} nodes")));
            }
            if std::mem::replace(&mut seen[u], true) {
                return Err(Error::input(format!("node {u} appears in more than one split slot")));
            }
        }
        Ok(())
    }

    /// First pair of selected nodes within `k` hops, by BFS from each one.
    pub fn closest_violation(&self, g: &Graph) -> Result<Option<(NodeId, NodeId, usize)>> {
        let sel: Vec<NodeId> = self.selected().collect();
        for (i, &a) in sel.iter().enumerate() {
            let d = bfs_distances(g, a)?;
            for &b in &sel[i + 1..] {
                if let Some(h) = d[b] {
                    if h <= self.k {
                        return Ok(Some((a, b, h)));
                    }
                }
            }
        }
        Ok(None)
    }
}

/// Draws train (per class, classes in round-robin), then validation, then
/// test nodes. Each pick is uniform among nodes outside the closed `k`-balls
/// of all earlier picks.
pub fn sanitized_resample(g: &Graph, labels: &[usize], k: usize, counts: SplitCounts, seed: u64) -> Result<SplitSpec> {
    let n = g.num_nodes();
    if labels.len() != n {
        return Err(Error::input(format!("{} labels for {n} nodes", labels.len())));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut rng = rng::rng(seed);
    // Scanning a uniform permutation for the next unblocked node is a uniform
    // draw among the unblocked ones.
    let mut order: Vec<NodeId> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut by_class: Vec<Vec<NodeId>> = vec![Vec::new(); classes];
    for &u in &order {
        by_class[labels[u]].push(u);
    }
    let mut blocked = vec![false; n];
    let pick = |pool: &[NodeId], cursor: &mut usize, blocked: &mut Vec<bool>| -> Result<Option<NodeId>> {
        while *cursor < pool.len() {
            let u = pool[*cursor];
            *cursor += 1;
            if !blocked[u] {
                for v in ball(g, u, k)? {
                    blocked[v] = true;
                }
                return Ok(Some(u));
            }
        }
        Ok(None)
    };

    let mut train = Vec::with_capacity(classes * counts.train_per_class);
    let mut cursors = vec![0; classes];
    for round in 0..counts.train_per_class {
        for c in 0..classes {
            match pick(&by_class[c], &mut cursors[c], &mut blocked)? {
                Some(u) => train.push(u),
                None => {
                    return Err(Error::generation(format!(
                        "class {c} ran out of candidates after {round} of {} training nodes (k = {k})",
                        counts.train_per_class
                    )))
                }
            }
        }
    }
    let mut cursor = 0;
    let mut draw = |want: usize, what: &str, blocked: &mut Vec<bool>| -> Result<Vec<NodeId>> {
        let mut out = Vec::with_capacity(want);
        while out.len() < want {
            match pick(&order, &mut cursor, blocked)? {
                Some(u) => out.push(u),
                None => {
                    return Err(Error::generation(format!(
                        "{what} split short by {} of {want} nodes (k = {k})",
                        want - out.len()
                    )))
                }
            }
        }
        Ok(out)
    };
    let val = draw(counts.val, "validation", &mut blocked)?;
    let test = draw(counts.test, "test", &mut blocked)?;
    Ok(SplitSpec { train, val, test, k, seed })
}

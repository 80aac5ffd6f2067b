use std::collections::VecDeque;

use rand::Rng as _;

use super::{Graph, NodeId};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabeling {
    /// `None` for nodes outside the queried subset.
    pub labels: Vec<Option<usize>>,
    pub num_components: usize,
}

impl ComponentLabeling {
    /// Members of each component, in ascending node order.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.num_components];
        for (u, l) in self.labels.iter().enumerate() {
            if let Some(c) = l {
                out[*c].push(u);
            }
        }
        out
    }
}

/// Components of the subgraph induced on `subset` (all nodes when `None`).
/// Components are numbered in order of their smallest node id.
pub fn connected_components(g: &Graph, subset: Option<&[NodeId]>) -> Result<ComponentLabeling> {
    let n = g.num_nodes();
    let mut member = vec![subset.is_none(); n];
    if let Some(s) = subset {
        for &u in s {
            g.check_node(u)?;
            member[u] = true;
        }
    }
    let mut labels = vec![None; n];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if !member[start] || labels[start].is_some() {
            continue;
        }
        labels[start] = Some(next);
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for v in g.neighbors(u) {
                if member[v] && labels[v].is_none() {
                    labels[v] = Some(next);
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    Ok(ComponentLabeling { labels, num_components: next })
}

/// Hop distances from `source`; `None` for unreachable nodes.
pub fn bfs_distances(g: &Graph, source: NodeId) -> Result<Vec<Option<usize>>> {
    g.check_node(source)?;
    let mut dist = vec![None; g.num_nodes()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap() + 1;
        for v in g.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(d);
                queue.push_back(v);
            }
        }
    }
    Ok(dist)
}

/// Minimal number of edges on a `u`–`v` path, `None` when disconnected.
pub fn shortest_path_hops(g: &Graph, u: NodeId, v: NodeId) -> Result<Option<usize>> {
    g.check_node(v)?;
    if u == v {
        g.check_node(u)?;
        return Ok(Some(0));
    }
    g.check_node(u)?;
    // early-exit BFS
    let mut dist = vec![usize::MAX; g.num_nodes()];
    dist[u] = 0;
    let mut queue = VecDeque::from([u]);
    while let Some(x) = queue.pop_front() {
        for y in g.neighbors(x) {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                if y == v {
                    return Ok(Some(dist[y]));
                }
                queue.push_back(y);
            }
        }
    }
    Ok(None)
}

/// Closed ball: every node within `radius` hops of `center`, `center` included.
pub fn ball(g: &Graph, center: NodeId, radius: usize) -> Result<Vec<NodeId>> {
    g.check_node(center)?;
    let mut dist = vec![usize::MAX; g.num_nodes()];
    dist[center] = 0;
    let mut out = vec![center];
    let mut queue = VecDeque::from([center]);
    while let Some(x) = queue.pop_front() {
        if dist[x] == radius {
            continue;
        }
        for y in g.neighbors(x) {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                out.push(y);
                queue.push_back(y);
            }
        }
    }
    Ok(out)
}

/// Largest connected component (ties: the one holding the smallest node id)
/// together with the original id of every retained node.
pub fn largest_connected_component(g: &Graph) -> Result<(Graph, Vec<NodeId>)> {
    if g.is_empty() {
        return Err(Error::input("empty graph has no components"));
    }
    let cc = connected_components(g, None)?;
    let comps = cc.components();
    let best = comps
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.len().cmp(&b.len()).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .unwrap();
    let nodes = comps[best].clone();
    Ok((g.induced_subgraph(&nodes)?, nodes))
}

/// Grow a red set by two interleaved random walks from `starts`.
///
/// Both starts are marked first. The walks then take strictly alternating
/// uniform steps to a neighbor; every visited node is marked, and revisits
/// are free. Growth stops as soon as `target` distinct nodes are marked.
/// Returns the marked set in ascending order.
pub fn random_walk_color(g: &Graph, starts: [NodeId; 2], target: usize, seed: u64) -> Result<Vec<NodeId>> {
    g.check_node(starts[0])?;
    g.check_node(starts[1])?;
    if starts[0] == starts[1] {
        return Err(Error::input("walk starts must be distinct"));
    }
    if target < 2 || target > g.num_nodes() {
        return Err(Error::input(format!("target {target} outside 2..={}", g.num_nodes())));
    }
    let cc = connected_components(g, None)?;
    let comps = cc.components();
    let (ca, cb) = (cc.labels[starts[0]].unwrap(), cc.labels[starts[1]].unwrap());
    let reachable = if ca == cb { comps[ca].len() } else { comps[ca].len() + comps[cb].len() };
    if reachable < target {
        return Err(Error::generation(format!(
            "walks from {starts:?} can reach only {reachable} of the {target} requested nodes"
        )));
    }

    let mut rng = rng::rng(seed);
    let mut red = vec![false; g.num_nodes()];
    red[starts[0]] = true;
    red[starts[1]] = true;
    let mut count = 2;
    let mut pos = starts;
    let mut turn = 0;
    while count < target {
        let u = pos[turn];
        let deg = g.degree(u);
        if deg > 0 {
            let v = g.incident(u)[rng.random_range(0..deg)].0;
            pos[turn] = v;
            if !red[v] {
                red[v] = true;
                count += 1;
            }
        }
        turn ^= 1;
    }
    Ok((0..g.num_nodes()).filter(|&u| red[u]).collect())
}

//! Whitespace-separated edge lists: `u v [weight]` per line, `#` comments.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use log::{info, warn};

use super::{largest_connected_component, Graph, NodeId};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct EdgeListGraph {
    pub graph: Graph,
    /// External id of each dense node id, in first-appearance order.
    pub ids: Vec<String>,
    pub skipped_self_loops: usize,
    pub skipped_duplicates: usize,
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<EdgeListGraph> {
    let path = path.as_ref();
    let file = File::open(path)?;
    parse_edge_list(BufReader::new(file)).map_err(|e| match e {
        Error::Input(msg) => Error::Parse { path: path.to_owned(), msg },
        other => other,
    })
}

/// Ingests an edge list. Self-loops and repeated pairs are skipped and
/// counted; a missing weight column defaults to 1 when other lines carry one.
pub fn parse_edge_list(reader: impl Read) -> Result<EdgeListGraph> {
    let reader = BufReader::new(reader);
    let mut index: HashMap<String, NodeId> = HashMap::new();
    let mut ids = Vec::new();
    let mut edges = Vec::new();
    let mut weights = Vec::new();
    let mut any_weight = false;
    let mut seen = HashSet::new();
    let (mut loops, mut dups) = (0, 0);

    let mut intern = |s: &str, ids: &mut Vec<String>| -> NodeId {
        *index.entry(s.to_owned()).or_insert_with(|| {
            ids.push(s.to_owned());
            ids.len() - 1
        })
    };

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() < 2 || cols.len() > 3 {
            return Err(Error::input(format!("line {}: expected 2 or 3 columns, got {}", lineno + 1, cols.len())));
        }
        let u = intern(cols[0], &mut ids);
        let v = intern(cols[1], &mut ids);
        let w = match cols.get(2) {
            Some(s) => {
                any_weight = true;
                s.parse::<f64>()
                    .ok()
                    .filter(|w| w.is_finite() && *w >= 0.0)
                    .ok_or_else(|| Error::input(format!("line {}: bad weight {s:?}", lineno + 1)))?
            }
            None => 1.0,
        };
        if u == v {
            loops += 1;
            continue;
        }
        if !seen.insert((u.min(v), u.max(v))) {
            dups += 1;
            continue;
        }
        edges.push((u, v));
        weights.push(w);
    }
    if loops + dups > 0 {
        warn!("edge list: skipped {loops} self-loops and {dups} duplicate edges");
    }
    let mut b = Graph::builder(ids.len()).edges(edges);
    if any_weight {
        b = b.weights(weights);
    }
    Ok(EdgeListGraph { graph: b.build()?, ids, skipped_self_loops: loops, skipped_duplicates: dups })
}

/// Loads a road network and reduces it to its largest connected component.
pub fn load_road_network(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let raw = read_edge_list(path)?;
    if raw.graph.is_empty() {
        return Err(Error::Parse { path: path.to_owned(), msg: "no edges".into() });
    }
    let (n, e) = (raw.graph.num_nodes(), raw.graph.num_edges());
    let (lcc, _) = largest_connected_component(&raw.graph)?;
    info!(
        "{}: {n} nodes / {e} edges read, largest component keeps {} nodes / {} edges",
        path.display(),
        lcc.num_nodes(),
        lcc.num_edges()
    );
    Ok(lcc)
}

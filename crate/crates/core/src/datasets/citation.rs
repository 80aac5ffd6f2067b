use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::tensor::Matrix;

/// A transductive node-classification problem on a single graph.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTask {
    pub graph: Arc<Graph>,
    pub features: Matrix<f64>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl NodeTask {
    pub fn new(graph: Graph, features: Matrix<f64>, labels: Vec<usize>) -> Result<Self> {
        let n = graph.num_nodes();
        if features.rows() != n || labels.len() != n {
            return Err(Error::input(format!(
                "{} feature rows and {} labels for {n} nodes",
                features.rows(),
                labels.len()
            )));
        }
        let num_classes = labels.iter().max().map_or(0, |m| m + 1);
        Ok(Self { graph: Arc::new(graph), features, labels, num_classes })
    }
}

fn parse_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_owned(), msg: msg.into() }
}

/// Reads `nodes.csv` (`id,label,f1..fd`) and `edges.csv` (`src,dst`). A
/// header row is detected by a non-integer label column. Class labels are
/// compacted to `0..C` in ascending order of the original values.
pub fn load_citation_csv(nodes_path: &Path, edges_path: &Path) -> Result<NodeTask> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(nodes_path)
        .map_err(|e| parse_err(nodes_path, e.to_string()))?;
    let mut ids: HashMap<String, NodeId> = HashMap::new();
    let mut raw_labels = Vec::new();
    let mut feats: Vec<f64> = Vec::new();
    let mut dim = None;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(nodes_path, e.to_string()))?;
        if rec.len() < 2 {
            return Err(parse_err(nodes_path, format!("row {}: expected id,label,features", i + 1)));
        }
        let label: i64 = match rec[1].parse() {
            Ok(l) => l,
            Err(_) if i == 0 => continue,
            Err(_) => return Err(parse_err(nodes_path, format!("row {}: bad label `{}`", i + 1, &rec[1]))),
        };
        let d = rec.len() - 2;
        if *dim.get_or_insert(d) != d {
            return Err(parse_err(nodes_path, format!("row {}: {d} features, expected {}", i + 1, dim.unwrap())));
        }
        for f in rec.iter().skip(2) {
            feats.push(f.parse().map_err(|_| parse_err(nodes_path, format!("row {}: bad feature `{f}`", i + 1)))?);
        }
        let next = ids.len();
        if ids.insert(rec[0].to_owned(), next).is_some() {
            return Err(parse_err(nodes_path, format!("row {}: duplicate node id `{}`", i + 1, &rec[0])));
        }
        raw_labels.push(label);
    }
    let n = raw_labels.len();
    if n == 0 {
        return Err(parse_err(nodes_path, "no nodes"));
    }
    let mut classes: Vec<i64> = raw_labels.clone();
    classes.sort_unstable();
    classes.dedup();
    let labels = raw_labels.iter().map(|l| classes.binary_search(l).unwrap()).collect();

    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(edges_path)
        .map_err(|e| parse_err(edges_path, e.to_string()))?;
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(edges_path, e.to_string()))?;
        if rec.len() < 2 {
            return Err(parse_err(edges_path, format!("row {}: expected src,dst", i + 1)));
        }
        let (a, b) = match (ids.get(&rec[0]), ids.get(&rec[1])) {
            (Some(&a), Some(&b)) => (a, b),
            _ if i == 0 => continue,
            _ => return Err(parse_err(edges_path, format!("row {}: unknown node in `{},{}`", i + 1, &rec[0], &rec[1]))),
        };
        let e = (a.min(b), a.max(b));
        if a != b && seen.insert(e) {
            edges.push(e);
        }
    }
    let features = Matrix::from_vec(n, dim.unwrap_or(0), feats)?;
    NodeTask::new(Graph::new(n, edges)?, features, labels)
}

use std::fmt;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::info;
use rand::{Rng as _, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{connected_components, load_road_network, random_walk_color, Graph, NodeId};
use crate::rng;
use crate::tensor::Matrix;

/// 4-neighbor lattice; node `(r, c)` has id `r * cols + c`.
pub fn make_grid(rows: usize, cols: usize) -> Result<Graph> {
    if rows == 0 || cols == 0 {
        return Err(Error::input(format!("grid dimensions must be positive, got {rows}x{cols}")));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::with_capacity(rows * (cols - 1) + cols * (rows - 1));
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Graph::new(rows * cols, edges)
}

/// Label of a coloring: `Some(1)` for one red island, `Some(0)` for two,
/// `None` otherwise (including a length mismatch).
pub fn verify_label(g: &Graph, colors: &[bool]) -> Option<u8> {
    if colors.len() != g.num_nodes() {
        return None;
    }
    let red: Vec<NodeId> = (0..colors.len()).filter(|&u| colors[u]).collect();
    verify_red_set(g, &red)
}

/// [`verify_label`] for a coloring given as its red node set.
pub fn verify_red_set(g: &Graph, red: &[NodeId]) -> Option<u8> {
    match connected_components(g, Some(red)).ok()?.num_components {
        1 => Some(1),
        2 => Some(0),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSample {
    pub graph: Arc<Graph>,
    /// Red nodes in ascending order.
    pub red: Vec<NodeId>,
    pub label: u8,
    pub seed: u64,
}

impl DatasetSample {
    pub fn colors(&self) -> Vec<bool> {
        let mut c = vec![false; self.graph.num_nodes()];
        self.red.iter().for_each(|&u| c[u] = true);
        c
    }

    /// One feature column: 1 for red, 0 for blue.
    pub fn features(&self) -> Matrix<f64> {
        let c = self.colors();
        Matrix::from_vec(c.len(), 1, c.into_iter().map(|r| if r { 1.0 } else { 0.0 }).collect())
            .expect("one value per node")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerationConfig {
    /// Maximum draws per requested sample before giving up.
    pub attempts_per_sample: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self { attempts_per_sample: 1000 }
    }
}

pub fn generate_color_connectivity(topology: &Arc<Graph>, n_samples: usize, seed: u64) -> Result<Vec<DatasetSample>> {
    generate_color_connectivity_with(topology, n_samples, seed, &GenerationConfig::default())
}

/// Balanced one-island / two-island colorings of `topology` by rejection
/// sampling. Draw `i` uses the derived seed `(seed, i)` and is stored with
/// it, so any sample can be regenerated in isolation.
pub fn generate_color_connectivity_with(
    topology: &Arc<Graph>,
    n_samples: usize,
    seed: u64,
    cfg: &GenerationConfig,
) -> Result<Vec<DatasetSample>> {
    let g = topology.as_ref();
    let n = g.num_nodes();
    if !n_samples.is_multiple_of(2) {
        return Err(Error::input(format!("sample count {n_samples} must be even")));
    }
    if n < 4 {
        return Err(Error::input(format!("topology with {n} nodes is too small for two red islands")));
    }
    if connected_components(g, None)?.num_components != 1 {
        return Err(Error::input("color-connectivity topology must be connected"));
    }
    let half = n_samples / 2;
    let target = n / 2;
    let cap = cfg.attempts_per_sample.saturating_mul(n_samples);
    let mut filled = [0usize; 2];
    let mut out = Vec::with_capacity(n_samples);
    let mut attempt = 0u64;
    while filled[0] < half || filled[1] < half {
        if attempt as usize >= cap {
            let starved = if filled[1] < half { 1 } else { 0 };
            return Err(Error::generation(format!(
                "label {starved} bucket holds {} of {half} samples after {cap} draws",
                filled[starved]
            )));
        }
        let s = rng::derive_seed(seed, attempt);
        attempt += 1;
        let (red, label) = draw_coloring(g, target, s)?;
        if let Some(label) = label {
            if filled[label as usize] < half {
                filled[label as usize] += 1;
                out.push(DatasetSample { graph: Arc::clone(topology), red, label, seed: s });
            }
        }
    }
    Ok(out)
}

/// One draw: two distinct uniform starts, then two interleaved walks.
fn draw_coloring(g: &Graph, target: usize, seed: u64) -> Result<(Vec<NodeId>, Option<u8>)> {
    let mut r = rng::rng(seed);
    let n = g.num_nodes();
    let a = r.random_range(0..n);
    let mut b = r.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let red = random_walk_color(g, [a, b], target, r.next_u64())?;
    let label = verify_red_set(g, &red);
    Ok((red, label))
}

/// Named dataset topologies. Road networks are read from user-supplied
/// edge-list files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    Grid16,
    Grid32,
    Euroroad,
    Minnesota,
    File(PathBuf),
}

impl Topology {
    /// Accepts `grid16`, `grid32`, `euroroad`, `minnesota` and `file:PATH`.
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "grid16" => Topology::Grid16,
            "grid32" => Topology::Grid32,
            "euroroad" => Topology::Euroroad,
            "minnesota" => Topology::Minnesota,
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Topology::File(PathBuf::from(p)),
                _ => return Err(Error::input(format!("unknown topology `{s}`"))),
            },
        })
    }

    /// Builds the graph. Named road networks are looked up as
    /// `road-euroroad.edges` / `road-minnesota.edges` under `data_dir`.
    pub fn load(&self, data_dir: Option<&Path>) -> Result<Graph> {
        match self {
            Topology::Grid16 => make_grid(16, 16),
            Topology::Grid32 => make_grid(32, 32),
            Topology::Euroroad | Topology::Minnesota => {
                let dir = data_dir.ok_or_else(|| {
                    Error::input(format!("topology {self} needs a data directory holding its edge list (HGNET_DATA)"))
                })?;
                let file = if *self == Topology::Euroroad { "road-euroroad.edges" } else { "road-minnesota.edges" };
                load_road_network(dir.join(file))
            }
            Topology::File(p) => {
                let g = load_road_network(p)?;
                info!("{}: using {} nodes / {} edges", p.display(), g.num_nodes(), g.num_edges());
                Ok(g)
            }
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::Grid16 => f.write_str("grid16"),
            Topology::Grid32 => f.write_str("grid32"),
            Topology::Euroroad => f.write_str("euroroad"),
            Topology::Minnesota => f.write_str("minnesota"),
            Topology::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// A generated dataset: one shared topology and its colorings.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorDataset {
    pub topology_id: String,
    pub topology: Arc<Graph>,
    pub samples: Vec<DatasetSample>,
}

impl ColorDataset {
    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label as usize).collect()
    }

    /// Index of the first sample whose stored label the oracle disagrees with.
    pub fn first_mislabeled(&self) -> Option<usize> {
        self.samples.iter().position(|s| verify_red_set(&self.topology, &s.red) != Some(s.label))
    }
}

// Field order is alphabetical so the serialized keys come out sorted.
#[derive(Serialize, Deserialize)]
struct HeaderLine {
    topology: TopologyJson,
}

#[derive(Serialize, Deserialize)]
struct TopologyJson {
    edges: Vec<[NodeId; 2]>,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct SampleLine {
    label: u8,
    red: Vec<NodeId>,
    seed: u64,
    topology_id: String,
}

/// JSON Lines: a topology header, then one sample per line.
pub fn write_dataset(ds: &ColorDataset, mut w: impl Write) -> Result<()> {
    let header = HeaderLine {
        topology: TopologyJson {
            edges: ds.topology.edges().iter().map(|&(u, v)| [u, v]).collect(),
            n: ds.topology.num_nodes(),
        },
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for s in &ds.samples {
        let line = SampleLine { label: s.label, red: s.red.clone(), seed: s.seed, topology_id: ds.topology_id.clone() };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset(r: impl BufRead) -> Result<ColorDataset> {
    let mut lines = r.lines();
    let header: HeaderLine = match lines.next() {
        Some(l) => serde_json::from_str(&l?)?,
        None => return Err(Error::input("dataset file is empty")),
    };
    let n = header.topology.n;
    let topology = Arc::new(Graph::new(n, header.topology.edges.iter().map(|e| (e[0], e[1])))?);
    let mut topology_id = None;
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: SampleLine = serde_json::from_str(&line)?;
        if s.label > 1 {
            return Err(Error::input(format!("sample {i}: label {} is not binary", s.label)));
        }
        if let Some(&bad) = s.red.iter().find(|&&u| u >= n) {
            return Err(Error::input(format!("sample {i}: red node {bad} outside topology of {n} nodes")));
        }
        match &topology_id {
            None => topology_id = Some(s.topology_id),
            Some(t) if *t != s.topology_id => {
                return Err(Error::input(format!("sample {i}: topology `{}` differs from `{t}`", s.topology_id)))
            }
            _ => {}
        }
        let mut red = s.red;
        red.sort_unstable();
        red.dedup();
        samples.push(DatasetSample { graph: Arc::clone(&topology), red, label: s.label, seed: s.seed });
    }
    Ok(ColorDataset { topology_id: topology_id.unwrap_or_default(), topology, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        let g = make_grid(16, 16).unwrap();
        assert_eq!((g.num_nodes(), g.num_edges()), (256, 480));
        let g = make_grid(32, 32).unwrap();
        assert_eq!((g.num_nodes(), g.num_edges()), (1024, 1984));
        let g = make_grid(1, 1).unwrap();
        assert_eq!((g.num_nodes(), g.num_edges()), (1, 0));
        assert!(make_grid(0, 3).is_err());
    }

    #[test]
    fn label_examples() {
        let p = Graph::path(5);
        assert_eq!(verify_label(&p, &[true; 5]), Some(1));
        assert_eq!(verify_label(&p, &[true, false, false, false, true]), Some(0));
        assert_eq!(verify_label(&p, &[true, false, true, false, true]), None);
        assert_eq!(verify_label(&p, &[false; 5]), None);
    }

    #[test]
    fn square_has_both_shapes() {
        let g = Arc::new(make_grid(2, 2).unwrap());
        let s = generate_color_connectivity(&g, 2, 3).unwrap();
        assert_eq!(s.len(), 2);
        let one = s.iter().find(|x| x.label == 1).unwrap();
        let two = s.iter().find(|x| x.label == 0).unwrap();
        assert!(g.find_edge(one.red[0], one.red[1]).is_some());
        assert!(g.find_edge(two.red[0], two.red[1]).is_none());
    }

    #[test]
    fn rejects_odd_counts_and_disconnected() {
        let g = Arc::new(make_grid(2, 2).unwrap());
        assert!(generate_color_connectivity(&g, 3, 0).is_err());
        let g = Arc::new(Graph::new(4, [(0, 1), (2, 3)]).unwrap());
        assert!(generate_color_connectivity(&g, 2, 0).is_err());
    }

    #[test]
    fn starved_bucket_is_named() {
        // any two red nodes of K4 are adjacent
        let g = Arc::new(Graph::complete(4));
        let cfg = GenerationConfig { attempts_per_sample: 5 };
        let err = generate_color_connectivity_with(&g, 2, 0, &cfg).unwrap_err();
        assert!(err.to_string().contains("label 0"), "{err}");
    }

    #[test]
    fn jsonl_round_trip() {
        let g = Arc::new(make_grid(4, 4).unwrap());
        let samples = generate_color_connectivity(&g, 6, 11).unwrap();
        let ds = ColorDataset { topology_id: "grid4".into(), topology: g, samples };
        let mut buf = Vec::new();
        write_dataset(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"topology\":{\"edges\":[[0,1],"));
        assert_eq!(text.lines().count(), 7);
        let back = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.first_mislabeled(), None);
    }

    #[test]
    fn topology_names() {
        assert_eq!(Topology::parse("grid16").unwrap(), Topology::Grid16);
        assert_eq!(Topology::parse("file:x.edges").unwrap(), Topology::File("x.edges".into()));
        assert!(Topology::parse("grid8").is_err());
        assert!(Topology::Euroroad.load(None).is_err());
        assert_eq!(Topology::Grid32.to_string(), "grid32");
    }
}

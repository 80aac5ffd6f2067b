use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use super::{ModelConfig, ModelKind};
use crate::autodiff::layers::{gcn_normalized_adjacency, mean_aggregation};
use crate::autodiff::SparseOp;
use crate::coarsen::{community_mean_operator, pool_by_communities, CoarseningStep, EdgePoolPlan, PoolOptions};
use crate::error::Result;
use crate::graph::Graph;
use crate::hierarchy::{build_hierarchy, HierarchySpec};
use crate::tensor::{Matrix, Real};

/// Mean over each node's neighbors in `g` (both edge directions).
pub(crate) fn neighbor_mean<T: Real>(g: &Graph) -> Arc<SparseOp<T>> {
    let edges: Vec<_> = (0..g.num_nodes()).flat_map(|t| g.neighbors(t).map(move |s| (s, t))).collect();
    Arc::new(mean_aggregation(g.num_nodes(), g.num_nodes(), &edges).expect("edges in range"))
}

/// `[fine x coarse]` operator copying each coarse row to its fine nodes.
pub(crate) fn broadcast_down<T: Real>(step: &CoarseningStep) -> Arc<SparseOp<T>> {
    Arc::new(SparseOp::gather(step.num_coarse(), &step.fine_to_coarse).expect("map in range"))
}

/// Operators of one precomputed (Louvain) level above level 0.
#[derive(Debug, Clone)]
pub(crate) struct StaticLevel<T> {
    /// `[coarse x fine]` community mean.
    pub pool: Arc<SparseOp<T>>,
    /// `[fine x coarse]` inter-level messages.
    pub down: Arc<SparseOp<T>>,
    /// GCN operator of the coarse graph.
    pub adj: Arc<SparseOp<T>>,
    /// Neighbor mean of the coarse graph.
    pub intra: Arc<SparseOp<T>>,
}

/// Embed into and select out of the graph-plus-virtual-node operator.
pub(crate) type VnOps<T> = (Arc<SparseOp<T>>, Arc<SparseOp<T>>);

/// Per-graph structures that do not depend on parameters.
#[derive(Debug, Clone)]
pub struct Prepared<T = f32> {
    pub(crate) graph: Arc<Graph>,
    /// GCN operator on level 0; for GCN+VN, on the graph plus virtual node.
    pub(crate) adj: Arc<SparseOp<T>>,
    /// GCN+VN: `[N+1 x N]` zero-padding embed and `[N x N+1]` row selection.
    pub(crate) vn: Option<VnOps<T>>,
    pub(crate) intra: Option<Arc<SparseOp<T>>>,
    pub(crate) plan: Option<EdgePoolPlan<T>>,
    pub(crate) levels: Vec<StaticLevel<T>>,
}

impl<T: Real> Prepared<T> {
    pub fn new(g: &Arc<Graph>, cfg: &ModelConfig, cache: &LouvainCache) -> Result<Self> {
        let n = g.num_nodes();
        let mut p = Prepared {
            graph: Arc::clone(g),
            adj: Arc::new(gcn_normalized_adjacency(g)),
            vn: None,
            intra: None,
            plan: None,
            levels: Vec::new(),
        };
        match cfg.model {
            ModelKind::Gcn => {}
            ModelKind::GcnVn => {
                let mut b = Graph::builder(n + 1).edges(g.edges().iter().copied().chain((0..n).map(|u| (u, n))));
                if let Some(w) = g.weights() {
                    b = b.weights(w.iter().copied().chain(std::iter::repeat_n(1.0, n)).collect());
                }
                let aug = b.allow_self_loops(g.has_self_loops()).build()?;
                p.adj = Arc::new(gcn_normalized_adjacency(&aug));
                let ids: Vec<usize> = (0..n).collect();
                let embed: Vec<_> = ids.iter().map(|&u| (u, u, T::one())).collect();
                p.vn = Some((
                    Arc::new(SparseOp::from_triplets(n + 1, n, &embed)?),
                    Arc::new(SparseOp::gather(n + 1, &ids)?),
                ));
            }
            ModelKind::HgnetEdgePool => {
                p.intra = Some(neighbor_mean(g));
                p.plan = Some(EdgePoolPlan::new(g));
            }
            ModelKind::HgnetLouvain => {
                p.intra = Some(neighbor_mean(g));
                for step in cache.steps(g, cfg.seed, cfg.levels)?.iter() {
                    p.levels.push(StaticLevel {
                        pool: Arc::new(community_mean_operator(step)),
                        down: broadcast_down(step),
                        adj: Arc::new(gcn_normalized_adjacency(&step.coarse_graph)),
                        intra: neighbor_mean(&step.coarse_graph),
                    });
                }
            }
        }
        Ok(p)
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    /// Number of precomputed coarsening levels (Louvain only).
    pub fn static_depth(&self) -> usize {
        self.levels.len()
    }
}

type CacheKey = (u64, u64, usize);

/// Louvain hierarchies keyed by graph content hash, seed and level count.
/// Optionally mirrored to a directory so later runs skip recomputation.
#[derive(Debug, Default)]
pub struct LouvainCache {
    mem: RwLock<HashMap<CacheKey, Arc<Vec<CoarseningStep>>>>,
    dir: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    assignments: Vec<Vec<usize>>,
    num_nodes: usize,
}

impl LouvainCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        Self { mem: RwLock::default(), dir: Some(dir.into()) }
    }

    /// Disk-backed when `HGNET_CACHE` names a directory.
    pub fn from_env() -> Self {
        match std::env::var_os("HGNET_CACHE") {
            Some(d) if !d.is_empty() => Self::with_dir(d),
            _ => Self::new(),
        }
    }

    pub fn steps(&self, g: &Graph, seed: u64, levels: usize) -> Result<Arc<Vec<CoarseningStep>>> {
        let key = (g.content_hash(), seed, levels);
        if let Some(s) = self.mem.read().unwrap().get(&key) {
            return Ok(Arc::clone(s));
        }
        let steps = Arc::new(match self.load(g, key) {
            Some(s) => s,
            None => {
                let spec = HierarchySpec::Louvain { seed, features: None, pool: PoolOptions::default() };
                let steps = build_hierarchy(g, levels, spec)?.hierarchy.steps;
                self.store(g, key, &steps);
                steps
            }
        });
        Ok(Arc::clone(self.mem.write().unwrap().entry(key).or_insert(steps)))
    }

    fn path(&self, key: CacheKey) -> Option<PathBuf> {
        let (h, seed, levels) = key;
        self.dir.as_ref().map(|d| d.join(format!("louvain-{h:016x}-s{seed}-l{levels}.json")))
    }

    fn load(&self, g: &Graph, key: CacheKey) -> Option<Vec<CoarseningStep>> {
        let path = self.path(key)?;
        let text = std::fs::read(&path).ok()?;
        let rebuilt = serde_json::from_slice::<CacheFile>(&text).map_err(crate::Error::from).and_then(|f| {
            if f.num_nodes != g.num_nodes() {
                return Err(crate::Error::input("node count differs"));
            }
            let mut graph = g.clone();
            let mut steps = Vec::new();
            for a in &f.assignments {
                let (step, _) = pool_by_communities(&graph, &Matrix::zeros(graph.num_nodes(), 0), a, PoolOptions::default())?;
                graph = (*step.coarse_graph).clone();
                steps.push(step);
            }
            Ok(steps)
        });
        match rebuilt {
            Ok(s) => {
                debug!("louvain cache hit {}", path.display());
                Some(s)
            }
            Err(e) => {
                warn!("ignoring unusable cache entry {}: {e}", path.display());
                None
            }
        }
    }

    fn store(&self, g: &Graph, key: CacheKey, steps: &[CoarseningStep]) {
        let Some(path) = self.path(key) else { return };
        let file = CacheFile {
            assignments: steps.iter().map(|s| s.fine_to_coarse.clone()).collect(),
            num_nodes: g.num_nodes(),
        };
        let tmp = path.with_extension("tmp");
        let res = std::fs::create_dir_all(path.parent().unwrap())
            .and_then(|_| std::fs::write(&tmp, serde_json::to_vec(&file).expect("plain data")))
            .and_then(|_| std::fs::rename(&tmp, &path));
        if let Err(e) = res {
            warn!("could not write louvain cache {}: {e}", path.display());
        }
    }
}

//! HGNet (EdgePool or Louvain hierarchy) and the flat GCN / GCN+VN
//! baselines, their training loops and the evaluation protocols.

mod forward;
mod prepare;
mod split;
mod train;

pub use forward::{baseline_forward, hgnet_forward};
pub use prepare::{LouvainCache, Prepared};
pub use split::{stratified_kfold, stratified_split, GraphSplit};
pub use train::{
    cross_validate, train_graph_classifier, train_node_classifier, GraphDataset, GraphSample, RunResult, Trained,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::autodiff::{AdamConfig, Binder, ParameterStore, Tape};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;
use crate::tensor::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "hgnet-edgepool")]
    HgnetEdgePool,
    #[serde(rename = "hgnet-louvain")]
    HgnetLouvain,
    #[serde(rename = "gcn")]
    Gcn,
    #[serde(rename = "gcn-vn")]
    GcnVn,
}

impl ModelKind {
    pub fn is_hgnet(self) -> bool {
        matches!(self, ModelKind::HgnetEdgePool | ModelKind::HgnetLouvain)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::HgnetEdgePool => "hgnet-edgepool",
            ModelKind::HgnetLouvain => "hgnet-louvain",
            ModelKind::Gcn => "gcn",
            ModelKind::GcnVn => "gcn-vn",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [ModelKind::HgnetEdgePool, ModelKind::HgnetLouvain, ModelKind::Gcn, ModelKind::GcnVn]
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::usage(format!("unknown model `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    /// Linear classifier on node embeddings.
    NodeLinear,
    /// Global mean pool, then a two-layer MLP with this hidden width.
    GraphMlp(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model: ModelKind,
    /// Hierarchy levels for HGNet, stacked layers for the baselines.
    pub levels: usize,
    pub hidden: usize,
    pub head: Head,
    pub epochs: usize,
    pub seed: u64,
    /// Graphs per optimizer step (graph task only).
    pub batch_size: usize,
    pub optimizer: AdamConfig,
    /// One EdgePool scoring function for all levels instead of one per level.
    pub share_pool_params: bool,
}

impl ModelConfig {
    pub fn new(model: ModelKind, levels: usize, head: Head) -> Self {
        Self {
            model,
            levels,
            hidden: 32,
            head,
            epochs: 200,
            seed: 0,
            batch_size: 32,
            optimizer: AdamConfig { lr: 5e-3, ..AdamConfig::default() },
            share_pool_params: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::usage("levels/layers must be at least 1"));
        }
        if self.hidden == 0 {
            return Err(Error::usage("hidden dimension must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::usage("batch size must be at least 1"));
        }
        if let Head::GraphMlp(0) = self.head {
            return Err(Error::usage("MLP head needs a positive hidden width"));
        }
        let o = &self.optimizer;
        if !(o.lr > 0.0 && o.lr.is_finite() && (0.0..1.0).contains(&o.beta1) && (0.0..1.0).contains(&o.beta2) && o.eps > 0.0) {
            return Err(Error::usage(format!("invalid optimizer settings {o:?}")));
        }
        Ok(())
    }
}

/// Parameter names used by the models.
pub(crate) mod names {
    pub fn gcn(l: usize) -> String {
        format!("gcn.{l}.weight")
    }

    pub fn pool_w(l: Option<usize>) -> String {
        l.map_or_else(|| "pool.w".to_owned(), |l| format!("pool.{l}.w"))
    }

    pub fn pool_b(l: Option<usize>) -> String {
        l.map_or_else(|| "pool.b".to_owned(), |l| format!("pool.{l}.b"))
    }

    pub fn rgcn(l: usize, part: &str) -> String {
        format!("rgcn.{l}.{part}")
    }
}

/// A configured model with its parameters.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub in_dim: usize,
    pub num_classes: usize,
    pub params: ParameterStore<f32>,
}

impl Model {
    /// Glorot-initialized weights and zero biases, drawn from the config seed.
    pub fn new(config: ModelConfig, in_dim: usize, num_classes: usize) -> Result<Self> {
        config.validate()?;
        if in_dim == 0 || num_classes < 2 {
            return Err(Error::input(format!("need features and two or more classes, got d = {in_dim}, C = {num_classes}")));
        }
        let mut r = rng::rng(rng::derive_seed(config.seed, 0));
        let mut p = ParameterStore::new();
        let (d, h, l) = (in_dim, config.hidden, config.levels);
        match config.model {
            ModelKind::Gcn | ModelKind::GcnVn => {
                for i in 0..l {
                    p.insert_glorot(names::gcn(i), if i == 0 { d } else { h }, h, &mut r);
                }
            }
            ModelKind::HgnetEdgePool | ModelKind::HgnetLouvain => {
                for i in 0..=l {
                    p.insert_glorot(names::gcn(i), if i == 0 { d } else { h }, h, &mut r);
                }
                if config.model == ModelKind::HgnetEdgePool {
                    let pools: Vec<Option<usize>> =
                        if config.share_pool_params { vec![None] } else { (0..l).map(Some).collect() };
                    for k in pools {
                        p.insert_glorot(names::pool_w(k), 2 * h, 1, &mut r);
                        p.insert_zeros(names::pool_b(k), 1, 1);
                    }
                }
                for i in 0..l {
                    for part in ["self", "intra", "inter"] {
                        p.insert_glorot(names::rgcn(i, part), h, h, &mut r);
                    }
                }
            }
        }
        match config.head {
            Head::NodeLinear => {
                p.insert_glorot("head.w", h, num_classes, &mut r);
                p.insert_zeros("head.b", 1, num_classes);
            }
            Head::GraphMlp(m) => {
                p.insert_glorot("head.w1", h, m, &mut r);
                p.insert_zeros("head.b1", 1, m);
                p.insert_glorot("head.w2", m, num_classes, &mut r);
                p.insert_zeros("head.b2", 1, num_classes);
            }
        }
        Ok(Self { config, in_dim, num_classes, params: p })
    }

    /// Structural precomputation for `g` (Louvain hierarchies use `cache`).
    pub fn prepare(&self, g: &std::sync::Arc<Graph>, cache: &LouvainCache) -> Result<Prepared> {
        Prepared::new(g, &self.config, cache)
    }

    /// Node embeddings `[N x hidden]` for one graph, evaluated without gradients.
    pub fn embeddings(&self, prepared: &Prepared, features: &Matrix<f64>) -> Result<Matrix<f32>> {
        let mut tape = Tape::new();
        let mut binder = Binder::new(&self.params);
        let x = tape.constant(features.cast());
        let h = self.embed(&mut tape, &mut binder, prepared, x)?;
        Ok(tape.value(h).clone())
    }

    pub(crate) fn embed(
        &self,
        tape: &mut Tape<f32>,
        binder: &mut Binder<'_, f32>,
        prepared: &Prepared,
        x: crate::autodiff::Var,
    ) -> Result<crate::autodiff::Var> {
        if self.config.model.is_hgnet() {
            hgnet_forward(tape, binder, prepared, x, &self.config)
        } else {
            baseline_forward(tape, binder, prepared, x, &self.config)
        }
    }
}

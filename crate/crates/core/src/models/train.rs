use std::collections::HashMap;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use log::{debug, info};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::{GraphSplit, Head, LouvainCache, Model, ModelConfig, Prepared};
use crate::autodiff::layers::{global_mean_pool, linear, mlp2, softmax_cross_entropy};
use crate::autodiff::{Binder, GradMap, SparseOp, Tape, Var};
use crate::datasets::{ColorDataset, NodeTask, SplitSpec};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;
use crate::tensor::Matrix;

#[derive(Debug, Clone)]
pub struct GraphSample {
    pub graph: Arc<Graph>,
    pub features: Matrix<f64>,
    pub label: usize,
}

#[derive(Debug, Clone, Default)]
pub struct GraphDataset {
    pub samples: Vec<GraphSample>,
}

impl GraphDataset {
    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn num_classes(&self) -> usize {
        self.samples.iter().map(|s| s.label + 1).max().unwrap_or(0)
    }

    fn feature_dim(&self) -> Result<usize> {
        let d = self.samples.first().map_or(0, |s| s.features.cols());
        for (i, s) in self.samples.iter().enumerate() {
            if s.features.cols() != d || s.features.rows() != s.graph.num_nodes() {
                return Err(Error::input(format!("sample {i}: features do not match the dataset layout")));
            }
        }
        Ok(d)
    }
}

impl From<&ColorDataset> for GraphDataset {
    fn from(ds: &ColorDataset) -> Self {
        let samples = ds
            .samples
            .iter()
            .map(|s| GraphSample { graph: Arc::clone(&s.graph), features: s.features(), label: s.label as usize })
            .collect();
        Self { samples }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub config: ModelConfig,
    pub seed: u64,
    /// Mean training loss per epoch.
    pub train_loss: Vec<f64>,
    /// Training accuracy from each epoch's own forward passes.
    pub train_trace: Vec<f64>,
    pub val_trace: Vec<f64>,
    pub test_trace: Vec<f64>,
    /// 1-based epoch with the highest validation accuracy (earliest on ties).
    pub selected_epoch: usize,
    pub test_metric: f64,
    pub seconds: f64,
}

impl RunResult {
    fn select(&mut self) {
        let mut best = 0;
        for (e, &v) in self.val_trace.iter().enumerate() {
            if v > self.val_trace[best] {
                best = e;
            }
        }
        self.selected_epoch = best + 1;
        self.test_metric = self.test_trace[best];
    }
}

/// A finished run and the model restored to its selected epoch.
#[derive(Debug, Clone)]
pub struct Trained {
    pub result: RunResult,
    pub model: Model,
}

fn global_cache() -> &'static LouvainCache {
    static CACHE: OnceLock<LouvainCache> = OnceLock::new();
    CACHE.get_or_init(LouvainCache::from_env)
}

fn argmax_rows(m: &Matrix<f32>) -> Vec<usize> {
    (0..m.rows())
        .map(|i| {
            let row = m.row(i);
            (0..row.len()).fold(0, |b, j| if row[j] > row[b] { j } else { b })
        })
        .collect()
}

fn graph_logits(model: &Model, tape: &mut Tape<f32>, binder: &mut Binder<'_, f32>, prep: &Prepared, x: &Matrix<f32>) -> Result<Var> {
    let x = tape.constant(x.clone());
    let h = model.embed(tape, binder, prep, x)?;
    let pooled = global_mean_pool(tape, h, &vec![0; prep.graph.num_nodes()], 1)?;
    let w1 = binder.get(tape, "head.w1")?;
    let b1 = binder.get(tape, "head.b1")?;
    let w2 = binder.get(tape, "head.w2")?;
    let b2 = binder.get(tape, "head.b2")?;
    mlp2(tape, pooled, w1, b1, w2, b2)
}

/// Loss of one graph scaled by `scale`, its gradients and whether it was
/// classified correctly.
fn graph_step(model: &Model, prep: &Prepared, x: &Matrix<f32>, label: usize, scale: f32) -> Result<(f64, bool, GradMap<f32>)> {
    let mut tape = Tape::new();
    let mut binder = Binder::new(&model.params);
    let logits = graph_logits(model, &mut tape, &mut binder, prep, x)?;
    let correct = argmax_rows(tape.value(logits))[0] == label;
    let loss = softmax_cross_entropy(&mut tape, logits, &[label])?;
    let value = tape.value(loss)[(0, 0)] as f64;
    let scaled = tape.scale(loss, scale);
    let grads = tape.backward(scaled)?;
    Ok((value, correct, binder.gradients(&grads)))
}

fn graph_accuracy(model: &Model, prepared: &[Arc<Prepared>], xs: &[Matrix<f32>], labels: &[usize], idx: &[usize]) -> Result<f64> {
    let hits: Vec<bool> = idx
        .par_iter()
        .map(|&i| {
            let mut tape = Tape::new();
            let mut binder = Binder::new(&model.params);
            let logits = graph_logits(model, &mut tape, &mut binder, &prepared[i], &xs[i])?;
            Ok(argmax_rows(tape.value(logits))[0] == labels[i])
        })
        .collect::<Result<_>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / idx.len() as f64)
}

/// Minibatch training on whole graphs with a mean-pool + MLP head; the
/// returned model holds the parameters of the best validation epoch.
pub fn train_graph_classifier(ds: &GraphDataset, split: &GraphSplit, cfg: &ModelConfig) -> Result<Trained> {
    let start = Instant::now();
    cfg.validate()?;
    if !matches!(cfg.head, Head::GraphMlp(_)) {
        return Err(Error::usage("graph classification needs the graph_mlp head"));
    }
    split.check(ds.samples.len())?;
    let d = ds.feature_dim()?;
    let mut model = Model::new(cfg.clone(), d, ds.num_classes().max(2))?;

    // samples of generated datasets share one topology; prepare each once
    let mut by_graph: HashMap<*const Graph, Arc<Prepared>> = HashMap::new();
    let prepared: Vec<Arc<Prepared>> = ds
        .samples
        .iter()
        .map(|s| match by_graph.get(&Arc::as_ptr(&s.graph)) {
            Some(p) => Ok(Arc::clone(p)),
            None => {
                let p = Arc::new(model.prepare(&s.graph, global_cache())?);
                by_graph.insert(Arc::as_ptr(&s.graph), Arc::clone(&p));
                Ok(p)
            }
        })
        .collect::<Result<_>>()?;
    let xs: Vec<Matrix<f32>> = ds.samples.iter().map(|s| s.features.cast()).collect();
    let labels = ds.labels();

    let mut r = rng::rng(rng::derive_seed(cfg.seed, 1));
    let mut result = RunResult {
        config: cfg.clone(),
        seed: cfg.seed,
        train_loss: Vec::with_capacity(cfg.epochs),
        train_trace: Vec::with_capacity(cfg.epochs),
        val_trace: Vec::with_capacity(cfg.epochs),
        test_trace: Vec::with_capacity(cfg.epochs),
        selected_epoch: 0,
        test_metric: 0.0,
        seconds: 0.0,
    };
    let mut best: Option<(f64, Model)> = None;
    let mut order = split.train.clone();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut r);
        let (mut loss_sum, mut hits) = (0.0, 0usize);
        for batch in order.chunks(cfg.batch_size) {
            let scale = 1.0 / batch.len() as f32;
            let outs: Vec<_> = batch
                .par_iter()
                .map(|&i| graph_step(&model, &prepared[i], &xs[i], labels[i], scale))
                .collect::<Result<_>>()?;
            for (loss, ok, grads) in outs {
                loss_sum += loss;
                hits += ok as usize;
                model.params.accumulate_grads(&grads)?;
            }
            model.params.adam_step(&cfg.optimizer)?;
        }
        let train_loss = loss_sum / order.len() as f64;
        if !train_loss.is_finite() || !model.params.values_finite() {
            return Err(Error::Divergence { epoch });
        }
        let val = graph_accuracy(&model, &prepared, &xs, &labels, &split.val)?;
        let test = graph_accuracy(&model, &prepared, &xs, &labels, &split.test)?;
        debug!("epoch {epoch}: loss {train_loss:.4} val {val:.4} test {test:.4}");
        result.train_loss.push(train_loss);
        result.train_trace.push(hits as f64 / order.len() as f64);
        result.val_trace.push(val);
        result.test_trace.push(test);
        if best.as_ref().is_none_or(|(b, _)| val > *b) {
            best = Some((val, model.clone()));
        }
    }
    if cfg.epochs > 0 {
        result.select();
    }
    result.seconds = start.elapsed().as_secs_f64();
    info!(
        "{} seed {}: selected epoch {} (val {:.4}), test {:.4}",
        cfg.model,
        cfg.seed,
        result.selected_epoch,
        result.val_trace.get(result.selected_epoch.wrapping_sub(1)).copied().unwrap_or(0.0),
        result.test_metric
    );
    Ok(Trained { result, model: best.map_or(model, |(_, m)| m) })
}

/// Full-graph transductive training with a linear head; the loss covers
/// the training nodes only.
pub fn train_node_classifier(task: &NodeTask, split: &SplitSpec, cfg: &ModelConfig) -> Result<Trained> {
    let start = Instant::now();
    cfg.validate()?;
    if cfg.head != Head::NodeLinear {
        return Err(Error::usage("node classification needs the node_linear head"));
    }
    let n = task.graph.num_nodes();
    split.check_disjoint(n)?;
    for (name, set) in [("train", &split.train), ("validation", &split.val), ("test", &split.test)] {
        if set.is_empty() {
            return Err(Error::input(format!("{name} split is empty")));
        }
    }
    let mut model = Model::new(cfg.clone(), task.features.cols(), task.num_classes.max(2))?;
    let prep = model.prepare(&task.graph, global_cache())?;
    let x: Matrix<f32> = task.features.cast();
    let take_train = Arc::new(SparseOp::gather(n, &split.train)?);
    let train_labels: Vec<usize> = split.train.iter().map(|&u| task.labels[u]).collect();
    let acc = |pred: &[usize], set: &[usize]| {
        set.iter().filter(|&&u| pred[u] == task.labels[u]).count() as f64 / set.len() as f64
    };
    let logits_of = |model: &Model, tape: &mut Tape<f32>, binder: &mut Binder<'_, f32>| -> Result<Var> {
        let xv = tape.constant(x.clone());
        let h = model.embed(tape, binder, &prep, xv)?;
        let w = binder.get(tape, "head.w")?;
        let b = binder.get(tape, "head.b")?;
        linear(tape, h, w, b)
    };

    let mut result = RunResult {
        config: cfg.clone(),
        seed: cfg.seed,
        train_loss: Vec::with_capacity(cfg.epochs),
        train_trace: Vec::with_capacity(cfg.epochs),
        val_trace: Vec::with_capacity(cfg.epochs),
        test_trace: Vec::with_capacity(cfg.epochs),
        selected_epoch: 0,
        test_metric: 0.0,
        seconds: 0.0,
    };
    let mut best: Option<(f64, Model)> = None;
    for epoch in 1..=cfg.epochs {
        let (loss_value, train_acc, grads) = {
            let mut tape = Tape::new();
            let mut binder = Binder::new(&model.params);
            let logits = logits_of(&model, &mut tape, &mut binder)?;
            let train_logits = tape.sparse(&take_train, logits)?;
            let pred = argmax_rows(tape.value(train_logits));
            let train_acc =
                pred.iter().zip(&train_labels).filter(|(p, l)| p == l).count() as f64 / train_labels.len() as f64;
            let loss = softmax_cross_entropy(&mut tape, train_logits, &train_labels)?;
            let g = tape.backward(loss)?;
            (tape.value(loss)[(0, 0)] as f64, train_acc, binder.gradients(&g))
        };
        if !loss_value.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        model.params.accumulate_grads(&grads)?;
        model.params.adam_step(&cfg.optimizer)?;
        if !model.params.values_finite() {
            return Err(Error::Divergence { epoch });
        }
        let pred = {
            let mut tape = Tape::new();
            let mut binder = Binder::new(&model.params);
            let logits = logits_of(&model, &mut tape, &mut binder)?;
            argmax_rows(tape.value(logits))
        };
        let (val, test) = (acc(&pred, &split.val), acc(&pred, &split.test));
        debug!("epoch {epoch}: loss {loss_value:.4} val {val:.4} test {test:.4}");
        result.train_loss.push(loss_value);
        result.train_trace.push(train_acc);
        result.val_trace.push(val);
        result.test_trace.push(test);
        if best.as_ref().is_none_or(|(b, _)| val > *b) {
            best = Some((val, model.clone()));
        }
    }
    if cfg.epochs > 0 {
        result.select();
    }
    result.seconds = start.elapsed().as_secs_f64();
    Ok(Trained { result, model: best.map_or(model, |(_, m)| m) })
}

/// Stratified `k`-fold cross-validation of the graph classifier. Fold `f`
/// trains with seed `derive_seed(cfg.seed, f)`; at most `jobs` folds run at
/// once and results come back in fold order.
pub fn cross_validate(ds: &GraphDataset, cfg: &ModelConfig, k: usize, jobs: usize) -> Result<Vec<RunResult>> {
    let folds = super::stratified_kfold(&ds.labels(), k, cfg.seed)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::usage(format!("thread pool: {e}")))?;
    pool.install(|| {
        folds
            .par_iter()
            .enumerate()
            .map(|(f, split)| {
                let mut c = cfg.clone();
                c.seed = rng::derive_seed(cfg.seed, f as u64);
                train_graph_classifier(ds, split, &c).map(|t| t.result)
            })
            .collect()
    })
}

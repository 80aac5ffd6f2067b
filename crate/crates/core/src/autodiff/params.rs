use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{Gradients, Tape, Var};
use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tensor::{Matrix, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parameter<T> {
    pub value: Matrix<T>,
    pub grad: Option<Matrix<T>>,
    m: Matrix<T>,
    v: Matrix<T>,
}

impl<T: Real> Parameter<T> {
    fn new(value: Matrix<T>) -> Self {
        let (r, c) = value.shape();
        Self { value, grad: None, m: Matrix::zeros(r, c), v: Matrix::zeros(r, c) }
    }
}

/// Per-parameter gradients keyed by name.
pub type GradMap<T> = BTreeMap<String, Matrix<T>>;

/// Named trainable tensors with Adam moments and a shared step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterStore<T> {
    params: BTreeMap<String, Parameter<T>>,
    step: u64,
}

impl<T: Real> Default for ParameterStore<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> ParameterStore<T> {
    pub fn new() -> Self {
        Self { params: BTreeMap::new(), step: 0 }
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Matrix<T>) {
        self.params.insert(name.into(), Parameter::new(value));
    }

    /// Glorot-uniform `[rows x cols]` weight.
    pub fn insert_glorot(&mut self, name: impl Into<String>, rows: usize, cols: usize, rng: &mut Rng) {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        let data = (0..rows * cols).map(|_| T::from_f64(rng.random_range(-limit..limit))).collect();
        self.insert(name, Matrix::from_vec(rows, cols, data).expect("shape"));
    }

    pub fn insert_zeros(&mut self, name: impl Into<String>, rows: usize, cols: usize) {
        self.insert(name, Matrix::zeros(rows, cols));
    }

    pub fn get(&self, name: &str) -> Option<&Parameter<T>> {
        self.params.get(name)
    }

    pub fn value(&self, name: &str) -> Result<&Matrix<T>> {
        self.params
            .get(name)
            .map(|p| &p.value)
            .ok_or_else(|| Error::usage(format!("unknown parameter {name:?}")))
    }

    pub fn set_value(&mut self, name: &str, value: Matrix<T>) -> Result<()> {
        let p = self.params.get_mut(name).ok_or_else(|| Error::usage(format!("unknown parameter {name:?}")))?;
        if p.value.shape() != value.shape() {
            return Err(Error::input(format!("shape {:?} does not match {name:?} {:?}", value.shape(), p.value.shape())));
        }
        p.value = value;
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.params.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Parameter<T>)> {
        self.params.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn num_scalars(&self) -> usize {
        self.params.values().map(|p| p.value.data().len()).sum()
    }

    pub fn zero_grads(&mut self) {
        for p in self.params.values_mut() {
            let (r, c) = p.value.shape();
            p.grad = Some(Matrix::zeros(r, c));
        }
    }

    pub fn clear_grads(&mut self) {
        for p in self.params.values_mut() {
            p.grad = None;
        }
    }

    /// Adds `grads` into the stored gradients. Parameters absent from the
    /// map still end up with a (zero) gradient.
    pub fn accumulate_grads(&mut self, grads: &GradMap<T>) -> Result<()> {
        for (name, g) in grads {
            let p = self.params.get_mut(name).ok_or_else(|| Error::usage(format!("gradient for unknown parameter {name:?}")))?;
            if p.value.shape() != g.shape() {
                return Err(Error::usage(format!("gradient shape mismatch for {name:?}")));
            }
        }
        for (name, p) in self.params.iter_mut() {
            let slot = p.grad.get_or_insert_with(|| Matrix::zeros(p.value.rows(), p.value.cols()));
            if let Some(g) = grads.get(name) {
                slot.add_assign(g);
            }
        }
        Ok(())
    }

    /// Bias-corrected Adam update; clears gradients afterwards.
    pub fn adam_step(&mut self, cfg: &AdamConfig) -> Result<()> {
        if let Some((name, _)) = self.params.iter().find(|(_, p)| p.grad.is_none()) {
            return Err(Error::usage(format!("adam step without a gradient for {name:?}")));
        }
        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = (cfg.beta1, cfg.beta2);
        let c1 = 1.0 - b1.powi(t);
        let c2 = 1.0 - b2.powi(t);
        for p in self.params.values_mut() {
            let g = p.grad.take().unwrap();
            for k in 0..g.data().len() {
                let gk = g.data()[k].as_f64();
                let m = b1 * p.m.data()[k].as_f64() + (1.0 - b1) * gk;
                let v = b2 * p.v.data()[k].as_f64() + (1.0 - b2) * gk * gk;
                p.m.data_mut()[k] = T::from_f64(m);
                p.v.data_mut()[k] = T::from_f64(v);
                let update = cfg.lr * (m / c1) / ((v / c2).sqrt() + cfg.eps);
                let x = p.value.data()[k].as_f64() - update;
                p.value.data_mut()[k] = T::from_f64(x);
            }
        }
        Ok(())
    }

    /// Copy of the values in another precision, with fresh optimizer state.
    pub fn cast<U: Real>(&self) -> ParameterStore<U> {
        let params = self.params.iter().map(|(k, p)| (k.clone(), Parameter::new(p.value.cast()))).collect();
        ParameterStore { params, step: 0 }
    }

    pub fn values_finite(&self) -> bool {
        self.params.values().all(|p| p.value.is_finite())
    }
}

/// Records store parameters on a tape, once per name, and maps the
/// resulting adjoints back to parameter names.
#[derive(Debug)]
pub struct Binder<'s, T> {
    store: &'s ParameterStore<T>,
    bound: BTreeMap<String, Var>,
}

impl<'s, T: Real> Binder<'s, T> {
    pub fn new(store: &'s ParameterStore<T>) -> Self {
        Self { store, bound: BTreeMap::new() }
    }

    pub fn store(&self) -> &'s ParameterStore<T> {
        self.store
    }

    pub fn get(&mut self, tape: &mut Tape<T>, name: &str) -> Result<Var> {
        if let Some(&v) = self.bound.get(name) {
            return Ok(v);
        }
        let v = tape.leaf(self.store.value(name)?.clone());
        self.bound.insert(name.to_owned(), v);
        Ok(v)
    }

    pub fn gradients(&self, grads: &Gradients<T>) -> GradMap<T> {
        self.bound
            .iter()
            .filter_map(|(name, &v)| grads.get(v).map(|g| (name.clone(), g.clone())))
            .collect()
    }
}

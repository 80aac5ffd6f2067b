//! Reverse-mode differentiation over dense matrices.
//!
//! A [`Tape`] records every operation in execution order; [`Tape::backward`]
//! walks it in reverse and accumulates adjoints. One tape is one recording:
//! it is built, differentiated and dropped by a single thread.

use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use super::SparseOp;
use crate::error::{Error, Result};
use crate::tensor::{gemm_acc, Matrix, Real};

static NEXT_TAPE_ID: AtomicU32 = AtomicU32::new(1);

/// Handle to a value recorded on a specific tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var {
    tape: u32,
    idx: u32,
}

#[derive(Debug)]
enum Op<T> {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    /// rhs is `[1 x cols]` or `[1 x 1]`, broadcast over the lhs.
    AddBroadcast(Var, Var),
    AddScalar(Var),
    Scale(Var, T),
    Sparse(Arc<SparseOp<T>>, Var),
    Relu(Var),
    /// `x[i, :] * s[i]` with `s` a column vector.
    ScaleRows(Var, Var),
    /// Softmax within contiguous segments of a column vector.
    SegmentSoftmax(Var, Arc<[usize]>),
    /// Mean softmax cross-entropy; keeps the row softmax for backward.
    CrossEntropy(Var, Arc<[usize]>, Matrix<T>),
    Sum(Var),
    Square(Var),
}

#[derive(Debug)]
struct Node<T> {
    value: Matrix<T>,
    op: Op<T>,
    needs_grad: bool,
}

#[derive(Debug)]
pub struct Tape<T> {
    id: u32,
    nodes: Vec<Node<T>>,
}

impl<T: Real> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Tape<T> {
    pub fn new() -> Self {
        Self { id: NEXT_TAPE_ID.fetch_add(1, Ordering::Relaxed), nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Matrix<T>, op: Op<T>, needs_grad: bool) -> Var {
        self.nodes.push(Node { value, op, needs_grad });
        Var { tape: self.id, idx: (self.nodes.len() - 1) as u32 }
    }

    fn node(&self, v: Var) -> &Node<T> {
        assert_eq!(v.tape, self.id, "variable belongs to a different tape");
        &self.nodes[v.idx as usize]
    }

    /// Differentiable input (parameters, or features under a gradient check).
    pub fn leaf(&mut self, value: Matrix<T>) -> Var {
        self.push(value, Op::Leaf, true)
    }

    /// Input that never receives a gradient.
    pub fn constant(&mut self, value: Matrix<T>) -> Var {
        self.push(value, Op::Leaf, false)
    }

    pub fn value(&self, v: Var) -> &Matrix<T> {
        &self.node(v).value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        self.node(v).value.shape()
    }

    pub fn owns(&self, v: Var) -> bool {
        v.tape == self.id && (v.idx as usize) < self.nodes.len()
    }

    fn ng(&self, vars: &[Var]) -> bool {
        vars.iter().any(|&v| self.node(v).needs_grad)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let value = self.value(a).matmul(self.value(b))?;
        let ng = self.ng(&[a, b]);
        Ok(self.push(value, Op::MatMul(a, b), ng))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        if x.shape() != y.shape() {
            return Err(Error::input(format!("add shape mismatch {:?} vs {:?}", x.shape(), y.shape())));
        }
        let mut value = x.clone();
        value.add_assign(y);
        let ng = self.ng(&[a, b]);
        Ok(self.push(value, Op::Add(a, b), ng))
    }

    /// `x + b` where `b` is a row vector `[1 x cols]` or a scalar `[1 x 1]`.
    pub fn add_broadcast(&mut self, x: Var, b: Var) -> Result<Var> {
        let (xv, bv) = (self.value(x), self.value(b));
        if bv.rows() != 1 || (bv.cols() != xv.cols() && bv.cols() != 1) {
            return Err(Error::input(format!(
                "cannot broadcast {:?} onto {:?}",
                bv.shape(),
                xv.shape()
            )));
        }
        let mut value = xv.clone();
        let cols = value.cols();
        for i in 0..value.rows() {
            for (j, o) in value.row_mut(i).iter_mut().enumerate() {
                *o = *o + if cols == bv.cols() { bv[(0, j)] } else { bv[(0, 0)] };
            }
        }
        let ng = self.ng(&[x, b]);
        Ok(self.push(value, Op::AddBroadcast(x, b), ng))
    }

    pub fn add_scalar(&mut self, x: Var, c: T) -> Var {
        let value = self.value(x).map(|v| v + c);
        let ng = self.ng(&[x]);
        self.push(value, Op::AddScalar(x), ng)
    }

    pub fn scale(&mut self, x: Var, c: T) -> Var {
        let value = self.value(x).map(|v| v * c);
        let ng = self.ng(&[x]);
        self.push(value, Op::Scale(x, c), ng)
    }

    pub fn sparse(&mut self, op: &Arc<SparseOp<T>>, x: Var) -> Result<Var> {
        let value = op.apply(self.value(x))?;
        let ng = self.ng(&[x]);
        Ok(self.push(value, Op::Sparse(Arc::clone(op), x), ng))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let value = self.value(x).map(|v| if v > T::zero() { v } else { T::zero() });
        let ng = self.ng(&[x]);
        self.push(value, Op::Relu(x), ng)
    }

    pub fn scale_rows(&mut self, x: Var, s: Var) -> Result<Var> {
        let (xv, sv) = (self.value(x), self.value(s));
        if sv.shape() != (xv.rows(), 1) {
            return Err(Error::input(format!(
                "row scale of shape {:?} does not fit {:?}",
                sv.shape(),
                xv.shape()
            )));
        }
        let mut value = xv.clone();
        for i in 0..value.rows() {
            let f = sv[(i, 0)];
            value.row_mut(i).iter_mut().for_each(|o| *o = *o * f);
        }
        let ng = self.ng(&[x, s]);
        Ok(self.push(value, Op::ScaleRows(x, s), ng))
    }

    /// Softmax of a column vector within segments `offsets[k]..offsets[k+1]`.
    pub fn segment_softmax(&mut self, x: Var, offsets: Arc<[usize]>) -> Result<Var> {
        let xv = self.value(x);
        if xv.cols() != 1 || offsets.last().copied() != Some(xv.rows()) || offsets[0] != 0 {
            return Err(Error::input("segment offsets must partition a column vector"));
        }
        let mut value = xv.clone();
        for w in offsets.windows(2) {
            let seg = &mut value.data_mut()[w[0]..w[1]];
            if seg.is_empty() {
                continue;
            }
            let max = seg.iter().copied().fold(T::neg_infinity(), T::max);
            let mut z = T::zero();
            for v in seg.iter_mut() {
                *v = (*v - max).exp();
                z = z + *v;
            }
            seg.iter_mut().for_each(|v| *v = *v / z);
        }
        let ng = self.ng(&[x]);
        Ok(self.push(value, Op::SegmentSoftmax(x, offsets), ng))
    }

    /// Mean over rows of `-log softmax(logits)[label]`, max-shifted for stability.
    pub fn softmax_cross_entropy(&mut self, logits: Var, labels: Arc<[usize]>) -> Result<Var> {
        let z = self.value(logits);
        let (b, c) = z.shape();
        if labels.len() != b || b == 0 {
            return Err(Error::input(format!("{} labels for {b} logit rows", labels.len())));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= c) {
            return Err(Error::input(format!("label {bad} outside 0..{c}")));
        }
        let mut probs = Matrix::zeros(b, c);
        let mut loss = 0.0f64;
        for i in 0..b {
            let row = z.row(i);
            let max = row.iter().copied().fold(T::neg_infinity(), T::max);
            let mut s = T::zero();
            for (p, &v) in probs.row_mut(i).iter_mut().zip(row) {
                *p = (v - max).exp();
                s = s + *p;
            }
            probs.row_mut(i).iter_mut().for_each(|p| *p = *p / s);
            loss += (s.ln() + max - row[labels[i]]).as_f64();
        }
        let value = Matrix::filled(1, 1, T::from_f64(loss / b as f64));
        let ng = self.ng(&[logits]);
        Ok(self.push(value, Op::CrossEntropy(logits, labels, probs), ng))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let value = Matrix::filled(1, 1, self.value(x).sum());
        let ng = self.ng(&[x]);
        self.push(value, Op::Sum(x), ng)
    }

    pub fn square(&mut self, x: Var) -> Var {
        let value = self.value(x).map(|v| v * v);
        let ng = self.ng(&[x]);
        self.push(value, Op::Square(x), ng)
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients<T>> {
        if !self.owns(loss) {
            return Err(Error::usage("backward called on a value not recorded on this tape"));
        }
        if self.shape(loss) != (1, 1) {
            return Err(Error::usage(format!("backward needs a scalar, got {:?}", self.shape(loss))));
        }
        let n = loss.idx as usize + 1;
        let mut grads: Vec<Option<Matrix<T>>> = (0..n).map(|_| None).collect();
        grads[n - 1] = Some(Matrix::filled(1, 1, T::one()));

        for i in (0..n).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if !node.needs_grad {
                continue;
            }
            self.propagate(&node.op, &node.value, &g, &mut grads);
            grads[i] = Some(g);
        }
        Ok(Gradients { tape: self.id, grads })
    }

    fn propagate(&self, op: &Op<T>, out: &Matrix<T>, g: &Matrix<T>, grads: &mut [Option<Matrix<T>>]) {
        match op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (av, bv) = (self.value(*a), self.value(*b));
                if self.node(*a).needs_grad {
                    let mut ga = Matrix::zeros(av.rows(), av.cols());
                    gemm_acc(&mut ga, g, &bv.transpose());
                    acc(grads, *a, ga);
                }
                if self.node(*b).needs_grad {
                    let mut gb = Matrix::zeros(bv.rows(), bv.cols());
                    av.tmatmul_acc(g, &mut gb);
                    acc(grads, *b, gb);
                }
            }
            Op::Add(a, b) => {
                self.acc_if(grads, *a, || g.clone());
                self.acc_if(grads, *b, || g.clone());
            }
            Op::AddBroadcast(x, b) => {
                self.acc_if(grads, *x, || g.clone());
                self.acc_if(grads, *b, || {
                    let bcols = self.value(*b).cols();
                    let mut gb = Matrix::zeros(1, bcols);
                    for i in 0..g.rows() {
                        for (j, &v) in g.row(i).iter().enumerate() {
                            let k = if bcols == 1 { 0 } else { j };
                            gb[(0, k)] = gb[(0, k)] + v;
                        }
                    }
                    gb
                });
            }
            Op::AddScalar(x) => self.acc_if(grads, *x, || g.clone()),
            Op::Scale(x, c) => self.acc_if(grads, *x, || g.map(|v| v * *c)),
            Op::Sparse(op, x) => self.acc_if(grads, *x, || {
                let mut gx = Matrix::zeros(op.in_rows(), g.cols());
                op.apply_transpose_acc(g, &mut gx);
                gx
            }),
            Op::Relu(x) => self.acc_if(grads, *x, || {
                let mut gx = g.clone();
                for (o, &y) in gx.data_mut().iter_mut().zip(out.data()) {
                    if y <= T::zero() {
                        *o = T::zero();
                    }
                }
                gx
            }),
            Op::ScaleRows(x, s) => {
                let (xv, sv) = (self.value(*x), self.value(*s));
                self.acc_if(grads, *x, || {
                    let mut gx = g.clone();
                    for i in 0..gx.rows() {
                        let f = sv[(i, 0)];
                        gx.row_mut(i).iter_mut().for_each(|o| *o = *o * f);
                    }
                    gx
                });
                self.acc_if(grads, *s, || {
                    let mut gs = Matrix::zeros(sv.rows(), 1);
                    for i in 0..gs.rows() {
                        gs[(i, 0)] = g.row(i).iter().zip(xv.row(i)).map(|(&a, &b)| a * b).sum();
                    }
                    gs
                });
            }
            Op::SegmentSoftmax(x, offsets) => self.acc_if(grads, *x, || {
                let mut gx = Matrix::zeros(out.rows(), 1);
                for w in offsets.windows(2) {
                    let (y, gy) = (&out.data()[w[0]..w[1]], &g.data()[w[0]..w[1]]);
                    let dot: T = y.iter().zip(gy).map(|(&a, &b)| a * b).sum();
                    for (k, o) in gx.data_mut()[w[0]..w[1]].iter_mut().enumerate() {
                        *o = y[k] * (gy[k] - dot);
                    }
                }
                gx
            }),
            Op::CrossEntropy(logits, labels, probs) => self.acc_if(grads, *logits, || {
                let scale = g[(0, 0)] / T::from_f64(labels.len() as f64);
                let mut gz = probs.clone();
                for (i, &l) in labels.iter().enumerate() {
                    gz[(i, l)] = gz[(i, l)] - T::one();
                }
                gz.scale(scale);
                gz
            }),
            Op::Sum(x) => {
                let s = g[(0, 0)];
                self.acc_if(grads, *x, || {
                    let (r, c) = self.shape(*x);
                    Matrix::filled(r, c, s)
                });
            }
            Op::Square(x) => self.acc_if(grads, *x, || {
                let xv = self.value(*x);
                let mut gx = g.clone();
                for (o, &v) in gx.data_mut().iter_mut().zip(xv.data()) {
                    *o = *o * (v + v);
                }
                gx
            }),
        }
    }

    fn acc_if(&self, grads: &mut [Option<Matrix<T>>], v: Var, f: impl FnOnce() -> Matrix<T>) {
        if self.node(v).needs_grad {
            acc(grads, v, f());
        }
    }
}

fn acc<T: Real>(grads: &mut [Option<Matrix<T>>], v: Var, g: Matrix<T>) {
    match &mut grads[v.idx as usize] {
        Some(existing) => existing.add_assign(&g),
        slot @ None => *slot = Some(g),
    }
}

/// Adjoints produced by one backward sweep.
#[derive(Debug)]
pub struct Gradients<T> {
    tape: u32,
    grads: Vec<Option<Matrix<T>>>,
}

impl<T: Real> Gradients<T> {
    /// Gradient of the loss with respect to `v`; `None` when `v` did not
    /// influence the loss.
    pub fn get(&self, v: Var) -> Option<&Matrix<T>> {
        if v.tape != self.tape {
            return None;
        }
        self.grads.get(v.idx as usize).and_then(Option::as_ref)
    }
}

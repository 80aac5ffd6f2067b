use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;

/// Sample indices of a graph-classification split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphSplit {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl GraphSplit {
    pub(crate) fn check(&self, n: usize) -> Result<()> {
        for (name, set) in [("train", &self.train), ("validation", &self.val), ("test", &self.test)] {
            if set.is_empty() {
                return Err(Error::input(format!("{name} split is empty")));
            }
        }
        let mut seen = vec![false; n];
        for &i in self.train.iter().chain(&self.val).chain(&self.test) {
            if i >= n {
                return Err(Error::input(format!("split index {i} outside dataset of {n}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::input(format!("sample {i} is in more than one split")));
            }
        }
        Ok(())
    }
}

fn shuffled_by_class(labels: &[usize], seed: u64) -> Vec<Vec<usize>> {
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_class = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut r = rng::rng(seed);
    for c in &mut by_class {
        c.shuffle(&mut r);
    }
    by_class
}

/// Fold `i` is the test set, fold `i + 1 (mod k)` the validation set and
/// the rest train. Folds are dealt round-robin from the class-grouped,
/// per-class shuffled sample list.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<GraphSplit>> {
    if k < 3 {
        return Err(Error::input(format!("k = {k}: need at least 3 folds for train/validation/test")));
    }
    let by_class = shuffled_by_class(labels, seed);
    if let Some((c, members)) = by_class.iter().enumerate().find(|(_, m)| m.len() < k) {
        return Err(Error::input(format!("class {c} has {} samples, fewer than k = {k}", members.len())));
    }
    let mut folds = vec![Vec::new(); k];
    for (j, &i) in by_class.iter().flatten().enumerate() {
        folds[j % k].push(i);
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok((0..k)
        .map(|i| {
            let v = (i + 1) % k;
            let mut train: Vec<usize> =
                (0..k).filter(|&f| f != i && f != v).flat_map(|f| folds[f].iter().copied()).collect();
            train.sort_unstable();
            GraphSplit { train, val: folds[v].clone(), test: folds[i].clone() }
        })
        .collect())
}

/// Per-class `train_frac` / `val_frac` / remainder split (rounded per class).
pub fn stratified_split(labels: &[usize], train_frac: f64, val_frac: f64, seed: u64) -> Result<GraphSplit> {
    if !(train_frac > 0.0 && val_frac > 0.0 && train_frac + val_frac < 1.0) {
        return Err(Error::input(format!("fractions {train_frac}/{val_frac} leave no room for all three splits")));
    }
    let mut s = GraphSplit { train: Vec::new(), val: Vec::new(), test: Vec::new() };
    for members in shuffled_by_class(labels, seed) {
        let n = members.len();
        let a = ((n as f64 * train_frac).round() as usize).min(n);
        let b = ((n as f64 * val_frac).round() as usize).min(n - a);
        s.train.extend(&members[..a]);
        s.val.extend(&members[a..a + b]);
        s.test.extend(&members[a + b..]);
    }
    for v in [&mut s.train, &mut s.val, &mut s.test] {
        v.sort_unstable();
    }
    s.check(labels.len())?;
    Ok(s)
}

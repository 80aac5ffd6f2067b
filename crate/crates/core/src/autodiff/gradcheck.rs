//! Central finite-difference check of tape gradients.

use super::{Tape, Var};
use crate::error::{Error, Result};
use crate::tensor::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// Largest `|analytic - numeric| / max(|analytic|, |numeric|)` over
    /// entries whose absolute difference exceeds the floor.
    pub max_rel_error: f64,
    /// Largest absolute difference over all entries.
    pub max_abs_error: f64,
    /// `(input, flat index)` of the worst relative error.
    pub worst: Option<(usize, usize)>,
    pub entries: usize,
}

impl GradCheckReport {
    pub fn passes(&self, rel: f64) -> bool {
        self.max_rel_error <= rel
    }
}

/// Compares reverse-mode gradients of the scalar built by `f` against
/// central differences with the given `step`. `f` must build its output
/// from the supplied input vars on the given tape.
pub fn check_gradients<F>(inputs: &[Matrix<f64>], step: f64, abs_floor: f64, f: F) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape<f64>, &[Var]) -> Result<Var>,
{
    let eval = |values: &[Matrix<f64>]| -> Result<f64> {
        let mut t = Tape::new();
        let vars: Vec<Var> = values.iter().map(|m| t.constant(m.clone())).collect();
        let y = f(&mut t, &vars)?;
        if t.shape(y) != (1, 1) {
            return Err(Error::usage("gradient check needs a scalar output"));
        }
        Ok(t.value(y)[(0, 0)])
    };
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|m| tape.leaf(m.clone())).collect();
    let y = f(&mut tape, &vars)?;
    let grads = tape.backward(y)?;

    let mut report = GradCheckReport { max_rel_error: 0.0, max_abs_error: 0.0, worst: None, entries: 0 };
    let mut work: Vec<Matrix<f64>> = inputs.to_vec();
    for (i, v) in vars.iter().enumerate() {
        let (r, c) = inputs[i].shape();
        let analytic = grads.get(*v).cloned().unwrap_or_else(|| Matrix::zeros(r, c));
        for k in 0..r * c {
            let x0 = work[i].data()[k];
            work[i].data_mut()[k] = x0 + step;
            let up = eval(&work)?;
            work[i].data_mut()[k] = x0 - step;
            let down = eval(&work)?;
            work[i].data_mut()[k] = x0;
            let numeric = (up - down) / (2.0 * step);
            let a = analytic.data()[k];
            let diff = (a - numeric).abs();
            report.entries += 1;
            report.max_abs_error = report.max_abs_error.max(diff);
            if diff > abs_floor {
                let rel = diff / a.abs().max(numeric.abs());
                if rel > report.max_rel_error {
                    report.max_rel_error = rel;
                    report.worst = Some((i, k));
                }
            }
        }
    }
    Ok(report)
}

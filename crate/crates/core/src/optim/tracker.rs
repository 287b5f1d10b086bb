use super::{Objective, OptimResult, TuningVector};

/// Wraps an objective with the evaluation budget, the incumbent and the
/// best-so-far trace shared by every optimizer.
pub(crate) struct Tracker<'a, O: Objective + ?Sized> {
    objective: &'a mut O,
    max_evals: usize,
    evals: usize,
    best_x: Vec<f64>,
    best_f: f64,
    trace: Vec<(usize, f64)>,
}

impl<'a, O: Objective + ?Sized> Tracker<'a, O> {
    pub fn new(objective: &'a mut O, max_evals: usize) -> Self {
        Self {
            objective,
            max_evals,
            evals: 0,
            best_x: Vec::new(),
            best_f: f64::INFINITY,
            trace: Vec::new(),
        }
    }

    pub fn exhausted(&self) -> bool {
        self.evals >= self.max_evals
    }

    /// Evaluates `x`. NaN results are treated as +inf so they never win.
    pub fn eval(&mut self, x: &[f64]) -> f64 {
        debug_assert!(
            x.iter().all(|v| (0.0..=1.0).contains(v)),
            "iterate left the cube: {x:?}"
        );
        let mut f = self.objective.evaluate(x);
        if f.is_nan() {
            f = f64::INFINITY;
        }
        self.evals += 1;
        if f < self.best_f || self.best_x.is_empty() {
            self.best_f = f;
            self.best_x = x.to_vec();
            self.trace.push((self.evals, f));
        }
        f
    }

    pub fn finish(mut self) -> OptimResult {
        if self.trace.last().is_some_and(|&(i, _)| i != self.evals) {
            self.trace.push((self.evals, self.best_f));
        }
        OptimResult {
            best: TuningVector::projected(self.best_x),
            best_f: self.best_f,
            evals_used: self.evals,
            trace: self.trace,
        }
    }
}

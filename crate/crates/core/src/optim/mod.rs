//! Gradient-free optimization over the normalized parameter cube.
//!
//! All optimizers minimize an [`Objective`] on `[0, 1]^d`. The global stage
//! is an artificial bee colony ([`abc_optimize`]); the local stage is
//! Nelder-Mead ([`nelder_mead`]) or Subplex ([`subplex`]), which runs
//! Nelder-Mead on low-dimensional subspaces. [`two_stage`] chains them and
//! [`warm_start_local`] skips the global stage when a good starting point is
//! already known (for example the tuning of the next lower sensor gain).

mod abc;
mod config;
mod nelder_mead;
mod params;
mod subplex;
mod tracker;

use std::io::Write;

pub use abc::{abc_optimize, abc_optimize_seeded};
pub use config::{AbcConfig, LocalConfig, LocalMethod, OptimConfig};
pub use nelder_mead::nelder_mead;
pub use params::{ParamKind, ParamSpace, ParamSpec, TuningVector};
pub use subplex::subplex;

use crate::Result;

/// Function to minimize. Must be deterministic for a fixed input.
pub trait Objective {
    fn evaluate(&mut self, x: &[f64]) -> f64;
}

impl<F: FnMut(&[f64]) -> f64> Objective for F {
    fn evaluate(&mut self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub best: TuningVector,
    pub best_f: f64,
    pub evals_used: usize,
    /// `(evaluation index, best-so-far value)`, recorded on every improvement
    /// and once more at the last evaluation.
    pub trace: Vec<(usize, f64)>,
}

impl OptimResult {
    /// Writes the trace as `eval_index,best_f` CSV.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["eval_index", "best_f"])?;
        for (i, f) in &self.trace {
            w.write_record([i.to_string(), f.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs the configured local method from `x0`.
pub fn local_search<O: Objective + ?Sized>(
    f: &mut O,
    x0: &TuningVector,
    cfg: &OptimConfig,
) -> Result<OptimResult> {
    match cfg.local.method {
        LocalMethod::NelderMead => nelder_mead(f, x0, cfg),
        LocalMethod::Subplex => subplex(f, x0, cfg),
    }
}

/// Global search with the bee colony on `stage_split · budget` evaluations,
/// then local refinement from the colony's best point with the rest.
///
/// The local stage starts from the colony incumbent and only accepts
/// improvements, so the result is never worse than the global stage alone.
pub fn two_stage<O: Objective + ?Sized>(
    f: &mut O,
    dim: usize,
    cfg: &OptimConfig,
) -> Result<OptimResult> {
    two_stage_seeded(f, dim, cfg, &[])
}

/// [`two_stage`] with extra points placed in the initial colony.
pub fn two_stage_seeded<O: Objective + ?Sized>(
    f: &mut O,
    dim: usize,
    cfg: &OptimConfig,
    seed_points: &[TuningVector],
) -> Result<OptimResult> {
    cfg.validate()?;
    let global = abc_optimize_seeded(f, dim, &cfg.global_stage(), seed_points)?;
    let local = local_search(f, &global.best, &cfg.local_stage())?;
    Ok(chain(global, local))
}

/// Local search from a known point, skipping the global stage.
pub fn warm_start_local<O: Objective + ?Sized>(
    f: &mut O,
    x_init: &TuningVector,
    cfg: &OptimConfig,
) -> Result<OptimResult> {
    local_search(f, x_init, cfg)
}

/// Concatenates two consecutive runs into one result with a single trace.
pub(crate) fn chain(first: OptimResult, second: OptimResult) -> OptimResult {
    let offset = first.evals_used;
    let mut best_f = first.best_f;
    let mut trace = first.trace;
    for (i, f) in second.trace {
        if f < best_f || i == second.evals_used {
            best_f = best_f.min(f);
            trace.push((offset + i, best_f));
        }
    }
    let (best, best_f) = if second.best_f < first.best_f {
        (second.best, second.best_f)
    } else {
        (first.best, first.best_f)
    };
    OptimResult {
        best,
        best_f,
        evals_used: offset + second.evals_used,
        trace,
    }
}

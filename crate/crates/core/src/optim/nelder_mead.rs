//! Nelder-Mead simplex search with projection onto the unit cube.

use super::tracker::Tracker;
use super::{Objective, OptimConfig, OptimResult, TuningVector};
use crate::Result;

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// When a simplex run should stop (besides budget exhaustion).
#[derive(Debug, Clone, Copy)]
pub(crate) enum StopRule {
    /// Vertex spread below `x_tol` in every coordinate and value spread
    /// below `f_tol`.
    Converged { x_tol: f64, f_tol: f64 },
    /// Simplex size reduced to `ratio` times its initial size.
    Reduced { ratio: f64 },
}

/// Runs Nelder-Mead on the coordinates `dims` of `x`, keeping the others
/// fixed. `steps[i]` is the signed initial edge along `dims[i]`. Returns the
/// best point and value found (starting from `(x, fx)`).
pub(crate) fn simplex_search<O: Objective + ?Sized>(
    tracker: &mut Tracker<O>,
    x: &[f64],
    fx: f64,
    dims: &[usize],
    steps: &[f64],
    stop: StopRule,
) -> (Vec<f64>, f64) {
    let n = dims.len();
    let embed = |sub: &[f64]| -> Vec<f64> {
        let mut full = x.to_vec();
        for (&d, &v) in dims.iter().zip(sub) {
            full[d] = v.clamp(0.0, 1.0);
        }
        full
    };
    let project = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|c| c.clamp(0.0, 1.0)).collect() };

    let start: Vec<f64> = dims.iter().map(|&d| x[d]).collect();
    let mut verts: Vec<Vec<f64>> = vec![start.clone()];
    let mut values = vec![fx];
    for i in 0..n {
        if tracker.exhausted() {
            return (x.to_vec(), fx);
        }
        let mut v = start.clone();
        let step = steps[i];
        let forward = v[i] + step;
        v[i] = if (0.0..=1.0).contains(&forward) {
            forward
        } else {
            v[i] - step
        };
        v[i] = v[i].clamp(0.0, 1.0);
        values.push(tracker.eval(&embed(&v)));
        verts.push(v);
    }

    let size = |verts: &[Vec<f64>]| -> f64 {
        verts[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&verts[0])
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    };
    let initial_size = size(&verts);

    loop {
        // Order vertices by value; ties keep insertion order.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        verts = order.iter().map(|&i| verts[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let converged = match stop {
            StopRule::Converged { x_tol, f_tol } => {
                let x_spread = verts[1..]
                    .iter()
                    .flat_map(|v| v.iter().zip(&verts[0]).map(|(a, b)| (a - b).abs()))
                    .fold(0.0, f64::max);
                let f_spread = values[1..]
                    .iter()
                    .map(|v| (v - values[0]).abs())
                    .fold(0.0, f64::max);
                x_spread <= x_tol && f_spread <= f_tol
            }
            StopRule::Reduced { ratio } => size(&verts) <= ratio * initial_size,
        };
        if converged || tracker.exhausted() {
            break;
        }

        let worst = verts[n].clone();
        let f_worst = values[n];
        let centroid: Vec<f64> = (0..n)
            .map(|j| verts[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            project(
                centroid
                    .iter()
                    .zip(&worst)
                    .map(|(c, w)| c + t * (c - w))
                    .collect(),
            )
        };

        let xr = along(REFLECT);
        let fr = tracker.eval(&embed(&xr));
        if fr < values[0] {
            if tracker.exhausted() {
                verts[n] = xr;
                values[n] = fr;
                break;
            }
            let xe = along(EXPAND);
            let fe = tracker.eval(&embed(&xe));
            if fe < fr {
                verts[n] = xe;
                values[n] = fe;
            } else {
                verts[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            verts[n] = xr;
            values[n] = fr;
            continue;
        }
        if tracker.exhausted() {
            break;
        }
        let accepted = if fr < f_worst {
            let xc = along(REFLECT * CONTRACT);
            let fc = tracker.eval(&embed(&xc));
            (fc <= fr).then_some((xc, fc))
        } else {
            let xc = along(-CONTRACT);
            let fc = tracker.eval(&embed(&xc));
            (fc < f_worst).then_some((xc, fc))
        };
        match accepted {
            Some((xc, fc)) => {
                verts[n] = xc;
                values[n] = fc;
            }
            None => {
                for i in 1..=n {
                    if tracker.exhausted() {
                        break;
                    }
                    let v: Vec<f64> = verts[i]
                        .iter()
                        .zip(&verts[0])
                        .map(|(a, b)| b + SHRINK * (a - b))
                        .collect();
                    values[i] = tracker.eval(&embed(&v));
                    verts[i] = v;
                }
            }
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("simplex has vertices");
    if values[best] < fx {
        (embed(&verts[best]), values[best])
    } else {
        (x.to_vec(), fx)
    }
}

/// Full Nelder-Mead (reflection, expansion, contractions, shrink) from `x0`.
///
/// The initial simplex steps `init_step` along each axis, stepping inward
/// where that would leave the cube. Stops when vertex and value spreads are
/// within `x_tol`/`f_tol` or the budget is spent.
pub fn nelder_mead<O: Objective + ?Sized>(
    f: &mut O,
    x0: &TuningVector,
    cfg: &OptimConfig,
) -> Result<OptimResult> {
    cfg.validate()?;
    let mut tracker = Tracker::new(f, cfg.budget);
    let x = x0.as_slice().to_vec();
    let fx = tracker.eval(&x);
    let dims: Vec<usize> = (0..x.len()).collect();
    let steps = vec![cfg.local.init_step; x.len()];
    simplex_search(
        &mut tracker,
        &x,
        fx,
        &dims,
        &steps,
        StopRule::Converged {
            x_tol: cfg.local.x_tol,
            f_tol: cfg.local.f_tol,
        },
    );
    Ok(tracker.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| (v - 0.5) * (v - 0.5)).sum()
    }

    #[test]
    fn convex_quadratic() {
        let x0 = TuningVector::new(vec![0.2; 4]).unwrap();
        let r = nelder_mead(&mut sphere, &x0, &OptimConfig::with_budget(5000, 0)).unwrap();
        assert!(r.best_f < 1e-8, "{}", r.best_f);
        assert!(r.evals_used < 5000, "should stop on tolerances");
    }

    #[test]
    fn constant_objective_terminates() {
        let mut f = |_: &[f64]| 1.5;
        let x0 = TuningVector::center(3);
        let r = nelder_mead(&mut f, &x0, &OptimConfig::with_budget(10_000, 0)).unwrap();
        assert!(r.evals_used < 10_000);
        assert_eq!(r.best_f, 1.5);
    }

    #[test]
    fn shifted_rosenbrock() {
        // Optimum at (0.6, 0.6) in cube coordinates.
        let mut f = |x: &[f64]| {
            let u = 5.0 * (x[0] - 0.4);
            let v = 5.0 * (x[1] - 0.4);
            100.0 * (v - u * u).powi(2) + (1.0 - u).powi(2)
        };
        let x0 = TuningVector::new(vec![0.2, 0.2]).unwrap();
        let r = nelder_mead(&mut f, &x0, &OptimConfig::with_budget(2000, 0)).unwrap();
        assert!(r.best_f < 1e-4, "{}", r.best_f);
        assert!(r.evals_used <= 2000);
    }

    #[test]
    fn optimum_on_boundary() {
        let f = |x: &[f64]| x.iter().map(|v| (v + 0.2) * (v + 0.2)).sum::<f64>();
        let x0 = TuningVector::new(vec![0.05, 0.9]).unwrap();
        let mut inside = true;
        let mut g = |x: &[f64]| {
            inside &= x.iter().all(|v| (0.0..=1.0).contains(v));
            f(x)
        };
        let r = nelder_mead(&mut g, &x0, &OptimConfig::with_budget(3000, 0)).unwrap();
        assert!(inside);
        assert!(r.best.as_slice().iter().all(|&v| v < 1e-3));
    }
}

//! Subplex: Nelder-Mead on a sequence of low-dimensional subspaces.
//!
//! Each outer cycle ranks coordinates by the magnitude of the last progress
//! vector, partitions them into subspaces of `subspace_min..=subspace_max`
//! coordinates, and runs a simplex search in each subspace with the other
//! coordinates frozen. Step sizes then follow the progress made.

use super::nelder_mead::{simplex_search, StopRule};
use super::tracker::Tracker;
use super::{Objective, OptimConfig, OptimResult, TuningVector};
use crate::Result;

/// Simplex reduction per subspace search and step scale on no progress.
const PSI: f64 = 0.25;
/// Bounds on the progress-based step rescaling.
const OMEGA: f64 = 0.1;

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Splits coordinates (sorted by decreasing |progress|) into subspaces.
///
/// Each subspace size `k` is chosen to maximize the mean |progress| inside
/// the subspace minus the mean over the remaining coordinates, subject to
/// the remainder still being partitionable.
pub(crate) fn partition(progress: &[f64], min: usize, max: usize) -> Vec<Vec<usize>> {
    let n = progress.len();
    if n <= max || n < min {
        return vec![(0..n).collect()];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        progress[b]
            .abs()
            .total_cmp(&progress[a].abs())
            .then(a.cmp(&b))
    });
    let mags: Vec<f64> = order.iter().map(|&i| progress[i].abs()).collect();

    let mut subspaces = Vec::new();
    let mut pos = 0;
    while pos < n {
        let rem = n - pos;
        if rem <= max {
            subspaces.push(order[pos..].to_vec());
            break;
        }
        let mut best_k = min;
        let mut best_score = f64::NEG_INFINITY;
        for k in min..=max.min(rem) {
            let rest = rem - k;
            if rest != 0 && rest < min {
                continue;
            }
            let inside = mags[pos..pos + k].iter().sum::<f64>() / k as f64;
            let outside = if rest > 0 {
                mags[pos + k..].iter().sum::<f64>() / rest as f64
            } else {
                0.0
            };
            let score = inside - outside;
            if score > best_score {
                best_score = score;
                best_k = k;
            }
        }
        subspaces.push(order[pos..pos + best_k].to_vec());
        pos += best_k;
    }
    subspaces
}

/// Subplex local search from `x0` within `cfg.budget` evaluations.
pub fn subplex<O: Objective + ?Sized>(
    f: &mut O,
    x0: &TuningVector,
    cfg: &OptimConfig,
) -> Result<OptimResult> {
    cfg.validate()?;
    let local = &cfg.local;
    let n = x0.dim();
    let mut tracker = Tracker::new(f, cfg.budget);
    let mut x = x0.as_slice().to_vec();
    let mut fx = tracker.eval(&x);
    if n == 0 {
        return Ok(tracker.finish());
    }

    let mut step = vec![local.init_step; n];
    // The first partition is driven by the step vector itself.
    let mut progress = step.clone();

    while !tracker.exhausted() {
        let x_prev = x.clone();
        let subspaces = partition(&progress, local.subspace_min, local.subspace_max);
        for dims in &subspaces {
            if tracker.exhausted() {
                break;
            }
            let steps: Vec<f64> = dims.iter().map(|&d| step[d]).collect();
            let (nx, nf) = simplex_search(
                &mut tracker,
                &x,
                fx,
                dims,
                &steps,
                StopRule::Reduced { ratio: PSI },
            );
            x = nx;
            fx = nf;
        }

        progress = x.iter().zip(&x_prev).map(|(a, b)| a - b).collect();
        let moved = l1(&progress);
        let scale = if subspaces.len() > 1 && moved > 0.0 {
            (moved / l1(&step)).clamp(OMEGA, 1.0 / OMEGA)
        } else {
            PSI
        };
        for (s, dx) in step.iter_mut().zip(&progress) {
            let mag = (s.abs() * scale).min(1.0);
            *s = if *dx > 0.0 {
                mag
            } else if *dx < 0.0 {
                -mag
            } else {
                -s.signum() * mag
            };
        }

        let done = progress
            .iter()
            .zip(&step)
            .all(|(dx, s)| dx.abs().max(PSI * s.abs()) <= local.x_tol);
        if done {
            break;
        }
        // A cycle without movement carries no ranking information; fall back
        // to the step magnitudes.
        if moved == 0.0 {
            progress = step.clone();
        }
    }
    Ok(tracker.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn partition_respects_bounds() {
        let progress: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin()).collect();
        let parts = partition(&progress, 2, 5);
        let mut all: Vec<usize> = parts.iter().flatten().copied().collect();
        all.sort();
        assert_eq!(all, (0..12).collect::<Vec<_>>());
        assert!(parts.iter().all(|p| (2..=5).contains(&p.len())));
        assert_eq!(partition(&[0.1, 0.2, 0.3, 0.4], 2, 5).len(), 1);
        assert_eq!(partition(&[0.1], 2, 5), vec![vec![0]]);
    }

    #[test]
    fn partition_groups_large_progress_first() {
        let progress = [0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let parts = partition(&progress, 2, 5);
        assert_eq!(parts[0], vec![1, 3]);
    }

    #[test]
    fn separable_quadratic_twelve_dims() {
        let centre: Vec<f64> = (0..12).map(|i| 0.2 + 0.05 * i as f64).collect();
        let mut f = |x: &[f64]| {
            x.iter()
                .zip(&centre)
                .enumerate()
                .map(|(i, (a, b))| (1.0 + i as f64) * (a - b) * (a - b))
                .sum::<f64>()
        };
        let x0 = TuningVector::center(12);
        let r = subplex(&mut f, &x0, &OptimConfig::with_budget(20_000, 0)).unwrap();
        assert!(r.best_f < 1e-6, "{}", r.best_f);
    }

    #[test]
    fn non_separable_quadratic_reduces_hundredfold() {
        // A = QᵀQ + I with random Q is SPD; its minimum value is 0 at c.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let q: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..12).map(|_| rng.random_range(-0.5..0.5)).collect())
            .collect();
        let mut a = vec![vec![0.0; 12]; 12];
        for i in 0..12 {
            for j in 0..12 {
                a[i][j] = (0..12).map(|k| q[k][i] * q[k][j]).sum::<f64>()
                    + if i == j { 1.0 } else { 0.0 };
            }
        }
        let c: Vec<f64> = (0..12).map(|_| rng.random_range(0.3..0.7)).collect();
        let mut f = |x: &[f64]| {
            let d: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a - b).collect();
            (0..12)
                .map(|i| d[i] * (0..12).map(|j| a[i][j] * d[j]).sum::<f64>())
                .sum::<f64>()
        };
        let x0 = TuningVector::new(vec![0.05; 12]).unwrap();
        let f0 = f(x0.as_slice());
        let r = subplex(&mut f, &x0, &OptimConfig::with_budget(20_000, 0)).unwrap();
        assert!(r.best_f <= f0 / 100.0, "{} vs {}", r.best_f, f0);
    }

    #[test]
    fn small_dimension_is_single_subspace() {
        // With d <= subspace_max every cycle is one simplex search on all
        // coordinates, so the result matches the full-space minimum.
        let mut f = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] - 0.8).powi(2) + (x[2] - 0.1).powi(2);
        let r = subplex(
            &mut f,
            &TuningVector::center(3),
            &OptimConfig::with_budget(3000, 0),
        )
        .unwrap();
        assert!(r.best_f < 1e-7);
    }

    #[test]
    fn stays_in_cube_and_is_deterministic() {
        let outside = std::cell::Cell::new(false);
        let mut f = |x: &[f64]| {
            outside.set(outside.get() | x.iter().any(|v| !(0.0..=1.0).contains(v)));
            x.iter()
                .enumerate()
                .map(|(i, v)| (v - 1.2 + 0.3 * i as f64).powi(2))
                .sum::<f64>()
        };
        let cfg = OptimConfig::with_budget(4000, 0);
        let x0 = TuningVector::new(vec![0.9, 0.1, 0.5, 0.95, 0.3, 0.7, 0.2]).unwrap();
        let a = subplex(&mut f, &x0, &cfg).unwrap();
        assert!(!outside.get());
        let b = subplex(&mut f, &x0, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.trace.windows(2).all(|w| w[1].1 <= w[0].1));
    }
}

//! Artificial bee colony on the unit cube.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tracker::Tracker;
use super::{Objective, OptimConfig, OptimResult, TuningVector};
use crate::{Error, Result};

struct Source {
    x: Vec<f64>,
    f: f64,
    trials: usize,
}

/// Selection weight of a source; assumes non-negative objectives.
fn quality(f: f64) -> f64 {
    if f >= 0.0 {
        1.0 / (1.0 + f)
    } else {
        1.0 + f.abs()
    }
}

/// Minimizes `f` over `[0, 1]^dim` with `cfg.budget` evaluations.
pub fn abc_optimize<O: Objective + ?Sized>(
    f: &mut O,
    dim: usize,
    cfg: &OptimConfig,
) -> Result<OptimResult> {
    abc_optimize_seeded(f, dim, cfg, &[])
}

/// Bee colony whose first food sources are `seed_points`; the rest of the
/// colony is drawn uniformly.
pub fn abc_optimize_seeded<O: Objective + ?Sized>(
    f: &mut O,
    dim: usize,
    cfg: &OptimConfig,
    seed_points: &[TuningVector],
) -> Result<OptimResult> {
    cfg.validate()?;
    if dim == 0 {
        return Err(Error::InvalidConfig("dimension must be at least 1".into()));
    }
    let sn = cfg.abc.population;
    if cfg.budget < sn {
        return Err(Error::InvalidConfig(format!(
            "budget {} cannot initialize {sn} food sources",
            cfg.budget
        )));
    }
    if seed_points.iter().any(|p| p.dim() != dim) {
        return Err(Error::InvalidConfig("seed point dimension mismatch".into()));
    }
    let limit = cfg.limit_for(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut tracker = Tracker::new(f, cfg.budget);

    let mut sources: Vec<Source> = (0..sn)
        .map(|i| {
            let x: Vec<f64> = match seed_points.get(i) {
                Some(p) => p.as_slice().to_vec(),
                None => (0..dim).map(|_| rng.random::<f64>()).collect(),
            };
            let fx = tracker.eval(&x);
            Source {
                x,
                f: fx,
                trials: 0,
            }
        })
        .collect();

    // Neighbour search around source i along one random coordinate.
    let try_neighbour =
        |i: usize, sources: &mut [Source], rng: &mut ChaCha8Rng, tracker: &mut Tracker<O>| {
            let j = rng.random_range(0..dim);
            let mut k = rng.random_range(0..sn - 1);
            if k >= i {
                k += 1;
            }
            let phi: f64 = rng.random_range(-1.0..1.0);
            let mut v = sources[i].x.clone();
            v[j] = (v[j] + phi * (v[j] - sources[k].x[j])).clamp(0.0, 1.0);
            let fv = tracker.eval(&v);
            let s = &mut sources[i];
            if fv < s.f {
                s.x = v;
                s.f = fv;
                s.trials = 0;
            } else {
                s.trials += 1;
            }
        };

    'search: loop {
        // Employed bees.
        for i in 0..sn {
            if tracker.exhausted() {
                break 'search;
            }
            try_neighbour(i, &mut sources, &mut rng, &mut tracker);
        }

        // Onlooker bees pick sources by roulette on 1/(1+f).
        let weights: Vec<f64> = sources.iter().map(|s| quality(s.f)).collect();
        let total: f64 = weights.iter().sum();
        for _ in 0..sn {
            if tracker.exhausted() {
                break 'search;
            }
            let mut pick = rng.random::<f64>() * total;
            let mut i = sn - 1;
            for (idx, w) in weights.iter().enumerate() {
                if pick < *w {
                    i = idx;
                    break;
                }
                pick -= w;
            }
            try_neighbour(i, &mut sources, &mut rng, &mut tracker);
        }

        // One scout per cycle replaces the most exhausted source.
        let (worn, trials) = sources
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.trials))
            .max_by_key(|&(i, t)| (t, std::cmp::Reverse(i)))
            .expect("colony is non-empty");
        if trials > limit {
            if tracker.exhausted() {
                break;
            }
            let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let fx = tracker.eval(&x);
            sources[worn] = Source {
                x,
                f: fx,
                trials: 0,
            };
        }
    }

    Ok(tracker.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| (v - 0.5) * (v - 0.5)).sum()
    }

    #[test]
    fn sphere_four_dims() {
        let hits = (0..10)
            .filter(|&seed| {
                let r =
                    abc_optimize(&mut sphere, 4, &OptimConfig::with_budget(20_000, seed)).unwrap();
                r.best_f < 1e-3
            })
            .count();
        assert!(hits >= 9, "{hits}/10");
    }

    #[test]
    fn one_dimensional_abs() {
        let mut f = |x: &[f64]| (x[0] - 0.3).abs();
        let r = abc_optimize(&mut f, 1, &OptimConfig::with_budget(2000, 3)).unwrap();
        assert!((r.best.as_slice()[0] - 0.3).abs() < 0.02);
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = OptimConfig::with_budget(1500, 17);
        let a = abc_optimize(&mut sphere, 3, &cfg).unwrap();
        let b = abc_optimize(&mut sphere, 3, &cfg).unwrap();
        assert_eq!(a, b);
        let c = abc_optimize(&mut sphere, 3, &OptimConfig::with_budget(1500, 18)).unwrap();
        assert_ne!(a.best, c.best);
    }

    #[test]
    fn budget_below_population_is_an_error() {
        let cfg = OptimConfig::with_budget(39, 0);
        assert!(abc_optimize(&mut sphere, 2, &cfg).is_err());
        let r = abc_optimize(&mut sphere, 2, &OptimConfig::with_budget(40, 0)).unwrap();
        assert_eq!(r.evals_used, 40);
    }

    #[test]
    fn iterates_stay_in_cube_and_budget_is_exact() {
        let mut seen_outside = false;
        let mut f = |x: &[f64]| {
            seen_outside |= x.iter().any(|v| !(0.0..=1.0).contains(v));
            x.iter().map(|v| (v - 1.0).abs()).sum::<f64>()
        };
        let r = abc_optimize(&mut f, 5, &OptimConfig::with_budget(777, 2)).unwrap();
        assert!(!seen_outside);
        assert_eq!(r.evals_used, 777);
        assert!(r.trace.windows(2).all(|w| w[1].1 <= w[0].1));
        assert_eq!(r.trace.last().unwrap().0, 777);
    }

    #[test]
    fn seed_points_are_evaluated_first() {
        let mut first = None;
        let mut f = |x: &[f64]| {
            first.get_or_insert_with(|| x.to_vec());
            sphere(x)
        };
        let p = TuningVector::new(vec![0.5, 0.5]).unwrap();
        let r = abc_optimize_seeded(&mut f, 2, &OptimConfig::with_budget(100, 0), &[p]).unwrap();
        assert_eq!(first.unwrap(), vec![0.5, 0.5]);
        assert_eq!(r.best_f, 0.0);
    }
}

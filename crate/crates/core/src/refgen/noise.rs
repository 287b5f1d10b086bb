//! Signal-dependent sensor noise model and its calibration from flat fields.

use log::warn;
use serde::{Deserialize, Serialize};

use super::Burst;
use crate::{Error, Result};

fn unit_gain() -> f64 {
    1.0
}

/// Affine noise variance `σ²(I) = a·g·I + b·g²` for signal `I` at sensor
/// gain `g`: `a` is the shot-noise slope, `b` the read-noise floor, both
/// referred to unit gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub a: f64,
    pub b: f64,
    #[serde(default = "unit_gain")]
    pub gain: f64,
}

impl NoiseModel {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise coefficients must be non-negative, got a={a}, b={b}"
            )));
        }
        Ok(Self { a, b, gain: 1.0 })
    }

    pub fn noiseless() -> Self {
        Self {
            a: 0.0,
            b: 0.0,
            gain: 1.0,
        }
    }

    /// The same sensor at another gain (`g ≥ 1`).
    pub fn at_gain(&self, gain: f64) -> Result<Self> {
        if !(gain >= 1.0 && gain.is_finite()) {
            return Err(Error::InvalidParameter(format!("gain {gain} must be >= 1")));
        }
        Ok(Self { gain, ..*self })
    }

    /// Noise of the mean of `frames` independent captures.
    pub fn averaged(&self, frames: usize) -> Self {
        let n = frames.max(1) as f64;
        Self {
            a: self.a / n,
            b: self.b / n,
            gain: self.gain,
        }
    }

    pub fn variance(&self, signal: f64) -> f64 {
        (self.a * self.gain * signal.max(0.0) + self.b * self.gain * self.gain).max(0.0)
    }

    pub fn sigma(&self, signal: f64) -> f64 {
        self.variance(signal).sqrt()
    }
}

/// Variance of a standard normal truncated to `(-z, z)`.
fn truncated_variance_ratio(z: f64) -> f64 {
    let mass = libm::erf(z / std::f64::consts::SQRT_2);
    if mass <= 0.0 {
        return 1.0 / 3.0;
    }
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    1.0 - 2.0 * z * pdf / mass
}

/// Noise variance of one flat level, undoing the clipping at 0 and 1.
///
/// Without clipped samples this is the plain sample variance. Otherwise only
/// samples within the largest symmetric window around `level` that fits in
/// `[0, 1]` are kept and the truncated-normal variance is inverted for σ.
fn level_variance(samples: &[f64], level: f64) -> f64 {
    let n = samples.len() as f64;
    if samples.iter().all(|&v| v == samples[0]) {
        return 0.0;
    }
    let clipped = samples.iter().any(|&v| v <= 0.0 || v >= 1.0);
    if !clipped {
        let mean = samples.iter().sum::<f64>() / n;
        return samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    }
    let half = level.min(1.0 - level);
    if half <= 0.0 {
        return 0.0;
    }
    let kept: Vec<f64> = samples
        .iter()
        .map(|&v| v - level)
        .filter(|d| d.abs() < half)
        .collect();
    if kept.len() < 2 {
        return 0.0;
    }
    let observed = kept.iter().map(|d| d * d).sum::<f64>() / kept.len() as f64;
    // σ²·ratio(half/σ) is increasing in σ and tends to half²/3.
    if observed >= half * half / 3.0 {
        warn!("flat at level {level} is saturated; variance estimate unreliable");
        return observed;
    }
    let model = |sigma: f64| sigma * sigma * truncated_variance_ratio(half / sigma);
    let (mut lo, mut hi) = (observed.sqrt() * 0.5, observed.sqrt());
    while model(hi) < observed {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if model(mid) < observed {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sigma = 0.5 * (lo + hi);
    sigma * sigma
}

/// Fits `σ² = a·I + b` by weighted least squares to flat-field bursts of known mean
/// level. Negative coefficients are clamped to zero. The returned model is
/// referred to gain 1 (i.e. the gain the flats were captured at).
pub fn calibrate_noise_model(flats: &[(Burst, f64)]) -> Result<NoiseModel> {
    let mut levels: Vec<f64> = flats.iter().map(|(_, l)| *l).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if levels.len() < 2 {
        return Err(Error::TooFewLevels(levels.len()));
    }
    let points: Vec<(f64, f64)> = flats
        .iter()
        .map(|(burst, level)| {
            let samples: Vec<f64> = burst
                .frames()
                .iter()
                .flat_map(|f| f.data().iter().copied())
                .collect();
            (*level, level_variance(&samples, *level))
        })
        .collect();
    // A sample variance has standard error proportional to the variance
    // itself, so levels are weighted by 1/σ⁴.
    let weights: Vec<f64> = if points.iter().all(|p| p.1 > 0.0) {
        points.iter().map(|p| 1.0 / (p.1 * p.1)).collect()
    } else {
        vec![1.0; points.len()]
    };
    let sw: f64 = weights.iter().sum();
    let mx = points
        .iter()
        .zip(&weights)
        .map(|(p, w)| w * p.0)
        .sum::<f64>()
        / sw;
    let my = points
        .iter()
        .zip(&weights)
        .map(|(p, w)| w * p.1)
        .sum::<f64>()
        / sw;
    let sxx: f64 = points
        .iter()
        .zip(&weights)
        .map(|(p, w)| w * (p.0 - mx) * (p.0 - mx))
        .sum();
    let sxy: f64 = points
        .iter()
        .zip(&weights)
        .map(|(p, w)| w * (p.0 - mx) * (p.1 - my))
        .sum();
    let mut a = sxy / sxx;
    let mut b = my - a * mx;
    if a < 0.0 {
        warn!("fitted shot-noise slope {a} is negative; clamping to 0");
        a = 0.0;
        b = my.max(0.0);
    }
    if b < 0.0 {
        warn!("fitted read-noise floor {b} is negative; clamping to 0");
        b = 0.0;
    }
    NoiseModel::new(a, b)
}

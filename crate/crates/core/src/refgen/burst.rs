use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::NoiseModel;
use crate::imaging::{bayer_subsample, BayerMosaic, CfaPattern, PlanarImage};
use crate::{Error, Result};

/// Frames of a static scene sharing geometry and CFA pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Burst {
    frames: Vec<BayerMosaic>,
}

impl Burst {
    pub fn new(frames: Vec<BayerMosaic>) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::InvalidBurst("burst has no frames".into()))?;
        for f in &frames[1..] {
            first.check_same_geometry(f)?;
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[BayerMosaic] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn first(&self) -> &BayerMosaic {
        &self.frames[0]
    }

    /// The first `n` frames.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.frames.len() {
            return Err(Error::InvalidBurst(format!(
                "cannot take {n} of {} frames",
                self.frames.len()
            )));
        }
        Ok(Self {
            frames: self.frames[..n].to_vec(),
        })
    }
}

/// Per-pixel mean of the frames.
pub fn temporal_fusion(burst: &Burst) -> Result<BayerMosaic> {
    let first = burst.first();
    let mut acc = vec![0.0; first.data().len()];
    for f in burst.frames() {
        for (a, v) in acc.iter_mut().zip(f.data()) {
            *a += v;
        }
    }
    let n = burst.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(first.with_data(acc))
}

/// `w·a + (1 − w)·b` per pixel.
pub fn blend_references(a: &BayerMosaic, b: &BayerMosaic, w: f64) -> Result<BayerMosaic> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::InvalidParameter(format!(
            "blend weight {w} outside [0, 1]"
        )));
    }
    a.check_same_geometry(b)?;
    if w == 1.0 {
        return Ok(a.clone());
    }
    if w == 0.0 {
        return Ok(b.clone());
    }
    let data = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| w * x + (1.0 - w) * y)
        .collect();
    Ok(a.with_data(data))
}

/// Subsamples `clean_rgb` to the CFA and adds independent Gaussian noise
/// drawn from `nm` to each of `n_frames` copies, clamping to `[0, 1]`.
///
/// Frame `i` draws from stream `i` of a generator keyed by `seed`, so any
/// frame can be reproduced on its own.
pub fn simulate_capture(
    clean_rgb: &PlanarImage,
    nm: &NoiseModel,
    pattern: CfaPattern,
    n_frames: usize,
    seed: u64,
) -> Result<Burst> {
    if n_frames == 0 {
        return Err(Error::InvalidBurst("n_frames must be at least 1".into()));
    }
    let clean = bayer_subsample(clean_rgb, pattern)?;
    let sigma: Vec<f64> = clean.data().iter().map(|&v| nm.sigma(v)).collect();
    let frames = (0..n_frames)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let data = clean
                .data()
                .iter()
                .zip(&sigma)
                .map(|(&v, &s)| {
                    let z: f64 = rng.sample(StandardNormal);
                    (v + s * z).clamp(0.0, 1.0)
                })
                .collect();
            clean.with_data(data)
        })
        .collect();
    Burst::new(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::ColorDomain;
    use proptest::prelude::*;

    fn gray(size: usize, v: f64) -> PlanarImage {
        PlanarImage::filled(size, size, ColorDomain::LinearRgb, v)
    }

    fn std_dev(v: &[f64]) -> f64 {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt()
    }

    #[test]
    fn fusion_of_identical_frames() {
        let m = BayerMosaic::new(2, 2, CfaPattern::Rggb, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let b = Burst::new(vec![m.clone(); 5]).unwrap();
        assert_eq!(temporal_fusion(&b).unwrap(), m);
    }

    #[test]
    fn fusion_of_two_frames() {
        let a = BayerMosaic::filled(4, 4, CfaPattern::Rggb, 0.0).unwrap();
        let b = BayerMosaic::filled(4, 4, CfaPattern::Rggb, 0.6).unwrap();
        let f = temporal_fusion(&Burst::new(vec![a, b]).unwrap()).unwrap();
        assert!(f.data().iter().all(|&v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn fusion_reduces_noise_by_sqrt_n() {
        let nm = NoiseModel::new(0.0, 4e-4).unwrap();
        let burst = simulate_capture(&gray(128, 0.5), &nm, CfaPattern::Rggb, 10, 3).unwrap();
        let fused = temporal_fusion(&burst).unwrap();
        let s = std_dev(fused.data());
        let expect = 0.02 / 10f64.sqrt();
        assert!((s - expect).abs() / expect < 0.15, "std {s}");
    }

    #[test]
    fn burst_rejects_empty_and_mismatched() {
        assert!(Burst::new(vec![]).is_err());
        let a = BayerMosaic::filled(4, 4, CfaPattern::Rggb, 0.0).unwrap();
        let b = BayerMosaic::filled(4, 4, CfaPattern::Bggr, 0.0).unwrap();
        assert!(Burst::new(vec![a.clone(), b]).is_err());
        let c = BayerMosaic::filled(4, 6, CfaPattern::Rggb, 0.0).unwrap();
        assert!(Burst::new(vec![a, c]).is_err());
    }

    #[test]
    fn blend_endpoints_and_midpoint() {
        let a = BayerMosaic::filled(4, 4, CfaPattern::Rggb, 0.2).unwrap();
        let b = BayerMosaic::filled(4, 4, CfaPattern::Rggb, 0.6).unwrap();
        assert_eq!(blend_references(&a, &b, 1.0).unwrap(), a);
        assert_eq!(blend_references(&a, &b, 0.0).unwrap(), b);
        let mid = blend_references(&a, &b, 0.5).unwrap();
        assert!(mid.data().iter().all(|&v| (v - 0.4).abs() < 1e-15));
        assert!(blend_references(&a, &b, 1.5).is_err());
        assert!(blend_references(&a, &b, -0.1).is_err());
    }

    #[test]
    fn noiseless_capture_is_clean() {
        let img = gray(8, 0.3);
        let burst =
            simulate_capture(&img, &NoiseModel::noiseless(), CfaPattern::Rggb, 3, 1).unwrap();
        let clean = bayer_subsample(&img, CfaPattern::Rggb).unwrap();
        assert!(burst.frames().iter().all(|f| *f == clean));
    }

    #[test]
    fn capture_is_deterministic_and_frames_differ() {
        let nm = NoiseModel::new(0.01, 1e-4).unwrap();
        let a = simulate_capture(&gray(16, 0.5), &nm, CfaPattern::Rggb, 3, 42).unwrap();
        let b = simulate_capture(&gray(16, 0.5), &nm, CfaPattern::Rggb, 3, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.frames()[0], a.frames()[1]);
        let c = simulate_capture(&gray(16, 0.5), &nm, CfaPattern::Rggb, 1, 42).unwrap();
        assert_eq!(c.frames()[0], a.frames()[0]);
    }

    #[test]
    fn read_noise_level() {
        let nm = NoiseModel::new(0.0, 4e-4).unwrap();
        let burst = simulate_capture(&gray(128, 0.5), &nm, CfaPattern::Rggb, 2, 9).unwrap();
        for f in burst.frames() {
            let s = std_dev(f.data());
            assert!((s - 0.02).abs() / 0.02 < 0.10, "std {s}");
        }
    }

    #[test]
    fn noise_is_zero_mean() {
        let nm = NoiseModel::new(0.01, 1e-4).unwrap();
        let img = PlanarImage::from_planes(
            4,
            4,
            ColorDomain::LinearRgb,
            &[&[0.3; 16], &[0.5; 16], &[0.7; 16]],
        )
        .unwrap();
        let burst = simulate_capture(&img, &nm, CfaPattern::Rggb, 1000, 5).unwrap();
        let clean = bayer_subsample(&img, CfaPattern::Rggb).unwrap();
        for (i, &c) in clean.data().iter().enumerate() {
            let mean = burst.frames().iter().map(|f| f.data()[i]).sum::<f64>() / 1000.0;
            let bound = 3.0 * nm.sigma(c) / 1000f64.sqrt();
            assert!((mean - c).abs() < bound, "pixel {i}: mean {mean} vs {c}");
        }
    }

    proptest! {
        #[test]
        fn fusion_is_permutation_invariant(seed in 0u64..500, rot in 0usize..4) {
            let nm = NoiseModel::new(0.01, 1e-4).unwrap();
            let burst = simulate_capture(&gray(8, 0.4), &nm, CfaPattern::Grbg, 4, seed).unwrap();
            let mut frames = burst.frames().to_vec();
            frames.rotate_left(rot);
            frames.swap(0, 3);
            let a = temporal_fusion(&burst).unwrap();
            let b = temporal_fusion(&Burst::new(frames).unwrap()).unwrap();
            for (x, y) in a.data().iter().zip(b.data()) {
                prop_assert!((x - y).abs() < 1e-15);
            }
        }
    }
}

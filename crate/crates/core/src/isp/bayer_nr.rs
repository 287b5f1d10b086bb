use super::{BlockId, BlockParams};
use crate::imaging::{clamp_index, BayerMosaic};
use crate::refgen::NoiseModel;
use crate::Result;

/// Bilateral filter on each CFA sub-plane.
///
/// Range sigma is `k_r` times the modelled noise sigma at the centre value,
/// so flat regions are smoothed at any signal level while edges well above
/// the noise survive. The result is blended with the input by `strength`.
pub fn bayer_nr(m: &BayerMosaic, p: &BlockParams, nm: &NoiseModel) -> Result<BayerMosaic> {
    p.require(BlockId::BayerNr)?;
    let [sigma_s, k_r, radius, beta] = *p.values();
    if beta == 0.0 {
        return Ok(m.clone());
    }
    let r = radius.round() as isize;
    let side = (2 * r + 1) as usize;
    let spatial: Vec<f64> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .map(|(dx, dy)| (-((dx * dx + dy * dy) as f64) / (2.0 * sigma_s * sigma_s)).exp())
        .collect();

    let (w, h) = (m.width(), m.height());
    let (sw, sh) = (w / 2, h / 2);
    let src = m.data();
    let mut out = src.to_vec();
    let mut sub = vec![0.0; sw * sh];
    for (ox, oy) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        for y in 0..sh {
            for x in 0..sw {
                sub[y * sw + x] = src[(2 * y + oy) * w + 2 * x + ox];
            }
        }
        for y in 0..sh {
            for x in 0..sw {
                let v = sub[y * sw + x];
                let sr = k_r * nm.sigma(v);
                if sr < 1e-12 {
                    continue;
                }
                let inv = -0.5 / (sr * sr);
                let (mut num, mut den) = (0.0, 0.0);
                for (j, dy) in (-r..=r).enumerate() {
                    let row = clamp_index(y as isize + dy, sh) * sw;
                    for (i, dx) in (-r..=r).enumerate() {
                        let d = sub[row + clamp_index(x as isize + dx, sw)] - v;
                        let wt = spatial[j * side + i] * (d * d * inv).exp();
                        num += wt * d;
                        den += wt;
                    }
                }
                out[(2 * y + oy) * w + 2 * x + ox] = v + beta * num / den;
            }
        }
    }
    Ok(m.with_data(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{CfaPattern, ColorDomain, PlanarImage};
    use crate::refgen::simulate_capture;

    fn params(sigma_s: f64, k_r: f64, radius: f64, beta: f64) -> BlockParams {
        BlockParams::new(BlockId::BayerNr, [sigma_s, k_r, radius, beta]).unwrap()
    }

    fn variance(v: &[f64]) -> f64 {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)
    }

    fn noisy(size: usize, seed: u64) -> (BayerMosaic, NoiseModel) {
        let nm = NoiseModel::new(0.0, 4e-4).unwrap();
        let clean = PlanarImage::filled(size, size, ColorDomain::LinearRgb, 0.5);
        let b = simulate_capture(&clean, &nm, CfaPattern::Rggb, 1, seed).unwrap();
        (b.first().clone(), nm)
    }

    #[test]
    fn zero_strength_is_identity() {
        let (m, nm) = noisy(32, 1);
        assert_eq!(bayer_nr(&m, &params(2.0, 4.0, 2.0, 0.0), &nm).unwrap(), m);
    }

    #[test]
    fn constant_is_preserved() {
        let nm = NoiseModel::new(0.01, 1e-4).unwrap();
        let m = BayerMosaic::filled(16, 16, CfaPattern::Bggr, 0.3).unwrap();
        for p in [params(0.5, 8.0, 3.0, 1.0), params(3.0, 1.0, 1.0, 0.4)] {
            assert_eq!(bayer_nr(&m, &p, &nm).unwrap(), m);
        }
    }

    #[test]
    fn reduces_noise_variance() {
        let (m, nm) = noisy(128, 2);
        let out = bayer_nr(&m, &params(2.0, 8.0, 3.0, 1.0), &nm).unwrap();
        assert!(variance(out.data()) < 0.25 * variance(m.data()));
    }

    #[test]
    fn strength_is_monotone_on_noise() {
        let (m, nm) = noisy(128, 3);
        let mut last = variance(m.data());
        for beta in [0.25, 0.5, 0.75, 1.0] {
            let v = variance(
                bayer_nr(&m, &params(1.5, 3.0, 2.0, beta), &nm)
                    .unwrap()
                    .data(),
            );
            assert!(v <= last);
            last = v;
        }
    }

    #[test]
    fn planes_do_not_mix() {
        // Red sites 1, everything else 0: a per-plane filter keeps it exact.
        let m = BayerMosaic::new(
            8,
            8,
            CfaPattern::Rggb,
            (0..64)
                .map(|i| {
                    if (i % 8) % 2 == 0 && (i / 8) % 2 == 0 {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect(),
        )
        .unwrap();
        let nm = NoiseModel::new(0.01, 1e-4).unwrap();
        assert_eq!(bayer_nr(&m, &params(3.0, 8.0, 3.0, 1.0), &nm).unwrap(), m);
    }

    #[test]
    fn wrong_block() {
        let m = BayerMosaic::filled(4, 4, CfaPattern::Rggb, 0.3).unwrap();
        let p = BlockParams::passthrough(BlockId::Sharpen);
        assert!(bayer_nr(&m, &p, &NoiseModel::noiseless()).is_err());
    }
}

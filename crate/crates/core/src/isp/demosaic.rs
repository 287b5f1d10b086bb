use super::{BlockId, BlockParams};
use crate::imaging::{
    clamp_index, convolve_separable, BayerMosaic, CfaChannel, ColorDomain, PlanarImage,
};
use crate::Result;

/// Mirror index without repeating the edge sample. For even `n` this keeps
/// the CFA parity of the index.
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let r = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    r.clamp(0, n - 1) as usize
}

struct Mosaic<'a> {
    data: &'a [f64],
    w: usize,
    h: usize,
}

impl Mosaic<'_> {
    fn at(&self, x: isize, y: isize) -> f64 {
        self.data[reflect(y, self.h) * self.w + reflect(x, self.w)]
    }
}

/// Green at a red or blue site by Hamilton-Adams style directional
/// interpolation. Directions whose gradients differ by at most `t_g` are
/// averaged.
fn green_at(m: &Mosaic, x: isize, y: isize, t_g: f64) -> f64 {
    let c = m.at(x, y);
    let (l, r, l2, r2) = (
        m.at(x - 1, y),
        m.at(x + 1, y),
        m.at(x - 2, y),
        m.at(x + 2, y),
    );
    let (u, d, u2, d2) = (
        m.at(x, y - 1),
        m.at(x, y + 1),
        m.at(x, y - 2),
        m.at(x, y + 2),
    );
    let lap_h = 2.0 * c - l2 - r2;
    let lap_v = 2.0 * c - u2 - d2;
    let grad_h = (l - r).abs() + lap_h.abs();
    let grad_v = (u - d).abs() + lap_v.abs();
    let est_h = 0.5 * (l + r) + 0.25 * lap_h;
    let est_v = 0.5 * (u + d) + 0.25 * lap_v;
    if (grad_h - grad_v).abs() <= t_g {
        0.5 * (est_h + est_v)
    } else if grad_h < grad_v {
        est_h
    } else {
        est_v
    }
}

/// Bilinear interpolation of a difference plane known only on the sites
/// `(sx + 2i, sy + 2j)`.
fn interpolate_lattice(diff: &[f64], w: usize, h: usize, sx: usize, sy: usize) -> Vec<f64> {
    let at = |x: isize, y: isize| diff[reflect(y, h) * w + reflect(x, w)];
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let (xi, yi) = (x as isize, y as isize);
            let col = x % 2 == sx;
            let row = y % 2 == sy;
            out[y * w + x] = match (col, row) {
                (true, true) => at(xi, yi),
                (false, true) => 0.5 * (at(xi - 1, yi) + at(xi + 1, yi)),
                (true, false) => 0.5 * (at(xi, yi - 1) + at(xi, yi + 1)),
                (false, false) => {
                    0.25 * (at(xi - 1, yi - 1)
                        + at(xi + 1, yi - 1)
                        + at(xi - 1, yi + 1)
                        + at(xi + 1, yi + 1))
                }
            };
        }
    }
    out
}

fn median_filter(plane: &[f64], w: usize, h: usize, s: usize) -> Vec<f64> {
    let s = s as isize;
    let mut window = Vec::with_capacity(((2 * s + 1) * (2 * s + 1)) as usize);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            window.clear();
            for dy in -s..=s {
                let row = clamp_index(y as isize + dy, h) * w;
                for dx in -s..=s {
                    window.push(plane[row + clamp_index(x as isize + dx, w)]);
                }
            }
            let mid = window.len() / 2;
            let (_, m, _) = window.select_nth_unstable_by(mid, f64::total_cmp);
            out[y * w + x] = *m;
        }
    }
    out
}

/// Reconstructs linear RGB from the mosaic.
///
/// Green is interpolated along the flatter direction (threshold `t_g`) and
/// optionally softened by `zipper`; red and blue are bilinear in the color
/// difference to green. A chroma median of half-width `fc_window` blended at
/// `fc_strength` suppresses false color.
pub fn demosaic(m: &BayerMosaic, p: &BlockParams) -> Result<PlanarImage> {
    p.require(BlockId::Demosaic)?;
    let [t_g, fc_window, fc_strength, zipper] = *p.values();
    let (w, h) = (m.width(), m.height());
    let mos = Mosaic {
        data: m.data(),
        w,
        h,
    };

    let mut green = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            green[y * w + x] = if m.channel_at(x, y) == CfaChannel::Green {
                m.get(x, y)
            } else {
                green_at(&mos, x as isize, y as isize, t_g)
            };
        }
    }
    if zipper > 0.0 {
        let blur = convolve_separable(&green, w, h, &[0.25, 0.5, 0.25]);
        for (g, b) in green.iter_mut().zip(&blur) {
            *g += zipper * (b - *g);
        }
    }

    let mut planes = [vec![0.0; w * h], green, vec![0.0; w * h]];
    for ch in [CfaChannel::Red, CfaChannel::Blue] {
        let (sx, sy) = m.pattern().site_of(ch);
        let mut diff = vec![0.0; w * h];
        for y in (sy..h).step_by(2) {
            for x in (sx..w).step_by(2) {
                let i = y * w + x;
                diff[i] = m.data()[i] - planes[1][i];
            }
        }
        let full = interpolate_lattice(&diff, w, h, sx, sy);
        let plane: Vec<f64> = full.iter().zip(&planes[1]).map(|(d, g)| g + d).collect();
        planes[ch as usize] = plane;
    }

    let s = fc_window.round() as usize;
    if s > 0 && fc_strength > 0.0 {
        let g = planes[1].clone();
        for c in [0, 2] {
            let chroma: Vec<f64> = planes[c].iter().zip(&g).map(|(v, g)| v - g).collect();
            let med = median_filter(&chroma, w, h, s);
            for (i, v) in planes[c].iter_mut().enumerate() {
                *v = g[i] + chroma[i] + fc_strength * (med[i] - chroma[i]);
            }
        }
    }
    let [r, g, b] = planes;
    PlanarImage::from_planes(w, h, ColorDomain::LinearRgb, &[&r, &g, &b])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{bayer_subsample, CfaPattern};

    fn params(t_g: f64, s: f64, lambda: f64, z: f64) -> BlockParams {
        BlockParams::new(BlockId::Demosaic, [t_g, s, lambda, z]).unwrap()
    }

    fn gray_rgb(w: usize, h: usize, f: impl Fn(usize, usize) -> f64) -> PlanarImage {
        let p: Vec<f64> = (0..w * h).map(|i| f(i % w, i / w)).collect();
        PlanarImage::from_planes(w, h, ColorDomain::LinearRgb, &[&p, &p, &p]).unwrap()
    }

    #[test]
    fn reflect_keeps_parity() {
        for i in -4..12isize {
            assert_eq!(reflect(i, 8) as isize % 2, i.rem_euclid(2));
        }
    }

    #[test]
    fn constant_gray_is_exact() {
        for pattern in CfaPattern::ALL {
            let m = BayerMosaic::filled(12, 10, pattern, 0.42).unwrap();
            for p in [
                params(0.0, 0.0, 0.0, 0.0),
                params(0.5, 2.0, 1.0, 1.0),
                params(0.1, 1.0, 0.5, 0.3),
            ] {
                let rgb = demosaic(&m, &p).unwrap();
                assert!(rgb.data().iter().all(|&v| v == 0.42));
            }
        }
    }

    #[test]
    fn achromatic_ramp_interior() {
        let img = gray_rgb(32, 32, |x, y| 0.1 + 0.02 * x as f64 + 0.005 * y as f64);
        for pattern in CfaPattern::ALL {
            let m = bayer_subsample(&img, pattern).unwrap();
            for p in [params(0.0, 0.0, 0.0, 0.0), params(0.3, 1.0, 0.5, 0.5)] {
                let rgb = demosaic(&m, &p).unwrap();
                for c in 0..3 {
                    for y in 3..29 {
                        for x in 3..29 {
                            assert!((rgb.get(c, x, y) - img.get(c, x, y)).abs() < 1e-3);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn suppression_disabled_matches_plain() {
        let img = gray_rgb(
            16,
            16,
            |x, y| if (x / 3 + y / 5) % 2 == 0 { 0.2 } else { 0.7 },
        );
        let m = bayer_subsample(&img, CfaPattern::Rggb).unwrap();
        let plain = demosaic(&m, &params(0.1, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(demosaic(&m, &params(0.1, 0.0, 0.8, 0.0)).unwrap(), plain);
        assert_eq!(demosaic(&m, &params(0.1, 2.0, 0.0, 0.0)).unwrap(), plain);
        assert_ne!(demosaic(&m, &params(0.1, 1.0, 1.0, 0.0)).unwrap(), plain);
    }

    #[test]
    fn false_color_suppression_reduces_chroma_on_gray_edges() {
        let img = gray_rgb(32, 32, |x, y| if (x + y / 2) % 7 < 3 { 0.15 } else { 0.85 });
        let m = bayer_subsample(&img, CfaPattern::Rggb).unwrap();
        let chroma = |rgb: &PlanarImage| -> f64 {
            (0..32 * 32)
                .map(|i| {
                    (rgb.channel(0)[i] - rgb.channel(1)[i]).abs()
                        + (rgb.channel(2)[i] - rgb.channel(1)[i]).abs()
                })
                .sum()
        };
        let plain = chroma(&demosaic(&m, &params(0.1, 0.0, 0.0, 0.0)).unwrap());
        let suppressed = chroma(&demosaic(&m, &params(0.1, 2.0, 1.0, 0.0)).unwrap());
        assert!(suppressed < plain);
    }

    #[test]
    fn green_sites_untouched_without_zipper() {
        let img = gray_rgb(16, 16, |x, y| ((x * 7 + y * 3) % 11) as f64 / 11.0);
        let m = bayer_subsample(&img, CfaPattern::Gbrg).unwrap();
        let rgb = demosaic(&m, &params(0.2, 0.0, 0.0, 0.0)).unwrap();
        for y in 0..16 {
            for x in 0..16 {
                if m.channel_at(x, y) == CfaChannel::Green {
                    assert_eq!(rgb.get(1, x, y), m.get(x, y));
                }
                let c = m.channel_at(x, y) as usize;
                assert!((rgb.get(c, x, y) - m.get(x, y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_block() {
        let m = BayerMosaic::filled(4, 4, CfaPattern::Rggb, 0.3).unwrap();
        assert!(demosaic(&m, &BlockParams::passthrough(BlockId::BayerNr)).is_err());
    }
}

//! BT.601 full-range RGB <-> YUV.

use super::{ColorDomain, PlanarImage};
use crate::Result;

const KR: f64 = 0.299;
const KG: f64 = 0.587;
const KB: f64 = 0.114;
const KU: f64 = 0.564;
const KV: f64 = 0.713;

#[inline]
fn to_yuv(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let y = KR * r + KG * g + KB * b;
    (y, KU * (b - y), KV * (r - y))
}

#[inline]
fn to_rgb(y: f64, u: f64, v: f64) -> (f64, f64, f64) {
    let r = y + v / KV;
    let b = y + u / KU;
    let g = (y - KR * r - KB * b) / KG;
    (r, g, b)
}

/// Luma of a linear-RGB image as a single plane.
pub fn luma(rgb: &PlanarImage) -> Result<PlanarImage> {
    rgb.require_domain(ColorDomain::LinearRgb)?;
    let (r, g, b) = (rgb.channel(0), rgb.channel(1), rgb.channel(2));
    let data = (0..rgb.plane_len())
        .map(|i| KR * r[i] + KG * g[i] + KB * b[i])
        .collect();
    Ok(PlanarImage::from_raw(
        rgb.width(),
        rgb.height(),
        ColorDomain::Plane,
        data,
    ))
}

pub fn rgb_to_yuv(rgb: &PlanarImage) -> Result<PlanarImage> {
    rgb.require_domain(ColorDomain::LinearRgb)?;
    let n = rgb.plane_len();
    let mut out = vec![0.0; 3 * n];
    let (r, g, b) = (rgb.channel(0), rgb.channel(1), rgb.channel(2));
    for i in 0..n {
        let (y, u, v) = to_yuv(r[i], g[i], b[i]);
        out[i] = y;
        out[n + i] = u;
        out[2 * n + i] = v;
    }
    Ok(PlanarImage::from_raw(
        rgb.width(),
        rgb.height(),
        ColorDomain::Yuv,
        out,
    ))
}

/// Inverse of [`rgb_to_yuv`]. No clamping is applied.
pub fn yuv_to_rgb(yuv: &PlanarImage) -> Result<PlanarImage> {
    yuv.require_domain(ColorDomain::Yuv)?;
    let n = yuv.plane_len();
    let mut out = vec![0.0; 3 * n];
    let (y, u, v) = (yuv.channel(0), yuv.channel(1), yuv.channel(2));
    for i in 0..n {
        let (r, g, b) = to_rgb(y[i], u[i], v[i]);
        out[i] = r;
        out[n + i] = g;
        out[2 * n + i] = b;
    }
    Ok(PlanarImage::from_raw(
        yuv.width(),
        yuv.height(),
        ColorDomain::LinearRgb,
        out,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gray_is_achromatic() {
        let img = PlanarImage::filled(3, 2, ColorDomain::LinearRgb, 0.42);
        let yuv = rgb_to_yuv(&img).unwrap();
        for i in 0..6 {
            assert!((yuv.channel(0)[i] - 0.42).abs() < 1e-15);
            assert!(yuv.channel(1)[i].abs() < 1e-15);
            assert!(yuv.channel(2)[i].abs() < 1e-15);
        }
    }

    #[test]
    fn pure_red() {
        let img = PlanarImage::new(1, 1, ColorDomain::LinearRgb, vec![1.0, 0.0, 0.0]).unwrap();
        let yuv = rgb_to_yuv(&img).unwrap();
        assert!((yuv.data()[0] - 0.299).abs() < 1e-15);
        assert!((yuv.data()[1] - 0.564 * -0.299).abs() < 1e-15);
        assert!((yuv.data()[2] - 0.713 * 0.701).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let img = PlanarImage::new(
            16,
            16,
            ColorDomain::LinearRgb,
            (0..768).map(|_| rng.random()).collect(),
        )
        .unwrap();
        let back = yuv_to_rgb(&rgb_to_yuv(&img).unwrap()).unwrap();
        let max = img
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(max < 1e-6, "max round-trip error {max}");
    }

    #[test]
    fn wrong_domain_rejected() {
        let img = PlanarImage::filled(2, 2, ColorDomain::Yuv, 0.0);
        assert!(rgb_to_yuv(&img).is_err());
        let img = PlanarImage::filled(2, 2, ColorDomain::LinearRgb, 0.0);
        assert!(yuv_to_rgb(&img).is_err());
    }
}

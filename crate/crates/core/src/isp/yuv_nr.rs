use super::{BlockId, BlockParams};
use crate::imaging::{clamp_index, ColorDomain, PlanarImage};
use crate::Result;

/// One separable pass of a bilateral filter along x (`horizontal`) or y.
/// Range weights compare `guide` values; a `None` guide filters with the
/// spatial weights alone.
fn bilateral_pass(
    src: &[f64],
    guide: &[f64],
    w: usize,
    h: usize,
    spatial: &[f64],
    range_sigma: f64,
    horizontal: bool,
) -> Vec<f64> {
    let r = (spatial.len() / 2) as isize;
    let inv = -0.5 / (range_sigma * range_sigma);
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let (v, gc) = (src[i], guide[i]);
            let (mut num, mut den) = (0.0, 0.0);
            for (k, &s) in spatial.iter().enumerate() {
                let off = k as isize - r;
                let q = if horizontal {
                    y * w + clamp_index(x as isize + off, w)
                } else {
                    clamp_index(y as isize + off, h) * w + x
                };
                let dg = guide[q] - gc;
                let wt = s * (dg * dg * inv).exp();
                num += wt * (src[q] - v);
                den += wt;
            }
            out[i] = v + num / den;
        }
    }
    out
}

/// Luma bilateral (range `sigma_y`) and chroma bilateral guided by luma
/// (range `sigma_c` on luma differences), both with spatial `sigma_s`, run
/// separably along x then y and blended with the input by `strength`.
/// A zero range sigma leaves that component unfiltered.
pub fn yuv_nr(img: &PlanarImage, p: &BlockParams) -> Result<PlanarImage> {
    p.require(BlockId::YuvNr)?;
    img.require_domain(ColorDomain::Yuv)?;
    let [sigma_y, sigma_c, sigma_s, beta] = *p.values();
    if beta == 0.0 {
        return Ok(img.clone());
    }
    let (w, h) = (img.width(), img.height());
    let r = (2.0 * sigma_s).ceil() as isize;
    let spatial: Vec<f64> = (-r..=r)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma_s * sigma_s)).exp())
        .collect();
    let y0 = img.channel(0);
    let mut planes = [
        y0.to_vec(),
        img.channel(1).to_vec(),
        img.channel(2).to_vec(),
    ];

    if sigma_y > 1e-12 {
        let pass = bilateral_pass(y0, y0, w, h, &spatial, sigma_y, true);
        let filtered = bilateral_pass(&pass, &pass, w, h, &spatial, sigma_y, false);
        for (v, f) in planes[0].iter_mut().zip(&filtered) {
            *v += beta * (f - *v);
        }
    }
    if sigma_c > 1e-12 {
        for plane in &mut planes[1..] {
            let pass = bilateral_pass(plane, y0, w, h, &spatial, sigma_c, true);
            let filtered = bilateral_pass(&pass, y0, w, h, &spatial, sigma_c, false);
            for (v, f) in plane.iter_mut().zip(&filtered) {
                *v += beta * (f - *v);
            }
        }
    }
    let [y, u, v] = planes;
    PlanarImage::from_planes(w, h, ColorDomain::Yuv, &[&y, &u, &v])
}

use super::{BlockId, BlockParams};
use crate::imaging::{clamp_index, convolve_separable, gaussian_taps, ColorDomain, PlanarImage};
use crate::Result;

/// Unsharp mask on the luma channel with coring and an overshoot clamp to
/// the 3×3 input range widened by `overshoot`. Chroma is passed through.
pub fn sharpen(img: &PlanarImage, p: &BlockParams) -> Result<PlanarImage> {
    p.require(BlockId::Sharpen)?;
    img.require_domain(ColorDomain::Yuv)?;
    let [sigma_u, coring, gain, overshoot] = *p.values();
    if gain == 0.0 {
        return Ok(img.clone());
    }
    let (w, h) = (img.width(), img.height());
    let y = img.channel(0);
    let taps = gaussian_taps(sigma_u, (3.0 * sigma_u).ceil() as usize);
    let blur = convolve_separable(y, w, h, &taps);
    let mut out = img.data().to_vec();
    for py in 0..h {
        for px in 0..w {
            let i = py * w + px;
            let d = y[i] - blur[i];
            let cored = d.signum() * (d.abs() - coring).max(0.0);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for dy in -1..=1 {
                let row = clamp_index(py as isize + dy, h) * w;
                for dx in -1..=1 {
                    let v = y[row + clamp_index(px as isize + dx, w)];
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            out[i] = (y[i] + gain * cored).clamp(lo - overshoot, hi + overshoot);
        }
    }
    PlanarImage::new(w, h, ColorDomain::Yuv, out)
}

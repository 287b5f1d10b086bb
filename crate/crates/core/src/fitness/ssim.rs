use crate::imaging::{gaussian_taps, luma, ColorDomain, PlanarImage};
use crate::{Error, Result};

/// Scale weights, finest first.
pub const MS_SSIM_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];

const WINDOW: usize = 11;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

/// Single luminance-like plane: Y for RGB and YUV, the plane itself
/// otherwise.
fn gray(img: &PlanarImage) -> Result<PlanarImage> {
    match img.domain() {
        ColorDomain::Plane => Ok(img.clone()),
        ColorDomain::LinearRgb => luma(img),
        ColorDomain::Yuv => Ok(img.extract_channel(0)),
    }
}

/// Valid-region separable filtering.
fn filter_valid(p: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let n = taps.len();
    let (ow, oh) = (w + 1 - n, h + 1 - n);
    let mut tmp = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            tmp[y * ow + x] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * p[y * w + x + k])
                .sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * tmp[(y + k) * ow + x])
                .sum();
        }
    }
    out
}

/// Mean SSIM and mean contrast-structure term of two planes.
fn ssim_terms(a: &[f64], b: &[f64], w: usize, h: usize) -> Result<(f64, f64)> {
    if w < WINDOW || h < WINDOW {
        return Err(Error::InvalidImage(format!(
            "{w}x{h} is smaller than the {WINDOW}x{WINDOW} SSIM window"
        )));
    }
    let taps = gaussian_taps(1.5, WINDOW / 2);
    let prod = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).collect::<Vec<_>>();
    let mu_a = filter_valid(a, w, h, &taps);
    let mu_b = filter_valid(b, w, h, &taps);
    let aa = filter_valid(&prod(a, a), w, h, &taps);
    let bb = filter_valid(&prod(b, b), w, h, &taps);
    let ab = filter_valid(&prod(a, b), w, h, &taps);
    let (c1, c2) = (K1 * K1, K2 * K2);
    let (mut s_sum, mut cs_sum) = (0.0, 0.0);
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = aa[i] - ma * ma;
        let vb = bb[i] - mb * mb;
        let cov = ab[i] - ma * mb;
        let cs = (2.0 * cov + c2) / (va + vb + c2);
        s_sum += (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1) * cs;
        cs_sum += cs;
    }
    let n = mu_a.len() as f64;
    Ok((s_sum / n, cs_sum / n))
}

fn prepare(a: &PlanarImage, b: &PlanarImage) -> Result<(PlanarImage, PlanarImage)> {
    if (a.width(), a.height(), a.domain()) != (b.width(), b.height(), b.domain()) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} {} vs {}x{} {}",
            a.width(),
            a.height(),
            a.domain().name(),
            b.width(),
            b.height(),
            b.domain().name()
        )));
    }
    Ok((gray(a)?, gray(b)?))
}

/// Mean SSIM over the valid region, 11×11 Gaussian window (σ = 1.5),
/// `K1 = 0.01`, `K2 = 0.03`, dynamic range 1. Color inputs compare luma.
pub fn ssim(a: &PlanarImage, b: &PlanarImage) -> Result<f64> {
    let (ga, gb) = prepare(a, b)?;
    Ok(ssim_terms(ga.data(), gb.data(), ga.width(), ga.height())?.0)
}

fn downsample(p: &[f64], w: usize, h: usize) -> (Vec<f64>, usize, usize) {
    let (ow, oh) = (w / 2, h / 2);
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let i = 2 * y * w + 2 * x;
            out[y * ow + x] = 0.25 * (p[i] + p[i + 1] + p[i + w] + p[i + w + 1]);
        }
    }
    (out, ow, oh)
}

/// Multi-scale SSIM with 2×2 average downsampling between scales.
///
/// Uses as many of the five scales as keep the coarsest at least 11 pixels
/// on its short side, with weights renormalized to sum 1. Negative terms are
/// clamped to 0, so the result lies in `[0, 1]`.
pub fn ms_ssim(a: &PlanarImage, b: &PlanarImage) -> Result<f64> {
    let (ga, gb) = prepare(a, b)?;
    let (mut w, mut h) = (ga.width(), ga.height());
    let mut scales = 0;
    while scales < MS_SSIM_WEIGHTS.len() && w.min(h) >> scales >= WINDOW {
        scales += 1;
    }
    if scales == 0 {
        return Err(Error::InvalidImage(format!(
            "{w}x{h} is smaller than the {WINDOW}x{WINDOW} SSIM window"
        )));
    }
    let total: f64 = MS_SSIM_WEIGHTS[..scales].iter().sum();
    let (mut pa, mut pb) = (ga.into_data(), gb.into_data());
    let mut result = 1.0;
    for (s, weight) in MS_SSIM_WEIGHTS[..scales].iter().enumerate() {
        let (full, cs) = ssim_terms(&pa, &pb, w, h)?;
        let term = if s + 1 == scales { full } else { cs };
        result *= term.max(0.0).powf(weight / total);
        if s + 1 < scales {
            let (na, nw, nh) = downsample(&pa, w, h);
            pb = downsample(&pb, w, h).0;
            pa = na;
            (w, h) = (nw, nh);
        }
    }
    Ok(result)
}

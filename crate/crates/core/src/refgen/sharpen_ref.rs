//! Edge-directed unsharp-mask reference for the sharpening block.

use serde::{Deserialize, Serialize};

use super::FlatMask;
use crate::imaging::{
    box_kernel, convolve2d, gaussian_kernel, scharr_gradients, ColorDomain, Kernel2D, PlanarImage,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SharpenRefConfig {
    /// Overall sharpness.
    pub alpha: f64,
    pub sigma_usm: f64,
    pub usm_size: usize,
    pub sigma_ndir: f64,
    pub box_size: usize,
    /// Fraction of lowest-gradient pixels used as the flat region when no
    /// mask is known.
    pub flat_percentile: f64,
}

impl Default for SharpenRefConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            sigma_usm: 2.5,
            usm_size: 9,
            sigma_ndir: 0.5,
            box_size: 9,
            flat_percentile: 0.1,
        }
    }
}

impl SharpenRefConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "alpha {} must be >= 0",
                self.alpha
            )));
        }
        if !(self.sigma_ndir > 0.0) {
            return Err(Error::InvalidConfig("sigma_ndir must be positive".into()));
        }
        if !(self.flat_percentile > 0.0 && self.flat_percentile < 1.0) {
            return Err(Error::InvalidConfig(
                "flat_percentile must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Intermediate fields of the reference construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpenFields {
    /// Horizontal share of the gradient, `|G_H| / (|G_H| + |G_V|)`.
    pub w: Vec<f64>,
    pub d_dir: Vec<f64>,
    pub d_ndir: Vec<f64>,
    pub w_ndir: Vec<f64>,
    /// Local detail energy `K ⊗ |D_ndir|`.
    pub energy: Vec<f64>,
    pub sigma_alpha: f64,
    pub alpha_ndir: Vec<f64>,
    /// Detail added per unit α: `α_ndir·(w_ndir·D_ndir + (1 − w_ndir)·D_dir)`.
    pub detail: Vec<f64>,
}

fn require_plane(img: &PlanarImage) -> Result<()> {
    img.require_domain(ColorDomain::Plane)
}

/// Computes every intermediate field for the luma plane `fused_y`.
pub fn sharpening_fields(
    fused_y: &PlanarImage,
    cfg: &SharpenRefConfig,
    flat: &FlatMask,
) -> Result<SharpenFields> {
    require_plane(fused_y)?;
    cfg.validate()?;
    if flat.width() != fused_y.width() || flat.height() != fused_y.height() {
        return Err(Error::ShapeMismatch(format!(
            "flat mask {}x{} vs image {}x{}",
            flat.width(),
            flat.height(),
            fused_y.width(),
            fused_y.height()
        )));
    }
    let i = fused_y.data();
    let (gh, gv) = scharr_gradients(fused_y)?;
    let d_h = Kernel2D::column(&[-1.0, 2.0, -1.0])?;
    let dh_i = convolve2d(fused_y, &d_h)?;
    let dv_i = convolve2d(fused_y, &d_h.transposed())?;
    let blur = convolve2d(fused_y, &gaussian_kernel(cfg.usm_size, cfg.sigma_usm)?)?;

    let n = i.len();
    let mut w = vec![0.0; n];
    let mut w_ndir = vec![0.0; n];
    let mut d_dir = vec![0.0; n];
    let mut d_ndir = vec![0.0; n];
    let mut abs_ndir = vec![0.0; n];
    let s2 = cfg.sigma_ndir * cfg.sigma_ndir;
    for p in 0..n {
        let (h, v) = (gh.data()[p].abs(), gv.data()[p].abs());
        w[p] = if h < 1e-12 && v < 1e-12 {
            0.5
        } else {
            h / (h + v)
        };
        d_dir[p] = w[p] * dh_i.data()[p] + (1.0 - w[p]) * dv_i.data()[p];
        d_ndir[p] = i[p] - blur.data()[p];
        abs_ndir[p] = d_ndir[p].abs();
        let m = h.min(v);
        w_ndir[p] = (-m * m / s2).exp();
    }
    let abs_img = PlanarImage::new(
        fused_y.width(),
        fused_y.height(),
        ColorDomain::Plane,
        abs_ndir,
    )?;
    let energy = convolve2d(&abs_img, &box_kernel(cfg.box_size)?)?.into_data();

    let flat_e: Vec<f64> = energy
        .iter()
        .zip(flat.data())
        .filter(|(_, &f)| f)
        .map(|(&e, _)| e)
        .collect();
    let count = flat_e.len() as f64;
    let mean = flat_e.iter().sum::<f64>() / count;
    let std = (flat_e.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / count).sqrt();
    let sigma_alpha = (mean + std).max(1e-6);

    let alpha_ndir: Vec<f64> = energy
        .iter()
        .map(|e| 1.0 - (-e / (sigma_alpha * sigma_alpha)).exp())
        .collect();
    let detail = (0..n)
        .map(|p| alpha_ndir[p] * (w_ndir[p] * d_ndir[p] + (1.0 - w_ndir[p]) * d_dir[p]))
        .collect();
    Ok(SharpenFields {
        w,
        d_dir,
        d_ndir,
        w_ndir,
        energy,
        sigma_alpha,
        alpha_ndir,
        detail,
    })
}

/// `I + α·detail`. With `α = 0` the input is returned unchanged.
pub fn sharpening_reference(
    fused_y: &PlanarImage,
    cfg: &SharpenRefConfig,
    flat: &FlatMask,
) -> Result<PlanarImage> {
    let fields = sharpening_fields(fused_y, cfg, flat)?;
    if cfg.alpha == 0.0 {
        return Ok(fused_y.clone());
    }
    let data = fused_y
        .data()
        .iter()
        .zip(&fields.detail)
        .map(|(v, d)| v + cfg.alpha * d)
        .collect();
    PlanarImage::new(fused_y.width(), fused_y.height(), ColorDomain::Plane, data)
}

/// Flat mask made of the `flat_percentile` fraction of pixels with the
/// smallest Scharr gradient magnitude.
pub fn flat_mask_from_gradients(plane: &PlanarImage, flat_percentile: f64) -> Result<FlatMask> {
    require_plane(plane)?;
    if !(flat_percentile > 0.0 && flat_percentile < 1.0) {
        return Err(Error::InvalidConfig(
            "flat_percentile must lie in (0, 1)".into(),
        ));
    }
    let (gh, gv) = scharr_gradients(plane)?;
    let mag: Vec<f64> = gh
        .data()
        .iter()
        .zip(gv.data())
        .map(|(h, v)| h.hypot(*v))
        .collect();
    let keep = ((mag.len() as f64 * flat_percentile).ceil() as usize).clamp(1, mag.len());
    let mut order: Vec<usize> = (0..mag.len()).collect();
    order.sort_by(|&a, &b| mag[a].total_cmp(&mag[b]).then(a.cmp(&b)));
    let mut mask = vec![false; mag.len()];
    for &p in &order[..keep] {
        mask[p] = true;
    }
    FlatMask::new(plane.width(), plane.height(), mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn step(size: usize) -> PlanarImage {
        PlanarImage::from_fn(size, size, |x, _| if x < size / 2 { 0.2 } else { 0.8 }).unwrap()
    }

    fn left_mask(size: usize, cols: usize) -> FlatMask {
        FlatMask::new(
            size,
            size,
            (0..size * size).map(|p| p % size < cols).collect(),
        )
        .unwrap()
    }

    fn cfg(alpha: f64) -> SharpenRefConfig {
        SharpenRefConfig {
            alpha,
            ..Default::default()
        }
    }

    #[test]
    fn alpha_zero_is_identity() {
        let img = step(32);
        assert_eq!(
            sharpening_reference(&img, &cfg(0.0), &left_mask(32, 4)).unwrap(),
            img
        );
    }

    #[test]
    fn constant_image_is_fixed() {
        let img = PlanarImage::filled(24, 24, ColorDomain::Plane, 0.37);
        let out = sharpening_reference(&img, &cfg(3.0), &left_mask(24, 4)).unwrap();
        for (a, b) in out.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn step_edge_band() {
        let img = step(32);
        let out = sharpening_reference(&img, &cfg(1.0), &left_mask(32, 4)).unwrap();
        for y in 0..32 {
            for x in 0..32 {
                let d = (out.get(0, x, y) - img.get(0, x, y)).abs();
                if x == 15 || x == 16 {
                    assert!(d > 1e-3, "({x},{y}) {d}");
                }
                if !(6..=25).contains(&x) {
                    assert!(d < 1e-6, "({x},{y}) {d}");
                }
            }
        }
        // Overshoot on the bright side, undershoot on the dark side.
        assert!(out.get(0, 16, 10) > 0.8 && out.get(0, 15, 10) < 0.2);
    }

    /// Straightforward re-evaluation of the formula chain at one pixel with
    /// explicit loops and clamped indexing.
    #[test]
    fn matches_direct_evaluation() {
        let size = 20;
        let img = PlanarImage::from_fn(size, size, |x, y| {
            0.5 + 0.3 * ((x as f64 * 0.7).sin() * (y as f64 * 0.3).cos())
                + if x > 12 { 0.1 } else { 0.0 }
        })
        .unwrap();
        let mask = left_mask(size, 3);
        let f = sharpening_fields(&img, &cfg(1.0), &mask).unwrap();
        let at = |x: isize, y: isize| {
            let c = |v: isize| v.clamp(0, size as isize - 1) as usize;
            img.get(0, c(x), c(y))
        };
        let scharr = [[-3.0, 0.0, 3.0], [-10.0, 0.0, 10.0], [-3.0, 0.0, 3.0]];
        let ndir_at = |x: isize, y: isize| {
            let mut acc = 0.0;
            let mut norm = 0.0;
            for dy in -4..=4isize {
                for dx in -4..=4isize {
                    let g = (-((dx * dx + dy * dy) as f64) / (2.0 * 2.5 * 2.5)).exp();
                    acc += g * at(x + dx, y + dy);
                    norm += g;
                }
            }
            at(x, y) - acc / norm
        };
        for &(x, y) in &[(5isize, 5isize), (12, 9), (13, 2), (0, 19), (17, 17)] {
            let (mut gh, mut gv) = (0.0, 0.0);
            #[allow(clippy::needless_range_loop)]
            for j in 0..3 {
                for i in 0..3 {
                    gh += scharr[j][i] / 32.0 * at(x + i as isize - 1, y + j as isize - 1);
                    gv += scharr[i][j] / 32.0 * at(x + i as isize - 1, y + j as isize - 1);
                }
            }
            let w = gh.abs() / (gh.abs() + gv.abs());
            let dh = 2.0 * at(x, y) - at(x, y - 1) - at(x, y + 1);
            let dv = 2.0 * at(x, y) - at(x - 1, y) - at(x + 1, y);
            let d_dir = w * dh + (1.0 - w) * dv;
            let d_ndir = ndir_at(x, y);
            let w_ndir = (-(gh.abs().min(gv.abs())).powi(2) / 0.25).exp();
            let mut e = 0.0;
            for dy in -4..=4isize {
                for dx in -4..=4isize {
                    let c = |v: isize| v.clamp(0, size as isize - 1);
                    e += ndir_at(c(x + dx), c(y + dy)).abs() / 81.0;
                }
            }
            let a = 1.0 - (-e / (f.sigma_alpha * f.sigma_alpha)).exp();
            let expected = a * (w_ndir * d_ndir + (1.0 - w_ndir) * d_dir);
            let p = y as usize * size + x as usize;
            assert!((f.w[p] - w).abs() < 1e-12);
            assert!((f.d_dir[p] - d_dir).abs() < 1e-12);
            assert!((f.d_ndir[p] - d_ndir).abs() < 1e-12);
            assert!((f.energy[p] - e).abs() < 1e-12);
            assert!((f.detail[p] - expected).abs() < 1e-9, "({x},{y})");
        }
    }

    #[test]
    fn sigma_alpha_floor() {
        let img = step(32);
        let f = sharpening_fields(&img, &cfg(1.0), &left_mask(32, 3)).unwrap();
        assert_eq!(f.sigma_alpha, 1e-6);
    }

    #[test]
    fn mask_shape_checked() {
        let img = step(32);
        assert!(sharpening_reference(&img, &cfg(1.0), &left_mask(16, 3)).is_err());
    }

    #[test]
    fn gradient_fallback_selects_flat_side() {
        let img = step(32);
        let mask = flat_mask_from_gradients(&img, 0.25).unwrap();
        assert_eq!(mask.count(), 256);
        assert!((0..32).all(|y| !mask.is_flat(15, y) && !mask.is_flat(16, y)));
    }

    proptest! {
        #[test]
        fn alpha_linearity_and_ranges(seed in 0u64..1000, alpha in 0.1f64..3.0) {
            let img = PlanarImage::from_fn(16, 16, |x, y| {
                let h = (x as u64 * 73 + y as u64 * 151 + seed * 7919) % 1000;
                h as f64 / 1000.0
            }).unwrap();
            let mask = left_mask(16, 4);
            let f = sharpening_fields(&img, &cfg(alpha), &mask).unwrap();
            prop_assert!(f.w.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert!(f.w_ndir.iter().all(|v| *v > 0.0 && *v <= 1.0));
            prop_assert!(f.alpha_ndir.iter().all(|v| (0.0..1.0).contains(v)));
            let one = sharpening_reference(&img, &cfg(alpha), &mask).unwrap();
            let two = sharpening_reference(&img, &cfg(2.0 * alpha), &mask).unwrap();
            for p in 0..256 {
                let i = img.data()[p];
                prop_assert!(((two.data()[p] - i) - 2.0 * (one.data()[p] - i)).abs() < 1e-12);
            }
        }
    }
}

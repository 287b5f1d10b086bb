use serde::{Deserialize, Serialize};

use super::{ColorDomain, PlanarImage};
use crate::{Error, Result};

/// Color sampled at a CFA site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfaChannel {
    Red = 0,
    Green = 1,
    Blue = 2,
}

/// 2x2 Bayer layout, named by the top-left quad read row by row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum CfaPattern {
    #[default]
    #[serde(rename = "RGGB")]
    Rggb,
    #[serde(rename = "BGGR")]
    Bggr,
    #[serde(rename = "GRBG")]
    Grbg,
    #[serde(rename = "GBRG")]
    Gbrg,
}

impl CfaPattern {
    pub const ALL: [CfaPattern; 4] = [
        CfaPattern::Rggb,
        CfaPattern::Bggr,
        CfaPattern::Grbg,
        CfaPattern::Gbrg,
    ];

    /// Channel sampled at pixel `(x, y)`; depends only on the parities.
    #[inline]
    pub fn channel_at(self, x: usize, y: usize) -> CfaChannel {
        use CfaChannel::*;
        let quad = match self {
            CfaPattern::Rggb => [Red, Green, Green, Blue],
            CfaPattern::Bggr => [Blue, Green, Green, Red],
            CfaPattern::Grbg => [Green, Red, Blue, Green],
            CfaPattern::Gbrg => [Green, Blue, Red, Green],
        };
        quad[(y & 1) * 2 + (x & 1)]
    }

    /// Offset `(x, y)` of the given non-green channel inside the 2x2 quad.
    pub fn site_of(self, channel: CfaChannel) -> (usize, usize) {
        for y in 0..2 {
            for x in 0..2 {
                if self.channel_at(x, y) == channel {
                    return (x, y);
                }
            }
        }
        unreachable!("every pattern samples every channel")
    }

    pub fn name(self) -> &'static str {
        match self {
            CfaPattern::Rggb => "RGGB",
            CfaPattern::Bggr => "BGGR",
            CfaPattern::Grbg => "GRBG",
            CfaPattern::Gbrg => "GBRG",
        }
    }
}

/// Single-plane CFA image with linear samples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BayerMosaic {
    width: usize,
    height: usize,
    pattern: CfaPattern,
    data: Vec<f64>,
}

impl BayerMosaic {
    pub fn new(width: usize, height: usize, pattern: CfaPattern, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || !width.is_multiple_of(2) || !height.is_multiple_of(2) {
            return Err(Error::OddDimensions(width, height));
        }
        if data.len() != width * height {
            return Err(Error::InvalidImage(format!(
                "mosaic expects {} samples, got {}",
                width * height,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            width,
            height,
            pattern,
            data,
        })
    }

    pub(crate) fn from_raw(
        width: usize,
        height: usize,
        pattern: CfaPattern,
        data: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            pattern,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, pattern: CfaPattern, value: f64) -> Result<Self> {
        Self::new(width, height, pattern, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pattern(&self) -> CfaPattern {
        self.pattern
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn channel_at(&self, x: usize, y: usize) -> CfaChannel {
        self.pattern.channel_at(x, y)
    }

    /// The mosaic viewed as a single-plane image (for metrics and file output).
    pub fn to_plane(&self) -> PlanarImage {
        PlanarImage::from_raw(
            self.width,
            self.height,
            ColorDomain::Plane,
            self.data.clone(),
        )
    }

    pub(crate) fn same_geometry(&self, other: &BayerMosaic) -> bool {
        self.width == other.width && self.height == other.height && self.pattern == other.pattern
    }

    pub(crate) fn check_same_geometry(&self, other: &BayerMosaic) -> Result<()> {
        if !self.same_geometry(other) {
            return Err(Error::ShapeMismatch(format!(
                "mosaic {}x{} {} vs {}x{} {}",
                self.width,
                self.height,
                self.pattern.name(),
                other.width,
                other.height,
                other.pattern.name()
            )));
        }
        Ok(())
    }

    pub(crate) fn with_data(&self, data: Vec<f64>) -> BayerMosaic {
        BayerMosaic::from_raw(self.width, self.height, self.pattern, data)
    }
}

/// Samples a linear-RGB image through the CFA: each output pixel keeps the
/// input channel its site records.
pub fn bayer_subsample(rgb: &PlanarImage, pattern: CfaPattern) -> Result<BayerMosaic> {
    rgb.require_domain(ColorDomain::LinearRgb)?;
    let (w, h) = (rgb.width(), rgb.height());
    if w % 2 != 0 || h % 2 != 0 {
        return Err(Error::OddDimensions(w, h));
    }
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            data.push(rgb.get(pattern.channel_at(x, y) as usize, x, y));
        }
    }
    Ok(BayerMosaic::from_raw(w, h, pattern, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn site_function_is_two_periodic() {
        for p in CfaPattern::ALL {
            for y in 0..6 {
                for x in 0..6 {
                    assert_eq!(p.channel_at(x, y), p.channel_at(x + 2, y));
                    assert_eq!(p.channel_at(x, y), p.channel_at(x, y + 2));
                }
            }
            let greens = (0..2)
                .flat_map(|y| (0..2).map(move |x| (x, y)))
                .filter(|&(x, y)| p.channel_at(x, y) == CfaChannel::Green)
                .count();
            assert_eq!(greens, 2);
        }
    }

    #[test]
    fn constant_gray_gives_constant_mosaic() {
        let rgb = PlanarImage::filled(4, 4, ColorDomain::LinearRgb, 0.3);
        let m = bayer_subsample(&rgb, CfaPattern::Gbrg).unwrap();
        assert!(m.data().iter().all(|&v| v == 0.3));
    }

    #[test]
    fn pure_red_rggb_lands_on_even_sites() {
        let mut data = vec![0.0; 4 * 4 * 3];
        data[..16].iter_mut().for_each(|v| *v = 1.0);
        let rgb = PlanarImage::new(4, 4, ColorDomain::LinearRgb, data).unwrap();
        let m = bayer_subsample(&rgb, CfaPattern::Rggb).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                let expected = if x % 2 == 0 && y % 2 == 0 { 1.0 } else { 0.0 };
                assert_eq!(m.get(x, y), expected);
            }
        }
    }

    #[test]
    fn random_rgb_matches_site_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Vec<f64> = (0..8 * 6 * 3).map(|_| rng.random()).collect();
        let rgb = PlanarImage::new(8, 6, ColorDomain::LinearRgb, data.clone()).unwrap();
        for p in CfaPattern::ALL {
            let m = bayer_subsample(&rgb, p).unwrap();
            for y in 0..6 {
                for x in 0..8 {
                    // Oracle: index the planar buffer directly.
                    let c = match p.name().as_bytes()[(y % 2) * 2 + (x % 2)] {
                        b'R' => 0,
                        b'G' => 1,
                        _ => 2,
                    };
                    assert_eq!(m.get(x, y), data[c * 48 + y * 8 + x]);
                }
            }
        }
    }

    #[test]
    fn odd_dimensions_rejected() {
        let rgb = PlanarImage::filled(5, 4, ColorDomain::LinearRgb, 0.1);
        assert!(matches!(
            bayer_subsample(&rgb, CfaPattern::Rggb),
            Err(Error::OddDimensions(5, 4))
        ));
        assert!(BayerMosaic::new(3, 2, CfaPattern::Rggb, vec![0.0; 6]).is_err());
    }
}

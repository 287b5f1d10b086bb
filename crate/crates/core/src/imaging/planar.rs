use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Color interpretation of a [`PlanarImage`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ColorDomain {
    LinearRgb,
    Yuv,
    Plane,
}

impl ColorDomain {
    pub fn channels(self) -> usize {
        match self {
            ColorDomain::LinearRgb | ColorDomain::Yuv => 3,
            ColorDomain::Plane => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ColorDomain::LinearRgb => "linear-RGB",
            ColorDomain::Yuv => "YUV",
            ColorDomain::Plane => "plane",
        }
    }
}

/// Channel-planar real-valued image, nominally in `[0, 1]`.
///
/// Samples are stored plane after plane, each plane row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarImage {
    width: usize,
    height: usize,
    domain: ColorDomain,
    data: Vec<f64>,
}

impl PlanarImage {
    /// Builds an image, checking the sample count and finiteness.
    pub fn new(width: usize, height: usize, domain: ColorDomain, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "degenerate dimensions {width}x{height}"
            )));
        }
        let expected = width * height * domain.channels();
        if data.len() != expected {
            return Err(Error::InvalidImage(format!(
                "expected {expected} samples, got {}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            width,
            height,
            domain,
            data,
        })
    }

    /// Internal constructor for operations that guarantee the invariants.
    pub(crate) fn from_raw(
        width: usize,
        height: usize,
        domain: ColorDomain,
        data: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(data.len(), width * height * domain.channels());
        debug_assert!(data.iter().all(|v| v.is_finite()));
        Self {
            width,
            height,
            domain,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, domain: ColorDomain, value: f64) -> Self {
        Self::from_raw(
            width,
            height,
            domain,
            vec![value; width * height * domain.channels()],
        )
    }

    /// Builds an image from `channels` equally sized planes.
    pub fn from_planes(
        width: usize,
        height: usize,
        domain: ColorDomain,
        planes: &[&[f64]],
    ) -> Result<Self> {
        if planes.len() != domain.channels() {
            return Err(Error::InvalidImage(format!(
                "{} needs {} planes, got {}",
                domain.name(),
                domain.channels(),
                planes.len()
            )));
        }
        let data = planes.iter().flat_map(|p| p.iter().copied()).collect();
        Self::new(width, height, domain, data)
    }

    /// Builds a single-plane image by evaluating `f(x, y)`.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, ColorDomain::Plane, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.domain.channels()
    }

    pub fn domain(&self) -> ColorDomain {
        self.domain
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn plane_len(&self) -> usize {
        self.width * self.height
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.plane_len();
        &self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, c: usize, x: usize, y: usize) -> f64 {
        self.data[c * self.plane_len() + y * self.width + x]
    }

    /// Copies channel `c` out as a single-plane image.
    pub fn extract_channel(&self, c: usize) -> PlanarImage {
        PlanarImage::from_raw(
            self.width,
            self.height,
            ColorDomain::Plane,
            self.channel(c).to_vec(),
        )
    }

    /// Returns the same samples under a different domain tag.
    pub fn with_domain(self, domain: ColorDomain) -> Result<Self> {
        if domain.channels() != self.channels() {
            return Err(Error::WrongDomain {
                expected: domain.name(),
                found: self.domain.name(),
            });
        }
        Ok(Self { domain, ..self })
    }

    pub fn transpose(&self) -> PlanarImage {
        let (w, h) = (self.width, self.height);
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.channels() {
            let plane = self.channel(c);
            for x in 0..w {
                for y in 0..h {
                    data.push(plane[y * w + x]);
                }
            }
        }
        PlanarImage::from_raw(h, w, self.domain, data)
    }

    /// Crops a rectangle, clamped to the image.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> PlanarImage {
        let x0 = x0.min(self.width - 1);
        let y0 = y0.min(self.height - 1);
        let w = w.min(self.width - x0).max(1);
        let h = h.min(self.height - y0).max(1);
        let mut data = Vec::with_capacity(w * h * self.channels());
        for c in 0..self.channels() {
            let plane = self.channel(c);
            for y in y0..y0 + h {
                data.extend_from_slice(&plane[y * self.width + x0..y * self.width + x0 + w]);
            }
        }
        PlanarImage::from_raw(w, h, self.domain, data)
    }

    pub(crate) fn map(&self, f: impl Fn(f64) -> f64) -> PlanarImage {
        PlanarImage::from_raw(
            self.width,
            self.height,
            self.domain,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    pub(crate) fn require_domain(&self, domain: ColorDomain) -> Result<()> {
        if self.domain != domain {
            return Err(Error::WrongDomain {
                expected: domain.name(),
                found: self.domain.name(),
            });
        }
        Ok(())
    }

    /// Concatenates images horizontally (same height and domain).
    pub fn hstack(images: &[PlanarImage]) -> Result<PlanarImage> {
        let first = images
            .first()
            .ok_or_else(|| Error::InvalidImage("nothing to stack".into()))?;
        let h = first.height;
        if images
            .iter()
            .any(|i| i.height != h || i.domain != first.domain)
        {
            return Err(Error::ShapeMismatch(
                "hstack needs equal heights and domains".into(),
            ));
        }
        let w: usize = images.iter().map(|i| i.width).sum();
        let mut data = Vec::with_capacity(w * h * first.channels());
        for c in 0..first.channels() {
            for y in 0..h {
                for img in images {
                    let row = y * img.width;
                    data.extend_from_slice(&img.channel(c)[row..row + img.width]);
                }
            }
        }
        Ok(PlanarImage::from_raw(w, h, first.domain, data))
    }
}

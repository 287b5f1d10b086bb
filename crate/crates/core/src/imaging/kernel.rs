use super::{ColorDomain, PlanarImage};
use crate::{Error, Result};

/// Square filter kernel with an odd side length. Taps are row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    size: usize,
    taps: Vec<f64>,
}

impl Kernel2D {
    pub fn new(size: usize, taps: Vec<f64>) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::InvalidKernel(format!("size {size} is not odd")));
        }
        if taps.len() != size * size {
            return Err(Error::InvalidKernel(format!(
                "size {size} needs {} taps, got {}",
                size * size,
                taps.len()
            )));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidKernel("non-finite tap".into()));
        }
        Ok(Self { size, taps })
    }

    /// A vertical 1-D kernel embedded in the middle column of a square kernel.
    pub fn column(taps: &[f64]) -> Result<Self> {
        let size = taps.len();
        let mut all = vec![0.0; size * size];
        for (row, &t) in taps.iter().enumerate() {
            all[row * size + size / 2] = t;
        }
        Self::new(size, all)
    }

    /// A horizontal 1-D kernel embedded in the middle row of a square kernel.
    pub fn row(taps: &[f64]) -> Result<Self> {
        Ok(Self::column(taps)?.transposed())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn tap(&self, dx: usize, dy: usize) -> f64 {
        self.taps[dy * self.size + dx]
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    pub fn transposed(&self) -> Self {
        let n = self.size;
        let mut taps = vec![0.0; n * n];
        for y in 0..n {
            for x in 0..n {
                taps[x * n + y] = self.taps[y * n + x];
            }
        }
        Self { size: n, taps }
    }
}

/// Normalized Gaussian with taps proportional to `exp(-(dx²+dy²)/(2σ²))`.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Kernel2D> {
    if size == 0 || size.is_multiple_of(2) {
        return Err(Error::InvalidKernel(format!("size {size} is not odd")));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidKernel(format!(
            "sigma {sigma} must be positive"
        )));
    }
    let r = (size / 2) as f64;
    let mut taps = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let dx = x as f64 - r;
            let dy = y as f64 - r;
            taps.push((-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp());
        }
    }
    let total: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= total);
    Kernel2D::new(size, taps)
}

/// Uniform averaging kernel, every tap `1/size²`.
pub fn box_kernel(size: usize) -> Result<Kernel2D> {
    if size == 0 || size.is_multiple_of(2) {
        return Err(Error::InvalidKernel(format!("size {size} is not odd")));
    }
    let v = 1.0 / (size * size) as f64;
    Kernel2D::new(size, vec![v; size * size])
}

#[inline]
pub(crate) fn clamp_index(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

/// Filters every channel with `kernel`, replicating edge pixels.
///
/// Taps weight the neighbourhood directly (correlation, the kernel is not
/// flipped): `out(x, y) = Σ k(i, j) · img(x + i − r, y + j − r)`.
pub fn convolve2d(img: &PlanarImage, kernel: &Kernel2D) -> Result<PlanarImage> {
    let (w, h) = (img.width(), img.height());
    if kernel.size() > w || kernel.size() > h {
        return Err(Error::KernelExceedsImage {
            kernel: kernel.size(),
            width: w,
            height: h,
        });
    }
    let r = kernel.radius() as isize;
    let n = kernel.size();
    let mut out = Vec::with_capacity(img.data().len());
    for c in 0..img.channels() {
        let plane = img.channel(c);
        for y in 0..h as isize {
            for x in 0..w as isize {
                let mut acc = 0.0;
                for ky in 0..n {
                    let sy = clamp_index(y + ky as isize - r, h);
                    let row = &plane[sy * w..(sy + 1) * w];
                    let krow = &kernel.taps()[ky * n..(ky + 1) * n];
                    for (kx, &t) in krow.iter().enumerate() {
                        if t != 0.0 {
                            acc += t * row[clamp_index(x + kx as isize - r, w)];
                        }
                    }
                }
                out.push(acc);
            }
        }
    }
    Ok(PlanarImage::from_raw(w, h, img.domain(), out))
}

/// Symmetric 1-D Gaussian taps of the given radius, normalized to sum 1.
pub fn gaussian_taps(sigma: f64, radius: usize) -> Vec<f64> {
    let mut taps: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let d = i as f64 - radius as f64;
            (-(d * d) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= total);
    taps
}

/// Separable filtering of one plane with symmetric sum-1 taps, edges
/// replicated. Accumulates differences to the centre sample so constant
/// regions are reproduced exactly.
pub(crate) fn convolve_separable(plane: &[f64], w: usize, h: usize, taps: &[f64]) -> Vec<f64> {
    let r = (taps.len() / 2) as isize;
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..w {
            let centre = row[x];
            let mut acc = 0.0;
            for (i, &t) in taps.iter().enumerate() {
                acc += t * (row[clamp_index(x as isize + i as isize - r, w)] - centre);
            }
            tmp[y * w + x] = centre + acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let centre = tmp[y * w + x];
            let mut acc = 0.0;
            for (i, &t) in taps.iter().enumerate() {
                acc += t * (tmp[clamp_index(y as isize + i as isize - r, h) * w + x] - centre);
            }
            out[y * w + x] = centre + acc;
        }
    }
    out
}

/// Scharr gradient pair of a single-plane image.
///
/// Taps are `(±3, ±10, ±3)/32`, so a ramp of slope `s` gives gradient `s`.
/// `G_H` responds to change along x, `G_V` to change along y; the `G_V`
/// kernel is the transpose of the `G_H` kernel.
pub fn scharr_gradients(plane: &PlanarImage) -> Result<(PlanarImage, PlanarImage)> {
    if plane.channels() != 1 {
        return Err(Error::WrongDomain {
            expected: ColorDomain::Plane.name(),
            found: plane.domain().name(),
        });
    }
    let gh = Kernel2D::new(
        3,
        vec![-3.0, 0.0, 3.0, -10.0, 0.0, 10.0, -3.0, 0.0, 3.0]
            .into_iter()
            .map(|t| t / 32.0)
            .collect(),
    )?;
    let gv = gh.transposed();
    Ok((convolve2d(plane, &gh)?, convolve2d(plane, &gv)?))
}

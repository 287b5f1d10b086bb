//! Synthetic test charts standing in for lab captures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::imaging::{ColorDomain, PlanarImage};
use crate::{Error, Result};

fn default_margin() -> usize {
    4
}

/// One drawable chart element. Rectangles are `[x, x + w) × [y, y + h)` in
/// pixels; colors are linear RGB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SceneElement {
    /// Uniform color patch. Its interior contributes to the flat mask.
    Patch {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        rgb: [f64; 3],
    },
    /// Straight edge through the rectangle centre, `angle_deg` from vertical,
    /// rendered with 4×4 supersampling.
    Edge {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        angle_deg: f64,
        low: [f64; 3],
        high: [f64; 3],
    },
    /// Gray zone plate `mean + amplitude·cos(π·max_freq·r²/radius)` on the
    /// disk of the given radius; local frequency is `max_freq·r/radius`
    /// cycles per pixel.
    ZonePlate {
        cx: f64,
        cy: f64,
        radius: f64,
        max_freq: f64,
        mean: f64,
        amplitude: f64,
    },
    /// Gray sinusoidal grating.
    Grating {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        period: f64,
        angle_deg: f64,
        mean: f64,
        amplitude: f64,
    },
    /// Gray smooth value noise on a lattice of `scale` pixels.
    Texture {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        scale: f64,
        mean: f64,
        amplitude: f64,
    },
}

/// Chart layout. Later elements paint over earlier ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub background: [f64; 3],
    /// Pixels closer than this to a non-flat pixel or a different flat region
    /// are left out of the flat mask.
    #[serde(default = "default_margin")]
    pub flat_margin: usize,
    pub elements: Vec<SceneElement>,
}

impl SceneSpec {
    /// A general-purpose chart: four color patches across the top, a slanted
    /// edge, a zone plate, a texture and a grating.
    pub fn chart(width: usize, height: usize) -> Self {
        let (qw, qh) = (width / 4, height / 4);
        let colors = [
            [0.62, 0.26, 0.2],
            [0.24, 0.52, 0.3],
            [0.2, 0.28, 0.6],
            [0.78, 0.78, 0.76],
        ];
        let mut elements: Vec<SceneElement> = colors
            .iter()
            .enumerate()
            .map(|(i, &rgb)| SceneElement::Patch {
                x: i * qw,
                y: 0,
                w: qw,
                h: qh,
                rgb,
            })
            .collect();
        elements.push(SceneElement::Edge {
            x: 0,
            y: qh,
            w: width / 2,
            h: 2 * qh,
            angle_deg: 5.0,
            low: [0.12, 0.13, 0.15],
            high: [0.72, 0.7, 0.66],
        });
        elements.push(SceneElement::ZonePlate {
            cx: 0.75 * width as f64,
            cy: 0.5 * height as f64,
            radius: qw as f64,
            max_freq: 0.35,
            mean: 0.5,
            amplitude: 0.3,
        });
        elements.push(SceneElement::Texture {
            x: 0,
            y: 3 * qh,
            w: width / 2,
            h: height - 3 * qh,
            scale: 3.0,
            mean: 0.45,
            amplitude: 0.25,
        });
        elements.push(SceneElement::Grating {
            x: width / 2,
            y: 3 * qh,
            w: width - width / 2,
            h: height - 3 * qh,
            period: 6.0,
            angle_deg: 30.0,
            mean: 0.5,
            amplitude: 0.25,
        });
        Self {
            width,
            height,
            background: [0.4, 0.4, 0.4],
            flat_margin: default_margin(),
            elements,
        }
    }
}

/// Boolean pixel mask of uniform regions.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl FlatMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "mask of {} values for {width}x{height}",
                data.len()
            )));
        }
        if !data.iter().any(|&b| b) {
            return Err(Error::EmptyMask);
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_flat(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

struct ValueNoise {
    cols: usize,
    lattice: Vec<f64>,
    scale: f64,
}

impl ValueNoise {
    fn new(w: usize, h: usize, scale: f64, rng: &mut ChaCha8Rng) -> Self {
        let cols = (w as f64 / scale).ceil() as usize + 2;
        let rows = (h as f64 / scale).ceil() as usize + 2;
        let lattice = (0..cols * rows)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        Self {
            cols,
            lattice,
            scale,
        }
    }

    fn at(&self, u: f64, v: f64) -> f64 {
        let (gu, gv) = (u / self.scale, v / self.scale);
        let (iu, iv) = (gu.floor() as usize, gv.floor() as usize);
        let (fu, fv) = (smoothstep(gu.fract()), smoothstep(gv.fract()));
        let l = |i: usize, j: usize| self.lattice[j * self.cols + i];
        let top = l(iu, iv) * (1.0 - fu) + l(iu + 1, iv) * fu;
        let bottom = l(iu, iv + 1) * (1.0 - fu) + l(iu + 1, iv + 1) * fu;
        top * (1.0 - fv) + bottom * fv
    }
}

/// Renders `spec` and its flat-region mask. `seed` drives the texture
/// elements; everything else is deterministic geometry.
pub fn synthesize_scene(spec: &SceneSpec, seed: u64) -> Result<(PlanarImage, FlatMask)> {
    let (w, h) = (spec.width, spec.height);
    if w < 2 || h < 2 || w % 2 == 1 || h % 2 == 1 {
        return Err(Error::InvalidConfig(format!(
            "scene dimensions {w}x{h} must be even and at least 2"
        )));
    }
    let n = w * h;
    let mut planes = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for (c, plane) in planes.iter_mut().enumerate() {
        plane.fill(spec.background[c]);
    }
    // 0 is the background; element `i` owns pixels labelled `i + 1`.
    let mut owner = vec![0usize; n];
    let mut flat_owner = vec![true; spec.elements.len() + 1];

    for (idx, el) in spec.elements.iter().enumerate() {
        let label = idx + 1;
        let mut paint = |px: usize, py: usize, rgb: [f64; 3]| {
            let i = py * w + px;
            for c in 0..3 {
                planes[c][i] = rgb[c].clamp(0.0, 1.0);
            }
            owner[i] = label;
        };
        match *el {
            SceneElement::Patch {
                x,
                y,
                w: rw,
                h: rh,
                rgb,
            } => {
                for py in y..(y + rh).min(h) {
                    for px in x..(x + rw).min(w) {
                        paint(px, py, rgb);
                    }
                }
            }
            SceneElement::Edge {
                x,
                y,
                w: rw,
                h: rh,
                angle_deg,
                low,
                high,
            } => {
                flat_owner[label] = false;
                let (cx, cy) = (x as f64 + rw as f64 / 2.0, y as f64 + rh as f64 / 2.0);
                let t = angle_deg.to_radians();
                let (nx, ny) = (t.cos(), -t.sin());
                for py in y..(y + rh).min(h) {
                    for px in x..(x + rw).min(w) {
                        let mut hits = 0;
                        for sy in 0..4 {
                            for sx in 0..4 {
                                let u = px as f64 + (sx as f64 + 0.5) / 4.0 - cx;
                                let v = py as f64 + (sy as f64 + 0.5) / 4.0 - cy;
                                if u * nx + v * ny > 0.0 {
                                    hits += 1;
                                }
                            }
                        }
                        let f = hits as f64 / 16.0;
                        paint(
                            px,
                            py,
                            std::array::from_fn(|c| low[c] + f * (high[c] - low[c])),
                        );
                    }
                }
            }
            SceneElement::ZonePlate {
                cx,
                cy,
                radius,
                max_freq,
                mean,
                amplitude,
            } => {
                flat_owner[label] = false;
                for py in 0..h {
                    for px in 0..w {
                        let (u, v) = (px as f64 + 0.5 - cx, py as f64 + 0.5 - cy);
                        let r2 = u * u + v * v;
                        if r2 <= radius * radius {
                            let val = mean
                                + amplitude * (std::f64::consts::PI * max_freq * r2 / radius).cos();
                            paint(px, py, [val; 3]);
                        }
                    }
                }
            }
            SceneElement::Grating {
                x,
                y,
                w: rw,
                h: rh,
                period,
                angle_deg,
                mean,
                amplitude,
            } => {
                flat_owner[label] = false;
                let t = angle_deg.to_radians();
                for py in y..(y + rh).min(h) {
                    for px in x..(x + rw).min(w) {
                        let s = (px as f64 + 0.5) * t.cos() + (py as f64 + 0.5) * t.sin();
                        let val = mean + amplitude * (std::f64::consts::TAU * s / period).sin();
                        paint(px, py, [val; 3]);
                    }
                }
            }
            SceneElement::Texture {
                x,
                y,
                w: rw,
                h: rh,
                scale,
                mean,
                amplitude,
            } => {
                flat_owner[label] = false;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(label as u64);
                let noise = ValueNoise::new(rw, rh, scale.max(1.0), &mut rng);
                for py in y..(y + rh).min(h) {
                    for px in x..(x + rw).min(w) {
                        let val = mean + amplitude * noise.at((px - x) as f64, (py - y) as f64);
                        paint(px, py, [val; 3]);
                    }
                }
            }
        }
    }

    let m = spec.flat_margin;
    let mask: Vec<bool> = (0..n)
        .map(|i| {
            let (px, py) = (i % w, i / w);
            let o = owner[i];
            if !flat_owner[o] {
                return false;
            }
            let (x0, x1) = (px.saturating_sub(m), (px + m).min(w - 1));
            let (y0, y1) = (py.saturating_sub(m), (py + m).min(h - 1));
            (y0..=y1).all(|qy| (x0..=x1).all(|qx| owner[qy * w + qx] == o))
        })
        .collect();
    let [r, g, b] = planes;
    let img = PlanarImage::from_planes(w, h, ColorDomain::LinearRgb, &[&r, &g, &b])?;
    Ok((img, FlatMask::new(w, h, mask)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_patch() {
        let spec = SceneSpec {
            width: 16,
            height: 12,
            background: [0.0; 3],
            flat_margin: 4,
            elements: vec![SceneElement::Patch {
                x: 0,
                y: 0,
                w: 16,
                h: 12,
                rgb: [0.5; 3],
            }],
        };
        let (img, mask) = synthesize_scene(&spec, 0).unwrap();
        assert!(img.data().iter().all(|&v| v == 0.5));
        assert_eq!(mask.count(), 16 * 12);
    }

    #[test]
    fn deterministic() {
        let spec = SceneSpec::chart(64, 64);
        assert_eq!(
            synthesize_scene(&spec, 3).unwrap(),
            synthesize_scene(&spec, 3).unwrap()
        );
        assert_ne!(
            synthesize_scene(&spec, 3).unwrap().0,
            synthesize_scene(&spec, 4).unwrap().0
        );
    }

    #[test]
    fn degenerate_dimensions() {
        let mut spec = SceneSpec::chart(64, 64);
        spec.width = 0;
        assert!(synthesize_scene(&spec, 0).is_err());
        spec.width = 63;
        assert!(synthesize_scene(&spec, 0).is_err());
    }

    #[test]
    fn chart_mask_lies_inside_patches() {
        let (img, mask) = synthesize_scene(&SceneSpec::chart(128, 128), 1).unwrap();
        assert!(mask.count() > 1000);
        for y in 0..128 {
            for x in 0..128 {
                if mask.is_flat(x, y) {
                    for c in 0..3 {
                        let v = img.get(c, x, y);
                        assert_eq!(v, img.get(c, x.min(126) + 1, y));
                    }
                }
            }
        }
        assert!(img.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn zone_plate_local_frequency() {
        let (radius, max_freq) = (60.0, 0.4);
        let spec = SceneSpec {
            width: 128,
            height: 128,
            background: [0.5; 3],
            flat_margin: 2,
            elements: vec![
                SceneElement::Patch {
                    x: 0,
                    y: 0,
                    w: 8,
                    h: 8,
                    rgb: [0.5; 3],
                },
                SceneElement::ZonePlate {
                    cx: 64.5,
                    cy: 64.5,
                    radius,
                    max_freq,
                    mean: 0.5,
                    amplitude: 0.4,
                },
            ],
        };
        let (img, _) = synthesize_scene(&spec, 0).unwrap();
        // Zero crossings of the row through the centre, sub-pixel by linear
        // interpolation, measured as distance from the centre.
        let row: Vec<f64> = (64..128).map(|x| img.get(0, x, 64) - 0.5).collect();
        let crossings: Vec<f64> = row
            .windows(2)
            .enumerate()
            .filter(|(_, p)| p[0] * p[1] < 0.0)
            .map(|(i, p)| i as f64 + p[0] / (p[0] - p[1]))
            .collect();
        assert!(crossings.len() >= 10);
        for pair in crossings.windows(2).take(10) {
            let mid = 0.5 * (pair[0] + pair[1]);
            let expected = max_freq * mid / radius;
            let measured = 0.5 / (pair[1] - pair[0]);
            assert!(
                (measured - expected).abs() / expected < 0.1,
                "r={mid}: {measured} vs {expected}"
            );
        }
    }

    #[test]
    fn mask_rejects_empty() {
        assert!(matches!(
            FlatMask::new(2, 2, vec![false; 4]),
            Err(Error::EmptyMask)
        ));
        assert!(FlatMask::new(2, 2, vec![true; 3]).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = SceneSpec::chart(64, 32);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<SceneSpec>(&text).unwrap(), spec);
    }
}

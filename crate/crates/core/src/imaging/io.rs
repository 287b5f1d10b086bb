//! Binary Netpbm I/O (P5/P6).
//!
//! Images are written with maxval 65535 and big-endian samples; values map
//! linearly from `[0, 1]` with `round(v · 65535)`. Mosaics carry their CFA
//! pattern in a JSON sidecar next to the PGM file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BayerMosaic, CfaPattern, ColorDomain, PlanarImage};
use crate::{Error, Result};

/// Quantizes a `[0, 1]` value to 16 bits (round half up, clamped).
pub fn quantize16(v: f64) -> u16 {
    (v.clamp(0.0, 1.0) * 65535.0 + 0.5).floor() as u16
}

pub fn dequantize16(s: u16) -> f64 {
    s as f64 / 65535.0
}

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    pattern: CfaPattern,
}

/// Path of the pattern sidecar for a mosaic file: same stem, `.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: usize,
    offset: usize,
}

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedHeader {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn parse_header(path: &Path, bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 || bytes[0] != b'P' || !matches!(bytes[1], b'5' | b'6') {
        return Err(malformed(path, "missing P5/P6 magic"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // Skip whitespace and comments.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(malformed(path, "header ends early")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(malformed(path, "expected a decimal number"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed(path, "number out of range"))?;
    }
    // Exactly one whitespace byte separates the header from the payload.
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(malformed(path, "missing separator after maxval"));
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(malformed(path, "zero dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(malformed(path, format!("unsupported maxval {maxval}")));
    }
    Ok(Header {
        magic: [bytes[0], bytes[1]],
        width,
        height,
        maxval,
        offset: pos + 1,
    })
}

fn read_samples(path: &Path) -> Result<(Header, Vec<u16>)> {
    let bytes = fs::read(path)?;
    let header = parse_header(path, &bytes)?;
    let channels = if header.magic[1] == b'6' { 3 } else { 1 };
    let wide = header.maxval > 255;
    let count = header.width * header.height * channels;
    let expected = count * if wide { 2 } else { 1 };
    let payload = &bytes[header.offset..];
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            path: path.to_path_buf(),
            expected,
            found: payload.len(),
        });
    }
    let samples = if wide {
        payload[..expected]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    } else {
        payload[..expected].iter().map(|&b| b as u16).collect()
    };
    Ok((header, samples))
}

fn write_netpbm(
    path: &Path,
    magic: &str,
    width: usize,
    height: usize,
    maxval: u16,
    samples: &[u16],
) -> Result<()> {
    let mut out = format!("{magic}\n{width} {height}\n{maxval}\n").into_bytes();
    if maxval > 255 {
        out.reserve(samples.len() * 2);
        for s in samples {
            out.extend_from_slice(&s.to_be_bytes());
        }
    } else {
        out.extend(samples.iter().map(|&s| s as u8));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes a single-plane image as PGM-16 or a linear-RGB image as PPM-16
/// (pixel-interleaved). YUV images have no file representation.
pub fn write_image(path: &Path, img: &PlanarImage) -> Result<()> {
    let (w, h) = (img.width(), img.height());
    match img.domain() {
        ColorDomain::Plane => {
            let samples: Vec<u16> = img.data().iter().map(|&v| quantize16(v)).collect();
            write_netpbm(path, "P5", w, h, 65535, &samples)
        }
        ColorDomain::LinearRgb => {
            let n = img.plane_len();
            let mut samples = Vec::with_capacity(3 * n);
            for i in 0..n {
                for c in 0..3 {
                    samples.push(quantize16(img.channel(c)[i]));
                }
            }
            write_netpbm(path, "P6", w, h, 65535, &samples)
        }
        ColorDomain::Yuv => Err(Error::WrongDomain {
            expected: "plane or linear-RGB",
            found: ColorDomain::Yuv.name(),
        }),
    }
}

/// Reads a PGM (plane) or PPM (linear RGB), normalizing by the file's maxval.
pub fn read_image(path: &Path) -> Result<PlanarImage> {
    let (header, samples) = read_samples(path)?;
    let (w, h) = (header.width, header.height);
    let scale = header.maxval as f64;
    if header.magic[1] == b'5' {
        PlanarImage::new(
            w,
            h,
            ColorDomain::Plane,
            samples.iter().map(|&s| s as f64 / scale).collect(),
        )
    } else {
        let n = w * h;
        let mut data = vec![0.0; 3 * n];
        for i in 0..n {
            for c in 0..3 {
                data[c * n + i] = samples[3 * i + c] as f64 / scale;
            }
        }
        PlanarImage::new(w, h, ColorDomain::LinearRgb, data)
    }
}

/// Writes a mosaic as PGM-16 plus its `{"pattern": ...}` sidecar.
pub fn write_mosaic(path: &Path, mosaic: &BayerMosaic) -> Result<()> {
    let samples: Vec<u16> = mosaic.data().iter().map(|&v| quantize16(v)).collect();
    write_netpbm(path, "P5", mosaic.width(), mosaic.height(), 65535, &samples)?;
    let sidecar = serde_json::to_string(&Sidecar {
        pattern: mosaic.pattern(),
    })?;
    fs::write(sidecar_path(path), sidecar)?;
    Ok(())
}

pub fn read_mosaic(path: &Path) -> Result<BayerMosaic> {
    let (header, samples) = read_samples(path)?;
    if header.magic[1] != b'5' {
        return Err(malformed(path, "mosaics must be single-plane PGM"));
    }
    let sidecar: Sidecar = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    BayerMosaic::new(
        header.width,
        header.height,
        sidecar.pattern,
        samples
            .iter()
            .map(|&s| s as f64 / header.maxval as f64)
            .collect(),
    )
}

/// Writes a boolean mask as PGM-8 with values 0/255.
pub fn write_mask(path: &Path, width: usize, height: usize, mask: &[bool]) -> Result<()> {
    if mask.len() != width * height {
        return Err(Error::ShapeMismatch(format!(
            "mask has {} entries for {width}x{height}",
            mask.len()
        )));
    }
    let samples: Vec<u16> = mask.iter().map(|&m| if m { 255 } else { 0 }).collect();
    write_netpbm(path, "P5", width, height, 255, &samples)
}

/// Reads a PGM mask; any non-zero sample is set.
pub fn read_mask(path: &Path) -> Result<(usize, usize, Vec<bool>)> {
    let (header, samples) = read_samples(path)?;
    if header.magic[1] != b'5' {
        return Err(malformed(path, "masks must be PGM"));
    }
    Ok((
        header.width,
        header.height,
        samples.iter().map(|&s| s != 0).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn quantization_rule() {
        assert_eq!(quantize16(1.0), 65535);
        assert_eq!(quantize16(0.0), 0);
        assert_eq!(quantize16(0.5), 32768);
        assert_eq!(quantize16(-0.1), 0);
        assert_eq!(quantize16(1.7), 65535);
    }

    #[test]
    fn mosaic_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.pgm");
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data: Vec<f64> = (0..8 * 6).map(|_| dequantize16(rng.random())).collect();
        let m = BayerMosaic::new(8, 6, CfaPattern::Grbg, data).unwrap();
        write_mosaic(&path, &m).unwrap();
        assert!(sidecar_path(&path).exists());
        let back = read_mosaic(&path).unwrap();
        assert_eq!(back, m);
        let raw = fs::read(&path).unwrap();
        assert!(raw.starts_with(b"P5\n8 6\n65535\n"));
    }

    #[test]
    fn rgb_round_trip_and_sample_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ppm");
        let img = PlanarImage::new(
            2,
            1,
            ColorDomain::LinearRgb,
            vec![1.0, 0.0, 0.5, 0.0, 0.0, 1.0],
        )
        .unwrap();
        write_image(&path, &img).unwrap();
        let raw = fs::read(&path).unwrap();
        let payload = &raw[raw.len() - 12..];
        // Pixel-interleaved, big-endian: (R,G,B) = (65535, 32768, 0), (0, 0, 65535).
        assert_eq!(
            payload,
            &[0xff, 0xff, 0x80, 0x00, 0, 0, 0, 0, 0, 0, 0xff, 0xff]
        );
        let back = read_image(&path).unwrap();
        assert_eq!(back.get(0, 0, 0), 1.0);
        assert_eq!(back.get(1, 0, 0), 32768.0 / 65535.0);
        assert_eq!(back.get(2, 1, 0), 1.0);
    }

    #[test]
    fn header_comments_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.pgm");
        let mut bytes = b"P5 # comment\n2 1\n65535\n".to_vec();
        bytes.extend_from_slice(&[0, 1, 0xff, 0xff]);
        fs::write(&path, bytes).unwrap();
        let img = read_image(&path).unwrap();
        assert_eq!(img.data(), &[1.0 / 65535.0, 1.0]);
    }

    #[test]
    fn malformed_and_truncated_are_distinct() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.pgm");
        fs::write(&bad, b"P7\n1 1\n255\n\0").unwrap();
        assert!(matches!(
            read_image(&bad),
            Err(Error::MalformedHeader { .. })
        ));
        fs::write(&bad, b"P5\nx 1\n255\n\0").unwrap();
        assert!(matches!(
            read_image(&bad),
            Err(Error::MalformedHeader { .. })
        ));

        let short = dir.path().join("short.pgm");
        fs::write(&short, b"P5\n4 4\n65535\n\0\0\0").unwrap();
        assert!(matches!(
            read_image(&short),
            Err(Error::TruncatedPayload {
                expected: 32,
                found: 3,
                ..
            })
        ));
    }

    #[test]
    fn mask_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.pgm");
        let mask = vec![true, false, false, true, true, false];
        write_mask(&path, 3, 2, &mask).unwrap();
        assert_eq!(read_mask(&path).unwrap(), (3, 2, mask));
    }

    proptest::proptest! {
        #[test]
        fn plane_round_trip(samples in proptest::collection::vec(0u16..=65535, 12)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("p.pgm");
            let img = PlanarImage::new(4, 3, ColorDomain::Plane,
                samples.iter().map(|&s| dequantize16(s)).collect()).unwrap();
            write_image(&path, &img).unwrap();
            let back = read_image(&path).unwrap();
            let again: Vec<u16> = back.data().iter().map(|&v| quantize16(v)).collect();
            proptest::prop_assert_eq!(again, samples);
        }
    }
}

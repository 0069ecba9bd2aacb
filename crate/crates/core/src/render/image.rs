//! PFM and PPM image files.

use super::RadianceImage;
use crate::error::{Error, Result};
use crate::math::Rgb;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pfm,
    Ppm,
}

impl std::str::FromStr for ImageFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pfm" => Ok(ImageFormat::Pfm),
            "ppm" => Ok(ImageFormat::Ppm),
            _ => Err(Error::Config(format!("unknown image format '{s}' (pfm, ppm)"))),
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

pub fn write_image(img: &RadianceImage, path: &Path, format: ImageFormat) -> Result<()> {
    let bytes = match format {
        ImageFormat::Pfm => encode_pfm(img),
        ImageFormat::Ppm => encode_ppm(img),
    };
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// Little-endian PFM, rows stored bottom-up.
pub fn encode_pfm(img: &RadianceImage) -> Vec<u8> {
    let mut out = format!("PF\n{} {}\n-1.0\n", img.width, img.height).into_bytes();
    out.reserve(img.width * img.height * 12);
    for y in (0..img.height).rev() {
        for x in 0..img.width {
            for c in img.pixel(x, y).0 {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
    }
    out
}

/// 8-bit binary PPM with the sRGB transfer curve at exposure 1.
pub fn encode_ppm(img: &RadianceImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width, img.height).into_bytes();
    for y in 0..img.height {
        for x in 0..img.width {
            for c in img.pixel(x, y).0 {
                out.push((srgb_encode(c) * 255.0).round() as u8);
            }
        }
    }
    out
}

fn srgb_encode(c: f64) -> f64 {
    let c = if c.is_finite() { c.clamp(0.0, 1.0) } else { 0.0 };
    if c <= 0.003_130_8 {
        12.92 * c
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    }
}

/// Reads a colour PFM of either byte order.
pub fn read_pfm(path: &Path) -> Result<(usize, usize, Vec<Rgb>)> {
    let data = fs::read(path).map_err(|e| io_err(path, e))?;
    decode_pfm(&data).map_err(|msg| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidData, msg),
    })
}

pub fn decode_pfm(data: &[u8]) -> std::result::Result<(usize, usize, Vec<Rgb>), String> {
    // three whitespace-terminated header tokens after "PF"
    let mut pos = 0;
    let mut token = || -> std::result::Result<String, String> {
        while pos < data.len() && data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated PFM header".into());
        }
        let t = String::from_utf8_lossy(&data[start..pos]).into_owned();
        pos += 1;
        Ok(t)
    };
    if token()? != "PF" {
        return Err("not a colour PFM".into());
    }
    let w: usize = token()?.parse().map_err(|_| "bad width")?;
    let h: usize = token()?.parse().map_err(|_| "bad height")?;
    let scale: f64 = token()?.parse().map_err(|_| "bad scale")?;
    let body = &data[pos..];
    if body.len() != w * h * 12 {
        return Err(format!("expected {} payload bytes, found {}", w * h * 12, body.len()));
    }
    let little = scale < 0.0;
    let mut px = vec![Rgb::BLACK; w * h];
    for (k, chunk) in body.chunks_exact(12).enumerate() {
        let (row, x) = (k / w, k % w);
        let y = h - 1 - row;
        let mut c = [0.0; 3];
        for (i, b) in chunk.chunks_exact(4).enumerate() {
            let b = [b[0], b[1], b[2], b[3]];
            c[i] = if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) } as f64;
        }
        px[y * w + x] = Rgb(c);
    }
    Ok((w, h, px))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::ImageMeta;

    fn image(w: usize, h: usize, f: impl Fn(usize, usize) -> Rgb) -> RadianceImage {
        let mut px = Vec::new();
        for y in 0..h {
            for x in 0..w {
                px.push(f(x, y));
            }
        }
        RadianceImage { width: w, height: h, pixels: px, meta: ImageMeta::default() }
    }

    #[test]
    fn pfm_single_pixel() {
        let bytes = encode_pfm(&image(1, 1, |_, _| Rgb::WHITE));
        let header = b"PF\n1 1\n-1.0\n";
        assert_eq!(&bytes[..header.len()], header);
        let payload = &bytes[header.len()..];
        assert_eq!(payload.len(), 12);
        for c in payload.chunks_exact(4) {
            assert_eq!(f32::from_le_bytes([c[0], c[1], c[2], c[3]]), 1.0);
        }
    }

    #[test]
    fn pfm_round_trip_and_row_order() {
        let img = image(3, 2, |x, y| Rgb::new(x as f64, y as f64, 0.25));
        let dir = std::env::temp_dir().join(format!("mf_pfm_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.pfm");
        write_image(&img, &path, ImageFormat::Pfm).unwrap();
        let (w, h, px) = read_pfm(&path).unwrap();
        assert_eq!((w, h), (3, 2));
        assert_eq!(px, img.pixels);
        // the first stored row is the bottom image row
        let raw = std::fs::read(&path).unwrap();
        // header is 12 bytes; the green channel of the first pixel holds y
        let green = f32::from_le_bytes([raw[16], raw[17], raw[18], raw[19]]);
        assert_eq!(green, 1.0);
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn ppm_black_and_white() {
        let bytes = encode_ppm(&image(2, 1, |x, _| if x == 0 { Rgb::BLACK } else { Rgb::splat(4.0) }));
        let header = b"P6\n2 1\n255\n";
        assert_eq!(&bytes[header.len()..], &[0, 0, 0, 255, 255, 255]);
        assert_eq!((srgb_encode(0.5) * 255.0).round() as u8, 188);
    }

    #[test]
    fn io_error_names_path() {
        let e = write_image(&image(1, 1, |_, _| Rgb::BLACK), Path::new("/nonexistent-dir/x.pfm"), ImageFormat::Pfm)
            .unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert!(e.to_string().contains("/nonexistent-dir/x.pfm"));
    }
}

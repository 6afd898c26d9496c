//! File formats: raw float32 tensors, 16-bit PNG export, and PNG texture
//! loading with sRGB-to-linear decoding.
//!
//! Raw tensors are little-endian 32-bit floats in row-major order, (H, W, 3)
//! for color maps and (H, W) for depth maps. Depth files encode background
//! as 0.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use ndarray::{Array2, Array3};

use crate::error::{Error, Result};

/// Serializes an (H, W, 3) image as little-endian f32, row-major.
pub fn write_f32_image(path: &Path, image: &Array3<f64>) -> Result<()> {
    let mut bytes = Vec::with_capacity(image.len() * 4);
    for v in image.iter() {
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    write_atomic(path, &bytes)
}

/// Reads an (H, W, 3) little-endian f32 image with a known shape.
pub fn read_f32_image(path: &Path, rows: usize, cols: usize) -> Result<Array3<f64>> {
    let data = decode_f32_tensor(&fs::read(path)?, rows * cols * 3)?;
    Ok(Array3::from_shape_vec((rows, cols, 3), data).expect("sized above"))
}

/// Serializes an (H, W) depth map as little-endian f32, row-major.
/// Non-finite depths (background) are written as 0.
pub fn write_f32_depth(path: &Path, depth: &Array2<f64>) -> Result<()> {
    let mut bytes = Vec::with_capacity(depth.len() * 4);
    for v in depth.iter() {
        let enc = if v.is_finite() { *v as f32 } else { 0.0 };
        bytes.extend_from_slice(&enc.to_le_bytes());
    }
    write_atomic(path, &bytes)
}

/// Reads an (H, W) little-endian f32 depth map.
pub fn read_f32_depth(path: &Path, rows: usize, cols: usize) -> Result<Array2<f64>> {
    let data = decode_f32_tensor(&fs::read(path)?, rows * cols)?;
    Ok(Array2::from_shape_vec((rows, cols), data).expect("sized above"))
}

/// Decodes a little-endian f32 buffer, checking the element count.
pub fn decode_f32_tensor(bytes: &[u8], expect_len: usize) -> Result<Vec<f64>> {
    if bytes.len() != expect_len * 4 {
        return Err(Error::ShapeMismatch {
            expected: format!("{} bytes ({expect_len} f32)", expect_len * 4),
            got: format!("{} bytes", bytes.len()),
        });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect())
}

/// Writes a file via a temporary sibling plus rename, so partially written
/// files never appear under the final name.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Exports an image as 16-bit PNG with a fixed linear scale:
/// stored = clamp(value / scale, 0, 1) * 65535, rounded.
pub fn write_png16(path: &Path, image: &Array3<f64>, scale: f64) -> Result<()> {
    let (h, w, _) = image.dim();
    let mut buf: Vec<u16> = Vec::with_capacity(h * w * 3);
    for v in image.iter() {
        let x = (v / scale).clamp(0.0, 1.0);
        buf.push((x * 65535.0).round() as u16);
    }
    let img: image::ImageBuffer<image::Rgb<u16>, Vec<u16>> =
        image::ImageBuffer::from_raw(w as u32, h as u32, buf)
            .expect("buffer sized to dimensions");
    let mut bytes: Vec<u8> = Vec::new();
    img.write_to(
        &mut std::io::Cursor::new(&mut bytes),
        image::ImageFormat::Png,
    )?;
    write_atomic(path, &bytes)
}

/// Exports a grayscale (H, W) map as 16-bit PNG with a fixed linear scale.
pub fn write_png16_gray(path: &Path, map: &Array2<f64>, scale: f64) -> Result<()> {
    let (h, w) = map.dim();
    let mut buf: Vec<u16> = Vec::with_capacity(h * w);
    for v in map.iter() {
        let x = if v.is_finite() { v / scale } else { 0.0 };
        buf.push((x.clamp(0.0, 1.0) * 65535.0).round() as u16);
    }
    let img: image::ImageBuffer<image::Luma<u16>, Vec<u16>> =
        image::ImageBuffer::from_raw(w as u32, h as u32, buf)
            .expect("buffer sized to dimensions");
    let mut bytes: Vec<u8> = Vec::new();
    img.write_to(
        &mut std::io::Cursor::new(&mut bytes),
        image::ImageFormat::Png,
    )?;
    write_atomic(path, &bytes)
}

#[inline]
fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

/// Loads an 8- or 16-bit PNG as a linear-light (H, W, 3) image in [0, 1].
/// Gray images are replicated across channels.
pub fn load_png_linear(path: &Path) -> Result<Array3<f64>> {
    let img = image::open(path)?;
    let rgb = img.to_rgb32f();
    let (w, h) = rgb.dimensions();
    let mut out = Array3::zeros((h as usize, w as usize, 3));
    for (x, y, px) in rgb.enumerate_pixels() {
        for c in 0..3 {
            out[(y as usize, x as usize, c)] = srgb_to_linear(px.0[c] as f64);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    #[test]
    fn f32_image_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.f32");
        let mut img = Array3::zeros((5, 7, 3));
        for (k, v) in img.iter_mut().enumerate() {
            *v = k as f64 * 0.125;
        }
        write_f32_image(&path, &img).unwrap();
        let back = read_f32_image(&path, 5, 7).unwrap();
        for (a, b) in img.iter().zip(back.iter()) {
            assert_eq!(*a as f32, *b as f32);
        }
    }

    #[test]
    fn tensor_size_mismatch_is_error() {
        let bytes = vec![0u8; 13];
        assert!(matches!(
            decode_f32_tensor(&bytes, 4),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn depth_background_encodes_as_zero() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("depth.f32");
        let mut d = Array2::from_elem((3, 3), f64::INFINITY);
        d[(1, 1)] = 0.75;
        write_f32_depth(&path, &d).unwrap();
        let back = read_f32_depth(&path, 3, 3).unwrap();
        assert_eq!(back[(0, 0)], 0.0);
        assert!((back[(1, 1)] - 0.75).abs() < 1e-7);
    }

    #[test]
    fn png16_writes_deterministic_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.png");
        let b = dir.path().join("b.png");
        let mut img = Array3::zeros((4, 4, 3));
        img[(0, 0, 0)] = 0.5;
        img[(3, 3, 2)] = 2.0; // clamps at scale 1.0
        write_png16(&a, &img, 1.0).unwrap();
        write_png16(&b, &img, 1.0).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}

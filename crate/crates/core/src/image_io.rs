//! Image decoding into L\*a\*b\* pixel buffers and PNG encoding of outputs.

use std::path::Path;

use image::{DynamicImage, GenericImageView};

use crate::colourspace::{Lab, LabConverter, Srgb};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major L\*a\*b\* image.
#[derive(Debug, Clone, PartialEq)]
pub struct LabImage<T> {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Lab<T>>,
}

impl<T: Real> LabImage<T> {
    pub fn new(width: u32, height: u32, pixels: Vec<Lab<T>>) -> Result<Self> {
        if pixels.len() != width as usize * height as usize {
            return Err(Error::InvalidParameter(format!(
                "{}x{} image needs {} pixels, got {}",
                width,
                height,
                width as usize * height as usize,
                pixels.len()
            )));
        }
        Ok(LabImage {
            width,
            height,
            pixels,
        })
    }

    pub fn uniform(width: u32, height: u32, colour: Lab<T>) -> Self {
        LabImage {
            width,
            height,
            pixels: vec![colour; width as usize * height as usize],
        }
    }

    pub fn from_srgb8(width: u32, height: u32, rgb: &[[u8; 3]]) -> Result<Self> {
        let conv = LabConverter::<T>::d65();
        Self::new(
            width,
            height,
            rgb.iter().map(|&c| conv.srgb8_to_lab(c)).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

/// Decodes PNG (8/16-bit) or binary PPM into D65 L\*a\*b\*. Alpha is ignored.
pub fn load_lab_image<T: Real>(path: &Path) -> Result<LabImage<T>> {
    let img = decode(path)?;
    Ok(lab_from_dynamic(&img))
}

pub fn lab_from_dynamic<T: Real>(img: &DynamicImage) -> LabImage<T> {
    let conv = LabConverter::<T>::d65();
    let (width, height) = img.dimensions();
    let sixteen = matches!(
        img,
        DynamicImage::ImageLuma16(_)
            | DynamicImage::ImageLumaA16(_)
            | DynamicImage::ImageRgb16(_)
            | DynamicImage::ImageRgba16(_)
    );
    let pixels = if sixteen {
        img.to_rgb16()
            .pixels()
            .map(|p| conv.srgb_to_lab(Srgb::from_u16(p.0)))
            .collect()
    } else {
        img.to_rgb8()
            .pixels()
            .map(|p| conv.srgb8_to_lab(p.0))
            .collect()
    };
    LabImage {
        width,
        height,
        pixels,
    }
}

/// Binary mask: pixels brighter than mid-grey are selected.
pub fn load_mask(path: &Path) -> Result<(u32, u32, Vec<bool>)> {
    let img = decode(path)?;
    let (w, h) = img.dimensions();
    let mask = img.to_luma8().pixels().map(|p| p.0[0] > 127).collect();
    Ok((w, h, mask))
}

fn decode(path: &Path) -> Result<DynamicImage> {
    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::Decode {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?
        .with_guessed_format()
        .map_err(|e| Error::Decode {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    reader.decode().map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

fn encode(
    width: u32,
    height: u32,
    colour: png::ColorType,
    palette: Option<Vec<u8>>,
    data: &[u8],
) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width, height);
        enc.set_color(colour);
        enc.set_depth(png::BitDepth::Eight);
        if let Some(p) = palette {
            enc.set_palette(p);
        }
        let mut writer = enc.write_header().expect("in-memory PNG header");
        writer.write_image_data(data).expect("in-memory PNG data");
    }
    out
}

/// 8-bit indexed PNG; `indices` are palette positions.
pub fn encode_indexed_png(width: u32, height: u32, indices: &[u8], palette: &[[u8; 3]]) -> Vec<u8> {
    assert_eq!(indices.len(), width as usize * height as usize);
    assert!(!palette.is_empty() && palette.len() <= 256);
    let flat = palette.iter().flatten().copied().collect();
    encode(width, height, png::ColorType::Indexed, Some(flat), indices)
}

pub fn encode_grey_png(width: u32, height: u32, values: &[u8]) -> Vec<u8> {
    assert_eq!(values.len(), width as usize * height as usize);
    encode(width, height, png::ColorType::Grayscale, None, values)
}

pub fn encode_rgb_png(width: u32, height: u32, rgb: &[[u8; 3]]) -> Vec<u8> {
    assert_eq!(rgb.len(), width as usize * height as usize);
    let flat: Vec<u8> = rgb.iter().flatten().copied().collect();
    encode(width, height, png::ColorType::Rgb, None, &flat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rgb_png_round_trip_through_decoder() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        let px = [[255u8, 0, 0], [0, 0, 0], [255, 255, 255], [10, 20, 30]];
        std::fs::write(&path, encode_rgb_png(2, 2, &px)).unwrap();
        let img: LabImage<f64> = load_lab_image(&path).unwrap();
        assert_eq!((img.width, img.height), (2, 2));
        let conv = LabConverter::<f64>::d65();
        for (p, c) in img.pixels.iter().zip(px) {
            assert_eq!(*p, conv.srgb8_to_lab(c));
        }
    }

    #[test]
    fn sixteen_bit_png_is_normalised() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x16.png");
        let buf =
            image::ImageBuffer::<image::Rgb<u16>, _>::from_raw(1, 1, vec![65535u16, 0, 0]).unwrap();
        buf.save(&path).unwrap();
        let img: LabImage<f64> = load_lab_image(&path).unwrap();
        let want = LabConverter::<f64>::d65().srgb8_to_lab([255, 0, 0]);
        assert!((img.pixels[0].a - want.a).abs() < 1e-9);
    }

    #[test]
    fn ppm_is_decoded() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.ppm");
        let mut data = b"P6\n2 1\n255\n".to_vec();
        data.extend_from_slice(&[0, 0, 255, 255, 255, 0]);
        std::fs::write(&path, data).unwrap();
        let img: LabImage<f64> = load_lab_image(&path).unwrap();
        assert_eq!(img.len(), 2);
        assert!(img.pixels[0].b < -100.0);
        assert!(img.pixels[1].b > 90.0);
    }

    #[test]
    fn decode_failure_names_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("broken.png");
        std::fs::write(&path, b"not a png").unwrap();
        let err = load_lab_image::<f64>(&path).unwrap_err();
        assert!(err.to_string().contains("broken.png"));
    }

    #[test]
    fn indexed_png_keeps_palette() {
        let bytes = encode_indexed_png(2, 1, &[0, 1], &[[1, 2, 3], [4, 5, 6]]);
        let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
        let reader = decoder.read_info().unwrap();
        let info = reader.info();
        assert_eq!(info.color_type, png::ColorType::Indexed);
        assert_eq!(info.palette.as_deref(), Some(&[1u8, 2, 3, 4, 5, 6][..]));
    }

    #[test]
    fn mask_threshold() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        std::fs::write(&path, encode_grey_png(3, 1, &[0, 200, 127])).unwrap();
        let (w, h, m) = load_mask(&path).unwrap();
        assert_eq!((w, h), (3, 1));
        assert_eq!(m, vec![false, true, false]);
    }
}

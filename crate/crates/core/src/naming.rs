//! Per-pixel naming of whole images.

use rayon::prelude::*;

use crate::ellipsoid::ColourModel;
use crate::image_io::{encode_grey_png, encode_indexed_png, LabImage};
use crate::palette::model_palette;
use crate::scalar::{lit, Real};

/// Label map plus optional per-term belongingness maps.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageNaming<T> {
    pub width: u32,
    pub height: u32,
    /// Term index per pixel, row-major.
    pub labels: Vec<usize>,
    /// `maps[t][pixel]` is the raw belongingness of term `t`.
    pub maps: Option<Vec<Vec<T>>>,
}

/// Names every pixel; with `with_maps` the raw belongingness of every term is kept too.
pub fn name_image<T: Real>(
    model: &ColourModel<T>,
    image: &LabImage<T>,
    with_maps: bool,
) -> ImageNaming<T> {
    let prepared = model.prepared();
    let n_terms = prepared.len();
    let per_pixel: Vec<(usize, Vec<T>)> = image
        .pixels
        .par_iter()
        .map(|p| {
            let mut b = vec![T::zero(); n_terms];
            prepared.membership_into(&p.to_array(), &mut b);
            let idx = crate::ellipsoid::argmax_first(b.iter().copied());
            if !with_maps {
                b.clear();
            }
            (idx, b)
        })
        .collect();
    let labels = per_pixel.iter().map(|(i, _)| *i).collect();
    let maps = with_maps.then(|| {
        (0..n_terms)
            .map(|t| per_pixel.iter().map(|(_, b)| b[t]).collect())
            .collect()
    });
    ImageNaming {
        width: image.width,
        height: image.height,
        labels,
        maps,
    }
}

impl<T: Real> ImageNaming<T> {
    /// Fraction of pixels per term index.
    pub fn histogram(&self, n_terms: usize) -> Vec<usize> {
        let mut h = vec![0; n_terms];
        for &l in &self.labels {
            h[l] += 1;
        }
        h
    }

    /// Indexed PNG of the label map using the model's display palette.
    pub fn label_png(&self, model: &ColourModel<T>) -> Vec<u8> {
        let idx: Vec<u8> = self.labels.iter().map(|&l| l as u8).collect();
        encode_indexed_png(self.width, self.height, &idx, &model_palette(model))
    }

    /// One greyscale PNG per term, value `round(255·B)`.
    pub fn map_pngs(&self) -> Vec<Vec<u8>> {
        self.maps
            .as_ref()
            .map(|maps| {
                maps.iter()
                    .map(|m| {
                        let q: Vec<u8> = m.iter().map(|&b| quantise_probability(b)).collect();
                        encode_grey_png(self.width, self.height, &q)
                    })
                    .collect()
            })
            .unwrap_or_default()
    }
}

pub fn quantise_probability<T: Real>(b: T) -> u8 {
    (b * lit(255.0))
        .round()
        .max(T::zero())
        .min(lit(255.0))
        .to_u8()
        .unwrap_or(0)
}

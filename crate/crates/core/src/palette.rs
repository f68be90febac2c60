//! Display palette for label maps and chart renderings.

use crate::colourspace::LabConverter;
use crate::ellipsoid::ColourModel;
use crate::scalar::Real;

const PALETTE_CSV: &str = include_str!("../data/palette.csv");

/// Bundled display colour for `term`, if the palette table lists it.
pub fn display_colour(term: &str) -> Option<[u8; 3]> {
    PALETTE_CSV
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("term,"))
        .find_map(|line| {
            let mut f = line.split(',');
            if f.next()?.trim() != term {
                return None;
            }
            let mut rgb = [0u8; 3];
            for c in rgb.iter_mut() {
                *c = f.next()?.trim().parse().ok()?;
            }
            Some(rgb)
        })
}

/// One colour per model term; terms missing from the table are drawn with their centre colour.
pub fn model_palette<T: Real>(model: &ColourModel<T>) -> Vec<[u8; 3]> {
    let conv = LabConverter::<T>::d65();
    model
        .terms()
        .iter()
        .map(|t| {
            display_colour(&t.name).unwrap_or_else(|| conv.lab_to_srgb(t.centre()).colour.to_u8())
        })
        .collect()
}

//! Deterministic synthetic data: focal-colour patch corpora, extension
//! examples and ground truth sampled from a known model.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::colourspace::{Lab, LabConverter};
use crate::ellipsoid::ColourModel;
use crate::error::{Error, Result};
use crate::fitting::MembershipGroundTruth;
use crate::image_io::{encode_grey_png, encode_rgb_png};
use crate::scalar::{lit, Real};

/// Five sRGB exemplars per basic term, canonical term order.
pub const FOCAL_EXEMPLARS: [(&str, [[u8; 3]; 5]); 11] = [
    (
        "black",
        [
            [0, 0, 0],
            [20, 20, 20],
            [30, 28, 28],
            [15, 15, 25],
            [40, 38, 36],
        ],
    ),
    (
        "blue",
        [
            [20, 60, 200],
            [40, 90, 220],
            [10, 30, 140],
            [110, 150, 210],
            [60, 100, 150],
        ],
    ),
    (
        "brown",
        [
            [120, 70, 30],
            [150, 80, 20],
            [140, 80, 30],
            [80, 45, 20],
            [110, 75, 50],
        ],
    ),
    (
        "green",
        [
            [30, 160, 40],
            [0, 120, 40],
            [90, 190, 80],
            [20, 140, 110],
            [70, 140, 100],
        ],
    ),
    (
        "grey",
        [
            [128, 128, 128],
            [100, 100, 100],
            [160, 160, 160],
            [75, 75, 75],
            [190, 190, 190],
        ],
    ),
    (
        "orange",
        [
            [255, 140, 0],
            [240, 120, 20],
            [255, 165, 60],
            [220, 100, 10],
            [250, 150, 90],
        ],
    ),
    (
        "pink",
        [
            [255, 170, 200],
            [250, 140, 180],
            [240, 190, 210],
            [255, 105, 150],
            [245, 130, 130],
        ],
    ),
    (
        "purple",
        [
            [120, 40, 150],
            [90, 30, 120],
            [150, 70, 180],
            [70, 20, 100],
            [150, 90, 170],
        ],
    ),
    (
        "red",
        [
            [220, 20, 30],
            [180, 10, 20],
            [255, 40, 40],
            [140, 15, 20],
            [200, 30, 70],
        ],
    ),
    (
        "white",
        [
            [255, 255, 255],
            [245, 245, 245],
            [250, 250, 240],
            [235, 240, 245],
            [230, 230, 230],
        ],
    ),
    (
        "yellow",
        [
            [255, 230, 0],
            [250, 220, 40],
            [255, 240, 90],
            [230, 200, 10],
            [255, 250, 130],
        ],
    ),
];

/// Cream reference colour used by the extension fixtures.
pub const CREAM: [u8; 3] = [255, 253, 208];

pub const CORPUS_NOISE_SIGMA: f64 = 2.0;
/// Side of each focal-corpus patch.
pub const CORPUS_PATCH_SIZE: u32 = 16;
pub const CORPUS_SEED: u64 = 11;
pub const CREAM_TRAINING_SEED: u64 = 21;
pub const CREAM_HELDOUT_SEED: u64 = 22;
pub const THREE_TERM_SEED: u64 = 31;

/// An 8-bit sRGB image with an optional selection mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticImage {
    pub term: String,
    pub file_name: String,
    pub width: u32,
    pub height: u32,
    pub rgb: Vec<[u8; 3]>,
    pub mask: Option<Vec<bool>>,
}

impl SyntheticImage {
    /// Writes `dir/<term>/<file>` and, when masked, `dir/<term>/masks/<file>`.
    pub fn write_into(&self, dir: &Path) -> Result<()> {
        let term_dir = dir.join(&self.term);
        fs::create_dir_all(&term_dir).map_err(|e| Error::io(&term_dir, e))?;
        let path = term_dir.join(&self.file_name);
        fs::write(&path, encode_rgb_png(self.width, self.height, &self.rgb))
            .map_err(|e| Error::io(&path, e))?;
        if let Some(mask) = &self.mask {
            let mdir = term_dir.join("masks");
            fs::create_dir_all(&mdir).map_err(|e| Error::io(&mdir, e))?;
            let mpath = mdir.join(&self.file_name);
            let grey: Vec<u8> = mask.iter().map(|&m| if m { 255 } else { 0 }).collect();
            fs::write(&mpath, encode_grey_png(self.width, self.height, &grey))
                .map_err(|e| Error::io(&mpath, e))?;
        }
        Ok(())
    }
}

/// Adds isotropic Gaussian noise in L\*a\*b\* around `base` and re-encodes to 8-bit sRGB.
pub fn noisy_patch(base: Lab<f64>, sigma: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<[u8; 3]> {
    let conv = LabConverter::<f64>::d65();
    let noise = Normal::new(0.0, sigma).expect("valid sigma");
    (0..count)
        .map(|_| {
            let p = Lab::new(
                base.l + noise.sample(rng),
                base.a + noise.sample(rng),
                base.b + noise.sample(rng),
            );
            conv.lab_to_srgb(p).colour.to_u8()
        })
        .collect()
}

/// `terms × exemplars` uniform patches of side `size` with Lab noise of `sigma`.
pub fn patch_corpus(
    exemplars: &[(String, Vec<Lab<f64>>)],
    size: u32,
    sigma: f64,
    seed: u64,
) -> Vec<SyntheticImage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (term, colours) in exemplars {
        for (k, c) in colours.iter().enumerate() {
            out.push(SyntheticImage {
                term: term.clone(),
                file_name: format!("{term}_{k}.png"),
                width: size,
                height: size,
                rgb: noisy_patch(*c, sigma, (size * size) as usize, &mut rng),
                mask: None,
            });
        }
    }
    out
}

/// The bundled 11-term focal corpus: 5 images per basic term, σ = 2.
pub fn focal_patch_corpus(size: u32, seed: u64) -> Vec<SyntheticImage> {
    let conv = LabConverter::<f64>::d65();
    let exemplars: Vec<(String, Vec<Lab<f64>>)> = FOCAL_EXEMPLARS
        .iter()
        .map(|(t, cs)| {
            (
                t.to_string(),
                cs.iter().map(|&c| conv.srgb8_to_lab(c)).collect(),
            )
        })
        .collect();
    patch_corpus(&exemplars, size, CORPUS_NOISE_SIGMA, seed)
}

/// Two masked training images with a cream object on differently coloured backgrounds.
pub fn cream_training_images(seed: u64) -> Vec<SyntheticImage> {
    let conv = LabConverter::<f64>::d65();
    let cream = conv.srgb8_to_lab(CREAM);
    let backgrounds = [[60u8, 90, 160], [110, 70, 40]];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (24u32, 24u32);
    backgrounds
        .iter()
        .enumerate()
        .map(|(i, bg)| {
            let inside = |x: u32, y: u32| (6..18).contains(&x) && (5..19).contains(&y);
            let object = noisy_patch(cream, CORPUS_NOISE_SIGMA, (w * h) as usize, &mut rng);
            let back = noisy_patch(
                conv.srgb8_to_lab(*bg),
                CORPUS_NOISE_SIGMA,
                (w * h) as usize,
                &mut rng,
            );
            let mut rgb = Vec::with_capacity((w * h) as usize);
            let mut mask = Vec::with_capacity((w * h) as usize);
            for y in 0..h {
                for x in 0..w {
                    let j = (y * w + x) as usize;
                    let m = inside(x, y);
                    rgb.push(if m { object[j] } else { back[j] });
                    mask.push(m);
                }
            }
            SyntheticImage {
                term: "cream".into(),
                file_name: format!("cream_{}.png", i + 1),
                width: w,
                height: h,
                rgb,
                mask: Some(mask),
            }
        })
        .collect()
}

/// A held-out uniform cream patch (different noise draw from the training images).
pub fn cream_heldout_patch(seed: u64) -> SyntheticImage {
    let conv = LabConverter::<f64>::d65();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SyntheticImage {
        term: "cream".into(),
        file_name: "cream_heldout.png".into(),
        width: 16,
        height: 16,
        rgb: noisy_patch(conv.srgb8_to_lab(CREAM), CORPUS_NOISE_SIGMA, 256, &mut rng),
        mask: None,
    }
}

/// Small red/green/blue corpus (two exemplars each) for quick end-to-end fits.
pub fn three_term_corpus(seed: u64) -> Vec<SyntheticImage> {
    let conv = LabConverter::<f64>::d65();
    let exemplars: Vec<(String, Vec<Lab<f64>>)> = FOCAL_EXEMPLARS
        .iter()
        .filter(|(t, _)| ["blue", "green", "red"].contains(t))
        .map(|(t, cs)| {
            (
                t.to_string(),
                cs[..2].iter().map(|&c| conv.srgb8_to_lab(c)).collect(),
            )
        })
        .collect();
    patch_corpus(&exemplars, 12, CORPUS_NOISE_SIGMA, seed)
}

/// Writes every bundled fixture under `root`:
/// `focal_corpus/`, `cream_examples/`, `cream_heldout.png` and `three_terms/`.
pub fn write_fixtures(root: &Path) -> Result<()> {
    for im in focal_patch_corpus(CORPUS_PATCH_SIZE, CORPUS_SEED) {
        im.write_into(&root.join("focal_corpus"))?;
    }
    for im in cream_training_images(CREAM_TRAINING_SEED) {
        im.write_into(&root.join("cream_examples"))?;
    }
    let held = cream_heldout_patch(CREAM_HELDOUT_SEED);
    let path = root.join(&held.file_name);
    fs::write(&path, encode_rgb_png(held.width, held.height, &held.rgb))
        .map_err(|e| Error::io(&path, e))?;
    for im in three_term_corpus(THREE_TERM_SEED) {
        im.write_into(&root.join("three_terms"))?;
    }
    Ok(())
}

/// Observations per bin emulated by [`sample_ground_truth`].
pub const SAMPLED_OBSERVATIONS: f64 = 1000.0;

/// Ground truth whose membership for each term is the model's own belongingness,
/// sampled at bin centres over the union of each term's box of ±`extent` semi-axes.
///
/// Memberships are rounded to multiples of 1/[`SAMPLED_OBSERVATIONS`], as if every
/// bin had been categorised that many times, so far-away bins carry exactly zero.
pub fn sample_ground_truth<T: Real>(
    model: &ColourModel<T>,
    bin_size: T,
    extent: T,
) -> Result<MembershipGroundTruth<T>> {
    let names = model.names().iter().map(|s| s.to_string()).collect();
    let mut gt = MembershipGroundTruth::new(names, bin_size)?;
    let mut lo = [T::infinity(); 3];
    let mut hi = [T::neg_infinity(); 3];
    for t in model.terms() {
        let c = t.centre().to_array();
        let r = t
            .ellipsoid
            .semi_axes
            .iter()
            .fold(T::zero(), |a, &b| a.max(b))
            * extent;
        for i in 0..3 {
            lo[i] = lo[i].min(c[i] - r);
            hi[i] = hi[i].max(c[i] + r);
        }
    }
    let lo_idx = gt.bin_of(Lab::from_array(lo));
    let hi_idx = gt.bin_of(Lab::from_array(hi));
    let prepared = model.prepared();
    let mut buf = vec![T::zero(); model.len()];
    let n: T = lit(SAMPLED_OBSERVATIONS);
    for i in lo_idx[0]..=hi_idx[0] {
        for j in lo_idx[1]..=hi_idx[1] {
            for k in lo_idx[2]..=hi_idx[2] {
                let idx = [i, j, k];
                prepared.membership_into(&gt.bin_centre(idx).to_array(), &mut buf);
                for b in buf.iter_mut() {
                    *b = (*b * n).round() / n;
                }
                gt.insert(idx, buf.clone())?;
            }
        }
    }
    Ok(gt)
}

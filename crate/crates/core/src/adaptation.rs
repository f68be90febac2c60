//! Image-adaptive stretching of achromatic categories.
//!
//! The mean (a\*, b\*) of an image is its deviation from neutral grey. Each
//! achromatic ellipsoid is stretched along that direction by
//! `1 + κ·‖deviation‖`. The stretch scales the ellipsoid along the deviation
//! direction while fixing the plane conjugate to it, so the stretched
//! ellipsoid always contains the original: belongingness can only grow.

use crate::colourspace::Lab;
use crate::ellipsoid::{ColourModel, ColourTerm};
use crate::error::{Error, Result};
use crate::image_io::LabImage;
use crate::linalg::{self, Mat3};
use crate::scalar::{lit, Real};

/// Deviations shorter than this (Lab units) leave the model untouched.
pub const MIN_DEVIATION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptationConfig {
    pub achromatic_terms: Vec<String>,
    /// Stretch gain per Lab unit of mean chroma deviation.
    pub gain: f64,
}

impl Default for AdaptationConfig {
    fn default() -> Self {
        AdaptationConfig {
            achromatic_terms: vec!["black".into(), "grey".into(), "white".into()],
            gain: 1.0,
        }
    }
}

impl AdaptationConfig {
    pub fn with_gain(gain: f64) -> Self {
        AdaptationConfig {
            gain,
            ..Self::default()
        }
    }
}

/// Mean (a\*, b\*) over all pixels.
pub fn mean_chroma_deviation<T: Real>(image: &LabImage<T>) -> [T; 2] {
    if image.pixels.is_empty() {
        return [T::zero(); 2];
    }
    let n = T::from_usize(image.pixels.len()).unwrap();
    let (sa, sb) = image
        .pixels
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), p| (a + p.a, b + p.b));
    [sa / n, sb / n]
}

/// Stretches `q` by `factor` along the world direction `dir` (unit length).
///
/// `Q' = Q − β (Q w)(Q w)ᵀ / (wᵀ Q w)` with `β = 1 − 1/factor²`: the radius along
/// `w` grows by `factor` and `dᵀQ'd ≤ dᵀQd` for every `d`.
pub fn stretch_quadric<T: Real>(q: &Mat3<T>, dir: &[T; 3], factor: T) -> Mat3<T> {
    let qw = linalg::mul_mv(q, dir);
    let wqw = linalg::dot(dir, &qw);
    let beta = T::one() - T::one() / (factor * factor);
    let mut out = *q;
    // fill the upper triangle and mirror it so the result is exactly symmetric
    for (i, &qi) in qw.iter().enumerate() {
        for (j, &qj) in qw.iter().enumerate().skip(i) {
            let v = (q[i][j] + q[j][i]) / lit(2.0) - beta * (qi * qj) / wqw;
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

/// Copy of `model` with its achromatic terms stretched towards the image's chroma cast.
pub fn adapt_model<T: Real>(
    model: &ColourModel<T>,
    image: &LabImage<T>,
    config: &AdaptationConfig,
) -> Result<ColourModel<T>> {
    adapt_model_to_deviation(model, mean_chroma_deviation(image), config)
}

pub fn adapt_model_to_deviation<T: Real>(
    model: &ColourModel<T>,
    deviation: [T; 2],
    config: &AdaptationConfig,
) -> Result<ColourModel<T>> {
    if !(config.gain >= 0.0) || !config.gain.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "adaptation gain must be non-negative, got {}",
            config.gain
        )));
    }
    for name in &config.achromatic_terms {
        if model.index_of(name).is_none() {
            return Err(Error::UnknownTerm(name.clone()));
        }
    }
    let magnitude = (deviation[0] * deviation[0] + deviation[1] * deviation[1]).sqrt();
    if magnitude < lit(MIN_DEVIATION) || config.gain == 0.0 {
        return Ok(model.clone());
    }
    let dir = [
        T::zero(),
        deviation[0] / magnitude,
        deviation[1] / magnitude,
    ];
    let factor = T::one() + lit::<T>(config.gain) * magnitude;
    let terms = model
        .terms()
        .iter()
        .map(|t| {
            if config.achromatic_terms.contains(&t.name) {
                let q = stretch_quadric(&t.shape_matrix(), &dir, factor);
                let adapted = ColourTerm {
                    quadric: Some(q),
                    ..t.clone()
                };
                adapted.validate()?;
                Ok(adapted)
            } else {
                Ok(t.clone())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    ColourModel::new(terms)
}

/// Lab point `distance` units from `from` along the (a\*, b\*) direction `dir`.
pub fn offset_in_chroma_plane<T: Real>(from: Lab<T>, dir: [T; 2], distance: T) -> Lab<T> {
    let n = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    Lab::new(
        from.l,
        from.a + distance * dir[0] / n,
        from.b + distance * dir[1] / n,
    )
}

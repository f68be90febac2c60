//! Colour naming with fuzzy ellipsoidal categories in CIE L\*a\*b\*.
//!
//! Each colour term is a rotated ellipsoid (centre, semi-axes, three rotation
//! angles) plus a sigmoid steepness. A pixel's belongingness to a term is a
//! logistic function of how far it lies beyond the ellipsoid surface along the
//! ray from the centre; a pixel is named by the term with the highest
//! belongingness. Terms are learnt from segmented example images by
//! box-constrained least squares.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the `*64` / `*32`
//! aliases below fix the scalar type.

// `!(x > 0)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptation;
pub mod colourspace;
pub mod dataset;
pub mod ellipsoid;
pub mod error;
pub mod evaluation;
pub mod fitting;
pub mod image_io;
pub mod linalg;
pub mod model_file;
pub mod naming;
pub mod palette;
pub mod scalar;
pub mod synthetic;

pub use adaptation::{adapt_model, AdaptationConfig};
pub use colourspace::{lab_to_srgb, srgb_to_lab, Lab, LabConverter, Srgb, WhitePoint};
pub use ellipsoid::{
    belongingness, half_height_distance, membership_vector, name_pixel, rotation_matrix,
    ColourModel, ColourTerm, Ellipsoid, BASIC_TERMS,
};
pub use error::{Error, Result};
pub use fitting::{FitConfig, MembershipGroundTruth, ParameterBounds};
pub use image_io::LabImage;
pub use model_file::{model_from_json, model_to_json, read_model, ModelFile};
pub use naming::name_image;
pub use scalar::Real;

pub type Lab64 = Lab<f64>;
pub type Lab32 = Lab<f32>;
pub type Ellipsoid64 = Ellipsoid<f64>;
pub type Ellipsoid32 = Ellipsoid<f32>;
pub type ColourTerm64 = ColourTerm<f64>;
pub type ColourTerm32 = ColourTerm<f32>;
pub type ColourModel64 = ColourModel<f64>;
pub type ColourModel32 = ColourModel<f32>;
pub type GroundTruth64 = MembershipGroundTruth<f64>;
pub type LabImage64 = LabImage<f64>;

//! JSON model files.
//!
//! Keys are written in a fixed order and numbers in shortest round-trip form,
//! so `write(read(f)) == f` byte for byte for any file this module wrote.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::colourspace::Lab;
use crate::ellipsoid::{ColourModel, ColourSpace, ColourTerm, Ellipsoid};
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

pub const FORMAT_VERSION: u32 = 1;
pub const ROTATION_CONVENTION: &str =
    "R = R_L(theta) * R_a(phi) * R_b(gamma); rotations about the L*, a*, b* axes; columns of R are the semi-axis directions; radians";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub colour_space: String,
    pub rotation_convention: String,
    pub terms: Vec<TermRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub name: String,
    pub centre: [f64; 3],
    pub semi_axes: [f64; 3],
    pub rotation: [f64; 3],
    pub steepness: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadric: Option<[[f64; 3]; 3]>,
}

fn arr<T: Real>(v: [T; 3]) -> [f64; 3] {
    v.map(to_f64)
}

fn from_arr<T: Real>(v: [f64; 3]) -> [T; 3] {
    v.map(lit)
}

impl ModelFile {
    pub fn from_model<T: Real>(model: &ColourModel<T>) -> Self {
        let terms = model
            .terms()
            .iter()
            .map(|t| TermRecord {
                name: t.name.clone(),
                centre: arr(t.ellipsoid.centre.to_array()),
                semi_axes: arr(t.ellipsoid.semi_axes),
                rotation: arr(t.ellipsoid.rotation),
                steepness: to_f64(t.steepness),
                quadric: t.quadric.map(|q| q.map(arr)),
            })
            .collect();
        ModelFile {
            format_version: FORMAT_VERSION,
            colour_space: model.colour_space().tag().to_string(),
            rotation_convention: ROTATION_CONVENTION.to_string(),
            terms,
        }
    }

    pub fn to_model<T: Real>(&self) -> Result<ColourModel<T>> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::InvalidModel(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if ColourSpace::from_tag(&self.colour_space).is_none() {
            return Err(Error::InvalidModel(format!(
                "unsupported colour_space '{}'",
                self.colour_space
            )));
        }
        if self.rotation_convention != ROTATION_CONVENTION {
            return Err(Error::InvalidModel(format!(
                "unsupported rotation_convention '{}'",
                self.rotation_convention
            )));
        }
        let terms = self
            .terms
            .iter()
            .map(|r| {
                let ellipsoid = Ellipsoid {
                    centre: Lab::from_array(from_arr(r.centre)),
                    semi_axes: from_arr(r.semi_axes),
                    rotation: from_arr(r.rotation),
                };
                let term = ColourTerm {
                    name: r.name.clone(),
                    ellipsoid,
                    steepness: lit(r.steepness),
                    quadric: r.quadric.map(|q| q.map(from_arr)),
                };
                term.validate()?;
                Ok(term)
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::InvalidModel(e.to_string()))?;
        ColourModel::new(terms).map_err(|e| Error::InvalidModel(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model file serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidModel(e.to_string()))
    }
}

pub fn model_to_json<T: Real>(model: &ColourModel<T>) -> String {
    ModelFile::from_model(model).to_json()
}

pub fn model_from_json<T: Real>(text: &str) -> Result<ColourModel<T>> {
    ModelFile::from_json(text)?.to_model()
}

pub fn read_model<T: Real>(path: &Path) -> Result<ColourModel<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text).map_err(|e| Error::format(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adaptation::{adapt_model_to_deviation, AdaptationConfig};

    fn model() -> ColourModel<f64> {
        let t = |n: &str, c: [f64; 3], ax: [f64; 3], rot: [f64; 3], g: f64| {
            ColourTerm::new(n, Ellipsoid::new(Lab::from_array(c), ax, rot).unwrap(), g).unwrap()
        };
        ColourModel::new(vec![
            t(
                "grey",
                [51.3, 0.1, -0.2],
                [22.0, 4.5, 6.25],
                [0.1, 0.0, 3.0],
                0.7,
            ),
            t(
                "red",
                [48.123456789, 61.0 / 3.0, 40.0],
                [11.0, 12.5, 13.0],
                [1.0 / 7.0, 0.5, 2.0],
                0.3333333333333333,
            ),
            t("white", [95.0, 0.0, 0.0], [8.0, 5.0, 5.0], [0.0; 3], 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn round_trip_is_exact_and_byte_stable() {
        let m = model();
        let json = model_to_json(&m);
        let back: ColourModel<f64> = model_from_json(&json).unwrap();
        assert_eq!(back, m);
        assert_eq!(model_to_json(&back), json);
        let adapted = adapt_model_to_deviation(
            &m,
            [-7.3, 2.1],
            &AdaptationConfig {
                achromatic_terms: vec!["grey".into(), "white".into()],
                gain: 1.0,
            },
        )
        .unwrap();
        let json = model_to_json(&adapted);
        assert!(json.contains("\"quadric\""));
        let back: ColourModel<f64> = model_from_json(&json).unwrap();
        assert_eq!(back, adapted);
        assert_eq!(model_to_json(&back), json);
    }

    #[test]
    fn key_order_is_fixed() {
        let json = model_to_json(&model());
        let pos = |k: &str| json.find(k).unwrap();
        assert!(pos("format_version") < pos("colour_space"));
        assert!(pos("colour_space") < pos("rotation_convention"));
        assert!(pos("rotation_convention") < pos("\"terms\""));
        assert!(pos("\"name\"") < pos("\"centre\""));
        assert!(pos("\"centre\"") < pos("\"semi_axes\""));
        assert!(pos("\"semi_axes\"") < pos("\"rotation\""));
        assert!(pos("\"rotation\"") < pos("\"steepness\""));
        assert!(json.ends_with("}\n"));
    }

    #[test]
    fn rejects_bad_files() {
        let json = model_to_json(&model());
        let v2 = json.replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(matches!(
            model_from_json::<f64>(&v2),
            Err(Error::InvalidModel(_))
        ));
        let space = json.replace("CIELab", "CIELuv");
        assert!(model_from_json::<f64>(&space).is_err());
        let g = json.replace("\"steepness\": 1.0", "\"steepness\": 1.5");
        assert!(model_from_json::<f64>(&g).is_err());
        let extra = json.replacen("\"name\"", "\"colour\": 1, \"name\"", 1);
        assert!(model_from_json::<f64>(&extra).is_err());
        assert!(model_from_json::<f64>("{").is_err());
        let dup = json.replace("\"white\"", "\"grey\"");
        assert!(model_from_json::<f64>(&dup).is_err());
    }

    #[test]
    fn f32_models_load() {
        let m: ColourModel<f32> = model_from_json(&model_to_json(&model())).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.terms()[2].steepness, 1.0f32);
    }
}

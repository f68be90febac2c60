//! Colour categories as rotated ellipsoids with a sigmoidal membership falloff,
//! and max-pooling naming over a set of categories.

use crate::colourspace::Lab;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat3, Vec3};
use crate::scalar::{lit, Real};

/// Below this distance from the centre the direction to a pixel is undefined and
/// the half-height falls back to the mean semi-axis.
pub const DEGENERATE_DISTANCE: f64 = 1e-9;

/// Basic colour terms in the canonical (tie-break) order.
pub const BASIC_TERMS: [&str; 11] = [
    "black", "blue", "brown", "green", "grey", "orange", "pink", "purple", "red", "white", "yellow",
];

/// Orders term names: basic terms in [`BASIC_TERMS`] order first, then the rest alphabetically.
pub fn canonical_order<S: AsRef<str>>(names: &[S]) -> Vec<String> {
    let mut out: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
    out.sort_by(|x, y| {
        let rank = |s: &str| {
            BASIC_TERMS
                .iter()
                .position(|b| *b == s)
                .unwrap_or(BASIC_TERMS.len())
        };
        rank(x).cmp(&rank(y)).then_with(|| x.cmp(y))
    });
    out.dedup();
    out
}

/// Elementary rotations about the L\*, a\*, b\* axes composed as `R_L(θ)·R_a(φ)·R_b(γ)`.
pub fn rotation_matrix<T: Real>(angles: [T; 3]) -> Mat3<T> {
    let (o, z) = (T::one(), T::zero());
    let (s0, c0) = angles[0].sin_cos();
    let (s1, c1) = angles[1].sin_cos();
    let (s2, c2) = angles[2].sin_cos();
    let about_l = [[o, z, z], [z, c0, -s0], [z, s0, c0]];
    let about_a = [[c1, z, s1], [z, o, z], [-s1, z, c1]];
    let about_b = [[c2, -s2, z], [s2, c2, z], [z, z, o]];
    linalg::mul_mm(&linalg::mul_mm(&about_l, &about_a), &about_b)
}

/// Nine-parameter ellipsoid: centre, semi-axes and rotation angles (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipsoid<T> {
    pub centre: Lab<T>,
    pub semi_axes: [T; 3],
    pub rotation: [T; 3],
}

impl<T: Real> Ellipsoid<T> {
    pub fn new(centre: Lab<T>, semi_axes: [T; 3], rotation: [T; 3]) -> Result<Self> {
        let e = Ellipsoid {
            centre,
            semi_axes,
            rotation,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.centre.is_finite() {
            return Err(Error::InvalidParameter(
                "ellipsoid centre is not finite".into(),
            ));
        }
        if self
            .semi_axes
            .iter()
            .any(|&v| !(v > T::zero()) || !v.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "semi-axes must be positive and finite, got {:?}",
                self.semi_axes
            )));
        }
        if self
            .rotation
            .iter()
            .any(|&v| !(v >= T::zero() && v < T::PI()))
        {
            return Err(Error::InvalidParameter(format!(
                "rotation angles must lie in [0, pi), got {:?}",
                self.rotation
            )));
        }
        Ok(())
    }

    pub fn rotation_matrix(&self) -> Mat3<T> {
        rotation_matrix(self.rotation)
    }

    /// Positive definite `Q` with the surface `{p : (p−c)ᵀ Q (p−c) = 1}`.
    pub fn shape_matrix(&self) -> Mat3<T> {
        let r = self.rotation_matrix();
        let inv_sq = self.semi_axes.map(|s| T::one() / (s * s));
        let mut q = [[T::zero(); 3]; 3];
        for (i, row) in q.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).fold(T::zero(), |acc, k| acc + r[i][k] * inv_sq[k] * r[j][k]);
            }
        }
        q
    }

    pub fn mean_semi_axis(&self) -> T {
        (self.semi_axes[0] + self.semi_axes[1] + self.semi_axes[2]) / lit(3.0)
    }

    /// Left-hand side of the axis-aligned ellipsoid equation evaluated in the ellipsoid frame.
    pub fn implicit(&self, p: Lab<T>) -> T {
        let d = linalg::mul_mtv(
            &self.rotation_matrix(),
            &linalg::sub(&p.to_array(), &self.centre.to_array()),
        );
        (0..3).fold(T::zero(), |acc, i| {
            let x = d[i] / self.semi_axes[i];
            acc + x * x
        })
    }
}

/// Distance from the centre to the surface along the ray towards `p`.
pub fn half_height_distance<T: Real>(e: &Ellipsoid<T>, p: Lab<T>) -> T {
    let world = linalg::sub(&p.to_array(), &e.centre.to_array());
    let dist = linalg::norm(&world);
    if dist < lit(DEGENERATE_DISTANCE) {
        return e.mean_semi_axis();
    }
    let d = linalg::mul_mtv(&e.rotation_matrix(), &world);
    let s = (0..3).fold(T::zero(), |acc, i| {
        let x = d[i] / dist / e.semi_axes[i];
        acc + x * x
    });
    T::one() / s.sqrt()
}

/// Logistic falloff `1 / (1 + e^{g (d − h)})`.
#[inline]
pub fn sigmoid_membership<T: Real>(steepness: T, distance: T, half_height: T) -> T {
    T::one() / (T::one() + (steepness * (distance - half_height)).exp())
}

/// One named colour category.
///
/// `quadric` overrides the ellipsoid's shape matrix after image adaptation; the
/// nine-parameter ellipsoid is kept for provenance and the centre is shared.
#[derive(Debug, Clone, PartialEq)]
pub struct ColourTerm<T> {
    pub name: String,
    pub ellipsoid: Ellipsoid<T>,
    pub steepness: T,
    pub quadric: Option<Mat3<T>>,
}

impl<T: Real> ColourTerm<T> {
    pub fn new(name: impl Into<String>, ellipsoid: Ellipsoid<T>, steepness: T) -> Result<Self> {
        let t = ColourTerm {
            name: name.into(),
            ellipsoid,
            steepness,
            quadric: None,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::InvalidParameter("term name is empty".into()));
        }
        self.ellipsoid
            .validate()
            .map_err(|e| Error::InvalidParameter(format!("term '{}': {e}", self.name)))?;
        if !(self.steepness > T::zero() && self.steepness <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "term '{}': steepness must lie in (0, 1], got {}",
                self.name, self.steepness
            )));
        }
        if let Some(q) = &self.quadric {
            let symmetric = (0..3).all(|i| (0..3).all(|j| q[i][j] == q[j][i]));
            let finite = q.iter().flatten().all(|v| v.is_finite());
            if !symmetric || !finite || !linalg::is_positive_definite(q) {
                return Err(Error::InvalidParameter(format!(
                    "term '{}': quadric override must be symmetric positive definite",
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub fn centre(&self) -> Lab<T> {
        self.ellipsoid.centre
    }

    pub fn shape_matrix(&self) -> Mat3<T> {
        self.quadric
            .unwrap_or_else(|| self.ellipsoid.shape_matrix())
    }

    /// Half-height distance honouring a quadric override.
    pub fn half_height(&self, p: Lab<T>) -> T {
        match &self.quadric {
            None => half_height_distance(&self.ellipsoid, p),
            Some(q) => {
                let d = linalg::sub(&p.to_array(), &self.ellipsoid.centre.to_array());
                let dist = linalg::norm(&d);
                if dist < lit(DEGENERATE_DISTANCE) {
                    self.ellipsoid.mean_semi_axis()
                } else {
                    dist / linalg::quad_form(q, &d).sqrt()
                }
            }
        }
    }

    pub fn prepared(&self) -> PreparedTerm<T> {
        PreparedTerm {
            centre: self.ellipsoid.centre.to_array(),
            shape: self.shape_matrix(),
            steepness: self.steepness,
            fallback: self.ellipsoid.mean_semi_axis(),
        }
    }
}

/// Probability that `p` belongs to `term`.
pub fn belongingness<T: Real>(term: &ColourTerm<T>, p: Lab<T>) -> T {
    let dist = p.distance(&term.ellipsoid.centre);
    sigmoid_membership(term.steepness, dist, term.half_height(p))
}

/// A term with its shape matrix precomputed, for evaluating many points.
#[derive(Debug, Clone, Copy)]
pub struct PreparedTerm<T> {
    centre: Vec3<T>,
    shape: Mat3<T>,
    steepness: T,
    fallback: T,
}

impl<T: Real> PreparedTerm<T> {
    #[inline]
    pub fn belongingness(&self, p: &Vec3<T>) -> T {
        let d = linalg::sub(p, &self.centre);
        let dist = linalg::norm(&d);
        let h = if dist < lit(DEGENERATE_DISTANCE) {
            self.fallback
        } else {
            dist / linalg::quad_form(&self.shape, &d).sqrt()
        };
        sigmoid_membership(self.steepness, dist, h)
    }
}

/// Working colour space tag stored with every model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColourSpace {
    CieLab,
}

impl ColourSpace {
    pub fn tag(&self) -> &'static str {
        match self {
            ColourSpace::CieLab => "CIELab",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "CIELab" => Some(ColourSpace::CieLab),
            _ => None,
        }
    }
}

/// An ordered set of colour terms. Order is the tie-break order for naming.
#[derive(Debug, Clone, PartialEq)]
pub struct ColourModel<T> {
    terms: Vec<ColourTerm<T>>,
    colour_space: ColourSpace,
}

impl<T: Real> ColourModel<T> {
    pub fn new(terms: Vec<ColourTerm<T>>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidModel(
                "a model needs at least one term".into(),
            ));
        }
        for (i, t) in terms.iter().enumerate() {
            t.validate()?;
            if terms[..i].iter().any(|o| o.name == t.name) {
                return Err(Error::InvalidModel(format!(
                    "duplicate term name '{}'",
                    t.name
                )));
            }
        }
        Ok(ColourModel {
            terms,
            colour_space: ColourSpace::CieLab,
        })
    }

    pub fn terms(&self) -> &[ColourTerm<T>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn colour_space(&self) -> ColourSpace {
        self.colour_space
    }

    pub fn names(&self) -> Vec<&str> {
        self.terms.iter().map(|t| t.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.terms.iter().position(|t| t.name == name)
    }

    pub fn term(&self, name: &str) -> Option<&ColourTerm<T>> {
        self.terms.iter().find(|t| t.name == name)
    }

    pub fn into_terms(self) -> Vec<ColourTerm<T>> {
        self.terms
    }

    pub fn prepared(&self) -> PreparedModel<T> {
        PreparedModel {
            terms: self.terms.iter().map(ColourTerm::prepared).collect(),
        }
    }

    /// Independent per-term belongingness; not normalised.
    pub fn membership_vector(&self, p: Lab<T>) -> Vec<T> {
        self.terms.iter().map(|t| belongingness(t, p)).collect()
    }

    /// Index of the term with the highest belongingness, earliest on ties.
    pub fn name_index(&self, p: Lab<T>) -> usize {
        argmax_first(self.terms.iter().map(|t| belongingness(t, p)))
    }

    pub fn name_pixel(&self, p: Lab<T>) -> &str {
        &self.terms[self.name_index(p)].name
    }
}

/// Shape-matrix form of a whole model for bulk evaluation.
#[derive(Debug, Clone)]
pub struct PreparedModel<T> {
    terms: Vec<PreparedTerm<T>>,
}

impl<T: Real> PreparedModel<T> {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn membership_into(&self, p: &Vec3<T>, out: &mut [T]) {
        for (o, t) in out.iter_mut().zip(&self.terms) {
            *o = t.belongingness(p);
        }
    }

    pub fn name_index(&self, p: &Vec3<T>) -> usize {
        argmax_first(self.terms.iter().map(|t| t.belongingness(p)))
    }
}

/// Position of the first maximum.
pub fn argmax_first<T: PartialOrd, I: IntoIterator<Item = T>>(values: I) -> usize {
    let mut best: Option<(usize, T)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match &best {
            Some((_, b)) if !(v > *b) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i).unwrap_or(0)
}

/// `B_t` for each term of `model` at `p`.
pub fn membership_vector<T: Real>(model: &ColourModel<T>, p: Lab<T>) -> Vec<T> {
    model.membership_vector(p)
}

/// Name of the maximally-belonging term (ties: earliest in model order).
pub fn name_pixel<T: Real>(model: &ColourModel<T>, p: Lab<T>) -> &str {
    model.name_pixel(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn term(name: &str, c: [f64; 3], axes: [f64; 3], rot: [f64; 3], g: f64) -> ColourTerm<f64> {
        ColourTerm::new(
            name,
            Ellipsoid::new(Lab::from_array(c), axes, rot).unwrap(),
            g,
        )
        .unwrap()
    }

    #[test]
    fn zero_angles_give_identity() {
        let r = rotation_matrix([0.0f64; 3]);
        assert_eq!(r, linalg::identity::<f64>());
    }

    #[test]
    fn quarter_turn_about_l_maps_a_to_b() {
        let r = rotation_matrix([FRAC_PI_2, 0.0, 0.0]);
        let v = linalg::mul_mv(&r, &[0.0, 1.0, 0.0]);
        assert_abs_diff_eq!(v[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v[2], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rotation_is_orthonormal() {
        for angles in [[0.3, 1.1, 2.9], [3.0, 0.01, 1.57], [2.2, 2.2, 2.2]] {
            let r = rotation_matrix(angles);
            let rtr = linalg::mul_mm(&linalg::transpose(&r), &r);
            for (i, row) in rtr.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    assert_abs_diff_eq!(*v, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-12);
                }
            }
            assert_abs_diff_eq!(linalg::determinant(&r), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn half_height_on_axis_is_semi_axis() {
        let e = Ellipsoid::new(Lab::from_f64(0.0, 0.0, 0.0), [2.0, 3.0, 4.0], [0.0; 3]).unwrap();
        assert_abs_diff_eq!(
            half_height_distance(&e, Lab::from_f64(7.0, 0.0, 0.0)),
            2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            half_height_distance(&e, Lab::from_f64(0.0, -1.0, 0.0)),
            3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn half_height_diagonal_direction() {
        // h = 1/sqrt(0.5/1 + 0.5/4); h·u substituted back satisfies the implicit equation.
        let e = Ellipsoid::new(Lab::from_f64(0.0, 0.0, 0.0), [1.0, 2.0, 5.0], [0.0; 3]).unwrap();
        let h = half_height_distance(&e, Lab::from_f64(1.0, 1.0, 0.0));
        assert_abs_diff_eq!(h, 1.264_911_064_067_351_7, epsilon = 1e-12);
        let s = h / 2f64.sqrt();
        assert_abs_diff_eq!(e.implicit(Lab::from_f64(s, s, 0.0)), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn half_height_rotated_surface_point() {
        let e = Ellipsoid::new(
            Lab::from_f64(50.0, 10.0, -5.0),
            [7.0, 3.0, 2.0],
            [0.4, 2.1, 1.3],
        )
        .unwrap();
        let r = e.rotation_matrix();
        let off = linalg::mul_mv(&r, &[7.0, 0.0, 0.0]);
        let p = Lab::from_array([50.0 + off[0], 10.0 + off[1], -5.0 + off[2]]);
        assert_abs_diff_eq!(half_height_distance(&e, p), 7.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.distance(&e.centre), 7.0, epsilon = 1e-12);
    }

    #[test]
    fn half_height_centre_fallback() {
        let e = Ellipsoid::new(Lab::from_f64(1.0, 2.0, 3.0), [2.0, 3.0, 7.0], [0.0; 3]).unwrap();
        assert_eq!(half_height_distance(&e, e.centre), 4.0);
    }

    #[test]
    fn belongingness_scalar_cases() {
        let t = term("x", [0.0; 3], [2.0, 2.0, 2.0], [0.0; 3], 1.0);
        assert_eq!(belongingness(&t, Lab::from_f64(2.0, 0.0, 0.0)), 0.5);
        assert_abs_diff_eq!(
            belongingness(&t, Lab::from_f64(2.5, 0.0, 0.0)),
            0.377_540_668_798_145_4,
            epsilon = 1e-12
        );
        let wide = term("y", [0.0; 3], [60.0, 60.0, 60.0], [0.0; 3], 1.0);
        assert!((belongingness(&wide, Lab::from_f64(10.0, 0.0, 0.0)) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn centre_membership_uses_fallback() {
        let t = term("x", [5.0, 5.0, 5.0], [3.0, 6.0, 9.0], [0.0; 3], 0.7);
        let m = ColourModel::new(vec![t.clone()]).unwrap();
        let v = m.membership_vector(t.centre());
        assert_abs_diff_eq!(v[0], 1.0 / (1.0 + (-0.7f64 * 6.0).exp()), epsilon = 1e-15);
    }

    #[test]
    fn naming_picks_containing_ellipsoid() {
        let a = term("a", [20.0, 0.0, 0.0], [5.0; 3], [0.0; 3], 1.0);
        let b = term("b", [80.0, 0.0, 0.0], [5.0; 3], [0.0; 3], 1.0);
        let m = ColourModel::new(vec![a, b]).unwrap();
        assert_eq!(m.name_pixel(Lab::from_f64(22.0, 1.0, 0.0)), "a");
        assert_eq!(m.name_pixel(Lab::from_f64(79.0, 0.0, 1.0)), "b");
    }

    #[test]
    fn ties_go_to_earlier_term() {
        let a = term("a", [0.0; 3], [5.0; 3], [0.0; 3], 1.0);
        let b = term("b", [0.0; 3], [5.0; 3], [0.0; 3], 1.0);
        let m = ColourModel::new(vec![a, b]).unwrap();
        let v = m.membership_vector(Lab::from_f64(3.0, 3.0, 3.0));
        assert_eq!(v[0], v[1]);
        assert_eq!(m.name_pixel(Lab::from_f64(3.0, 3.0, 3.0)), "a");
        assert_eq!(argmax_first([1.0, 3.0, 3.0, 2.0]), 1);
    }

    #[test]
    fn single_term_model_names_everything() {
        let m = ColourModel::new(vec![term(
            "only",
            [50.0, 0.0, 0.0],
            [1.0; 3],
            [0.0; 3],
            0.1,
        )])
        .unwrap();
        for p in [[0.0, 0.0, 0.0], [100.0, 90.0, -90.0], [50.0, 0.0, 0.0]] {
            assert_eq!(m.name_pixel(Lab::from_array(p)), "only");
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        let c = Lab::from_f64(0.0, 0.0, 0.0);
        assert!(Ellipsoid::new(c, [0.0, 1.0, 1.0], [0.0; 3]).is_err());
        assert!(Ellipsoid::new(c, [1.0; 3], [PI, 0.0, 0.0]).is_err());
        assert!(Ellipsoid::new(c, [1.0; 3], [-0.1, 0.0, 0.0]).is_err());
        let e = Ellipsoid::new(c, [1.0; 3], [0.0; 3]).unwrap();
        assert!(ColourTerm::new("x", e, 0.0).is_err());
        assert!(ColourTerm::new("x", e, 1.5).is_err());
        assert!(ColourTerm::new("", e, 0.5).is_err());
        let t = ColourTerm::new("x", e, 0.5).unwrap();
        assert!(ColourModel::new(vec![t.clone(), t]).is_err());
        assert!(ColourModel::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn prepared_matches_direct() {
        let t = term(
            "x",
            [40.0, 10.0, -20.0],
            [12.0, 5.0, 8.0],
            [0.7, 1.9, 0.2],
            0.6,
        );
        let pt = t.prepared();
        for p in [[40.0, 10.0, -20.0], [45.0, 0.0, 0.0], [10.0, 30.0, 5.0]] {
            let a = belongingness(&t, Lab::from_array(p));
            let b = pt.belongingness(&p);
            assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn canonical_order_basic_first() {
        let names = ["yellow", "cream", "black", "aqua", "red"];
        assert_eq!(
            canonical_order(&names),
            ["black", "red", "yellow", "aqua", "cream"]
        );
    }
}

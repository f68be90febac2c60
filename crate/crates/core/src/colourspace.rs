//! sRGB ⇄ CIE L\*a\*b\* conversion.
//!
//! Path: sRGB (IEC 61966-2-1 transfer) → linear RGB → XYZ → L\*a\*b\*. The RGB→XYZ
//! matrix is derived from the sRGB primaries and the D65 chromaticity, so the
//! reference white maps to `M·[1,1,1]` exactly and greys land on the neutral axis.

use serde::{Deserialize, Serialize};

use crate::linalg::{inverse, mul_mv, Mat3, Vec3};
use crate::scalar::{lit, Real};

/// A point in CIE L\*a\*b\*.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Lab<T> {
    pub l: T,
    pub a: T,
    pub b: T,
}

impl<T: Real> Lab<T> {
    pub fn new(l: T, a: T, b: T) -> Self {
        Lab { l, a, b }
    }

    pub fn from_f64(l: f64, a: f64, b: f64) -> Self {
        Lab::new(lit(l), lit(a), lit(b))
    }

    pub fn to_array(self) -> Vec3<T> {
        [self.l, self.a, self.b]
    }

    pub fn from_array(v: Vec3<T>) -> Self {
        Lab::new(v[0], v[1], v[2])
    }

    pub fn is_finite(&self) -> bool {
        self.l.is_finite() && self.a.is_finite() && self.b.is_finite()
    }

    pub fn distance(&self, other: &Lab<T>) -> T {
        let (dl, da, db) = (self.l - other.l, self.a - other.a, self.b - other.b);
        (dl * dl + da * da + db * db).sqrt()
    }

    pub fn cast<U: Real>(self) -> Lab<U> {
        Lab::new(
            lit(self.l.to_f64().unwrap_or(f64::NAN)),
            lit(self.a.to_f64().unwrap_or(f64::NAN)),
            lit(self.b.to_f64().unwrap_or(f64::NAN)),
        )
    }
}

/// Normalised sRGB triple, channels in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Srgb<T> {
    pub r: T,
    pub g: T,
    pub b: T,
}

impl<T: Real> Srgb<T> {
    pub fn new(r: T, g: T, b: T) -> Self {
        Srgb { r, g, b }
    }

    pub fn from_u8(rgb: [u8; 3]) -> Self {
        let s = lit::<T>(255.0);
        Srgb::new(
            T::from_u8(rgb[0]).unwrap() / s,
            T::from_u8(rgb[1]).unwrap() / s,
            T::from_u8(rgb[2]).unwrap() / s,
        )
    }

    /// 16-bit channels are divided by 65535 before the transfer function.
    pub fn from_u16(rgb: [u16; 3]) -> Self {
        let s = lit::<T>(65535.0);
        Srgb::new(
            T::from_u16(rgb[0]).unwrap() / s,
            T::from_u16(rgb[1]).unwrap() / s,
            T::from_u16(rgb[2]).unwrap() / s,
        )
    }

    /// Rounds to the nearest 8-bit code value, clamping to `[0, 255]`.
    pub fn to_u8(self) -> [u8; 3] {
        let q = |v: T| {
            let x = (v.max(T::zero()).min(T::one()) * lit(255.0)).round();
            x.to_u8().unwrap_or(255)
        };
        [q(self.r), q(self.g), q(self.b)]
    }

    pub fn in_range(&self) -> bool {
        [self.r, self.g, self.b]
            .iter()
            .all(|&c| c >= T::zero() && c <= T::one())
    }
}

/// Reference white as CIE 1931 xy chromaticity (Y = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhitePoint {
    pub x: f64,
    pub y: f64,
}

impl WhitePoint {
    pub const D65: WhitePoint = WhitePoint {
        x: 0.3127,
        y: 0.3290,
    };
    pub const D50: WhitePoint = WhitePoint {
        x: 0.3457,
        y: 0.3585,
    };

    pub fn xyz<T: Real>(&self) -> Vec3<T> {
        [
            lit(self.x / self.y),
            T::one(),
            lit((1.0 - self.x - self.y) / self.y),
        ]
    }
}

impl Default for WhitePoint {
    fn default() -> Self {
        WhitePoint::D65
    }
}

/// Result of an inverse conversion that may have left the sRGB gamut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clipped<T> {
    pub colour: Srgb<T>,
    pub out_of_gamut: bool,
}

/// Precomputed sRGB ⇄ L\*a\*b\* converter for one white point.
#[derive(Debug, Clone, Copy)]
pub struct LabConverter<T> {
    rgb_to_xyz: Mat3<T>,
    xyz_to_rgb: Mat3<T>,
    white: Vec3<T>,
}

const SRGB_PRIMARIES: [(f64, f64); 3] = [(0.64, 0.33), (0.30, 0.60), (0.15, 0.06)];

impl<T: Real> LabConverter<T> {
    pub fn new(white_point: WhitePoint) -> Self {
        // Columns are the primaries' XYZ scaled so that RGB = (1,1,1) hits the sRGB (D65) white.
        let prim: Mat3<T> = {
            let col = |(x, y): (f64, f64)| [lit::<T>(x / y), T::one(), lit::<T>((1.0 - x - y) / y)];
            let (r, g, b) = (
                col(SRGB_PRIMARIES[0]),
                col(SRGB_PRIMARIES[1]),
                col(SRGB_PRIMARIES[2]),
            );
            [[r[0], g[0], b[0]], [r[1], g[1], b[1]], [r[2], g[2], b[2]]]
        };
        let d65 = WhitePoint::D65.xyz::<T>();
        let scale = mul_mv(
            &inverse(&prim).expect("sRGB primaries are independent"),
            &d65,
        );
        let mut rgb_to_xyz = prim;
        for row in rgb_to_xyz.iter_mut() {
            for (v, s) in row.iter_mut().zip(scale) {
                *v = *v * s;
            }
        }
        let xyz_to_rgb = inverse(&rgb_to_xyz).expect("sRGB matrix is invertible");
        let white = if white_point == WhitePoint::D65 {
            // exact image of RGB white, keeps greys on the neutral axis
            mul_mv(&rgb_to_xyz, &[T::one(); 3])
        } else {
            white_point.xyz()
        };
        LabConverter {
            rgb_to_xyz,
            xyz_to_rgb,
            white,
        }
    }

    pub fn d65() -> Self {
        Self::new(WhitePoint::D65)
    }

    pub fn srgb_to_lab(&self, c: Srgb<T>) -> Lab<T> {
        let lin = [decode_gamma(c.r), decode_gamma(c.g), decode_gamma(c.b)];
        self.xyz_to_lab(mul_mv(&self.rgb_to_xyz, &lin))
    }

    pub fn srgb8_to_lab(&self, rgb: [u8; 3]) -> Lab<T> {
        self.srgb_to_lab(Srgb::from_u8(rgb))
    }

    pub fn lab_to_srgb(&self, lab: Lab<T>) -> Clipped<T> {
        let lin = mul_mv(&self.xyz_to_rgb, &self.lab_to_xyz(lab));
        let raw = Srgb::new(
            encode_gamma(lin[0]),
            encode_gamma(lin[1]),
            encode_gamma(lin[2]),
        );
        let tol = lit::<T>(1e-9);
        let out_of_gamut = [raw.r, raw.g, raw.b]
            .iter()
            .any(|&v| !(v >= -tol && v <= T::one() + tol));
        let clip = |v: T| v.max(T::zero()).min(T::one());
        Clipped {
            colour: Srgb::new(clip(raw.r), clip(raw.g), clip(raw.b)),
            out_of_gamut,
        }
    }

    pub fn xyz_to_lab(&self, xyz: Vec3<T>) -> Lab<T> {
        let fx = lab_f(xyz[0] / self.white[0]);
        let fy = lab_f(xyz[1] / self.white[1]);
        let fz = lab_f(xyz[2] / self.white[2]);
        Lab::new(
            lit::<T>(116.0) * fy - lit(16.0),
            lit::<T>(500.0) * (fx - fy),
            lit::<T>(200.0) * (fy - fz),
        )
    }

    pub fn lab_to_xyz(&self, lab: Lab<T>) -> Vec3<T> {
        let fy = (lab.l + lit(16.0)) / lit(116.0);
        let fx = fy + lab.a / lit(500.0);
        let fz = fy - lab.b / lit(200.0);
        [
            lab_f_inv(fx) * self.white[0],
            lab_f_inv(fy) * self.white[1],
            lab_f_inv(fz) * self.white[2],
        ]
    }
}

/// sRGB → L\*a\*b\* for the given white point.
pub fn srgb_to_lab<T: Real>(c: Srgb<T>, white_point: WhitePoint) -> Lab<T> {
    LabConverter::new(white_point).srgb_to_lab(c)
}

/// L\*a\*b\* → sRGB with per-channel clipping; `out_of_gamut` reports whether clipping happened.
pub fn lab_to_srgb<T: Real>(c: Lab<T>, white_point: WhitePoint) -> Clipped<T> {
    LabConverter::new(white_point).lab_to_srgb(c)
}

fn decode_gamma<T: Real>(v: T) -> T {
    if v <= lit(0.04045) {
        v / lit(12.92)
    } else {
        ((v + lit(0.055)) / lit(1.055)).powf(lit(2.4))
    }
}

fn encode_gamma<T: Real>(v: T) -> T {
    if v <= lit(0.0031308) {
        v * lit(12.92)
    } else {
        lit::<T>(1.055) * v.powf(lit(1.0 / 2.4)) - lit(0.055)
    }
}

// CIE constants in exact rational form: ε = 216/24389, κ = 24389/27.
fn lab_f<T: Real>(t: T) -> T {
    let eps = lit::<T>(216.0 / 24389.0);
    let kappa = lit::<T>(24389.0 / 27.0);
    if t > eps {
        t.cbrt()
    } else {
        (kappa * t + lit(16.0)) / lit(116.0)
    }
}

fn lab_f_inv<T: Real>(f: T) -> T {
    let delta = lit::<T>(6.0 / 29.0);
    if f > delta {
        f * f * f
    } else {
        (lit::<T>(116.0) * f - lit(16.0)) * lit(27.0 / 24389.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn white_and_black() {
        let conv = LabConverter::<f64>::d65();
        let w = conv.srgb8_to_lab([255, 255, 255]);
        assert_abs_diff_eq!(w.l, 100.0, epsilon = 1e-6);
        assert_abs_diff_eq!(w.a, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(w.b, 0.0, epsilon = 1e-6);
        let k = conv.srgb8_to_lab([0, 0, 0]);
        assert_abs_diff_eq!(k.l, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(k.a, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(k.b, 0.0, epsilon = 1e-6);
    }

    // Reference values from an independent CIE implementation (colour-science 0.4.6, D65 2°).
    #[test]
    fn primaries_match_reference() {
        let conv = LabConverter::<f64>::d65();
        let cases = [
            ([255, 0, 0], [53.23288, 80.11118, 67.22370]),
            ([0, 255, 0], [87.73703, -86.18286, 83.18783]),
            ([0, 0, 255], [32.30259, 79.19808, -107.85035]),
            ([100, 150, 200], [60.50897, -2.77817, -30.92655]),
        ];
        for (rgb, want) in cases {
            let got = conv.srgb8_to_lab(rgb).to_array();
            for (g, w) in got.iter().zip(want) {
                assert_abs_diff_eq!(*g, w, epsilon = 0.05);
            }
        }
    }

    #[test]
    fn f32_path_agrees_with_f64() {
        let c64 = LabConverter::<f64>::d65().srgb8_to_lab([12, 200, 77]);
        let c32 = LabConverter::<f32>::d65().srgb8_to_lab([12, 200, 77]);
        assert!((c64.l - c32.l as f64).abs() < 1e-3);
        assert!((c64.a - c32.a as f64).abs() < 1e-3);
        assert!((c64.b - c32.b as f64).abs() < 1e-3);
    }

    #[test]
    fn lab_white_maps_to_255() {
        let out = lab_to_srgb(Lab::<f64>::from_f64(100.0, 0.0, 0.0), WhitePoint::D65);
        assert_eq!(out.colour.to_u8(), [255, 255, 255]);
        assert!(!out.out_of_gamut);
    }

    #[test]
    fn saturated_magenta_is_clipped() {
        let conv = LabConverter::<f64>::d65();
        // reference conversion gives linear-encoded R ≈ 1.2408 before clipping
        let lin = mul_mv(
            &conv.xyz_to_rgb,
            &conv.lab_to_xyz(Lab::from_f64(50.0, 150.0, 0.0)),
        );
        assert!(encode_gamma(lin[0]) > 1.0);
        let out = conv.lab_to_srgb(Lab::from_f64(50.0, 150.0, 0.0));
        assert!(out.out_of_gamut);
        assert!(out.colour.in_range());
    }

    #[test]
    fn round_trip_random_sample() {
        let conv = LabConverter::<f64>::d65();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100_000 {
            let rgb: [u8; 3] = [rng.random(), rng.random(), rng.random()];
            let back = conv.lab_to_srgb(conv.srgb8_to_lab(rgb)).colour.to_u8();
            for (x, y) in rgb.iter().zip(back) {
                assert!((*x as i32 - y as i32).abs() <= 1, "{rgb:?} -> {back:?}");
            }
        }
    }

    #[test]
    fn greys_are_neutral_and_monotone() {
        let conv = LabConverter::<f64>::d65();
        let mut prev = -1.0;
        for v in 0..=255u8 {
            let lab = conv.srgb8_to_lab([v, v, v]);
            assert!(
                lab.a.abs() < 1e-6 && lab.b.abs() < 1e-6,
                "grey {v}: {lab:?}"
            );
            assert!(lab.l > prev);
            prev = lab.l;
        }
    }

    #[test]
    fn sixteen_bit_normalisation() {
        let conv = LabConverter::<f64>::d65();
        let a = conv.srgb_to_lab(Srgb::from_u16([65535, 0, 0]));
        let b = conv.srgb8_to_lab([255, 0, 0]);
        assert_abs_diff_eq!(a.l, b.l, epsilon = 1e-12);
        let mid = conv.srgb_to_lab(Srgb::from_u16([32768, 32768, 32768]));
        assert!(mid.a.abs() < 1e-6);
    }
}

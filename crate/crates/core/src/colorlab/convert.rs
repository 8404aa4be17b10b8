use num_traits::Float;

use super::{lit, Lab, Lch, Rgb};

// sRGB primaries (IEC 61966-2-1), linear RGB -> XYZ.
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124, 0.3576, 0.1805],
    [0.2126, 0.7152, 0.0722],
    [0.0193, 0.1192, 0.9505],
];

const XYZ_TO_RGB: [[f64; 3]; 3] = [
    [3.240625477320054, -1.537207972210319, -0.4986285986982478],
    [-0.9689307147293196, 1.8757560608852415, 0.04151752384295395],
    [0.05571012044551064, -0.20402105059848671, 1.0569959422543882],
];

// D65 white as the image of linear RGB (1, 1, 1), so white maps to a = b = 0.
const WHITE: [f64; 3] = [0.9505, 1.0, 1.089];

const GAMUT_EPS: f64 = 1e-9;

fn decode_gamma<T: Float>(v: T) -> T {
    if v <= lit(0.04045) {
        v / lit(12.92)
    } else {
        ((v + lit(0.055)) / lit(1.055)).powf(lit(2.4))
    }
}

fn encode_gamma<T: Float>(v: T) -> T {
    if v <= lit(0.0031308) {
        v * lit(12.92)
    } else if v > T::zero() {
        lit::<T>(1.055) * v.powf(lit(1.0 / 2.4)) - lit(0.055)
    } else {
        v * lit(12.92)
    }
}

fn lab_f<T: Float>(t: T) -> T {
    let delta: T = lit(6.0 / 29.0);
    if t > delta * delta * delta {
        t.cbrt()
    } else {
        t / (lit::<T>(3.0) * delta * delta) + lit(4.0 / 29.0)
    }
}

fn lab_f_inv<T: Float>(t: T) -> T {
    let delta: T = lit(6.0 / 29.0);
    if t > delta {
        t * t * t
    } else {
        lit::<T>(3.0) * delta * delta * (t - lit(4.0 / 29.0))
    }
}

fn mat_mul<T: Float>(m: &[[f64; 3]; 3], v: [T; 3]) -> [T; 3] {
    let row = |r: &[f64; 3]| lit::<T>(r[0]) * v[0] + lit::<T>(r[1]) * v[1] + lit::<T>(r[2]) * v[2];
    [row(&m[0]), row(&m[1]), row(&m[2])]
}

pub fn srgb_to_lab<T: Float>(c: Rgb) -> Lab<T> {
    let lin = [c.r, c.g, c.b].map(|ch| decode_gamma(lit::<T>(f64::from(ch) / 255.0)));
    let xyz = mat_mul(&RGB_TO_XYZ, lin);
    let fx = lab_f(xyz[0] / lit(WHITE[0]));
    let fy = lab_f(xyz[1] / lit(WHITE[1]));
    let fz = lab_f(xyz[2] / lit(WHITE[2]));
    Lab::new(
        lit::<T>(116.0) * fy - lit(16.0),
        lit::<T>(500.0) * (fx - fy),
        lit::<T>(200.0) * (fy - fz),
    )
}

/// sRGB channels on the 0–255 scale before clamping or rounding.
pub fn lab_to_srgb_unclamped<T: Float>(c: Lab<T>) -> [T; 3] {
    let fy = (c.l + lit(16.0)) / lit(116.0);
    let fx = fy + c.a / lit(500.0);
    let fz = fy - c.b / lit(200.0);
    let xyz = [
        lit::<T>(WHITE[0]) * lab_f_inv(fx),
        lit::<T>(WHITE[1]) * lab_f_inv(fy),
        lit::<T>(WHITE[2]) * lab_f_inv(fz),
    ];
    mat_mul(&XYZ_TO_RGB, xyz).map(|v| encode_gamma(v) * lit(255.0))
}

/// Converts to 8-bit sRGB. The flag is `true` iff every channel lay in
/// `[0, 255]` (within 1e-9) before clamping.
pub fn lab_to_srgb<T: Float>(c: Lab<T>) -> (Rgb, bool) {
    let raw = lab_to_srgb_unclamped(c);
    let eps: T = lit(GAMUT_EPS);
    let in_gamut = raw.iter().all(|&v| v >= -eps && v <= lit::<T>(255.0) + eps);
    let [r, g, b] = raw.map(|v| {
        let v = v.max(T::zero()).min(lit(255.0)).round();
        v.to_u8().unwrap_or(0)
    });
    (Rgb::new(r, g, b), in_gamut)
}

pub fn in_srgb_gamut<T: Float>(c: Lab<T>) -> bool {
    lab_to_srgb(c).1
}

pub fn lab_to_lch<T: Float>(c: Lab<T>) -> Lch<T> {
    let chroma = c.a.hypot(c.b);
    let h = if chroma == T::zero() {
        T::zero()
    } else {
        let deg = c.b.atan2(c.a).to_degrees();
        let deg = if deg < T::zero() { deg + lit(360.0) } else { deg };
        if deg >= lit(360.0) {
            deg - lit(360.0)
        } else {
            deg
        }
    };
    Lch { l: c.l, c: chroma, h }
}

pub fn lch_to_lab<T: Float>(c: Lch<T>) -> Lab<T> {
    let h = c.h.to_radians();
    Lab::new(c.l, c.c * h.cos(), c.c * h.sin())
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn white_and_black() {
        let w: Lab<f64> = srgb_to_lab(Rgb::WHITE);
        assert_abs_diff_eq!(w.l, 100.0, epsilon = 1e-9);
        assert!(w.a.abs() < 0.01 && w.b.abs() < 0.01);
        let k: Lab<f64> = srgb_to_lab(Rgb::BLACK);
        assert_abs_diff_eq!(k.l, 0.0, epsilon = 1e-12);
        assert!(k.a.abs() < 1e-9 && k.b.abs() < 1e-9);
    }

    // Reference L* for #808080 from an independent sRGB -> Lab implementation
    // (scikit-image rgb2lab): 53.5850.
    #[test]
    fn mid_gray_lightness() {
        let g: Lab<f64> = srgb_to_lab(Rgb::new(128, 128, 128));
        assert_abs_diff_eq!(g.l, 53.585, epsilon = 0.01);
        assert!(g.a.abs() < 0.01 && g.b.abs() < 0.01);
    }

    #[test]
    fn lab_white_maps_to_white() {
        let (rgb, ok) = lab_to_srgb(Lab::new(100.0, 0.0, 0.0));
        assert_eq!(rgb, Rgb::WHITE);
        assert!(ok);
    }

    #[test]
    fn saturated_point_out_of_gamut() {
        let (rgb, ok) = lab_to_srgb(Lab::new(50.0, 120.0, -120.0));
        assert!(!ok);
        // clamped projection
        assert!(rgb.g == 0 || rgb.r == 255 || rgb.b == 255);
    }

    #[test]
    fn lattice_round_trip() {
        for r in (0..=255u16).step_by(8).chain([255]) {
            for g in (0..=255u16).step_by(8).chain([255]) {
                for b in (0..=255u16).step_by(8).chain([255]) {
                    let c = Rgb::new(r as u8, g as u8, b as u8);
                    let (back, ok) = lab_to_srgb(srgb_to_lab::<f64>(c));
                    assert!(ok, "{c} left gamut");
                    for (x, y) in [(c.r, back.r), (c.g, back.g), (c.b, back.b)] {
                        assert!((i16::from(x) - i16::from(y)).abs() <= 1, "{c} -> {back}");
                    }
                }
            }
        }
    }

    #[test]
    fn f32_agrees_with_f64() {
        let c = Rgb::new(31, 119, 180);
        let a: Lab<f32> = srgb_to_lab(c);
        let b: Lab<f64> = srgb_to_lab(c);
        assert!((f64::from(a.l) - b.l).abs() < 1e-3);
        assert!((f64::from(a.a) - b.a).abs() < 1e-3);
        assert!((f64::from(a.b) - b.b).abs() < 1e-3);
    }

    #[test]
    fn lch_cases() {
        let z = lab_to_lch(Lab::new(50.0, 0.0, 0.0));
        assert_eq!((z.c, z.h), (0.0, 0.0));
        let t = lab_to_lch(Lab::new(50.0, 3.0, 4.0));
        assert_abs_diff_eq!(t.c, 5.0, epsilon = 1e-12);
        let n = lab_to_lch(Lab::new(50.0, -1.0, 0.0));
        assert_abs_diff_eq!(n.h, 180.0, epsilon = 1e-12);
        let q = lab_to_lch(Lab::new(50.0, 0.0, -2.0));
        assert_abs_diff_eq!(q.h, 270.0, epsilon = 1e-12);
        let back = lch_to_lab(t);
        assert_abs_diff_eq!(back.a, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(back.b, 4.0, epsilon = 1e-12);
    }
}

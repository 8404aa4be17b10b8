use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::Lab;
use crate::error::{Error, Result};

/// Size-dependent threshold line for one CIELAB axis, at 50% detection:
/// `threshold(s) = intercept + slope / s`, with `s` in degrees of visual angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisThreshold {
    pub intercept: f64,
    pub slope: f64,
}

impl AxisThreshold {
    pub const fn new(intercept: f64, slope: f64) -> Self {
        AxisThreshold { intercept, slope }
    }

    fn at(&self, size_deg: f64) -> f64 {
        self.intercept + self.slope / size_deg
    }
}

/// Coefficients of a size-dependent noticeable-difference model.
///
/// Thresholds scale linearly with the detection level `p`; the coefficients
/// are stated at `p = 0.5`. Mark sizes are given in pixels and converted to
/// visual angle with `px_per_degree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JndParams {
    pub profile: String,
    pub l: AxisThreshold,
    pub a: AxisThreshold,
    pub b: AxisThreshold,
    /// Fraction of observers expected to notice the difference, in `(0, 1]`.
    pub p: f64,
    pub px_per_degree: f64,
}

impl Default for JndParams {
    /// The published 50% fits of the size-dependent engineering model of
    /// color difference, at 75 px per degree of visual angle.
    ///
    /// The viewing geometry is a calibration: with it, lattice sampling,
    /// 200-means and the discriminable-subset step keep 34–39 colors across
    /// seeds. At 33 px/° (96 dpi at 50 cm) the same pipeline keeps ~115.
    fn default() -> Self {
        JndParams {
            profile: "engineering-2014-p50".to_owned(),
            l: AxisThreshold::new(5.079, 0.751),
            a: AxisThreshold::new(5.339, 1.541),
            b: AxisThreshold::new(5.349, 2.032),
            p: 0.5,
            px_per_degree: 75.0,
        }
    }
}

impl JndParams {
    pub fn validate(&self) -> Result<()> {
        for (axis, t) in [("L", self.l), ("a", self.a), ("b", self.b)] {
            if !t.intercept.is_finite() || !t.slope.is_finite() {
                return Err(Error::invalid(format!("JND {axis} coefficients must be finite")));
            }
            if t.intercept <= 0.0 {
                return Err(Error::invalid(format!("JND {axis} intercept must be positive")));
            }
            // A negative slope would make thresholds grow with mark size.
            if t.slope < 0.0 {
                return Err(Error::invalid(format!("JND {axis} slope must be non-negative")));
            }
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::invalid(format!("JND detection level {} not in (0, 1]", self.p)));
        }
        if !(self.px_per_degree.is_finite() && self.px_per_degree > 0.0) {
            return Err(Error::invalid("px_per_degree must be positive"));
        }
        Ok(())
    }

    /// Per-axis `[L, a, b]` thresholds for a mark of `mark_size_px` pixels.
    pub fn thresholds(&self, mark_size_px: f64) -> Result<[f64; 3]> {
        if !(mark_size_px.is_finite() && mark_size_px > 0.0) {
            return Err(Error::invalid(format!("mark size must be positive, got {mark_size_px}")));
        }
        self.validate()?;
        let size_deg = mark_size_px / self.px_per_degree;
        let scale = self.p / 0.5;
        Ok([self.l, self.a, self.b].map(|t| scale * t.at(size_deg)))
    }
}

/// A pair is discriminable iff at least one axis difference strictly
/// exceeds that axis's threshold at the given mark size.
pub fn jnd_discriminable<T: Float>(c1: Lab<T>, c2: Lab<T>, mark_size_px: f64, params: &JndParams) -> Result<bool> {
    let t = params.thresholds(mark_size_px)?;
    Ok(exceeds(c1, c2, &t))
}

pub(crate) fn exceeds<T: Float>(c1: Lab<T>, c2: Lab<T>, t: &[f64; 3]) -> bool {
    let d = |x: T, y: T| (x - y).abs().to_f64().unwrap_or(f64::NAN);
    d(c1.l, c2.l) > t[0] || d(c1.a, c2.a) > t[1] || d(c1.b, c2.b) > t[2]
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn identical_never_discriminable() {
        let c = Lab::new(60.0, 10.0, 10.0);
        assert!(!jnd_discriminable(c, c, 6.0, &JndParams::default()).unwrap());
    }

    #[test]
    fn full_lightness_contrast() {
        let p = JndParams::default();
        assert!(jnd_discriminable(Lab::new(0.0, 0.0, 0.0), Lab::new(100.0, 0.0, 0.0), 6.0, &p).unwrap());
    }

    #[test]
    fn threshold_is_exclusive() {
        let p = JndParams::default();
        let [tl, ta, tb] = p.thresholds(6.0).unwrap();
        // Zero base so `base + delta` recovers `delta` exactly.
        let base = Lab::new(0.0, 0.0, 0.0);
        for (d, delta) in [(0, tl), (1, ta), (2, tb)] {
            let mut at = base;
            let mut over = base;
            match d {
                0 => {
                    at.l += delta;
                    over.l += delta * (1.0 + 1e-9);
                }
                1 => {
                    at.a += delta;
                    over.a += delta * (1.0 + 1e-9);
                }
                _ => {
                    at.b += delta;
                    over.b += delta * (1.0 + 1e-9);
                }
            }
            assert!(!jnd_discriminable(base, at, 6.0, &p).unwrap(), "axis {d}");
            assert!(jnd_discriminable(base, over, 6.0, &p).unwrap(), "axis {d}");
        }
    }

    #[test]
    fn rejects_non_positive_size() {
        let p = JndParams::default();
        let c = Lab::new(50.0, 0.0, 0.0);
        assert!(matches!(jnd_discriminable(c, c, 0.0, &p), Err(Error::InvalidArgument(_))));
        assert!(jnd_discriminable(c, c, -3.0, &p).is_err());
    }

    #[test]
    fn rejects_decreasing_lines() {
        let mut p = JndParams::default();
        p.b.slope = -1.0;
        assert!(p.validate().is_err());
        let mut p = JndParams::default();
        p.p = 0.0;
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_differences(
            l in 0.0..100.0f64, a in -100.0..100.0f64, b in -100.0..100.0f64,
            dl in -30.0..30.0f64, da in -30.0..30.0f64, db in -30.0..30.0f64,
            grow in 1.0..3.0f64, size in 1.0..20.0f64, shrink in 0.1..1.0f64,
        ) {
            let p = JndParams::default();
            let c1 = Lab::new(l, a, b);
            let c2 = Lab::new(l + dl, a + da, b + db);
            let c3 = Lab::new(l + dl * grow, a + da * grow, b + db * grow);
            if jnd_discriminable(c1, c2, size, &p).unwrap() {
                prop_assert!(jnd_discriminable(c1, c3, size, &p).unwrap());
            }
            // Smaller marks never turn a non-discriminable pair discriminable.
            if !jnd_discriminable(c1, c2, size, &p).unwrap() {
                prop_assert!(!jnd_discriminable(c1, c2, size * shrink, &p).unwrap());
            }
        }
    }
}

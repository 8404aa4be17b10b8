use serde::{Deserialize, Serialize};

use crate::colorlab::{in_srgb_gamut, Lab};
use crate::error::{Error, Result};
use crate::LabColor;

/// Inclusive lattice `min, min + step, …` up to `max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl AxisRange {
    pub const fn new(min: f64, max: f64, step: f64) -> Self {
        AxisRange { min, max, step }
    }

    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(move |i| self.min + i as f64 * self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub l: AxisRange,
    pub a: AxisRange,
    pub b: AxisRange,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            l: AxisRange::new(25.0, 100.0, 5.0),
            a: AxisRange::new(-128.0, 127.0, 2.0),
            b: AxisRange::new(-128.0, 127.0, 2.0),
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for (axis, r) in [("L", self.l), ("a", self.a), ("b", self.b)] {
            if !(r.step.is_finite() && r.step > 0.0) {
                return Err(Error::invalid(format!("grid {axis} step must be positive")));
            }
            if !(r.min.is_finite() && r.max.is_finite() && r.min <= r.max) {
                return Err(Error::invalid(format!("grid {axis} range is empty")));
            }
        }
        Ok(())
    }
}

/// All lattice points that fall inside the sRGB gamut, in `L`-major order.
pub fn grid_sample_lab(spec: &GridSpec) -> Result<Vec<LabColor>> {
    spec.validate()?;
    let mut out = Vec::new();
    for l in spec.l.values() {
        for a in spec.a.values() {
            for b in spec.b.values() {
                let c = Lab::new(l, a, b);
                if in_srgb_gamut(c) {
                    out.push(c);
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_white_point() {
        let spec = GridSpec {
            l: AxisRange::new(100.0, 100.0, 5.0),
            a: AxisRange::new(0.0, 0.0, 2.0),
            b: AxisRange::new(0.0, 0.0, 2.0),
        };
        assert_eq!(grid_sample_lab(&spec).unwrap(), vec![Lab::new(100.0, 0.0, 0.0)]);
    }

    #[test]
    fn black_with_chroma_is_outside() {
        let spec = GridSpec {
            l: AxisRange::new(0.0, 0.0, 5.0),
            a: AxisRange::new(100.0, 100.0, 2.0),
            b: AxisRange::new(100.0, 100.0, 2.0),
        };
        assert!(grid_sample_lab(&spec).unwrap().is_empty());
    }

    #[test]
    fn default_lattice_shape() {
        let spec = GridSpec::default();
        assert_eq!(spec.l.values().count(), 16);
        assert_eq!(spec.a.values().count(), 128);
        assert_eq!(spec.a.values().last(), Some(126.0));
    }

    #[test]
    fn rejects_bad_steps() {
        let mut spec = GridSpec::default();
        spec.a.step = 0.0;
        assert!(grid_sample_lab(&spec).is_err());
        let mut spec = GridSpec::default();
        spec.l = AxisRange::new(50.0, 40.0, 5.0);
        assert!(grid_sample_lab(&spec).is_err());
    }
}

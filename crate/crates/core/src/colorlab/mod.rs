//! Color-space conversions, perceptual distance and size-dependent
//! discriminability.
//!
//! All conversions assume sRGB primaries with a D65 white and the 2°
//! observer.

mod convert;
mod delta_e;
mod jnd;

use std::fmt;
use std::str::FromStr;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use convert::{in_srgb_gamut, lab_to_lch, lab_to_srgb, lab_to_srgb_unclamped, lch_to_lab, srgb_to_lab};
pub use delta_e::ciede2000;
pub use jnd::{jnd_discriminable, AxisThreshold, JndParams};
pub(crate) use jnd::exceeds as jnd_exceeds;

/// Converts an `f64` literal into the working scalar.
#[inline]
pub(crate) fn lit<T: Float>(x: f64) -> T {
    T::from(x).expect("literal representable in scalar type")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const WHITE: Rgb = Rgb::new(255, 255, 255);
    pub const BLACK: Rgb = Rgb::new(0, 0, 0);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Rgb { r, g, b }
    }

    /// Parses `#RRGGBB` (the leading `#` is optional, digits are
    /// case-insensitive).
    pub fn from_hex(s: &str) -> Result<Self> {
        let digits = s.strip_prefix('#').unwrap_or(s);
        if digits.len() != 6 || !digits.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::invalid(format!("not a #RRGGBB color: {s:?}")));
        }
        let channel = |i: usize| u8::from_str_radix(&digits[i..i + 2], 16).expect("validated hex digits");
        Ok(Rgb::new(channel(0), channel(2), channel(4)))
    }

    /// Lowercase `#rrggbb`.
    pub fn to_hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.r, self.g, self.b)
    }

    pub fn to_lab<T: Float>(self) -> Lab<T> {
        srgb_to_lab(self)
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for Rgb {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rgb::from_hex(s)
    }
}

impl Serialize for Rgb {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Rgb::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// CIELAB coordinates. `l` is lightness in `[0, 100]`; `a` and `b` are the
/// green–red and blue–yellow opponent axes in `[-128, 127]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lab<T> {
    #[serde(rename = "L")]
    pub l: T,
    pub a: T,
    pub b: T,
}

impl<T: Float> Lab<T> {
    pub fn new(l: T, a: T, b: T) -> Self {
        Lab { l, a, b }
    }

    /// Like [`Lab::new`] but rejects coordinates outside the valid ranges.
    pub fn try_new(l: T, a: T, b: T) -> Result<Self> {
        let c = Lab::new(l, a, b);
        if c.is_valid() {
            Ok(c)
        } else {
            Err(Error::invalid(format!(
                "Lab out of range: L={:?} a={:?} b={:?}",
                l.to_f64(),
                a.to_f64(),
                b.to_f64()
            )))
        }
    }

    pub fn is_valid(&self) -> bool {
        let (lo, hi) = (lit::<T>(-128.0), lit::<T>(127.0));
        self.l >= T::zero()
            && self.l <= lit(100.0)
            && self.a >= lo
            && self.a <= hi
            && self.b >= lo
            && self.b <= hi
    }

    pub fn white() -> Self {
        Lab::new(lit(100.0), T::zero(), T::zero())
    }

    pub fn to_lch(self) -> Lch<T> {
        lab_to_lch(self)
    }

    pub fn cast<U: Float>(self) -> Lab<U> {
        Lab::new(
            U::from(self.l).expect("castable"),
            U::from(self.a).expect("castable"),
            U::from(self.b).expect("castable"),
        )
    }
}

/// Polar CIELAB: chroma `c ≥ 0` and hue angle `h` in degrees, `[0, 360)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lch<T> {
    #[serde(rename = "L")]
    pub l: T,
    #[serde(rename = "C")]
    pub c: T,
    pub h: T,
}

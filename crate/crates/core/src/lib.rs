//! Categorical palette design from empirical pairwise-accuracy data.
//!
//! The crate turns trial logs from correlation-judgment experiments into
//! pairwise accuracy matrices and uses them to rank color-only, shape-only
//! and redundant (color + shape) palettes. It also carries the machinery
//! used to build those experiments: the representative color pool
//! derivation, scatterplot stimulus synthesis and the validation analyses.
//!
//! Color math is generic over [`num_traits::Float`]; the rest of the crate
//! works in `f64` through the aliases below.

pub mod analysis;
pub mod catalog;
pub mod colorlab;
pub mod error;
pub mod evidence;
pub mod optimizer;
pub mod seed;
pub mod stimgen;
pub mod synthetic;

pub use error::{Error, Result};

/// CIELAB color in double precision.
pub type LabColor = colorlab::Lab<f64>;
/// CIELCh color in double precision.
pub type LchColor = colorlab::Lch<f64>;
/// 8-bit sRGB color.
pub type RgbColor = colorlab::Rgb;

/// Identifier of a color in a [`catalog::ColorPool`].
pub type ColorId = u16;
/// Identifier of a shape in a [`catalog::ShapeCatalog`].
pub type ShapeId = u16;

//! The color pool and shape catalog every palette draws from, plus the
//! pipeline that derives representative colors from a CIELAB lattice.

mod designer;
mod grid;
mod io;
mod kmeans;
mod subset;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::colorlab::{jnd_exceeds as exceeds, lab_to_srgb, JndParams, Lab, Rgb};
use crate::error::{Error, Result};
use crate::{ColorId, LabColor, ShapeId};

pub use designer::{designer_color_palettes, designer_tool_palettes, experiment_shape_palettes, DesignerPalette};
pub use grid::{grid_sample_lab, AxisRange, GridSpec};
pub use io::{
    load_default_pools, load_pools, parse_color_pool, parse_shape_catalog, write_color_pool, DEFAULT_COLOR_POOL,
    DEFAULT_SHAPE_CATALOG,
};
pub use kmeans::{kmeans_lab, kmeans_lab_detailed, KMeans, KMeansConfig};
pub use subset::{derive_representatives, max_jnd_subset, max_jnd_subset_indices, Derivation};

/// Number of entries in the bundled pools.
pub const DEFAULT_POOL_SIZE: usize = 39;
/// Mark size, in pixels, the pool must be discriminable at.
pub const DEFAULT_MARK_PX: f64 = 6.0;
/// Darkest lightness admitted into the pool.
pub const MIN_POOL_LIGHTNESS: f64 = 25.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorEntry {
    pub id: ColorId,
    pub lab: LabColor,
    pub rgb: Rgb,
    pub display_name: String,
    /// Added by hand rather than produced by the derivation pipeline.
    pub manual: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorPool {
    entries: Vec<ColorEntry>,
}

impl ColorPool {
    /// Checks that ids are unique and dense `0..len` and that each hex value
    /// is the rendering of its Lab coordinates.
    pub fn new(entries: Vec<ColorEntry>) -> Result<Self> {
        let mut entries = entries;
        entries.sort_by_key(|e| e.id);
        check_dense_ids(entries.iter().map(|e| e.id), "color pool")?;
        for e in &entries {
            if !e.lab.is_valid() {
                return Err(Error::InvalidEntry {
                    source_name: "color pool".into(),
                    entry: e.id.to_string(),
                    message: "Lab coordinates out of range".into(),
                });
            }
            let (rgb, in_gamut) = lab_to_srgb(e.lab);
            let off = [(rgb.r, e.rgb.r), (rgb.g, e.rgb.g), (rgb.b, e.rgb.b)]
                .iter()
                .any(|&(x, y)| (i16::from(x) - i16::from(y)).abs() > 1);
            if !in_gamut || off {
                return Err(Error::InvalidEntry {
                    source_name: "color pool".into(),
                    entry: e.id.to_string(),
                    message: format!("hex {} does not match Lab {:?}", e.rgb, e.lab),
                });
            }
        }
        Ok(ColorPool { entries })
    }

    /// Builds a pool from bare Lab colors with generated names.
    pub fn from_labs(labs: &[LabColor]) -> Result<Self> {
        let entries = labs
            .iter()
            .enumerate()
            .map(|(i, &lab)| ColorEntry {
                id: i as ColorId,
                lab,
                rgb: lab_to_srgb(lab).0,
                display_name: format!("color-{i}"),
                manual: false,
            })
            .collect();
        ColorPool::new(entries)
    }

    pub fn entries(&self) -> &[ColorEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: ColorId) -> Option<&ColorEntry> {
        self.entries.get(usize::from(id))
    }

    pub fn entry(&self, id: ColorId) -> Result<&ColorEntry> {
        self.get(id).ok_or(Error::UnknownId {
            kind: "color",
            id: id.into(),
        })
    }

    pub fn lab(&self, id: ColorId) -> LabColor {
        self.entries[usize::from(id)].lab
    }

    pub fn ids(&self) -> impl Iterator<Item = ColorId> + '_ {
        self.entries.iter().map(|e| e.id)
    }

    /// Full validation of a production pool: count, minimum lightness,
    /// pairwise discriminability and contrast with a white background.
    pub fn validate(&self, expected_len: usize, mark_size_px: f64, params: &JndParams) -> Result<()> {
        let violation = |entry: String, message: String| Error::InvalidEntry {
            source_name: "color pool".into(),
            entry,
            message,
        };
        if self.len() != expected_len {
            return Err(violation(
                "*".into(),
                format!("expected {expected_len} colors, found {}", self.len()),
            ));
        }
        let t = params.thresholds(mark_size_px)?;
        let white = Lab::white();
        for e in &self.entries {
            if e.lab.l < MIN_POOL_LIGHTNESS {
                return Err(violation(e.id.to_string(), format!("L = {} below {MIN_POOL_LIGHTNESS}", e.lab.l)));
            }
            if !exceeds(e.lab, white, &t) {
                return Err(violation(e.id.to_string(), "not discriminable from white".into()));
            }
        }
        for (i, x) in self.entries.iter().enumerate() {
            for y in &self.entries[i + 1..] {
                if !exceeds(x.lab, y.lab, &t) {
                    return Err(violation(
                        format!("{}/{}", x.id, y.id),
                        format!("pair not discriminable at {mark_size_px} px"),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FillClass {
    Filled,
    Unfilled,
    Open,
}

impl FillClass {
    pub const ALL: [FillClass; 3] = [FillClass::Filled, FillClass::Unfilled, FillClass::Open];

    pub fn as_str(self) -> &'static str {
        match self {
            FillClass::Filled => "filled",
            FillClass::Unfilled => "unfilled",
            FillClass::Open => "open",
        }
    }
}

impl fmt::Display for FillClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FillClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "filled" => Ok(FillClass::Filled),
            "unfilled" => Ok(FillClass::Unfilled),
            "open" => Ok(FillClass::Open),
            other => Err(Error::invalid(format!("unknown fill class {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeEntry {
    pub id: ShapeId,
    pub name: String,
    pub fill_class: FillClass,
    /// SVG path data inside the unit box `[0, 1] × [0, 1]`.
    pub path: String,
    pub source_tool: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeCatalog {
    entries: Vec<ShapeEntry>,
}

impl ShapeCatalog {
    pub fn new(entries: Vec<ShapeEntry>) -> Result<Self> {
        let mut entries = entries;
        entries.sort_by_key(|e| e.id);
        check_dense_ids(entries.iter().map(|e| e.id), "shape catalog")?;
        for e in &entries {
            if e.path.trim().is_empty() {
                return Err(Error::InvalidEntry {
                    source_name: "shape catalog".into(),
                    entry: e.id.to_string(),
                    message: "empty glyph path".into(),
                });
            }
        }
        Ok(ShapeCatalog { entries })
    }

    pub fn entries(&self) -> &[ShapeEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: ShapeId) -> Option<&ShapeEntry> {
        self.entries.get(usize::from(id))
    }

    pub fn entry(&self, id: ShapeId) -> Result<&ShapeEntry> {
        self.get(id).ok_or(Error::UnknownId {
            kind: "shape",
            id: id.into(),
        })
    }

    pub fn fill_class(&self, id: ShapeId) -> FillClass {
        self.entries[usize::from(id)].fill_class
    }

    pub fn ids(&self) -> impl Iterator<Item = ShapeId> + '_ {
        self.entries.iter().map(|e| e.id)
    }

    pub fn by_name(&self, name: &str) -> Option<&ShapeEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn validate(&self, expected_len: usize) -> Result<()> {
        if self.len() != expected_len {
            return Err(Error::InvalidEntry {
                source_name: "shape catalog".into(),
                entry: "*".into(),
                message: format!("expected {expected_len} shapes, found {}", self.len()),
            });
        }
        Ok(())
    }
}

fn check_dense_ids(ids: impl Iterator<Item = u16>, source_name: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    let mut count = 0usize;
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::InvalidEntry {
                source_name: source_name.into(),
                entry: id.to_string(),
                message: "duplicate id".into(),
            });
        }
        count += 1;
    }
    if let Some(missing) = (0..count as u16).find(|i| !seen.contains(i)) {
        return Err(Error::InvalidEntry {
            source_name: source_name.into(),
            entry: missing.to_string(),
            message: format!("ids must be dense 0..{}", count.saturating_sub(1)),
        });
    }
    Ok(())
}

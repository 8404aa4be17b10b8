use serde::{Deserialize, Serialize};

use super::{Components, Encoding, Palette, ScoredPalette};
use crate::catalog::{ColorPool, FillClass, ShapeCatalog};
use crate::error::Result;
use crate::evidence::Marker;
use crate::{ColorId, ShapeId};

/// One palette entry with display details resolved from the pools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_id: Option<ColorId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hex: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape_id: Option<ShapeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill_class: Option<FillClass>,
}

/// Serialized form of a ranked palette, shared by the CLI and the service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaletteRecord {
    pub rank: usize,
    pub score: f64,
    pub encoding: Encoding,
    pub n: usize,
    pub entries: Vec<EntryRecord>,
    pub components: Components,
}

impl PaletteRecord {
    pub fn new(s: &ScoredPalette, pool: &ColorPool, catalog: &ShapeCatalog) -> Result<Self> {
        let entries = s
            .palette
            .entries
            .iter()
            .map(|m| {
                let color = m.color.map(|c| pool.entry(c)).transpose()?;
                let shape = m.shape.map(|id| catalog.entry(id)).transpose()?;
                Ok(EntryRecord {
                    color_id: m.color,
                    hex: color.map(|c| c.rgb.to_hex()),
                    color_name: color.map(|c| c.display_name.clone()),
                    shape_id: m.shape,
                    shape: shape.map(|e| e.name.clone()),
                    fill_class: shape.map(|e| e.fill_class),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PaletteRecord {
            rank: s.rank,
            score: s.score,
            encoding: s.palette.encoding,
            n: s.palette.n(),
            entries,
            components: s.components,
        })
    }

    /// The palette these entries describe, ignoring display fields.
    pub fn palette(&self) -> Result<Palette> {
        Palette::new(
            self.encoding,
            self.entries
                .iter()
                .map(|e| Marker {
                    color: e.color_id,
                    shape: e.shape_id,
                })
                .collect(),
        )
    }
}

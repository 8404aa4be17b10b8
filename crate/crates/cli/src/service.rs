use std::str::FromStr;

use chromashape::catalog::{ColorEntry, ColorPool, ShapeCatalog, ShapeEntry};
use chromashape::colorlab::Rgb;
use chromashape::evidence::{Axis, BinSelector, EvidenceSource, PoolDims};
use chromashape::optimizer::{
    nearest_representative, Constraints, Encoding, EntryRecord, Model, PaletteRecord,
    ScoringWeights, SwapPart,
};
use chromashape::stimgen::{
    gen_engagement_check, gen_stimulus, render_svg, MarkStyle, StimulusData, StimulusSpec,
};
use chromashape::{ColorId, ShapeId};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::ApiError;

pub const PALETTES_SCHEMA: &str = "chromashape.palettes/1";
pub const SWAP_SCHEMA: &str = "chromashape.swap/1";
pub const MATRIX_SCHEMA: &str = "chromashape.matrix/1";
pub const COLORS_SCHEMA: &str = "chromashape.colors/1";
pub const SHAPES_SCHEMA: &str = "chromashape.shapes/1";
pub const MAX_K_OUT: usize = 100;

fn default_encoding() -> String {
    "auto".to_owned()
}

fn default_k() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateRequest {
    /// `auto`, `color_only`, `shape_only` or `redundant`.
    #[serde(default = "default_encoding")]
    pub encoding: String,
    pub n: usize,
    #[serde(default)]
    pub constraints: Constraints,
    /// Arbitrary colors to include, mapped to their nearest pool entry.
    #[serde(default)]
    pub required_hex: Vec<String>,
    #[serde(default)]
    pub weights: Option<ScoringWeights>,
    #[serde(default = "default_k", alias = "k")]
    pub k_out: usize,
    #[serde(default)]
    pub seed: u64,
}

impl GenerateRequest {
    pub fn new(encoding: &str, n: usize) -> Self {
        GenerateRequest {
            encoding: encoding.to_owned(),
            n,
            constraints: Constraints::default(),
            required_hex: Vec::new(),
            weights: None,
            k_out: default_k(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappedColor {
    pub input: String,
    pub color_id: ColorId,
    pub hex: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub schema: String,
    pub encoding: Encoding,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mapped_colors: Vec<MappedColor>,
    pub palettes: Vec<PaletteRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwapRequest {
    pub palette: PaletteRecord,
    pub position: usize,
    #[serde(default)]
    pub part: Option<SwapPart>,
    #[serde(default)]
    pub constraints: Constraints,
    #[serde(default)]
    pub weights: Option<ScoringWeights>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replacement {
    pub position: usize,
    pub before: EntryRecord,
    pub after: EntryRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapResponse {
    pub schema: String,
    pub palette: PaletteRecord,
    /// Constraints to send with the next swap; exclusions only grow.
    pub constraints: Constraints,
    pub replaced: Replacement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixCell {
    pub i: usize,
    pub j: usize,
    pub acc: f64,
    pub trials: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixResponse {
    pub schema: String,
    pub axis: Axis,
    pub bin: BinSelector,
    pub n: usize,
    pub cells: Vec<MatrixCell>,
}

#[derive(Debug, Serialize)]
pub struct ColorsResponse<'a> {
    pub schema: &'static str,
    pub colors: &'a [ColorEntry],
}

#[derive(Debug, Serialize)]
pub struct ShapesResponse<'a> {
    pub schema: &'static str,
    pub shapes: &'a [ShapeEntry],
}

/// Pools, evidence and settings shared read-only by every request.
pub struct Engine {
    pub pool: ColorPool,
    pub catalog: ShapeCatalog,
    pub evidence: Box<dyn EvidenceSource>,
    pub config: Config,
}

impl Engine {
    pub fn new(
        pool: ColorPool,
        catalog: ShapeCatalog,
        evidence: Box<dyn EvidenceSource>,
        config: Config,
    ) -> Result<Self, ApiError> {
        config.validate()?;
        let dims = PoolDims {
            colors: pool.len(),
            shapes: catalog.len(),
        };
        if evidence.dims() != dims {
            return Err(ApiError::new(
                422,
                "invalid_data",
                Some("evidence".into()),
                "evidence dimensions do not match the pools",
            ));
        }
        Ok(Engine {
            pool,
            catalog,
            evidence,
            config,
        })
    }

    pub fn dims(&self) -> PoolDims {
        self.evidence.dims()
    }

    pub fn model(&self, weights: Option<ScoringWeights>) -> Result<Model<'_>, ApiError> {
        let model = Model::new(self.evidence.as_ref(), &self.pool, &self.catalog)?
            .with_config(self.config.generator.clone())
            .with_weights(weights.unwrap_or(self.config.weights))
            .map_err(|e| ApiError::bad_request("weights", e.to_string()))?;
        Ok(model)
    }

    pub fn colors(&self) -> ColorsResponse<'_> {
        ColorsResponse {
            schema: COLORS_SCHEMA,
            colors: self.pool.entries(),
        }
    }

    pub fn shapes(&self) -> ShapesResponse<'_> {
        ShapesResponse {
            schema: SHAPES_SCHEMA,
            shapes: self.catalog.entries(),
        }
    }

    pub fn resolve_encoding(
        &self,
        encoding: &str,
        n: usize,
    ) -> Result<(Encoding, Option<String>), ApiError> {
        if !(2..=10).contains(&n) {
            return Err(ApiError::bad_request(
                "n",
                format!("n = {n} outside 2..=10"),
            ));
        }
        if encoding.eq_ignore_ascii_case("auto") {
            return self.config.auto_encoding.resolve(n);
        }
        Encoding::from_str(encoding)
            .map(|e| (e, None))
            .map_err(|e| ApiError::bad_request("encoding", e.to_string()))
    }

    /// Runs a generation request with `extra` merged into its constraints.
    pub fn generate(
        &self,
        req: &GenerateRequest,
        extra: Option<&Constraints>,
    ) -> Result<GenerateResponse, ApiError> {
        let (encoding, note) = self.resolve_encoding(&req.encoding, req.n)?;
        if req.k_out == 0 || req.k_out > MAX_K_OUT {
            return Err(ApiError::bad_request(
                "k_out",
                format!("k_out must lie in 1..={MAX_K_OUT}"),
            ));
        }
        let mut constraints = req.constraints.clone();
        if let Some(extra) = extra {
            merge_constraints(&mut constraints, extra);
        }
        let mut mapped = Vec::new();
        for input in &req.required_hex {
            let rgb = Rgb::from_hex(input)
                .map_err(|e| ApiError::bad_request("required_hex", e.to_string()))?;
            let id = nearest_representative(rgb.to_lab(), &self.pool);
            constraints.required_colors.insert(id);
            mapped.push(MappedColor {
                input: input.clone(),
                color_id: id,
                hex: self.pool.entry(id)?.rgb.to_hex(),
            });
        }
        constraints.validate(encoding, req.n, &self.dims())?;
        let model = self.model(req.weights)?;
        let ranked = model.generate(encoding, req.n, &constraints, req.k_out, req.seed)?;
        let palettes = ranked
            .iter()
            .map(|s| PaletteRecord::new(s, &self.pool, &self.catalog))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GenerateResponse {
            schema: PALETTES_SCHEMA.to_owned(),
            encoding,
            n: req.n,
            note,
            mapped_colors: mapped,
            palettes,
        })
    }

    pub fn swap(
        &self,
        req: &SwapRequest,
        extra: Option<&Constraints>,
    ) -> Result<SwapResponse, ApiError> {
        let palette = req.palette.palette()?;
        if req.palette.n != palette.n() {
            return Err(ApiError::bad_request(
                "palette.n",
                "n does not match the number of entries",
            ));
        }
        let mut constraints = req.constraints.clone();
        if let Some(extra) = extra {
            merge_constraints(&mut constraints, extra);
        }
        for m in &palette.entries {
            if let Some(c) = m.color {
                self.pool.entry(c)?;
            }
            if let Some(s) = m.shape {
                self.catalog.entry(s)?;
            }
        }
        constraints.validate(palette.encoding, palette.n(), &self.dims())?;
        let model = self.model(req.weights)?;
        let mut scored = model.score(&palette)?;
        scored.rank = req.palette.rank;
        let (next, constraints) = model.swap(&scored, req.position, req.part, &constraints)?;
        let record = PaletteRecord::new(&next, &self.pool, &self.catalog)?;
        let replaced = Replacement {
            position: req.position,
            before: req.palette.entries[req.position].clone(),
            after: record.entries[req.position].clone(),
        };
        Ok(SwapResponse {
            schema: SWAP_SCHEMA.to_owned(),
            palette: record,
            constraints,
            replaced,
        })
    }

    pub fn matrix(&self, axis: &str, bin: &str) -> Result<MatrixResponse, ApiError> {
        let axis =
            Axis::from_str(axis).map_err(|e| ApiError::bad_request("axis", e.to_string()))?;
        let bin =
            BinSelector::from_str(bin).map_err(|e| ApiError::bad_request("bin", e.to_string()))?;
        let m = self.evidence.matrix(axis, bin).ok_or_else(|| {
            ApiError::new(
                422,
                "missing_evidence",
                Some("axis".into()),
                format!("no {axis} evidence in the {bin} bin"),
            )
        })?;
        let cells = m
            .observed()
            .into_iter()
            .filter_map(|(i, j, c)| {
                c.accuracy().map(|acc| MatrixCell {
                    i,
                    j,
                    acc,
                    trials: c.trials,
                })
            })
            .collect();
        Ok(MatrixResponse {
            schema: MATRIX_SCHEMA.to_owned(),
            axis,
            bin,
            n: m.size(),
            cells,
        })
    }

    pub fn preview_marks(
        &self,
        colors: &[String],
        shapes: &[String],
    ) -> Result<Vec<MarkStyle>, ApiError> {
        preview_marks(&self.pool, &self.catalog, colors, shapes)
    }

    pub fn preview(
        &self,
        colors: &[String],
        shapes: &[String],
        seed: u64,
    ) -> Result<String, ApiError> {
        let marks = self.preview_marks(colors, shapes)?;
        let stim = stimulus(&marks, seed, false)?;
        Ok(render_svg(&stim, &self.catalog)?)
    }
}

/// Mark styles for a preview from color and shape lists.
///
/// Colors may be pool ids or `#rrggbb` hex values. When both lists are
/// given they pair up by position and must have the same length.
pub fn preview_marks(
    pool: &ColorPool,
    catalog: &ShapeCatalog,
    colors: &[String],
    shapes: &[String],
) -> Result<Vec<MarkStyle>, ApiError> {
    if !colors.is_empty() && !shapes.is_empty() && colors.len() != shapes.len() {
        return Err(ApiError::bad_request(
            "shapes",
            "colors and shapes must have the same length",
        ));
    }
    let n = colors.len().max(shapes.len());
    if !(2..=10).contains(&n) {
        return Err(ApiError::bad_request(
            "colors",
            format!("{n} categories, expected 2..=10"),
        ));
    }
    (0..n)
        .map(|k| {
            let (color, color_id) = match colors.get(k) {
                None => (None, None),
                Some(c) if c.starts_with('#') => (
                    Some(
                        Rgb::from_hex(c)
                            .map_err(|e| ApiError::bad_request("colors", e.to_string()))?,
                    ),
                    None,
                ),
                Some(c) => {
                    let id: ColorId = c
                        .parse()
                        .map_err(|_| ApiError::bad_request("colors", format!("bad color {c:?}")))?;
                    (Some(pool.entry(id)?.rgb), Some(id))
                }
            };
            let shape = match shapes.get(k) {
                None => None,
                Some(s) => {
                    let id = match s.parse::<ShapeId>() {
                        Ok(id) => catalog.entry(id)?.id,
                        Err(_) => {
                            catalog
                                .by_name(s)
                                .ok_or_else(|| {
                                    ApiError::new(
                                        404,
                                        "unknown_id",
                                        Some("shape_id".into()),
                                        format!("no shape {s:?}"),
                                    )
                                })?
                                .id
                        }
                    };
                    Some(id)
                }
            };
            Ok(MarkStyle {
                color,
                color_id,
                shape,
            })
        })
        .collect()
}

pub fn stimulus(
    marks: &[MarkStyle],
    seed: u64,
    engagement: bool,
) -> Result<StimulusData, ApiError> {
    let spec = StimulusSpec::new(marks.len(), seed);
    let stim = if engagement {
        gen_engagement_check(&spec, marks)?
    } else {
        gen_stimulus(&spec, marks)?
    };
    Ok(stim)
}

/// Union of requirements and exclusions. Candidate pools intersect.
pub fn merge_constraints(into: &mut Constraints, other: &Constraints) {
    into.required_colors.extend(&other.required_colors);
    into.required_shapes.extend(&other.required_shapes);
    into.required_markers.extend(&other.required_markers);
    into.excluded_colors.extend(&other.excluded_colors);
    into.excluded_shapes.extend(&other.excluded_shapes);
    into.excluded_markers.extend(&other.excluded_markers);
    into.candidate_colors = intersect(into.candidate_colors.take(), &other.candidate_colors);
    into.candidate_shapes = intersect(into.candidate_shapes.take(), &other.candidate_shapes);
}

fn intersect(
    a: Option<std::collections::BTreeSet<u16>>,
    b: &Option<std::collections::BTreeSet<u16>>,
) -> Option<std::collections::BTreeSet<u16>> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.intersection(b).copied().collect()),
        (Some(a), None) => Some(a),
        (None, b) => b.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_unions_and_intersects() {
        let mut a = Constraints::default();
        a.excluded_colors.insert(1);
        a.candidate_colors = Some((0..5).collect());
        let mut b = Constraints::default();
        b.excluded_colors.insert(2);
        b.candidate_colors = Some((3..9).collect());
        merge_constraints(&mut a, &b);
        assert_eq!(
            a.excluded_colors.into_iter().collect::<Vec<_>>(),
            vec![1, 2]
        );
        assert_eq!(
            a.candidate_colors.unwrap().into_iter().collect::<Vec<_>>(),
            vec![3, 4]
        );
    }

    #[test]
    fn request_defaults_and_alias() {
        let r: GenerateRequest = serde_json::from_str(r#"{"n": 4, "k": 3}"#).unwrap();
        assert_eq!(r.encoding, "auto");
        assert_eq!(r.k_out, 3);
        assert_eq!(r.seed, 0);
        assert!(serde_json::from_str::<GenerateRequest>(r#"{"n": 4, "colour": 1}"#).is_err());
    }
}

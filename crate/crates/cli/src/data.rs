use std::path::{Path, PathBuf};

use chromashape::catalog::{load_default_pools, load_pools, ColorPool, ShapeCatalog};
use chromashape::colorlab::JndParams;
use chromashape::evidence::{Evidence, EvidenceSource, PoolDims};
use chromashape::synthetic::LatentModel;

use crate::error::ApiError;

pub const COLORS_FILE: &str = "colors.tsv";
pub const SHAPES_FILE: &str = "shapes.tsv";
pub const EVIDENCE_FILE: &str = "evidence.json";

/// Where pools and evidence come from.
#[derive(Debug, Clone, Default)]
pub struct DataSources {
    pub data_dir: Option<PathBuf>,
    pub evidence: Option<PathBuf>,
}

impl DataSources {
    /// Pools from `data_dir` when it holds both files, else the bundled ones.
    pub fn load_pools(&self, params: &JndParams) -> Result<(ColorPool, ShapeCatalog), ApiError> {
        if let Some(dir) = &self.data_dir {
            let (colors, shapes) = (dir.join(COLORS_FILE), dir.join(SHAPES_FILE));
            if colors.exists() && shapes.exists() {
                log::info!("loading pools from {}", dir.display());
                return Ok(load_pools(&colors, &shapes, params)?);
            }
        }
        Ok(load_default_pools()?)
    }

    pub fn evidence_path(&self) -> Option<PathBuf> {
        self.evidence.clone().or_else(|| {
            self.data_dir
                .as_ref()
                .map(|d| d.join(EVIDENCE_FILE))
                .filter(|p| p.exists())
        })
    }

    pub fn load_evidence(
        &self,
        dims: PoolDims,
        min_observations: Option<u32>,
    ) -> Result<Box<dyn EvidenceSource>, ApiError> {
        let path = self.evidence_path().ok_or_else(|| {
            ApiError::new(
                422,
                "missing_evidence",
                Some("evidence".into()),
                "no evidence file: pass --evidence, put evidence.json in the data directory, \
                 or create one with `ingest` or `synth-evidence`",
            )
        })?;
        load_evidence_file(&path, dims, min_observations)
    }
}

/// Reads an evidence bundle or a latent-model description.
pub fn load_evidence_file(
    path: &Path,
    dims: PoolDims,
    min_observations: Option<u32>,
) -> Result<Box<dyn EvidenceSource>, ApiError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ApiError::new(500, "io", Some(path.display().to_string()), e.to_string()))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        ApiError::new(
            422,
            "invalid_data",
            Some(path.display().to_string()),
            e.to_string(),
        )
    })?;
    let source: Box<dyn EvidenceSource> = if LatentModel::is_model_json(&value) {
        Box::new(LatentModel::from_json(value)?)
    } else {
        let mut ev = Evidence::from_json(value)?;
        if let Some(m) = min_observations {
            ev = ev.with_min_observations(m);
        }
        Box::new(ev)
    };
    if source.dims() != dims {
        return Err(ApiError::new(
            422,
            "invalid_data",
            Some(path.display().to_string()),
            format!(
                "evidence covers {}x{} colors/shapes, pools have {}x{}",
                source.dims().colors,
                source.dims().shapes,
                dims.colors,
                dims.shapes
            ),
        ));
    }
    Ok(source)
}

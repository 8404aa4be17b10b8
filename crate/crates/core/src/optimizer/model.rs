use super::{
    generate_redundant, generate_single_channel, swap_element, Constraints, Encoding, GeneratorConfig, Palette,
    ScoredPalette, ScoringContext, ScoringWeights, SwapPart,
};
use crate::catalog::{ColorPool, ShapeCatalog};
use crate::error::{Error, Result};
use crate::evidence::{bin_of, Axis, BinSelector, EvidenceSource, PoolDims};

/// Evidence, pools and settings bundled for palette work.
///
/// Every call consults the evidence in the bin of its category count, with
/// the All-bin fallback the evidence source provides.
pub struct Model<'a> {
    evidence: &'a dyn EvidenceSource,
    pool: &'a ColorPool,
    catalog: &'a ShapeCatalog,
    weights: ScoringWeights,
    config: GeneratorConfig,
}

impl<'a> Model<'a> {
    pub fn new(evidence: &'a dyn EvidenceSource, pool: &'a ColorPool, catalog: &'a ShapeCatalog) -> Result<Self> {
        let dims = PoolDims {
            colors: pool.len(),
            shapes: catalog.len(),
        };
        if evidence.dims() != dims {
            return Err(Error::invalid(format!(
                "evidence covers {}x{} colors/shapes, pools have {}x{}",
                evidence.dims().colors,
                evidence.dims().shapes,
                dims.colors,
                dims.shapes
            )));
        }
        Ok(Model {
            evidence,
            pool,
            catalog,
            weights: ScoringWeights::default(),
            config: GeneratorConfig::default(),
        })
    }

    pub fn with_weights(mut self, weights: ScoringWeights) -> Result<Self> {
        weights.validate()?;
        self.weights = weights;
        Ok(self)
    }

    pub fn with_config(mut self, config: GeneratorConfig) -> Self {
        self.config = config;
        self
    }

    pub fn weights(&self) -> &ScoringWeights {
        &self.weights
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    pub fn pool(&self) -> &ColorPool {
        self.pool
    }

    pub fn catalog(&self) -> &ShapeCatalog {
        self.catalog
    }

    pub fn evidence(&self) -> &dyn EvidenceSource {
        self.evidence
    }

    pub fn dims(&self) -> PoolDims {
        self.evidence.dims()
    }

    /// Run `f` with lookups for the bin of `n`.
    pub fn with_context<R>(&self, n: usize, f: impl FnOnce(&ScoringContext<'_>) -> R) -> Result<R> {
        let bin = BinSelector::from(bin_of(n)?);
        let color = self.evidence.pair_lookup(Axis::Color, bin);
        let shape = self.evidence.pair_lookup(Axis::Shape, bin);
        let marker = self.evidence.pair_lookup(Axis::Marker, bin);
        let individual = self.evidence.element_lookup(Axis::Marker, bin);
        let ctx = ScoringContext {
            color: color.as_ref(),
            shape: shape.as_ref(),
            marker: marker.as_ref(),
            marker_individual: individual.as_ref(),
            pool: self.pool,
            catalog: self.catalog,
            weights: self.weights,
        };
        Ok(f(&ctx))
    }

    pub fn score(&self, palette: &Palette) -> Result<ScoredPalette> {
        self.with_context(palette.n(), |ctx| ctx.score(palette))?
    }

    pub fn generate(
        &self,
        encoding: Encoding,
        n: usize,
        constraints: &Constraints,
        k_out: usize,
        seed: u64,
    ) -> Result<Vec<ScoredPalette>> {
        self.with_context(n, |ctx| match encoding {
            Encoding::ColorOnly => {
                generate_single_channel(n, ctx.color, &ctx.dims(), constraints, k_out, seed, &self.config)
            }
            Encoding::ShapeOnly => {
                generate_single_channel(n, ctx.shape, &ctx.dims(), constraints, k_out, seed, &self.config)
            }
            Encoding::Redundant => generate_redundant(n, ctx, constraints, k_out, seed, &self.config),
        })?
    }

    pub fn swap(
        &self,
        scored: &ScoredPalette,
        position: usize,
        part: Option<SwapPart>,
        constraints: &Constraints,
    ) -> Result<(ScoredPalette, Constraints)> {
        self.with_context(scored.palette.n(), |ctx| swap_element(scored, position, part, ctx, constraints))?
    }
}

//! Palette scoring, generation, diversification and interactive swapping.
//!
//! Single-channel palettes score as the mean pairwise accuracy of their
//! elements. Redundant palettes combine six components with
//! [`ScoringWeights`]; see [`Components`].

mod constraints;
mod jitter;
mod model;
mod permute;
mod record;
mod redundant;
mod single;
mod swap;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::{Axis, Marker};

pub use constraints::Constraints;
pub use jitter::{jitter_color, nearest_representative, JitterBounds};
pub use model::Model;
pub use permute::{cosine_similarity, diverse_permutation_indices, diverse_permutations, Diversified};
pub use record::{EntryRecord, PaletteRecord};
pub use redundant::{generate_redundant, score_redundant, ScoringContext};
pub use single::{generate_single_channel, score_subset};
pub use swap::{swap_element, SwapPart};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    ColorOnly,
    ShapeOnly,
    Redundant,
}

impl Encoding {
    pub fn as_str(self) -> &'static str {
        match self {
            Encoding::ColorOnly => "color_only",
            Encoding::ShapeOnly => "shape_only",
            Encoding::Redundant => "redundant",
        }
    }

    /// Axis of the single-channel matrix for this encoding.
    pub fn channel_axis(self) -> Option<Axis> {
        match self {
            Encoding::ColorOnly => Some(Axis::Color),
            Encoding::ShapeOnly => Some(Axis::Shape),
            Encoding::Redundant => None,
        }
    }
}

impl FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "color_only" | "color" => Ok(Encoding::ColorOnly),
            "shape_only" | "shape" => Ok(Encoding::ShapeOnly),
            "redundant" | "both" => Ok(Encoding::Redundant),
            other => Err(Error::invalid(format!("unknown encoding {other:?}"))),
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An ordered list of category encodings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Palette {
    pub encoding: Encoding,
    pub entries: Vec<Marker>,
}

impl Palette {
    pub fn new(encoding: Encoding, entries: Vec<Marker>) -> Result<Self> {
        let p = Palette { encoding, entries };
        p.validate()?;
        Ok(p)
    }

    pub fn colors(encoding: Encoding, ids: &[u16]) -> Result<Self> {
        let entries = match encoding {
            Encoding::ColorOnly => ids.iter().map(|&c| Marker::color(c)).collect(),
            Encoding::ShapeOnly => ids.iter().map(|&s| Marker::shape(s)).collect(),
            Encoding::Redundant => return Err(Error::invalid("redundant palettes need color/shape pairs")),
        };
        Palette::new(encoding, entries)
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn validate(&self) -> Result<()> {
        let distinct = |ids: Vec<Option<u16>>| {
            let mut v: Vec<_> = ids.into_iter().collect();
            v.sort_unstable();
            v.windows(2).all(|w| w[0] != w[1])
        };
        for m in &self.entries {
            let ok = match self.encoding {
                Encoding::ColorOnly => m.color.is_some() && m.shape.is_none(),
                Encoding::ShapeOnly => m.color.is_none() && m.shape.is_some(),
                Encoding::Redundant => m.color.is_some() && m.shape.is_some(),
            };
            if !ok {
                return Err(Error::invalid(format!("entry {m} does not fit a {} palette", self.encoding)));
            }
        }
        let colors_ok = self.encoding == Encoding::ShapeOnly || distinct(self.entries.iter().map(|m| m.color).collect());
        let shapes_ok = self.encoding == Encoding::ColorOnly || distinct(self.entries.iter().map(|m| m.shape).collect());
        if !(colors_ok && shapes_ok) {
            return Err(Error::invalid("palette repeats a color or shape"));
        }
        Ok(())
    }

    /// Order-independent identity used for deduplication and tie-breaking.
    pub fn key(&self) -> Vec<Marker> {
        let mut k = self.entries.clone();
        k.sort_unstable();
        k
    }

    pub fn color_ids(&self) -> Vec<u16> {
        self.entries.iter().filter_map(|m| m.color).collect()
    }

    pub fn shape_ids(&self) -> Vec<u16> {
        self.entries.iter().filter_map(|m| m.shape).collect()
    }

    /// Ids along the palette's single channel.
    pub(crate) fn channel_ids(&self) -> Vec<usize> {
        match self.encoding {
            Encoding::ShapeOnly => self.shape_ids().into_iter().map(usize::from).collect(),
            _ => self.color_ids().into_iter().map(usize::from).collect(),
        }
    }
}

/// Named score breakdown. Single-channel palettes fill only their channel's
/// pair mean; redundant palettes fill all six.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Components {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marker_pair_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marker_individual_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_pair_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape_pair_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lightness_variance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape_type_mix: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPalette {
    pub rank: usize,
    pub score: f64,
    pub palette: Palette,
    pub components: Components,
}

/// Weights of the redundant-palette score components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringWeights {
    pub marker_pair_mean: f64,
    pub marker_individual_mean: f64,
    pub color_pair_mean: f64,
    pub shape_pair_mean: f64,
    pub lightness_variance: f64,
    pub shape_type_mix: f64,
}

impl Default for ScoringWeights {
    fn default() -> Self {
        ScoringWeights {
            marker_pair_mean: 0.35,
            marker_individual_mean: 0.20,
            color_pair_mean: 0.15,
            shape_pair_mean: 0.15,
            lightness_variance: 0.075,
            shape_type_mix: 0.075,
        }
    }
}

impl ScoringWeights {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.marker_pair_mean,
            self.marker_individual_mean,
            self.color_pair_mean,
            self.shape_pair_mean,
            self.lightness_variance,
            self.shape_type_mix,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.as_array();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::invalid("scoring weights must be finite and nonnegative"));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("scoring weights sum to {sum}, expected 1")));
        }
        Ok(())
    }

    /// Weighted sum of the components. All six must be present.
    pub fn combine(&self, c: &Components) -> Option<f64> {
        let v = [
            c.marker_pair_mean?,
            c.marker_individual_mean?,
            c.color_pair_mean?,
            c.shape_pair_mean?,
            c.lightness_variance?,
            c.shape_type_mix?,
        ];
        Some(self.as_array().iter().zip(v).map(|(w, x)| w * x).sum())
    }
}

/// Search settings shared by the generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Independent half-pool samples per single-channel search.
    pub repetitions: usize,
    /// Above this many combinations a sample is searched with a beam instead of enumerated.
    pub enumeration_limit: u64,
    pub beam_width: usize,
    /// Top color and shape subsets carried into redundant assembly.
    pub channel_subsets: usize,
    /// Color/shape subset combinations kept before permutation and full scoring.
    pub shortlist: usize,
    /// Pairings tried per color/shape subset combination.
    pub permutations: usize,
    /// Hill-climb the best candidates with single-element replacements.
    pub refine: bool,
    pub refine_top: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            repetitions: 10,
            enumeration_limit: 500_000,
            beam_width: 2_000,
            channel_subsets: 8,
            shortlist: 50,
            permutations: 13,
            refine: true,
            refine_top: 5,
        }
    }
}

/// Sort by score descending then key, drop duplicates, keep `k` and assign dense ranks.
pub(crate) fn rank_results(mut list: Vec<ScoredPalette>, k: usize) -> Vec<ScoredPalette> {
    let mut keyed: Vec<(Vec<Marker>, ScoredPalette)> = list.drain(..).map(|s| (s.palette.key(), s)).collect();
    keyed.sort_by(|(ka, a), (kb, b)| b.score.total_cmp(&a.score).then_with(|| ka.cmp(kb)));
    keyed.dedup_by(|(ka, _), (kb, _)| ka == kb);
    keyed
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (_, mut s))| {
            s.rank = i + 1;
            s
        })
        .collect()
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if (2..=10).contains(&n) {
        Ok(())
    } else {
        Err(Error::invalid(format!("n = {n} outside 2..=10")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_weights_sum_to_one() {
        ScoringWeights::default().validate().unwrap();
        let mut w = ScoringWeights::default();
        w.shape_type_mix = 0.2;
        assert!(w.validate().is_err());
        w.shape_type_mix = -0.05;
        w.lightness_variance = 0.2;
        assert!(w.validate().is_err());
    }

    #[test]
    fn palette_invariants() {
        assert!(Palette::new(Encoding::Redundant, vec![Marker::pair(0, 1), Marker::pair(0, 2)]).is_err());
        assert!(Palette::new(Encoding::Redundant, vec![Marker::pair(0, 1), Marker::pair(1, 1)]).is_err());
        assert!(Palette::new(Encoding::ColorOnly, vec![Marker::color(0), Marker::shape(1)]).is_err());
        assert!(Palette::new(Encoding::ColorOnly, vec![Marker::color(3), Marker::color(3)]).is_err());
        let p = Palette::new(Encoding::Redundant, vec![Marker::pair(2, 1), Marker::pair(0, 2)]).unwrap();
        assert_eq!(p.key(), vec![Marker::pair(0, 2), Marker::pair(2, 1)]);
    }

    #[test]
    fn ranking_dedups_and_orders() {
        let mk = |ids: &[u16], score| ScoredPalette {
            rank: 0,
            score,
            palette: Palette::colors(Encoding::ColorOnly, ids).unwrap(),
            components: Components::default(),
        };
        let out = rank_results(vec![mk(&[1, 2], 0.5), mk(&[0, 3], 0.9), mk(&[2, 1], 0.5), mk(&[0, 1], 0.5)], 10);
        let keys: Vec<_> = out.iter().map(|s| (s.rank, s.palette.channel_ids())).collect();
        assert_eq!(keys, vec![(1, vec![0, 3]), (2, vec![0, 1]), (3, vec![1, 2])]);
    }
}

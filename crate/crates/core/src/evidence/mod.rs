//! Trial logs and the accuracy matrices built from them.
//!
//! Pairwise accuracy for a pair of encodings is the share of correct
//! responses among all trials where both appeared: a correct trial showing
//! `k` categories credits every one of its `k(k-1)/2` pairs. Individual
//! accuracy does the same per encoding.

mod bundle;
mod matrix;
mod trials;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{ColorId, ShapeId};

pub use bundle::{Evidence, EvidenceSource, EvidenceView, IndividualView, DEFAULT_MIN_OBSERVATIONS};
pub use matrix::{
    individual_accuracy, marker_accuracy, pairwise_accuracy, summary_stats, AccuracyTable, Cell, ElementLookup,
    MatrixSummary, PairLookup, PairMatrix,
};
pub use trials::{ingest_trials, read_trial_log, write_trial_log, Response, TrialLog, TrialRecord, TRIAL_LOG_HEADER};

/// Category-count strata used when aggregating evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CategoryBin {
    Small,
    Medium,
    Large,
}

impl CategoryBin {
    pub const ALL: [CategoryBin; 3] = [CategoryBin::Small, CategoryBin::Medium, CategoryBin::Large];

    pub fn range(self) -> std::ops::RangeInclusive<usize> {
        match self {
            CategoryBin::Small => 2..=4,
            CategoryBin::Medium => 5..=7,
            CategoryBin::Large => 8..=10,
        }
    }
}

/// Small for 2–4 categories, Medium for 5–7, Large for 8–10.
pub fn bin_of(n: usize) -> Result<CategoryBin> {
    CategoryBin::ALL
        .into_iter()
        .find(|b| b.range().contains(&n))
        .ok_or_else(|| Error::invalid(format!("category count {n} outside 2..=10")))
}

/// A category bin or the pooled `All` stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BinSelector {
    Small,
    Medium,
    Large,
    All,
}

impl BinSelector {
    pub const ALL: [BinSelector; 4] = [BinSelector::Small, BinSelector::Medium, BinSelector::Large, BinSelector::All];

    pub fn matches(self, category_count: usize) -> bool {
        match self {
            BinSelector::All => true,
            other => bin_of(category_count).is_ok_and(|b| BinSelector::from(b) == other),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BinSelector::Small => "small",
            BinSelector::Medium => "medium",
            BinSelector::Large => "large",
            BinSelector::All => "all",
        }
    }
}

impl From<CategoryBin> for BinSelector {
    fn from(b: CategoryBin) -> Self {
        match b {
            CategoryBin::Small => BinSelector::Small,
            CategoryBin::Medium => BinSelector::Medium,
            CategoryBin::Large => BinSelector::Large,
        }
    }
}

impl FromStr for BinSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "small" => Ok(BinSelector::Small),
            "medium" => Ok(BinSelector::Medium),
            "large" => Ok(BinSelector::Large),
            "all" => Ok(BinSelector::All),
            other => Err(Error::invalid(format!("unknown bin {other:?}"))),
        }
    }
}

impl fmt::Display for BinSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which encoding a matrix is indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Color,
    Shape,
    Marker,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Color, Axis::Shape, Axis::Marker];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Color => "color",
            Axis::Shape => "shape",
            Axis::Marker => "marker",
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "color" => Ok(Axis::Color),
            "shape" => Ok(Axis::Shape),
            "marker" => Ok(Axis::Marker),
            other => Err(Error::invalid(format!("unknown axis {other:?}"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sizes of the color pool and shape catalog that ids refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolDims {
    pub colors: usize,
    pub shapes: usize,
}

impl PoolDims {
    pub fn axis_len(&self, axis: Axis) -> usize {
        match axis {
            Axis::Color => self.colors,
            Axis::Shape => self.shapes,
            Axis::Marker => self.colors * self.shapes,
        }
    }

    pub fn marker_index(&self, color: ColorId, shape: ShapeId) -> usize {
        usize::from(color) * self.shapes + usize::from(shape)
    }

    pub fn marker_of_index(&self, index: usize) -> Marker {
        Marker::pair((index / self.shapes) as ColorId, (index % self.shapes) as ShapeId)
    }
}

/// One category's encoding: a color, a shape, or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Marker {
    #[serde(rename = "color_id", default, skip_serializing_if = "Option::is_none")]
    pub color: Option<ColorId>,
    #[serde(rename = "shape_id", default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeId>,
}

impl Marker {
    pub const fn color(id: ColorId) -> Self {
        Marker {
            color: Some(id),
            shape: None,
        }
    }

    pub const fn shape(id: ShapeId) -> Self {
        Marker {
            color: None,
            shape: Some(id),
        }
    }

    pub const fn pair(color: ColorId, shape: ShapeId) -> Self {
        Marker {
            color: Some(color),
            shape: Some(shape),
        }
    }

    /// Index of this marker along `axis`, if the marker carries that channel.
    pub fn index(&self, axis: Axis, dims: &PoolDims) -> Option<usize> {
        match axis {
            Axis::Color => self.color.map(usize::from),
            Axis::Shape => self.shape.map(usize::from),
            Axis::Marker => Some(dims.marker_index(self.color?, self.shape?)),
        }
    }
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.color, self.shape) {
            (Some(c), Some(s)) => write!(f, "c{c}/s{s}"),
            (Some(c), None) => write!(f, "c{c}"),
            (None, Some(s)) => write!(f, "s{s}"),
            (None, None) => f.write_str("-"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_partition_two_to_ten() {
        assert_eq!(bin_of(2).unwrap(), CategoryBin::Small);
        assert_eq!(bin_of(4).unwrap(), CategoryBin::Small);
        assert_eq!(bin_of(5).unwrap(), CategoryBin::Medium);
        assert_eq!(bin_of(7).unwrap(), CategoryBin::Medium);
        assert_eq!(bin_of(8).unwrap(), CategoryBin::Large);
        assert_eq!(bin_of(10).unwrap(), CategoryBin::Large);
        assert!(matches!(bin_of(1), Err(Error::InvalidArgument(_))));
        assert!(bin_of(11).is_err());
        for n in 2..=10 {
            let hits = CategoryBin::ALL.iter().filter(|b| b.range().contains(&n)).count();
            assert_eq!(hits, 1);
        }
    }

    #[test]
    fn marker_indexing() {
        let dims = PoolDims { colors: 39, shapes: 39 };
        let m = Marker::pair(3, 7);
        assert_eq!(m.index(Axis::Marker, &dims), Some(3 * 39 + 7));
        assert_eq!(dims.marker_of_index(3 * 39 + 7), m);
        assert_eq!(Marker::color(3).index(Axis::Shape, &dims), None);
    }
}

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::MatrixJson;
use super::{
    individual_accuracy, pairwise_accuracy, AccuracyTable, Axis, BinSelector, Cell, ElementLookup, PairLookup,
    PairMatrix, PoolDims, TrialRecord,
};
use crate::error::{Error, Result};

/// Cells with fewer observations than this are treated as missing by the optimizer.
pub const DEFAULT_MIN_OBSERVATIONS: u32 = 5;

/// All matrices and individual tables for one pool, keyed by axis and bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Evidence {
    dims: PoolDims,
    min_observations: u32,
    pairs: BTreeMap<(Axis, BinSelector), PairMatrix>,
    individual: BTreeMap<(Axis, BinSelector), AccuracyTable>,
}

impl Evidence {
    pub fn new(dims: PoolDims) -> Self {
        Evidence {
            dims,
            min_observations: DEFAULT_MIN_OBSERVATIONS,
            pairs: BTreeMap::new(),
            individual: BTreeMap::new(),
        }
    }

    /// Build every axis and bin the trials cover. Axes with no observations are left out.
    pub fn from_trials(trials: &[TrialRecord], dims: PoolDims) -> Self {
        let mut ev = Evidence::new(dims);
        for axis in Axis::ALL {
            for bin in BinSelector::ALL {
                let m = pairwise_accuracy(trials, axis, bin, &dims);
                let t = individual_accuracy(trials, axis, bin, &dims);
                if t.total_trials() > 0 {
                    ev.pairs.insert((axis, bin), m);
                    ev.individual.insert((axis, bin), t);
                }
            }
        }
        ev
    }

    pub fn with_min_observations(mut self, min_observations: u32) -> Self {
        self.min_observations = min_observations;
        self
    }

    pub fn dims(&self) -> PoolDims {
        self.dims
    }

    pub fn min_observations(&self) -> u32 {
        self.min_observations
    }

    pub fn insert_pairs(&mut self, matrix: PairMatrix) -> Result<()> {
        let expected = self.dims.axis_len(matrix.axis());
        if matrix.size() != expected {
            return Err(Error::invalid(format!(
                "{} matrix has size {}, pool needs {expected}",
                matrix.axis(),
                matrix.size()
            )));
        }
        self.pairs.insert((matrix.axis(), matrix.bin()), matrix);
        Ok(())
    }

    pub fn insert_individual(&mut self, table: AccuracyTable) -> Result<()> {
        let expected = self.dims.axis_len(table.axis());
        if table.len() != expected {
            return Err(Error::invalid(format!(
                "{} table has {} entries, pool needs {expected}",
                table.axis(),
                table.len()
            )));
        }
        self.individual.insert((table.axis(), table.bin()), table);
        Ok(())
    }

    pub fn pairs(&self, axis: Axis, bin: BinSelector) -> Option<&PairMatrix> {
        self.pairs.get(&(axis, bin))
    }

    pub fn individual(&self, axis: Axis, bin: BinSelector) -> Option<&AccuracyTable> {
        self.individual.get(&(axis, bin))
    }

    pub fn has_axis(&self, axis: Axis) -> bool {
        self.pairs.keys().any(|(a, _)| *a == axis)
    }

    /// Pair lookup for `bin`, falling back to the All stratum for cells that
    /// are missing or under-observed in the bin.
    pub fn view(&self, axis: Axis, bin: BinSelector) -> EvidenceView<'_> {
        EvidenceView {
            axis,
            primary: self.pairs(axis, bin),
            fallback: (bin != BinSelector::All).then(|| self.pairs(axis, BinSelector::All)).flatten(),
            min_observations: self.min_observations,
        }
    }

    pub fn individual_view(&self, axis: Axis, bin: BinSelector) -> IndividualView<'_> {
        IndividualView {
            axis,
            primary: self.individual(axis, bin),
            fallback: (bin != BinSelector::All)
                .then(|| self.individual(axis, BinSelector::All))
                .flatten(),
            min_observations: self.min_observations,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = EvidenceJson {
            format: FORMAT.into(),
            version: 1,
            dims: self.dims,
            min_observations: self.min_observations,
            pairs: self.pairs.values().map(MatrixJson::from).collect(),
            individual: self
                .individual
                .values()
                .map(|t| TableJson {
                    axis: t.axis(),
                    bin: t.bin(),
                    n: t.len(),
                    cells: t
                        .observed()
                        .map(|(i, c)| TableCellJson {
                            i,
                            correct: c.correct,
                            trials: c.trials,
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("evidence serializes")
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        let doc: EvidenceJson = serde_json::from_value(value)?;
        if doc.format != FORMAT || doc.version != 1 {
            return Err(Error::invalid(format!(
                "unsupported evidence format {:?} version {}",
                doc.format, doc.version
            )));
        }
        let mut ev = Evidence::new(doc.dims).with_min_observations(doc.min_observations);
        for m in doc.pairs {
            ev.insert_pairs(PairMatrix::try_from(m)?)?;
        }
        for t in doc.individual {
            let mut table = AccuracyTable::new(t.axis, t.bin, t.n);
            for c in t.cells {
                table.set(
                    c.i,
                    Cell {
                        correct: c.correct,
                        trials: c.trials,
                    },
                )?;
            }
            ev.insert_individual(table)?;
        }
        Ok(ev)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Evidence::from_json(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(&self.to_json())?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

const FORMAT: &str = "chromashape-evidence";

/// Anything that can answer pairwise and individual accuracy queries for a pool.
pub trait EvidenceSource: Send + Sync {
    fn dims(&self) -> PoolDims;
    fn has_axis(&self, axis: Axis) -> bool;
    fn pair_lookup(&self, axis: Axis, bin: BinSelector) -> Box<dyn PairLookup + '_>;
    fn element_lookup(&self, axis: Axis, bin: BinSelector) -> Box<dyn ElementLookup + '_>;
    /// A concrete matrix for export, built from observed or modelled cells.
    fn matrix(&self, axis: Axis, bin: BinSelector) -> Option<PairMatrix>;
}

impl EvidenceSource for Evidence {
    fn dims(&self) -> PoolDims {
        self.dims
    }

    fn has_axis(&self, axis: Axis) -> bool {
        Evidence::has_axis(self, axis)
    }

    fn pair_lookup(&self, axis: Axis, bin: BinSelector) -> Box<dyn PairLookup + '_> {
        Box::new(self.view(axis, bin))
    }

    fn element_lookup(&self, axis: Axis, bin: BinSelector) -> Box<dyn ElementLookup + '_> {
        Box::new(self.individual_view(axis, bin))
    }

    fn matrix(&self, axis: Axis, bin: BinSelector) -> Option<PairMatrix> {
        self.pairs(axis, bin).cloned()
    }
}

#[derive(Serialize, Deserialize)]
struct TableCellJson {
    i: usize,
    correct: f64,
    trials: u32,
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    axis: Axis,
    bin: BinSelector,
    n: usize,
    cells: Vec<TableCellJson>,
}

#[derive(Serialize, Deserialize)]
struct EvidenceJson {
    format: String,
    version: u32,
    dims: PoolDims,
    min_observations: u32,
    pairs: Vec<MatrixJson>,
    individual: Vec<TableJson>,
}

/// Pair lookup with the minimum-observation rule and All-bin fallback.
#[derive(Debug, Clone, Copy)]
pub struct EvidenceView<'a> {
    axis: Axis,
    primary: Option<&'a PairMatrix>,
    fallback: Option<&'a PairMatrix>,
    min_observations: u32,
}

impl EvidenceView<'_> {
    pub fn is_empty(&self) -> bool {
        self.primary.is_none() && self.fallback.is_none()
    }
}

impl PairLookup for EvidenceView<'_> {
    fn axis(&self) -> Axis {
        self.axis
    }

    fn pair_accuracy(&self, i: usize, j: usize) -> Option<f64> {
        let usable = |m: &PairMatrix| {
            m.cell(i, j)
                .filter(|c| c.trials > 0 && c.trials >= self.min_observations)
                .and_then(|c| c.accuracy())
        };
        self.primary.and_then(usable).or_else(|| self.fallback.and_then(usable))
    }
}

/// Element lookup with the minimum-observation rule and All-bin fallback.
#[derive(Debug, Clone, Copy)]
pub struct IndividualView<'a> {
    axis: Axis,
    primary: Option<&'a AccuracyTable>,
    fallback: Option<&'a AccuracyTable>,
    min_observations: u32,
}

impl ElementLookup for IndividualView<'_> {
    fn axis(&self) -> Axis {
        self.axis
    }

    fn element_accuracy(&self, i: usize) -> Option<f64> {
        let usable = |t: &AccuracyTable| {
            t.cell(i)
                .filter(|c| c.trials > 0 && c.trials >= self.min_observations)
                .and_then(|c| c.accuracy())
        };
        self.primary.and_then(usable).or_else(|| self.fallback.and_then(usable))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::{Marker, Response};

    const DIMS: PoolDims = PoolDims { colors: 6, shapes: 3 };

    fn trial(cats: Vec<Marker>, correct: bool) -> TrialRecord {
        TrialRecord {
            trial_id: String::new(),
            group_id: String::new(),
            target_index: 0,
            response_index: Response::Index(if correct { 0 } else { 1 }),
            categories: cats,
        }
    }

    #[test]
    fn fallback_to_all_when_bin_sparse() {
        let mut trials: Vec<_> = (0..5)
            .map(|_| trial(vec![Marker::color(0), Marker::color(1)], true))
            .collect();
        trials.push(trial((0..5).map(Marker::color).collect(), false));
        let ev = Evidence::from_trials(&trials, DIMS);
        assert_eq!(ev.view(Axis::Color, BinSelector::Small).pair_accuracy(0, 1), Some(1.0));
        let medium = ev.view(Axis::Color, BinSelector::Medium);
        assert_eq!(medium.pair_accuracy(0, 1), Some(5.0 / 6.0));
        assert_eq!(medium.pair_accuracy(0, 2), None);
        assert!(ev.view(Axis::Color, BinSelector::Large).pair_accuracy(0, 1).is_some());
    }

    #[test]
    fn under_observed_cells_are_missing() {
        let trials: Vec<_> = (0..4)
            .map(|_| trial(vec![Marker::shape(0), Marker::shape(2)], true))
            .collect();
        let ev = Evidence::from_trials(&trials, DIMS);
        assert_eq!(ev.view(Axis::Shape, BinSelector::All).pair_accuracy(0, 2), None);
        let ev = ev.with_min_observations(4);
        assert_eq!(ev.view(Axis::Shape, BinSelector::All).pair_accuracy(0, 2), Some(1.0));
        assert!(!ev.has_axis(Axis::Color));
    }

    #[test]
    fn redundant_trials_feed_all_three_axes() {
        let trials = vec![trial(vec![Marker::pair(0, 1), Marker::pair(2, 0)], true)];
        let ev = Evidence::from_trials(&trials, DIMS).with_min_observations(1);
        assert_eq!(ev.view(Axis::Color, BinSelector::Small).pair_accuracy(0, 2), Some(1.0));
        assert_eq!(ev.view(Axis::Shape, BinSelector::Small).pair_accuracy(1, 0), Some(1.0));
        let (a, b) = (DIMS.marker_index(0, 1), DIMS.marker_index(2, 0));
        assert_eq!(ev.view(Axis::Marker, BinSelector::Small).pair_accuracy(a, b), Some(1.0));
        assert_eq!(ev.individual_view(Axis::Marker, BinSelector::All).element_accuracy(a), Some(1.0));
    }

    #[test]
    fn json_round_trip() {
        let trials = vec![
            trial(vec![Marker::pair(0, 1), Marker::pair(2, 0), Marker::pair(3, 2)], true),
            trial(vec![Marker::pair(0, 1), Marker::pair(1, 0)], false),
        ];
        let ev = Evidence::from_trials(&trials, DIMS).with_min_observations(2);
        let back = Evidence::from_json(ev.to_json()).unwrap();
        assert_eq!(back, ev);
    }
}

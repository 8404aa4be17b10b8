use std::collections::HashMap;
use std::fmt::Write as _;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{Axis, BinSelector, PoolDims, TrialRecord};
use crate::error::{Error, Result};

/// Accumulated outcome for one matrix cell or table entry.
///
/// `correct` is a float so that externally supplied accuracies (and scaled
/// matrices) can be represented; counts built from trials stay integral.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Cell {
    pub correct: f64,
    pub trials: u32,
}

impl Cell {
    pub fn accuracy(&self) -> Option<f64> {
        (self.trials > 0).then(|| self.correct / f64::from(self.trials))
    }

    fn record(&mut self, correct: bool) {
        self.trials += 1;
        if correct {
            self.correct += 1.0;
        }
    }

    fn absorb(&mut self, other: &Cell) {
        self.trials += other.trials;
        self.correct += other.correct;
    }
}

/// Read access to pairwise accuracy along one axis.
pub trait PairLookup {
    fn axis(&self) -> Axis;
    /// Accuracy for the unordered pair `{i, j}`; `None` when unobserved or `i == j`.
    fn pair_accuracy(&self, i: usize, j: usize) -> Option<f64>;
}

/// Read access to per-element accuracy along one axis.
pub trait ElementLookup {
    fn axis(&self) -> Axis;
    fn element_accuracy(&self, i: usize) -> Option<f64>;
}

/// Symmetric pairwise accuracy matrix. Only the strict upper triangle is
/// stored; the diagonal is always missing. Large matrices (the marker axis)
/// are stored sparsely.
#[derive(Debug, Clone)]
pub struct PairMatrix {
    axis: Axis,
    bin: BinSelector,
    n: usize,
    cells: Storage,
}

const DENSE_LIMIT: usize = 256;

#[derive(Debug, Clone)]
enum Storage {
    Dense(Vec<Cell>),
    Sparse(HashMap<(usize, usize), Cell>),
}

fn tri_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

impl PairMatrix {
    pub fn new(axis: Axis, bin: BinSelector, n: usize) -> Self {
        let cells = if n <= DENSE_LIMIT {
            Storage::Dense(vec![Cell::default(); n * n.saturating_sub(1) / 2])
        } else {
            Storage::Sparse(HashMap::new())
        };
        PairMatrix { axis, bin, n, cells }
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn bin(&self) -> BinSelector {
        self.bin
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn key(&self, i: usize, j: usize) -> Option<(usize, usize)> {
        if i == j || i >= self.n || j >= self.n {
            return None;
        }
        Some(if i < j { (i, j) } else { (j, i) })
    }

    pub fn cell(&self, i: usize, j: usize) -> Option<Cell> {
        let (lo, hi) = self.key(i, j)?;
        match &self.cells {
            Storage::Dense(v) => Some(v[tri_index(self.n, lo, hi)]),
            Storage::Sparse(m) => Some(m.get(&(lo, hi)).copied().unwrap_or_default()),
        }
    }

    fn cell_mut(&mut self, i: usize, j: usize) -> Option<&mut Cell> {
        let (lo, hi) = self.key(i, j)?;
        match &mut self.cells {
            Storage::Dense(v) => Some(&mut v[tri_index(self.n, lo, hi)]),
            Storage::Sparse(m) => Some(m.entry((lo, hi)).or_default()),
        }
    }

    pub fn accuracy(&self, i: usize, j: usize) -> Option<f64> {
        self.cell(i, j).and_then(|c| c.accuracy())
    }

    pub fn trials(&self, i: usize, j: usize) -> u32 {
        self.cell(i, j).map_or(0, |c| c.trials)
    }

    /// Record one trial outcome for the pair. Diagonal and out-of-range pairs are ignored.
    pub fn record(&mut self, i: usize, j: usize, correct: bool) {
        if let Some(c) = self.cell_mut(i, j) {
            c.record(correct);
        }
    }

    /// Overwrite a cell directly.
    pub fn set(&mut self, i: usize, j: usize, cell: Cell) -> Result<()> {
        if !(cell.correct.is_finite() && cell.correct >= 0.0) {
            return Err(Error::invalid(format!("cell ({i},{j}) has invalid correct count {}", cell.correct)));
        }
        let n = self.n;
        let slot = self
            .cell_mut(i, j)
            .ok_or_else(|| Error::invalid(format!("cell ({i},{j}) is not an off-diagonal entry of a {n}x{n} matrix")))?;
        *slot = cell;
        Ok(())
    }

    /// Observed cells as `(i, j, cell)` with `i < j`, in row-major order.
    pub fn observed(&self) -> Vec<(usize, usize, Cell)> {
        match &self.cells {
            Storage::Dense(v) => (0..self.n)
                .tuple_combinations()
                .zip(v.iter())
                .filter(|(_, c)| c.trials > 0)
                .map(|((i, j), c)| (i, j, *c))
                .collect(),
            Storage::Sparse(m) => m
                .iter()
                .filter(|(_, c)| c.trials > 0)
                .map(|(&(i, j), c)| (i, j, *c))
                .sorted_by_key(|&(i, j, _)| (i, j))
                .collect(),
        }
    }

    pub fn total_trials(&self) -> u64 {
        self.observed().iter().map(|(_, _, c)| u64::from(c.trials)).sum()
    }

    /// Add another matrix's counts into this one.
    pub fn merge(&mut self, other: &PairMatrix) -> Result<()> {
        if other.n != self.n || other.axis != self.axis {
            return Err(Error::invalid("cannot merge matrices of different axis or size"));
        }
        for (i, j, c) in other.observed() {
            self.cell_mut(i, j).expect("in range").absorb(&c);
        }
        Ok(())
    }

    /// Multiply every accuracy by `factor`.
    pub fn scale(&mut self, factor: f64) {
        match &mut self.cells {
            Storage::Dense(v) => v.iter_mut().for_each(|c| c.correct *= factor),
            Storage::Sparse(m) => m.values_mut().for_each(|c| c.correct *= factor),
        }
    }

    /// Rectangular tab-separated rendering with `NA` for missing cells.
    pub fn to_table(&self) -> String {
        let mut out = String::from("id");
        for j in 0..self.n {
            let _ = write!(out, "\t{j}");
        }
        out.push('\n');
        for i in 0..self.n {
            let _ = write!(out, "{i}");
            for j in 0..self.n {
                match self.accuracy(i, j) {
                    Some(a) => {
                        let _ = write!(out, "\t{a:.6}");
                    }
                    None => out.push_str("\tNA"),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(MatrixJson::from(self)).expect("matrix serializes")
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        serde_json::from_value::<MatrixJson>(value)?.try_into()
    }
}

impl PartialEq for PairMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.axis == other.axis && self.bin == other.bin && self.n == other.n && self.observed() == other.observed()
    }
}

impl PairLookup for PairMatrix {
    fn axis(&self) -> Axis {
        self.axis
    }

    fn pair_accuracy(&self, i: usize, j: usize) -> Option<f64> {
        self.accuracy(i, j)
    }
}

#[derive(Serialize, Deserialize)]
pub(super) struct CellJson {
    i: usize,
    j: usize,
    correct: f64,
    trials: u32,
    accuracy: Option<f64>,
}

#[derive(Serialize, Deserialize)]
pub(super) struct MatrixJson {
    axis: Axis,
    bin: BinSelector,
    n: usize,
    cells: Vec<CellJson>,
}

impl From<&PairMatrix> for MatrixJson {
    fn from(m: &PairMatrix) -> Self {
        MatrixJson {
            axis: m.axis,
            bin: m.bin,
            n: m.n,
            cells: m
                .observed()
                .into_iter()
                .map(|(i, j, c)| CellJson {
                    i,
                    j,
                    correct: c.correct,
                    trials: c.trials,
                    accuracy: c.accuracy(),
                })
                .collect(),
        }
    }
}

impl TryFrom<MatrixJson> for PairMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        let mut m = PairMatrix::new(j.axis, j.bin, j.n);
        for c in j.cells {
            if c.i >= c.j {
                return Err(Error::invalid(format!("matrix cell ({},{}) must have i < j", c.i, c.j)));
            }
            if m.trials(c.i, c.j) > 0 {
                return Err(Error::invalid(format!("matrix cell ({},{}) listed twice", c.i, c.j)));
            }
            m.set(
                c.i,
                c.j,
                Cell {
                    correct: c.correct,
                    trials: c.trials,
                },
            )?;
        }
        Ok(m)
    }
}

/// Pairwise accuracy along `axis` over trials in `bin`.
///
/// Trials that do not carry the axis (a shape-only trial for the color axis)
/// are skipped. Pairs of categories that share the same element on this axis
/// fall on the diagonal and are not counted.
pub fn pairwise_accuracy(trials: &[TrialRecord], axis: Axis, bin: BinSelector, dims: &PoolDims) -> PairMatrix {
    let mut m = PairMatrix::new(axis, bin, dims.axis_len(axis));
    let mut ids = Vec::new();
    for t in trials.iter().filter(|t| bin.matches(t.category_count())) {
        if !t.axis_indices(axis, dims, &mut ids) {
            continue;
        }
        let correct = t.is_correct();
        for (a, b) in ids.iter().tuple_combinations() {
            m.record(*a, *b, correct);
        }
    }
    m
}

/// Per-element accuracy along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyTable {
    axis: Axis,
    bin: BinSelector,
    cells: Vec<Cell>,
}

impl AccuracyTable {
    pub fn new(axis: Axis, bin: BinSelector, n: usize) -> Self {
        AccuracyTable {
            axis,
            bin,
            cells: vec![Cell::default(); n],
        }
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn bin(&self) -> BinSelector {
        self.bin
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, i: usize) -> Option<Cell> {
        self.cells.get(i).copied()
    }

    pub fn accuracy(&self, i: usize) -> Option<f64> {
        self.cells.get(i).and_then(Cell::accuracy)
    }

    pub fn trials(&self, i: usize) -> u32 {
        self.cells.get(i).map_or(0, |c| c.trials)
    }

    pub fn record(&mut self, i: usize, correct: bool) {
        if let Some(c) = self.cells.get_mut(i) {
            c.record(correct);
        }
    }

    pub fn set(&mut self, i: usize, cell: Cell) -> Result<()> {
        let n = self.cells.len();
        let slot = self
            .cells
            .get_mut(i)
            .ok_or_else(|| Error::invalid(format!("entry {i} outside table of {n}")))?;
        *slot = cell;
        Ok(())
    }

    pub fn observed(&self) -> impl Iterator<Item = (usize, Cell)> + '_ {
        self.cells.iter().copied().enumerate().filter(|(_, c)| c.trials > 0)
    }

    pub fn total_trials(&self) -> u64 {
        self.cells.iter().map(|c| u64::from(c.trials)).sum()
    }
}

impl ElementLookup for AccuracyTable {
    fn axis(&self) -> Axis {
        self.axis
    }

    fn element_accuracy(&self, i: usize) -> Option<f64> {
        self.accuracy(i)
    }
}

/// Individual accuracy of each element along `axis` over trials in `bin`.
pub fn individual_accuracy(trials: &[TrialRecord], axis: Axis, bin: BinSelector, dims: &PoolDims) -> AccuracyTable {
    let mut table = AccuracyTable::new(axis, bin, dims.axis_len(axis));
    let mut ids = Vec::new();
    for t in trials.iter().filter(|t| bin.matches(t.category_count())) {
        if !t.axis_indices(axis, dims, &mut ids) {
            continue;
        }
        let correct = t.is_correct();
        for id in ids.iter().copied().unique() {
            table.record(id, correct);
        }
    }
    table
}

/// Individual accuracy of each (color, shape) marker.
pub fn marker_accuracy(trials: &[TrialRecord], bin: BinSelector, dims: &PoolDims) -> AccuracyTable {
    individual_accuracy(trials, Axis::Marker, bin, dims)
}

/// Descriptive statistics over observed cells. `stddev` is the population value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixSummary {
    pub cells: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub stddev: f64,
}

pub fn summary_stats(matrix: &PairMatrix) -> Result<MatrixSummary> {
    let values: Vec<f64> = matrix.observed().into_iter().filter_map(|(_, _, c)| c.accuracy()).collect();
    if values.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Ok(MatrixSummary {
        cells: values.len(),
        mean,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        stddev: var.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_index_is_dense() {
        let n = 7;
        let idx: Vec<usize> = (0..n).tuple_combinations().map(|(i, j)| tri_index(n, i, j)).collect();
        assert_eq!(idx, (0..n * (n - 1) / 2).collect::<Vec<_>>());
    }

    #[test]
    fn symmetric_and_diagonal_missing() {
        let mut m = PairMatrix::new(Axis::Color, BinSelector::All, 4);
        m.record(2, 1, true);
        m.record(1, 2, false);
        assert_eq!(m.accuracy(1, 2), Some(0.5));
        assert_eq!(m.accuracy(2, 1), Some(0.5));
        m.record(3, 3, true);
        assert_eq!(m.accuracy(3, 3), None);
        assert_eq!(m.total_trials(), 2);
        assert_eq!(m.accuracy(0, 9), None);
    }

    #[test]
    fn summary_of_empty_matrix_errors() {
        let m = PairMatrix::new(Axis::Shape, BinSelector::All, 5);
        assert!(matches!(summary_stats(&m), Err(Error::EmptyMatrix)));
    }

    #[test]
    fn summary_uses_population_stddev() {
        let mut m = PairMatrix::new(Axis::Color, BinSelector::All, 3);
        m.set(0, 1, Cell { correct: 1.0, trials: 1 }).unwrap();
        m.set(0, 2, Cell { correct: 0.0, trials: 1 }).unwrap();
        let s = summary_stats(&m).unwrap();
        assert_eq!(s.cells, 2);
        assert_eq!(s.mean, 0.5);
        assert_eq!(s.stddev, 0.5);
        assert_eq!((s.min, s.max), (0.0, 1.0));
    }

    #[test]
    fn json_round_trip() {
        let mut m = PairMatrix::new(Axis::Marker, BinSelector::Medium, 5);
        m.record(0, 4, true);
        m.record(3, 1, false);
        m.record(3, 1, true);
        let back = PairMatrix::from_json(m.to_json()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn sparse_storage_behaves_like_dense() {
        let n = DENSE_LIMIT + 5;
        let mut m = PairMatrix::new(Axis::Marker, BinSelector::All, n);
        m.record(n - 1, 3, true);
        m.record(3, n - 1, false);
        m.record(0, 1, true);
        assert_eq!(m.accuracy(3, n - 1), Some(0.5));
        assert_eq!(m.accuracy(2, 1), None);
        let cells: Vec<_> = m.observed().iter().map(|&(i, j, _)| (i, j)).collect();
        assert_eq!(cells, vec![(0, 1), (3, n - 1)]);
        assert_eq!(PairMatrix::from_json(m.to_json()).unwrap(), m);
    }

    #[test]
    fn json_rejects_lower_triangle() {
        let v = serde_json::json!({"axis":"color","bin":"all","n":3,"cells":[{"i":2,"j":1,"correct":1.0,"trials":1,"accuracy":1.0}]});
        assert!(PairMatrix::from_json(v).is_err());
    }

    #[test]
    fn table_is_rectangular() {
        let mut m = PairMatrix::new(Axis::Color, BinSelector::All, 3);
        m.record(0, 1, true);
        let t = m.to_table();
        let rows: Vec<&str> = t.lines().collect();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.split('\t').count() == 4));
        assert_eq!(rows[1], "0\tNA\t1.000000\tNA");
        assert_eq!(rows[2], "1\t1.000000\tNA\tNA");
    }
}

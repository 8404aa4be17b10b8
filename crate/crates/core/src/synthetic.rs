//! Synthetic evidence for tests, demos and validation runs.
//!
//! [`LatentModel`] gives every color and shape a hidden quality in [0, 1]
//! and derives all accuracies from it, plus a small deterministic
//! per-cell perturbation. It answers lookups directly, so full marker
//! coverage costs nothing, and it can also emit trial logs.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::{
    Axis, BinSelector, Cell, ElementLookup, EvidenceSource, Marker, PairLookup, PairMatrix, PoolDims, Response,
    TrialRecord,
};
use crate::optimizer::Palette;
use crate::seed::{self, splitmix64};

const FORMAT: &str = "chromashape-latent-model";
const BASE: f64 = 0.55;
const SPAN: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentModel {
    pub dims: PoolDims,
    pub seed: u64,
    /// Amplitude of the color-by-shape pairing effect on marker accuracy.
    pub interaction: f64,
    /// Amplitude of the per-pair perturbation on channel accuracy.
    pub noise: f64,
    pub color_quality: Vec<f64>,
    pub shape_quality: Vec<f64>,
}

impl LatentModel {
    pub fn new(dims: PoolDims, seed: u64) -> Self {
        Self::with_params(dims, seed, 0.05, 0.02)
    }

    pub fn with_params(dims: PoolDims, seed: u64, interaction: f64, noise: f64) -> Self {
        let mut rng = seed::rng(seed);
        let color_quality = (0..dims.colors).map(|_| rng.random::<f64>()).collect();
        let shape_quality = (0..dims.shapes).map(|_| rng.random::<f64>()).collect();
        LatentModel {
            dims,
            seed,
            interaction,
            noise,
            color_quality,
            shape_quality,
        }
    }

    /// Deterministic value in [-1, 1] for an unordered pair.
    fn wobble(&self, tag: u64, a: usize, b: usize) -> f64 {
        let (lo, hi) = (a.min(b) as u64, a.max(b) as u64);
        let h = splitmix64(self.seed ^ splitmix64(tag ^ splitmix64((lo << 32) | hi)));
        (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    fn channel_pair(&self, q: &[f64], tag: u64, i: usize, j: usize) -> Option<f64> {
        (i != j && i < q.len() && j < q.len()).then(|| clamp(BASE + SPAN * (q[i] + q[j]) / 2.0 + self.noise * self.wobble(tag, i, j)))
    }

    pub fn color_pair(&self, i: usize, j: usize) -> Option<f64> {
        self.channel_pair(&self.color_quality, 1, i, j)
    }

    pub fn shape_pair(&self, i: usize, j: usize) -> Option<f64> {
        self.channel_pair(&self.shape_quality, 2, i, j)
    }

    fn pairing(&self, c: usize, s: usize) -> f64 {
        self.interaction * self.wobble(3, c, s + self.dims.colors)
    }

    /// Individual accuracy of marker index `m`.
    pub fn marker_individual(&self, m: usize) -> Option<f64> {
        if m >= self.dims.axis_len(Axis::Marker) {
            return None;
        }
        let (c, s) = (m / self.dims.shapes, m % self.dims.shapes);
        let q = (self.color_quality[c] + self.shape_quality[s]) / 2.0;
        Some(clamp(BASE + SPAN * q + self.pairing(c, s)))
    }

    /// Pairwise accuracy of marker indices `a` and `b`.
    pub fn marker_pair(&self, a: usize, b: usize) -> Option<f64> {
        let n = self.dims.axis_len(Axis::Marker);
        if a == b || a >= n || b >= n {
            return None;
        }
        let s = self.dims.shapes;
        let (c1, s1, c2, s2) = (a / s, a % s, b / s, b % s);
        let color = self.color_pair(c1, c2).unwrap_or(BASE);
        let shape = self.shape_pair(s1, s2).unwrap_or(BASE);
        Some(clamp((color + shape) / 2.0 + (self.pairing(c1, s1) + self.pairing(c2, s2)) / 2.0))
    }

    fn pair(&self, axis: Axis, i: usize, j: usize) -> Option<f64> {
        match axis {
            Axis::Color => self.color_pair(i, j),
            Axis::Shape => self.shape_pair(i, j),
            Axis::Marker => self.marker_pair(i, j),
        }
    }

    fn element(&self, axis: Axis, i: usize) -> Option<f64> {
        match axis {
            Axis::Color => self.color_quality.get(i).map(|q| clamp(BASE + SPAN * q)),
            Axis::Shape => self.shape_quality.get(i).map(|q| clamp(BASE + SPAN * q)),
            Axis::Marker => self.marker_individual(i),
        }
    }

    /// Mean modelled pairwise accuracy of a palette's categories.
    pub fn palette_accuracy(&self, categories: &[Marker]) -> Option<f64> {
        let axis = match (categories.first()?.color, categories.first()?.shape) {
            (Some(_), Some(_)) => Axis::Marker,
            (Some(_), None) => Axis::Color,
            _ => Axis::Shape,
        };
        let ids: Vec<usize> = categories.iter().map(|m| m.index(axis, &self.dims)).collect::<Option<_>>()?;
        let mut sum = 0.0;
        let mut k = 0;
        for (x, &i) in ids.iter().enumerate() {
            for &j in &ids[x + 1..] {
                sum += self.pair(axis, i, j)?;
                k += 1;
            }
        }
        (k > 0).then(|| sum / k as f64)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("model serializes");
        v.as_object_mut()
            .expect("object")
            .insert("format".into(), FORMAT.into());
        v
    }

    pub fn from_json(mut value: serde_json::Value) -> Result<Self> {
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::invalid("latent model must be a JSON object"))?;
        match obj.remove("format") {
            Some(serde_json::Value::String(f)) if f == FORMAT => {}
            other => return Err(Error::invalid(format!("not a latent model (format {other:?})"))),
        }
        let m: LatentModel = serde_json::from_value(value)?;
        if m.color_quality.len() != m.dims.colors || m.shape_quality.len() != m.dims.shapes {
            return Err(Error::invalid("latent model quality vectors do not match dims"));
        }
        Ok(m)
    }

    pub fn is_model_json(value: &serde_json::Value) -> bool {
        value.get("format").and_then(|f| f.as_str()) == Some(FORMAT)
    }

    /// Draw `count` random trials whose outcomes follow the model.
    ///
    /// Category counts are uniform over 2..=10 and encodings rotate between
    /// color-only, shape-only and redundant. About 3% of responses time out.
    pub fn sample_trials(&self, count: usize, seed: u64) -> Vec<TrialRecord> {
        let mut rng = seed::rng(seed);
        (0..count)
            .map(|t| {
                let k = rng.random_range(2..=10usize);
                let categories = random_markers(&mut rng, &self.dims, k, t % 3);
                let p = self.palette_accuracy(&categories).expect("valid categories");
                let target = rng.random_range(0..k);
                let response = if rng.random_bool(0.03) {
                    Response::Timeout
                } else if rng.random_bool(p) {
                    Response::Index(target)
                } else {
                    Response::Index((target + rng.random_range(1..k)) % k)
                };
                TrialRecord {
                    trial_id: format!("s{t}"),
                    group_id: format!("g{}", t % 15),
                    categories,
                    target_index: target,
                    response_index: response,
                }
            })
            .collect()
    }
}

fn clamp(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// `k` distinct markers of one kind: 0 color-only, 1 shape-only, 2 redundant.
pub fn random_markers<R: Rng>(rng: &mut R, dims: &PoolDims, k: usize, kind: usize) -> Vec<Marker> {
    let colors: Vec<u16> = (0..dims.colors as u16).collect::<Vec<_>>().choose_multiple(rng, k).copied().collect();
    let shapes: Vec<u16> = (0..dims.shapes as u16).collect::<Vec<_>>().choose_multiple(rng, k).copied().collect();
    match kind {
        0 => colors.into_iter().map(Marker::color).collect(),
        1 => shapes.into_iter().map(Marker::shape).collect(),
        _ => colors.into_iter().zip(shapes).map(|(c, s)| Marker::pair(c, s)).collect(),
    }
}

/// Arbitrary trial log with uniformly random outcomes, ids and timeouts.
pub fn random_trial_log(dims: &PoolDims, count: usize, seed: u64) -> Vec<TrialRecord> {
    let mut rng = seed::rng(seed);
    (0..count)
        .map(|t| {
            let k = rng.random_range(2..=10usize.min(dims.colors).min(dims.shapes));
            let kind = rng.random_range(0..3);
            let categories = random_markers(&mut rng, dims, k, kind);
            let target = rng.random_range(0..k);
            let response = if rng.random_bool(0.05) {
                Response::Timeout
            } else {
                Response::Index(rng.random_range(0..k))
            };
            TrialRecord {
                trial_id: format!("r{t}"),
                group_id: format!("g{}", rng.random_range(0..4)),
                categories,
                target_index: target,
                response_index: response,
            }
        })
        .collect()
}

/// `trials` presentations of `palette` of which `round(accuracy * trials)`
/// are answered correctly. Category order is shuffled per trial.
pub fn palette_trials(palette: &Palette, accuracy: f64, trials: usize, seed: u64) -> Vec<TrialRecord> {
    let mut rng = seed::rng(seed);
    let correct = (accuracy.clamp(0.0, 1.0) * trials as f64).round() as usize;
    let k = palette.n();
    (0..trials)
        .map(|t| {
            let mut categories = palette.entries.clone();
            categories.shuffle(&mut rng);
            let target = rng.random_range(0..k);
            let response = if t < correct { target } else { (target + 1) % k };
            TrialRecord {
                trial_id: format!("p{t}"),
                group_id: String::new(),
                categories,
                target_index: target,
                response_index: Response::Index(response),
            }
        })
        .collect()
}

struct Pairs<'a> {
    model: &'a LatentModel,
    axis: Axis,
}

impl PairLookup for Pairs<'_> {
    fn axis(&self) -> Axis {
        self.axis
    }

    fn pair_accuracy(&self, i: usize, j: usize) -> Option<f64> {
        self.model.pair(self.axis, i, j)
    }
}

struct Elements<'a> {
    model: &'a LatentModel,
    axis: Axis,
}

impl ElementLookup for Elements<'_> {
    fn axis(&self) -> Axis {
        self.axis
    }

    fn element_accuracy(&self, i: usize) -> Option<f64> {
        self.model.element(self.axis, i)
    }
}

impl EvidenceSource for LatentModel {
    fn dims(&self) -> PoolDims {
        self.dims
    }

    fn has_axis(&self, _axis: Axis) -> bool {
        true
    }

    fn pair_lookup(&self, axis: Axis, _bin: BinSelector) -> Box<dyn PairLookup + '_> {
        Box::new(Pairs { model: self, axis })
    }

    fn element_lookup(&self, axis: Axis, _bin: BinSelector) -> Box<dyn ElementLookup + '_> {
        Box::new(Elements { model: self, axis })
    }

    /// Modelled accuracies expressed as 100 observations per cell.
    fn matrix(&self, axis: Axis, bin: BinSelector) -> Option<PairMatrix> {
        let n = self.dims.axis_len(axis);
        let mut m = PairMatrix::new(axis, bin, n);
        for i in 0..n {
            for j in i + 1..n {
                let acc = self.pair(axis, i, j)?;
                m.set(
                    i,
                    j,
                    Cell {
                        correct: acc * 100.0,
                        trials: 100,
                    },
                )
                .ok()?;
            }
        }
        Some(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIMS: PoolDims = PoolDims { colors: 39, shapes: 39 };

    #[test]
    fn accuracies_in_range_and_symmetric() {
        let m = LatentModel::new(DIMS, 3);
        for i in 0..39 {
            for j in 0..39 {
                let a = m.color_pair(i, j);
                assert_eq!(a, m.color_pair(j, i));
                assert_eq!(a.is_none(), i == j);
                assert!(a.is_none_or(|x| (0.0..=1.0).contains(&x)));
            }
        }
        let (a, b) = (DIMS.marker_index(3, 4), DIMS.marker_index(9, 1));
        assert_eq!(m.marker_pair(a, b), m.marker_pair(b, a));
        assert!(m.marker_individual(a).is_some());
    }

    #[test]
    fn json_round_trip() {
        let m = LatentModel::new(PoolDims { colors: 5, shapes: 4 }, 11);
        let v = m.to_json();
        assert!(LatentModel::is_model_json(&v));
        assert_eq!(LatentModel::from_json(v).unwrap(), m);
    }

    #[test]
    fn sampled_trials_are_valid() {
        let m = LatentModel::new(DIMS, 1);
        for t in m.sample_trials(300, 2) {
            t.validate(&DIMS).unwrap();
        }
        for t in random_trial_log(&DIMS, 300, 5) {
            t.validate(&DIMS).unwrap();
        }
    }

    #[test]
    fn palette_trials_hit_requested_accuracy() {
        let p = Palette::colors(crate::optimizer::Encoding::ColorOnly, &[1, 5, 9]).unwrap();
        let t = palette_trials(&p, 0.73, 100, 0);
        assert_eq!(t.iter().filter(|r| r.is_correct()).count(), 73);
    }
}

use std::collections::BTreeSet;

use rand::seq::IndexedRandom;

use super::{rank_results, Components, Constraints, Encoding, GeneratorConfig, Palette, ScoredPalette};
use crate::error::{Error, Result};
use crate::evidence::{Axis, Marker, PairLookup, PoolDims};
use crate::seed;

/// Mean pairwise accuracy over all unordered pairs of `ids`.
pub fn score_subset(ids: &[usize], lookup: &dyn PairLookup) -> Result<f64> {
    if ids.len() < 2 {
        return Err(Error::invalid("a subset needs at least two ids"));
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for (k, &i) in ids.iter().enumerate() {
        for &j in &ids[k + 1..] {
            sum += lookup.pair_accuracy(i, j).ok_or(Error::MissingEvidence {
                axis: lookup.axis().as_str(),
                first: i.min(j),
                second: i.max(j),
            })?;
            pairs += 1;
        }
    }
    Ok(sum / pairs as f64)
}

/// Full square copy of a lookup with NaN for missing cells.
pub(crate) struct DenseLookup {
    n: usize,
    acc: Vec<f64>,
}

impl DenseLookup {
    pub(crate) fn new(lookup: &dyn PairLookup, n: usize) -> Self {
        let mut acc = vec![f64::NAN; n * n];
        for i in 0..n {
            for j in i + 1..n {
                if let Some(a) = lookup.pair_accuracy(i, j) {
                    acc[i * n + j] = a;
                    acc[j * n + i] = a;
                }
            }
        }
        DenseLookup { n, acc }
    }

    #[inline]
    pub(crate) fn get(&self, i: usize, j: usize) -> f64 {
        self.acc[i * self.n + j]
    }

    fn sum_with(&self, e: usize, others: &[usize]) -> f64 {
        others.iter().map(|&o| self.get(e, o)).sum()
    }

    fn total(&self, ids: &[usize]) -> f64 {
        ids.iter().enumerate().map(|(k, &i)| self.sum_with(i, &ids[k + 1..])).sum()
    }

    fn first_missing(&self, ids: &[usize]) -> Option<(usize, usize)> {
        for (k, &i) in ids.iter().enumerate() {
            for &j in &ids[k + 1..] {
                if self.get(i, j).is_nan() {
                    return Some((i.min(j), i.max(j)));
                }
            }
        }
        None
    }
}

/// Best-`cap` subsets by total pair sum, ties to the smaller sorted key.
struct TopK {
    cap: usize,
    items: Vec<(f64, Vec<usize>)>,
}

impl TopK {
    fn new(cap: usize) -> Self {
        TopK {
            cap,
            items: Vec::with_capacity(cap + 1),
        }
    }

    fn better(a: &(f64, Vec<usize>), b: &(f64, Vec<usize>)) -> std::cmp::Ordering {
        b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1))
    }

    fn admits(&self, score: f64) -> bool {
        !score.is_nan() && (self.items.len() < self.cap || score >= self.items.last().map_or(f64::NEG_INFINITY, |x| x.0))
    }

    fn offer(&mut self, score: f64, mut key: Vec<usize>) {
        if !self.admits(score) {
            return;
        }
        key.sort_unstable();
        if self.items.iter().any(|(_, k)| *k == key) {
            return;
        }
        let item = (score, key);
        let pos = self.items.partition_point(|x| Self::better(x, &item).is_lt());
        self.items.insert(pos, item);
        self.items.truncate(self.cap);
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

struct Search<'a> {
    dense: &'a DenseLookup,
    required: &'a [usize],
    base: Vec<f64>,
    req_total: f64,
    need: usize,
}

impl Search<'_> {
    fn enumerate(&self, sample: &[usize], top: &mut TopK) {
        let mut chosen = Vec::with_capacity(self.need);
        self.dfs(sample, 0, 0.0, &mut chosen, top);
    }

    fn dfs(&self, sample: &[usize], start: usize, sum: f64, chosen: &mut Vec<usize>, top: &mut TopK) {
        if chosen.len() == self.need {
            let total = self.req_total + sum;
            if top.admits(total) {
                let key: Vec<usize> = self.required.iter().chain(chosen.iter()).copied().collect();
                top.offer(total, key);
            }
            return;
        }
        let remaining = self.need - chosen.len();
        for idx in start..=sample.len() - remaining {
            let e = sample[idx];
            let add = self.base[e] + self.dense.sum_with(e, chosen);
            if add.is_nan() {
                continue;
            }
            chosen.push(e);
            self.dfs(sample, idx + 1, sum + add, chosen, top);
            chosen.pop();
        }
    }

    fn beam(&self, sample: &[usize], width: usize, top: &mut TopK) {
        let mut beam: Vec<(f64, Vec<usize>)> = vec![(0.0, Vec::new())];
        for depth in 0..self.need {
            let mut next: Vec<(f64, Vec<usize>)> = Vec::new();
            for (sum, partial) in &beam {
                let last = partial.last().copied();
                let start = last.map_or(0, |l| l + 1);
                for idx in start..sample.len() {
                    if sample.len() - idx < self.need - depth {
                        break;
                    }
                    let chosen: Vec<usize> = partial.iter().map(|&p| sample[p]).collect();
                    let add = self.base[sample[idx]] + self.dense.sum_with(sample[idx], &chosen);
                    if add.is_nan() {
                        continue;
                    }
                    let mut p = partial.clone();
                    p.push(idx);
                    next.push((sum + add, p));
                }
            }
            next.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
            next.truncate(width);
            beam = next;
        }
        for (sum, idxs) in beam {
            let key: Vec<usize> = self.required.iter().copied().chain(idxs.iter().map(|&i| sample[i])).collect();
            top.offer(self.req_total + sum, key);
        }
    }
}

/// Single-element replacement hill climb; required ids never move.
fn refine(ids: &[usize], required: &BTreeSet<usize>, available: &[usize], dense: &DenseLookup) -> Vec<usize> {
    let mut current: Vec<usize> = ids.to_vec();
    current.sort_unstable();
    let mut score = dense.total(&current);
    for _ in 0..200 {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for pos in 0..current.len() {
            if required.contains(&current[pos]) {
                continue;
            }
            let rest: Vec<usize> = current.iter().enumerate().filter(|(k, _)| *k != pos).map(|(_, &v)| v).collect();
            let rest_total = dense.total(&rest);
            for &c in available {
                if current.contains(&c) {
                    continue;
                }
                let s = rest_total + dense.sum_with(c, &rest);
                if s.is_nan() || s <= score + 1e-12 {
                    continue;
                }
                let mut key = rest.clone();
                key.push(c);
                key.sort_unstable();
                let cand = (s, key);
                if best.as_ref().is_none_or(|b| TopK::better(&cand, b).is_lt()) {
                    best = Some(cand);
                }
            }
        }
        match best {
            Some((s, key)) => {
                score = s;
                current = key;
            }
            None => break,
        }
    }
    current
}

pub(crate) fn single_scored(encoding: Encoding, ids: &[usize], lookup: &dyn PairLookup) -> Result<ScoredPalette> {
    let score = score_subset(ids, lookup)?;
    let entries = ids
        .iter()
        .map(|&i| match encoding {
            Encoding::ShapeOnly => Marker::shape(i as u16),
            _ => Marker::color(i as u16),
        })
        .collect();
    let mut components = Components::default();
    match encoding {
        Encoding::ShapeOnly => components.shape_pair_mean = Some(score),
        _ => components.color_pair_mean = Some(score),
    }
    Ok(ScoredPalette {
        rank: 0,
        score,
        palette: Palette { encoding, entries },
        components,
    })
}

/// Rank single-channel palettes of size `n` along `lookup`'s axis.
///
/// Each of `config.repetitions` rounds samples half of the available pool
/// (at least enough to fill the palette) and searches every combination of
/// that sample, or a beam when there are more than
/// `config.enumeration_limit`. The union of round winners is optionally
/// refined by single-element replacement over the whole pool.
pub fn generate_single_channel(
    n: usize,
    lookup: &dyn PairLookup,
    dims: &PoolDims,
    constraints: &Constraints,
    k_out: usize,
    seed: u64,
    config: &GeneratorConfig,
) -> Result<Vec<ScoredPalette>> {
    let encoding = match lookup.axis() {
        Axis::Color => Encoding::ColorOnly,
        Axis::Shape => Encoding::ShapeOnly,
        Axis::Marker => return Err(Error::invalid("single-channel generation needs the color or shape axis")),
    };
    if k_out == 0 {
        return Err(Error::invalid("k_out must be at least 1"));
    }
    constraints.validate(encoding, n, dims)?;
    let universe = dims.axis_len(lookup.axis());
    let (required, available): (BTreeSet<usize>, Vec<usize>) = match encoding {
        Encoding::ColorOnly => (
            constraints.required_colors.iter().map(|&c| usize::from(c)).collect(),
            constraints.available_colors(universe).into_iter().map(usize::from).collect(),
        ),
        _ => (
            constraints.required_shapes.iter().map(|&s| usize::from(s)).collect(),
            constraints.available_shapes(universe).into_iter().map(usize::from).collect(),
        ),
    };
    let required_list: Vec<usize> = required.iter().copied().collect();
    let free: Vec<usize> = available.iter().copied().filter(|i| !required.contains(i)).collect();
    let need = n - required.len();
    if free.len() < need {
        return Err(Error::Constraint(format!("only {} candidates for {need} open slots", free.len())));
    }

    let dense = DenseLookup::new(lookup, universe);
    let search = Search {
        dense: &dense,
        required: &required_list,
        base: (0..universe).map(|e| dense.sum_with(e, &required_list)).collect(),
        req_total: dense.total(&required_list),
        need,
    };
    let keep = k_out.max(config.refine_top).max(1);
    let mut pool_top = TopK::new(keep * config.repetitions.max(1));
    for rep in 0..config.repetitions.max(1) {
        let mut rng = seed::child_rng(seed, rep as u64);
        let size = free.len().div_ceil(2).max(need).min(free.len());
        let mut sample: Vec<usize> = free.choose_multiple(&mut rng, size).copied().collect();
        sample.sort_unstable();
        let mut top = TopK::new(keep);
        if binomial(sample.len(), need) <= u128::from(config.enumeration_limit) {
            search.enumerate(&sample, &mut top);
        } else {
            search.beam(&sample, config.beam_width.max(1), &mut top);
        }
        for (s, key) in top.items {
            pool_top.offer(s, key);
        }
    }
    if config.refine {
        let seeds: Vec<Vec<usize>> = pool_top.items.iter().take(config.refine_top).map(|x| x.1.clone()).collect();
        for ids in seeds {
            let better = refine(&ids, &required, &available, &dense);
            let s = dense.total(&better);
            pool_top.offer(s, better);
        }
    }
    if pool_top.items.is_empty() {
        let mut probe = required_list.clone();
        probe.extend(free.iter().take(need));
        let (first, second) = dense
            .first_missing(&probe)
            .or_else(|| dense.first_missing(&available))
            .unwrap_or((0, 1));
        return Err(Error::MissingEvidence {
            axis: lookup.axis().as_str(),
            first,
            second,
        });
    }
    let scored = pool_top
        .items
        .iter()
        .map(|(_, ids)| single_scored(encoding, ids, lookup))
        .collect::<Result<Vec<_>>>()?;
    Ok(rank_results(scored, k_out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evidence::{BinSelector, Cell, PairMatrix};

    fn matrix(n: usize, f: impl Fn(usize, usize) -> f64) -> PairMatrix {
        let mut m = PairMatrix::new(Axis::Color, BinSelector::All, n);
        for i in 0..n {
            for j in i + 1..n {
                m.set(i, j, Cell { correct: f(i, j) * 10.0, trials: 10 }).unwrap();
            }
        }
        m
    }

    fn dims(n: usize) -> PoolDims {
        PoolDims { colors: n, shapes: n }
    }

    #[test]
    fn subset_means() {
        let m = matrix(3, |i, j| [[0.0, 0.6, 0.8], [0.0, 0.0, 1.0], [0.0; 3]][i][j]);
        assert!((score_subset(&[0, 1], &m).unwrap() - 0.6).abs() < 1e-12);
        assert!((score_subset(&[0, 1, 2], &m).unwrap() - 0.8).abs() < 1e-12);
        assert!(score_subset(&[0], &m).is_err());
    }

    #[test]
    fn missing_cell_named() {
        let mut m = PairMatrix::new(Axis::Color, BinSelector::All, 4);
        m.record(0, 1, true);
        match score_subset(&[3, 0, 1], &m) {
            Err(Error::MissingEvidence { axis, first, second }) => assert_eq!((axis, first, second), ("color", 0, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn best_pair_of_three_ranks_first() {
        let m = matrix(3, |i, j| match (i, j) {
            (0, 1) => 0.5,
            (0, 2) => 0.9,
            _ => 0.7,
        });
        let out = generate_single_channel(2, &m, &dims(3), &Constraints::default(), 3, 1, &GeneratorConfig::default()).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out[0].palette.channel_ids(), vec![0, 2]);
        assert_eq!(out[0].rank, 1);
        assert!(out.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn required_color_in_every_output() {
        let m = matrix(12, |i, j| 0.5 + 0.02 * ((i * 7 + j * 3) % 11) as f64);
        let mut c = Constraints::default();
        c.required_colors.insert(5);
        let out = generate_single_channel(5, &m, &dims(12), &c, 10, 3, &GeneratorConfig::default()).unwrap();
        assert_eq!(out.len(), 10);
        assert!(out.iter().all(|s| s.palette.channel_ids().contains(&5)));
    }

    #[test]
    fn beam_and_enumeration_agree_on_easy_matrix() {
        let q: Vec<f64> = (0..16).map(|i| ((i * 37) % 16) as f64 / 16.0).collect();
        let m = matrix(16, |i, j| 0.4 + 0.25 * (q[i] + q[j]));
        let mut cfg = GeneratorConfig {
            repetitions: 1,
            refine: false,
            ..Default::default()
        };
        let full = Constraints::default();
        let enumerated = generate_single_channel(4, &m, &dims(16), &full, 1, 9, &cfg).unwrap();
        cfg.enumeration_limit = 1;
        let beamed = generate_single_channel(4, &m, &dims(16), &full, 1, 9, &cfg).unwrap();
        assert_eq!(enumerated[0].palette, beamed[0].palette);
    }

    #[test]
    fn deterministic_given_seed() {
        let m = matrix(20, |i, j| 0.5 + 0.01 * ((i * 13 + j * 5) % 17) as f64);
        let a = generate_single_channel(6, &m, &dims(20), &Constraints::default(), 5, 42, &GeneratorConfig::default()).unwrap();
        let b = generate_single_channel(6, &m, &dims(20), &Constraints::default(), 5, 42, &GeneratorConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unscoreable_pool_reports_missing_evidence() {
        let m = PairMatrix::new(Axis::Color, BinSelector::All, 5);
        let err = generate_single_channel(3, &m, &dims(5), &Constraints::default(), 1, 0, &GeneratorConfig::default()).unwrap_err();
        assert!(matches!(err, Error::MissingEvidence { .. }));
    }
}

use std::collections::{BTreeMap, HashMap};

use rand::seq::IndexedRandom;
use serde::{Deserialize, Serialize};

use super::stats::{bootstrap_mean_ci, pearson};
use crate::error::{Error, Result};
use crate::evidence::{Marker, TrialRecord};
use crate::optimizer::{Encoding, Model, Palette};
use crate::seed;

/// Anything that assigns a predicted accuracy to a palette.
pub trait PaletteScorer {
    fn score_palette(&self, palette: &Palette) -> Result<f64>;
}

impl PaletteScorer for Model<'_> {
    fn score_palette(&self, palette: &Palette) -> Result<f64> {
        Ok(self.score(palette)?.score)
    }
}

impl<F: Fn(&Palette) -> Result<f64>> PaletteScorer for F {
    fn score_palette(&self, palette: &Palette) -> Result<f64> {
        self(palette)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankValidationConfig {
    pub samples_per_n: usize,
    pub repeats: usize,
    pub bootstrap_resamples: usize,
    pub confidence: f64,
}

impl Default for RankValidationConfig {
    fn default() -> Self {
        RankValidationConfig {
            samples_per_n: 50,
            repeats: 3,
            bootstrap_resamples: 1000,
            confidence: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankPoint {
    pub rank: usize,
    pub mean_accuracy: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub observations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankValidationReport {
    pub per_rank: Vec<RankPoint>,
    /// Signed correlation between rank and mean accuracy.
    pub correlation: f64,
    pub abs_correlation: f64,
    pub samples_per_n: usize,
    pub repeats: usize,
    pub category_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub name: String,
    pub count: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Distinct palettes shown in `trials`, in order of first appearance.
/// Trials whose markers mix channels are skipped.
pub fn trial_palettes(trials: &[TrialRecord]) -> Vec<Palette> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for t in trials {
        let enc = match t.categories.first() {
            Some(Marker { color: Some(_), shape: None }) => Encoding::ColorOnly,
            Some(Marker { color: None, shape: Some(_) }) => Encoding::ShapeOnly,
            Some(Marker { color: Some(_), shape: Some(_) }) => Encoding::Redundant,
            _ => continue,
        };
        let Ok(p) = Palette::new(enc, t.categories.clone()) else { continue };
        if seen.insert(p.key()) {
            out.push(p);
        }
    }
    out
}

fn describe(p: &Palette) -> String {
    let parts: Vec<String> = p.key().iter().map(Marker::to_string).collect();
    format!("{}[{}]", p.encoding, parts.join(","))
}

/// Ranks sampled palettes with `scorer` and checks the ranks against the
/// empirical accuracy of those palettes in `trials`.
///
/// For every repeat and category count, up to `samples_per_n` palettes are
/// drawn from `candidates`, ranked by descending score (ties by palette key),
/// and matched to trials showing the same set of markers. Accuracies sharing
/// a rank position are pooled across category counts and repeats.
pub fn rank_validation(
    scorer: &dyn PaletteScorer,
    candidates: &[Palette],
    trials: &[TrialRecord],
    config: &RankValidationConfig,
    seed: u64,
) -> Result<RankValidationReport> {
    if config.samples_per_n < 2 || config.repeats == 0 {
        return Err(Error::invalid("need samples_per_n >= 2 and repeats >= 1"));
    }
    let mut observed: HashMap<Vec<Marker>, (usize, usize)> = HashMap::new();
    for t in trials {
        let mut key = t.categories.clone();
        key.sort_unstable();
        let e = observed.entry(key).or_default();
        e.0 += usize::from(t.is_correct());
        e.1 += 1;
    }
    let mut by_n: BTreeMap<usize, Vec<&Palette>> = BTreeMap::new();
    for p in candidates {
        by_n.entry(p.n()).or_default().push(p);
    }
    let mut per_rank: Vec<Vec<f64>> = Vec::new();
    let mut missing: Vec<String> = Vec::new();
    for rep in 0..config.repeats {
        for (&n, list) in &by_n {
            let mut rng = seed::child_rng(seed, (rep * 16 + n) as u64);
            let take = config.samples_per_n.min(list.len());
            let sample: Vec<&Palette> = list.choose_multiple(&mut rng, take).copied().collect();
            let mut scored: Vec<(f64, Vec<Marker>, &Palette)> = sample
                .into_iter()
                .map(|p| Ok((scorer.score_palette(p)?, p.key(), p)))
                .collect::<Result<_>>()?;
            scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
            for (rank, (_, key, p)) in scored.iter().enumerate() {
                match observed.get(key) {
                    Some(&(c, t)) if t > 0 => {
                        if per_rank.len() <= rank {
                            per_rank.resize(rank + 1, Vec::new());
                        }
                        per_rank[rank].push(c as f64 / t as f64);
                    }
                    _ => {
                        let d = describe(p);
                        if !missing.contains(&d) {
                            missing.push(d);
                        }
                    }
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Coverage { missing });
    }
    if per_rank.len() < 2 {
        return Err(Error::invalid("fewer than two rank positions to compare"));
    }
    let per_rank: Vec<RankPoint> = per_rank
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let ci_seed = seed::derive(seed ^ 0x005e_edc1, i as u64);
            let (lo, hi) = bootstrap_mean_ci(v, config.bootstrap_resamples, config.confidence, ci_seed)
                .unwrap_or((mean, mean));
            RankPoint {
                rank: i + 1,
                mean_accuracy: mean,
                ci_low: lo,
                ci_high: hi,
                observations: v.len(),
            }
        })
        .collect();
    let ranks: Vec<f64> = per_rank.iter().map(|p| p.rank as f64).collect();
    let means: Vec<f64> = per_rank.iter().map(|p| p.mean_accuracy).collect();
    let r = pearson(&ranks, &means)?;
    Ok(RankValidationReport {
        per_rank,
        correlation: r,
        abs_correlation: r.abs(),
        samples_per_n: config.samples_per_n,
        repeats: config.repeats,
        category_counts: by_n.keys().copied().collect(),
    })
}

/// Mean predicted accuracy of each named palette group with a bootstrap
/// interval.
pub fn baseline_report(
    groups: &[(String, Vec<Palette>)],
    scorer: &dyn PaletteScorer,
    config: &RankValidationConfig,
    seed: u64,
) -> Result<Vec<GroupSummary>> {
    groups
        .iter()
        .enumerate()
        .map(|(gi, (name, palettes))| {
            if palettes.is_empty() {
                return Err(Error::invalid(format!("group {name:?} is empty")));
            }
            let scores: Vec<f64> = palettes.iter().map(|p| scorer.score_palette(p)).collect::<Result<_>>()?;
            let mean = scores.iter().sum::<f64>() / scores.len() as f64;
            let (lo, hi) = bootstrap_mean_ci(&scores, config.bootstrap_resamples, config.confidence, seed::derive(seed, gi as u64))
                .unwrap_or((mean, mean));
            Ok(GroupSummary {
                name: name.clone(),
                count: scores.len(),
                mean,
                ci_low: lo,
                ci_high: hi,
            })
        })
        .collect()
}

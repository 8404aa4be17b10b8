use std::collections::BTreeSet;

use super::single::{generate_single_channel, single_scored};
use super::{
    check_n, diverse_permutations, rank_results, score_subset, Components, Constraints, Encoding, GeneratorConfig,
    Palette, ScoredPalette, ScoringWeights,
};
use crate::catalog::{ColorPool, FillClass, ShapeCatalog};
use crate::error::{Error, Result};
use crate::evidence::{ElementLookup, Marker, PairLookup, PoolDims};
use crate::{seed, ColorId, ShapeId};

/// Lookups and pools for scoring palettes of one category count.
pub struct ScoringContext<'a> {
    pub color: &'a dyn PairLookup,
    pub shape: &'a dyn PairLookup,
    pub marker: &'a dyn PairLookup,
    pub marker_individual: &'a dyn ElementLookup,
    pub pool: &'a ColorPool,
    pub catalog: &'a ShapeCatalog,
    pub weights: ScoringWeights,
}

impl ScoringContext<'_> {
    pub fn dims(&self) -> PoolDims {
        PoolDims {
            colors: self.pool.len(),
            shapes: self.catalog.len(),
        }
    }

    /// Score any palette: single-channel palettes by their pair mean,
    /// redundant ones with [`score_redundant`].
    pub fn score(&self, palette: &Palette) -> Result<ScoredPalette> {
        palette.validate()?;
        match palette.encoding {
            Encoding::Redundant => score_redundant(&palette.entries, self),
            Encoding::ColorOnly => {
                for c in palette.color_ids() {
                    self.pool.entry(c)?;
                }
                let mut s = single_scored(Encoding::ColorOnly, &palette.channel_ids(), self.color)?;
                s.palette = palette.clone();
                Ok(s)
            }
            Encoding::ShapeOnly => {
                for sh in palette.shape_ids() {
                    self.catalog.entry(sh)?;
                }
                let mut s = single_scored(Encoding::ShapeOnly, &palette.channel_ids(), self.shape)?;
                s.palette = palette.clone();
                Ok(s)
            }
        }
    }
}

/// Population variance of the palette's L values, divided by the largest
/// variance any values within the pool's lightness range can have.
fn lightness_variance(colors: &[ColorId], pool: &ColorPool) -> f64 {
    let (lo, hi) = pool
        .entries()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.lab.l), hi.max(e.lab.l)));
    let half_range = (hi - lo) / 2.0;
    if half_range <= 0.0 {
        return 0.0;
    }
    let ls: Vec<f64> = colors.iter().map(|&c| pool.lab(c).l).collect();
    let mean = ls.iter().sum::<f64>() / ls.len() as f64;
    let var = ls.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / ls.len() as f64;
    (var / (half_range * half_range)).min(1.0)
}

fn shape_type_mix(shapes: &[ShapeId], catalog: &ShapeCatalog) -> f64 {
    let classes: BTreeSet<FillClass> = shapes.iter().map(|&s| catalog.fill_class(s)).collect();
    classes.len() as f64 / FillClass::ALL.len() as f64
}

/// Score a redundant palette from all six components.
pub fn score_redundant(entries: &[Marker], ctx: &ScoringContext<'_>) -> Result<ScoredPalette> {
    let palette = Palette::new(Encoding::Redundant, entries.to_vec())?;
    let dims = ctx.dims();
    let colors = palette.color_ids();
    let shapes = palette.shape_ids();
    for &c in &colors {
        ctx.pool.entry(c)?;
    }
    for &s in &shapes {
        ctx.catalog.entry(s)?;
    }
    let markers: Vec<usize> = palette
        .entries
        .iter()
        .map(|m| dims.marker_index(m.color.unwrap(), m.shape.unwrap()))
        .collect();
    let marker_pair_mean = score_subset(&markers, ctx.marker)?;
    let mut individual = 0.0;
    for &m in &markers {
        individual += ctx
            .marker_individual
            .element_accuracy(m)
            .ok_or(Error::MissingIndividualEvidence {
                axis: "marker",
                element: m,
            })?;
    }
    let widen = |v: &[u16]| v.iter().map(|&x| usize::from(x)).collect::<Vec<_>>();
    let components = Components {
        marker_pair_mean: Some(marker_pair_mean),
        marker_individual_mean: Some(individual / markers.len() as f64),
        color_pair_mean: Some(score_subset(&widen(&colors), ctx.color)?),
        shape_pair_mean: Some(score_subset(&widen(&shapes), ctx.shape)?),
        lightness_variance: Some(lightness_variance(&colors, ctx.pool)),
        shape_type_mix: Some(shape_type_mix(&shapes, ctx.catalog)),
    };
    let score = ctx.weights.combine(&components).expect("all components present");
    Ok(ScoredPalette {
        rank: 0,
        score,
        palette,
        components,
    })
}

fn is_missing(e: &Error) -> bool {
    matches!(e, Error::MissingEvidence { .. } | Error::MissingIndividualEvidence { .. })
}

/// Order ids by their mean accuracy against the rest of the set, best first.
fn rank_within(ids: &[u16], lookup: &dyn PairLookup) -> Vec<u16> {
    let strength = |i: u16| -> f64 {
        ids.iter()
            .filter(|&&j| j != i)
            .filter_map(|&j| lookup.pair_accuracy(usize::from(i), usize::from(j)))
            .sum()
    };
    let mut v: Vec<(f64, u16)> = ids.iter().map(|&i| (strength(i), i)).collect();
    v.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    v.into_iter().map(|x| x.1).collect()
}

struct Scorer<'c, 'a> {
    ctx: &'c ScoringContext<'a>,
    constraints: &'c Constraints,
    first_missing: Option<Error>,
}

impl Scorer<'_, '_> {
    fn score(&mut self, mut entries: Vec<Marker>) -> Option<ScoredPalette> {
        if !entries.iter().all(|m| self.constraints.allows_marker(m)) {
            return None;
        }
        entries.sort_unstable();
        match score_redundant(&entries, self.ctx) {
            Ok(s) => Some(s),
            Err(e) if is_missing(&e) => {
                self.first_missing.get_or_insert(e);
                None
            }
            Err(_) => None,
        }
    }
}

fn refine(start: &ScoredPalette, scorer: &mut Scorer<'_, '_>, colors: &[ColorId], shapes: &[ShapeId]) -> ScoredPalette {
    let c = scorer.constraints;
    let req_colors = c.all_required_colors();
    let req_shapes = c.all_required_shapes();
    let pinned = |m: &Marker| c.required_markers.contains(&(m.color.unwrap(), m.shape.unwrap()));
    let mut current = start.clone();
    for _ in 0..50 {
        let entries = current.palette.entries.clone();
        let used_c: BTreeSet<ColorId> = entries.iter().filter_map(|m| m.color).collect();
        let used_s: BTreeSet<ShapeId> = entries.iter().filter_map(|m| m.shape).collect();
        let mut moves: Vec<Vec<Marker>> = Vec::new();
        for (p, m) in entries.iter().enumerate() {
            if pinned(m) {
                continue;
            }
            let (mc, ms) = (m.color.unwrap(), m.shape.unwrap());
            if !req_colors.contains(&mc) {
                for &nc in colors.iter().filter(|x| !used_c.contains(x)) {
                    let mut e = entries.clone();
                    e[p] = Marker::pair(nc, ms);
                    moves.push(e);
                }
            }
            if !req_shapes.contains(&ms) {
                for &ns in shapes.iter().filter(|x| !used_s.contains(x)) {
                    let mut e = entries.clone();
                    e[p] = Marker::pair(mc, ns);
                    moves.push(e);
                }
            }
            for q in p + 1..entries.len() {
                if pinned(&entries[q]) {
                    continue;
                }
                let mut e = entries.clone();
                e[p] = Marker::pair(mc, entries[q].shape.unwrap());
                e[q] = Marker::pair(entries[q].color.unwrap(), ms);
                moves.push(e);
            }
        }
        let best = moves
            .into_iter()
            .filter_map(|e| scorer.score(e))
            .filter(|s| s.score > current.score + 1e-12)
            .min_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.palette.key().cmp(&b.palette.key())));
        match best {
            Some(b) => current = b,
            None => break,
        }
    }
    current
}

/// Rank redundant palettes of size `n`.
///
/// The best color subsets and shape subsets (each from the single-channel
/// search) are crossed, the strongest combinations kept, and each is paired
/// through a set of diverse permutations. Every pairing is scored with
/// [`score_redundant`]; the leaders are then hill-climbed by replacing a
/// color, replacing a shape or exchanging two shapes.
pub fn generate_redundant(
    n: usize,
    ctx: &ScoringContext<'_>,
    constraints: &Constraints,
    k_out: usize,
    seed: u64,
    config: &GeneratorConfig,
) -> Result<Vec<ScoredPalette>> {
    check_n(n)?;
    if k_out == 0 {
        return Err(Error::invalid("k_out must be at least 1"));
    }
    let dims = ctx.dims();
    constraints.validate(Encoding::Redundant, n, &dims)?;
    let color_c = Constraints {
        required_colors: constraints.all_required_colors(),
        excluded_colors: constraints.excluded_colors.clone(),
        candidate_colors: constraints.candidate_colors.clone(),
        ..Default::default()
    };
    let shape_c = Constraints {
        required_shapes: constraints.all_required_shapes(),
        excluded_shapes: constraints.excluded_shapes.clone(),
        candidate_shapes: constraints.candidate_shapes.clone(),
        ..Default::default()
    };
    let subsets = config.channel_subsets.max(1);
    let color_sets = generate_single_channel(n, ctx.color, &dims, &color_c, subsets, seed::derive(seed, 1), config)?;
    let shape_sets = generate_single_channel(n, ctx.shape, &dims, &shape_c, subsets, seed::derive(seed, 2), config)?;

    let mut combos: Vec<(f64, usize, usize)> = Vec::new();
    for (i, cs) in color_sets.iter().enumerate() {
        for (j, ss) in shape_sets.iter().enumerate() {
            combos.push((cs.score + ss.score, i, j));
        }
    }
    combos.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    combos.truncate(config.shortlist.max(1));

    let pinned: Vec<Marker> = constraints.required_markers.iter().map(|&(c, s)| Marker::pair(c, s)).collect();
    let pinned_c: BTreeSet<ColorId> = constraints.required_markers.iter().map(|m| m.0).collect();
    let pinned_s: BTreeSet<ShapeId> = constraints.required_markers.iter().map(|m| m.1).collect();
    let mut scorer = Scorer {
        ctx,
        constraints,
        first_missing: None,
    };
    let mut candidates = Vec::new();
    for (_, i, j) in combos {
        let cs: Vec<ColorId> = color_sets[i].palette.color_ids().into_iter().filter(|c| !pinned_c.contains(c)).collect();
        let ss: Vec<ShapeId> = shape_sets[j].palette.shape_ids().into_iter().filter(|s| !pinned_s.contains(s)).collect();
        let assignments = if cs.is_empty() {
            vec![Vec::new()]
        } else {
            diverse_permutations(&rank_within(&cs, ctx.color), &rank_within(&ss, ctx.shape), config.permutations.max(1))?.assignments
        };
        for a in assignments {
            let entries: Vec<Marker> = pinned.iter().copied().chain(a).collect();
            candidates.extend(scorer.score(entries));
        }
    }
    let mut ranked = rank_results(candidates, usize::MAX);
    if config.refine {
        let colors = constraints.available_colors(dims.colors);
        let shapes = constraints.available_shapes(dims.shapes);
        let starts: Vec<ScoredPalette> = ranked.iter().take(config.refine_top).cloned().collect();
        for s in starts {
            ranked.push(refine(&s, &mut scorer, &colors, &shapes));
        }
    }
    if ranked.is_empty() {
        return Err(scorer
            .first_missing
            .unwrap_or_else(|| Error::Constraint("no redundant palette satisfies the constraints".into())));
    }
    Ok(rank_results(ranked, k_out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::load_default_pools;
    use crate::optimizer::Model;
    use crate::synthetic::LatentModel;

    fn fixture() -> (ColorPool, ShapeCatalog, LatentModel) {
        let (pool, catalog) = load_default_pools().unwrap();
        let model = LatentModel::new(PoolDims { colors: 39, shapes: 39 }, 17);
        (pool, catalog, model)
    }

    #[test]
    fn equal_components_give_that_value() {
        let c = Components {
            marker_pair_mean: Some(0.7),
            marker_individual_mean: Some(0.7),
            color_pair_mean: Some(0.7),
            shape_pair_mean: Some(0.7),
            lightness_variance: Some(0.7),
            shape_type_mix: Some(0.7),
        };
        assert!((ScoringWeights::default().combine(&c).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn components_match_hand_computation() {
        let (pool, catalog, lm) = fixture();
        let model = Model::new(&lm, &pool, &catalog).unwrap();
        let entries = vec![Marker::pair(0, 0), Marker::pair(5, 13), Marker::pair(9, 26)];
        let s = model.score(&Palette::new(Encoding::Redundant, entries).unwrap()).unwrap();
        let dims = lm.dims;
        let mk: Vec<usize> = [(0, 0), (5, 13), (9, 26)].iter().map(|&(c, s)| dims.marker_index(c, s)).collect();
        let mp = (lm.marker_pair(mk[0], mk[1]).unwrap() + lm.marker_pair(mk[0], mk[2]).unwrap() + lm.marker_pair(mk[1], mk[2]).unwrap()) / 3.0;
        assert!((s.components.marker_pair_mean.unwrap() - mp).abs() < 1e-12);
        assert_eq!(s.components.shape_type_mix, Some(1.0));
        let cp = (lm.color_pair(0, 5).unwrap() + lm.color_pair(0, 9).unwrap() + lm.color_pair(5, 9).unwrap()) / 3.0;
        assert!((s.components.color_pair_mean.unwrap() - cp).abs() < 1e-12);
        let lv = s.components.lightness_variance.unwrap();
        assert!((0.0..=1.0).contains(&lv));
    }

    #[test]
    fn pinned_pair_yields_single_candidate() {
        let (pool, catalog, lm) = fixture();
        let model = Model::new(&lm, &pool, &catalog).unwrap();
        let mut c = Constraints::default();
        c.required_markers.extend([(3, 7), (11, 2)]);
        let out = model.generate(Encoding::Redundant, 2, &c, 5, 1).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].rank, 1);
        assert_eq!(out[0].palette.key(), vec![Marker::pair(3, 7), Marker::pair(11, 2)]);
    }

    #[test]
    fn six_category_outputs_are_valid_and_ranked() {
        let (pool, catalog, lm) = fixture();
        let model = Model::new(&lm, &pool, &catalog).unwrap();
        let mut c = Constraints::default();
        c.required_colors.insert(4);
        c.required_markers.insert((20, 30));
        c.excluded_shapes.insert(0);
        let out = model.generate(Encoding::Redundant, 6, &c, 8, 7).unwrap();
        assert_eq!(out.len(), 8);
        for (k, s) in out.iter().enumerate() {
            assert_eq!(s.rank, k + 1);
            s.palette.validate().unwrap();
            assert!(s.palette.color_ids().contains(&4));
            assert!(s.palette.entries.contains(&Marker::pair(20, 30)));
            assert!(!s.palette.shape_ids().contains(&0));
            assert!((0.0..=1.0).contains(&s.score));
        }
        assert!(out.windows(2).all(|w| w[0].score >= w[1].score));
        assert_eq!(out, model.generate(Encoding::Redundant, 6, &c, 8, 7).unwrap());
    }
}

use std::fmt;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use serde::{Deserialize, Serialize};

use super::{MarkStyle, StimulusSpec};
use crate::catalog::{designer_color_palettes, experiment_shape_palettes, ColorPool, ShapeCatalog};
use crate::error::{Error, Result};
use crate::evidence::{bin_of, Axis, BinSelector, EvidenceSource, Marker};
use crate::optimizer::{diverse_permutations, generate_single_channel, Constraints, Encoding, GeneratorConfig};
use crate::{seed, ColorId, ShapeId};

const CATEGORY_COUNTS: std::ops::RangeInclusive<usize> = 2..=10;
const ENGAGEMENT_PER_GROUP: usize = 3;
const ENGAGEMENT_SEED_OFFSET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Experiment {
    /// Encoding comparison: color-only, shape-only and redundant designs.
    E1,
    /// Palette interaction: designer color palettes × shape palettes.
    E2,
    /// Pairwise color accuracy over the representative pool.
    E3,
    /// Redundant palettes from the best color and shape subsets.
    E4,
}

impl Experiment {
    pub const ALL: [Experiment; 4] = [Experiment::E1, Experiment::E2, Experiment::E3, Experiment::E4];
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "e1" | "1" => Ok(Experiment::E1),
            "e2" | "2" => Ok(Experiment::E2),
            "e3" | "3" => Ok(Experiment::E3),
            "e4" | "4" => Ok(Experiment::E4),
            other => Err(Error::invalid(format!("unknown experiment {other:?}"))),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedDesign {
    pub id: usize,
    pub group: usize,
    pub n: usize,
    pub encoding: Encoding,
    /// Which encoding set or palette combination the design came from.
    pub set: String,
    pub marks: Vec<MarkStyle>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngagementPlan {
    pub group: usize,
    pub n: usize,
    pub marks: Vec<MarkStyle>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub experiment: Experiment,
    pub seed: u64,
    pub designs: Vec<PlannedDesign>,
    /// Design ids per participant group.
    pub groups: Vec<Vec<usize>>,
    pub engagement: Vec<EngagementPlan>,
}

impl ExperimentPlan {
    pub fn spec_for(&self, design: &PlannedDesign) -> StimulusSpec {
        StimulusSpec::new(design.n, design.seed)
    }

    pub fn engagement_spec(&self, check: &EngagementPlan) -> StimulusSpec {
        StimulusSpec::new(check.n, check.seed)
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    fn from_designs(experiment: Experiment, seed: u64, mut designs: Vec<PlannedDesign>, group_count: usize) -> Self {
        let mut groups = vec![Vec::new(); group_count];
        for (id, d) in designs.iter_mut().enumerate() {
            d.id = id;
            d.seed = seed::derive(seed, id as u64);
            groups[d.group].push(id);
        }
        let mut engagement = Vec::new();
        for (g, ids) in groups.iter().enumerate() {
            for k in 0..ENGAGEMENT_PER_GROUP {
                let n = 2 + k % 2;
                let source = ids
                    .iter()
                    .cycle()
                    .skip(k * ids.len() / ENGAGEMENT_PER_GROUP)
                    .take(ids.len())
                    .map(|&i| &designs[i])
                    .find(|d| d.n >= n)
                    .expect("every group has a design with three or more categories");
                let idx = engagement.len() as u64;
                engagement.push(EngagementPlan {
                    group: g,
                    n,
                    marks: source.marks[..n].to_vec(),
                    seed: seed::derive(seed, ENGAGEMENT_SEED_OFFSET + idx),
                });
            }
        }
        ExperimentPlan {
            experiment,
            seed,
            designs,
            groups,
            engagement,
        }
    }
}

fn design(group: usize, n: usize, encoding: Encoding, set: String, marks: Vec<MarkStyle>) -> PlannedDesign {
    PlannedDesign {
        id: 0,
        group,
        n,
        encoding,
        set,
        marks,
        seed: 0,
    }
}

fn color_mark(rgb: crate::RgbColor, id: Option<ColorId>, shape: Option<ShapeId>) -> MarkStyle {
    MarkStyle {
        color: Some(rgb),
        color_id: id,
        shape,
    }
}

fn shape_mark(shape: ShapeId) -> MarkStyle {
    MarkStyle {
        color: None,
        color_id: None,
        shape: Some(shape),
    }
}

/// Builds the design list, participant groups and engagement checks of an
/// experiment. E4 draws its top subsets from `evidence` when it has both
/// channel axes and falls back to seeded random subsets otherwise.
pub fn build_plan(
    experiment: Experiment,
    pool: &ColorPool,
    catalog: &ShapeCatalog,
    evidence: Option<&dyn EvidenceSource>,
    seed: u64,
) -> Result<ExperimentPlan> {
    let designs = match experiment {
        Experiment::E1 => plan_e1(catalog, seed)?,
        Experiment::E2 => plan_e2(catalog, seed)?,
        Experiment::E3 => plan_e3(pool, seed)?,
        Experiment::E4 => plan_e4(pool, catalog, evidence, seed)?,
    };
    let groups = match experiment {
        Experiment::E1 => 10,
        Experiment::E2 => 5,
        Experiment::E3 | Experiment::E4 => 15,
    };
    Ok(ExperimentPlan::from_designs(experiment, seed, designs, groups))
}

/// 3 encodings × 20 encoding sets × 9 category counts. Sets 0–4 draw
/// colors from the first designer palette, 5–9 from the second and so on.
/// Each group sees two sets per category count.
fn plan_e1(catalog: &ShapeCatalog, seed: u64) -> Result<Vec<PlannedDesign>> {
    let palettes = designer_color_palettes();
    let shapes: Vec<ShapeId> = catalog.ids().collect();
    let mut out = Vec::with_capacity(540);
    for n in CATEGORY_COUNTS {
        for s in 0..20usize {
            let mut rng = seed::child_rng(seed::derive(seed, 1), (n * 100 + s) as u64);
            let pal = &palettes[s / 5];
            let colors: Vec<_> = pal.colors.choose_multiple(&mut rng, n).copied().collect();
            let picked: Vec<ShapeId> = shapes.choose_multiple(&mut rng, n).copied().collect();
            if colors.len() < n || picked.len() < n {
                return Err(Error::invalid(format!("pools too small for {n} categories")));
            }
            let mut paired = picked.clone();
            paired.shuffle(&mut rng);
            let group = ((s + 2 * n) % 20) / 2;
            let set = format!("set{s:02}/{}", pal.name);
            out.push(design(group, n, Encoding::ColorOnly, set.clone(), colors.iter().map(|&c| color_mark(c, None, None)).collect()));
            out.push(design(group, n, Encoding::ShapeOnly, set.clone(), picked.iter().map(|&p| shape_mark(p)).collect()));
            out.push(design(
                group,
                n,
                Encoding::Redundant,
                set,
                colors.iter().zip(&paired).map(|(&c, &p)| color_mark(c, None, Some(p))).collect(),
            ));
        }
    }
    Ok(out)
}

/// 4 color palettes × 6 shape palettes at six categories, ten stimuli per
/// combination; every group sees each combination twice.
fn plan_e2(catalog: &ShapeCatalog, seed: u64) -> Result<Vec<PlannedDesign>> {
    let colors = designer_color_palettes();
    let shape_sets = experiment_shape_palettes();
    let mut out = Vec::with_capacity(240);
    for (ci, cp) in colors.iter().enumerate() {
        for (si, (sname, names)) in shape_sets.iter().enumerate() {
            let mut shapes: Vec<ShapeId> = names
                .iter()
                .map(|name| {
                    catalog.by_name(name).map(|e| e.id).ok_or_else(|| Error::InvalidEntry {
                        source_name: "shape catalog".into(),
                        entry: (*name).into(),
                        message: "shape required by the palette-interaction design is missing".into(),
                    })
                })
                .collect::<Result<_>>()?;
            shapes.shuffle(&mut seed::child_rng(seed::derive(seed, 2), (ci * 6 + si) as u64));
            let marks: Vec<MarkStyle> =
                cp.colors.iter().take(6).zip(&shapes).map(|(&c, &s)| color_mark(c, None, Some(s))).collect();
            for k in 0..10 {
                out.push(design(k / 2, 6, Encoding::Redundant, format!("{}+{sname}", cp.name), marks.clone()));
            }
        }
    }
    Ok(out)
}

/// Color combinations that spread pair co-occurrence evenly: each new color
/// is the one least often paired with those already chosen.
fn balanced_combinations(pool_len: usize, n: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = seed::rng(seed);
    let mut pair = vec![vec![0u32; pool_len]; pool_len];
    let mut used = vec![0u32; pool_len];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut order: Vec<usize> = (0..pool_len).collect();
        order.shuffle(&mut rng);
        let mut chosen: Vec<usize> = Vec::with_capacity(n);
        while chosen.len() < n {
            let next = order
                .iter()
                .copied()
                .filter(|c| !chosen.contains(c))
                .min_by_key(|&c| (chosen.iter().map(|&o| pair[c][o]).sum::<u32>(), used[c]))
                .expect("pool larger than n");
            chosen.push(next);
        }
        for (a, &x) in chosen.iter().enumerate() {
            used[x] += 1;
            for &y in &chosen[a + 1..] {
                pair[x][y] += 1;
                pair[y][x] += 1;
            }
        }
        out.push(chosen);
    }
    out
}

/// 90 color-only combinations per category count.
fn plan_e3(pool: &ColorPool, seed: u64) -> Result<Vec<PlannedDesign>> {
    if pool.len() < 10 {
        return Err(Error::invalid("color pool needs at least 10 colors"));
    }
    let mut out = Vec::with_capacity(810);
    for n in CATEGORY_COUNTS {
        let combos = balanced_combinations(pool.len(), n, 90, seed::derive(seed::derive(seed, 3), n as u64));
        for (k, combo) in combos.iter().enumerate() {
            let marks = combo
                .iter()
                .map(|&c| {
                    let e = &pool.entries()[c];
                    color_mark(e.rgb, Some(e.id), None)
                })
                .collect();
            out.push(design(((k + 6 * n) % 90) / 6, n, Encoding::ColorOnly, format!("combo{k:02}"), marks));
        }
    }
    Ok(out)
}

fn top_subsets(
    axis: Axis,
    n: usize,
    universe: usize,
    evidence: Option<&dyn EvidenceSource>,
    seed: u64,
) -> Result<Vec<Vec<u16>>> {
    let mut found: Vec<Vec<u16>> = Vec::new();
    if let Some(ev) = evidence.filter(|e| e.has_axis(axis)) {
        let lookup = ev.pair_lookup(axis, BinSelector::from(bin_of(n)?));
        let config = GeneratorConfig::default();
        match generate_single_channel(n, lookup.as_ref(), &ev.dims(), &Constraints::default(), 3, seed, &config) {
            Ok(list) => {
                for s in list {
                    found.push(s.palette.entries.iter().filter_map(|m| if axis == Axis::Color { m.color } else { m.shape }).collect());
                }
            }
            Err(e) => log::warn!("{axis} evidence unusable for n = {n}, using random subsets: {e}"),
        }
    }
    let mut rng = seed::rng(seed);
    let ids: Vec<u16> = (0..universe as u16).collect();
    while found.len() < 3 {
        let mut s: Vec<u16> = ids.choose_multiple(&mut rng, n).copied().collect();
        s.sort_unstable();
        if !found.contains(&s) {
            found.push(s);
        }
    }
    Ok(found)
}

/// Top three color and shape subsets per category count, crossed, each
/// assigned with up to 13 mutually dissimilar color-to-shape permutations.
fn plan_e4(
    pool: &ColorPool,
    catalog: &ShapeCatalog,
    evidence: Option<&dyn EvidenceSource>,
    seed: u64,
) -> Result<Vec<PlannedDesign>> {
    let base = seed::derive(seed, 4);
    let mut out = Vec::with_capacity(891);
    for n in CATEGORY_COUNTS {
        let colors = top_subsets(Axis::Color, n, pool.len(), evidence, seed::derive(base, 2 * n as u64))?;
        let shapes = top_subsets(Axis::Shape, n, catalog.len(), evidence, seed::derive(base, 2 * n as u64 + 1))?;
        for (ci, c) in colors.iter().enumerate() {
            for (si, s) in shapes.iter().enumerate() {
                let d = diverse_permutations(c, s, 13)?;
                for (pi, assignment) in d.assignments.iter().enumerate() {
                    let marks = assignment
                        .iter()
                        .map(|m: &Marker| MarkStyle::from_marker(m, pool))
                        .collect::<Result<Vec<_>>>()?;
                    let group = out.len() % 15;
                    out.push(design(group, n, Encoding::Redundant, format!("c{ci}s{si}p{pi:02}"), marks));
                }
            }
        }
    }
    Ok(out)
}

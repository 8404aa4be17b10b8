//! Multi-class scatterplot stimuli in which one category is clearly the
//! most correlated, their SVG rendering, and the plans of the four
//! experiment designs.

mod layout;
mod plan;
mod points;
mod render;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::catalog::ColorPool;
use crate::error::{Error, Result};
use crate::evidence::Marker;
use crate::optimizer::Palette;
use crate::{seed, ColorId, RgbColor, ShapeId};

pub use layout::{overlap_area, Declutter, Frame};
pub use plan::{build_plan, EngagementPlan, Experiment, ExperimentPlan, PlannedDesign};
pub use points::{gen_correlated_points, sample_r, Point, MAX_ATTEMPTS, SAMPLE_TOLERANCE};
pub use render::render_svg;

/// Correlation gap required between the two top categories of an
/// engagement check.
pub const ENGAGEMENT_GAP: f64 = 0.4;
/// Fresh layouts tried when jitter breaks a correlation constraint.
pub const MAX_LAYOUT_ATTEMPTS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StimulusSpec {
    pub n: usize,
    pub points_per_category: usize,
    pub target_r_range: (f64, f64),
    pub runner_up_gap: f64,
    /// Lowest correlation drawn for non-target categories.
    pub distractor_floor: f64,
    pub tolerance: f64,
    pub plot_px: f64,
    pub mark_px: f64,
    pub margin_px: f64,
    pub ticks_per_axis: usize,
    pub max_jitter_px: f64,
    pub seed: u64,
}

impl Default for StimulusSpec {
    fn default() -> Self {
        StimulusSpec {
            n: 2,
            points_per_category: 20,
            target_r_range: (0.8, 0.95),
            runner_up_gap: 0.2,
            distractor_floor: -0.2,
            tolerance: SAMPLE_TOLERANCE,
            plot_px: 400.0,
            mark_px: 6.0,
            margin_px: 20.0,
            ticks_per_axis: 13,
            max_jitter_px: 2.0,
            seed: 0,
        }
    }
}

impl StimulusSpec {
    pub fn new(n: usize, seed: u64) -> Self {
        StimulusSpec {
            n,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.target_r_range;
        if !(2..=10).contains(&self.n) {
            return Err(Error::invalid(format!("n = {} outside 2..=10", self.n)));
        }
        if !(-1.0 < lo && lo <= hi && hi < 1.0) {
            return Err(Error::invalid(format!("target range ({lo}, {hi}) must lie inside (-1, 1)")));
        }
        if !(self.runner_up_gap > 0.0) {
            return Err(Error::invalid("runner-up gap must be positive"));
        }
        if self.distractor_floor <= -1.0 || self.distractor_floor > lo - self.tolerance - self.runner_up_gap {
            return Err(Error::invalid("distractor floor leaves no room below the target"));
        }
        if self.points_per_category < 3 {
            return Err(Error::invalid("need at least 3 points per category"));
        }
        if !(self.mark_px > 0.0 && self.plot_px > 2.0 * self.margin_px + self.mark_px) {
            return Err(Error::invalid("plot too small for its margins and marks"));
        }
        if self.ticks_per_axis < 2 || self.max_jitter_px <= 0.0 || self.tolerance < 0.0 {
            return Err(Error::invalid("ticks, jitter and tolerance must be positive"));
        }
        Ok(())
    }

    /// Lowest and highest allowed mark centre, keeping marks clear of the axes.
    fn pixel_bounds(&self) -> (f64, f64) {
        let lo = render::AXIS_OFFSET + self.mark_px / 2.0 + 1.0;
        (lo, self.plot_px - lo)
    }
}

/// How one category is drawn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkStyle {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<RgbColor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_id: Option<ColorId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeId>,
}

impl MarkStyle {
    pub fn from_marker(m: &Marker, pool: &ColorPool) -> Result<Self> {
        let color = m.color.map(|c| pool.entry(c).map(|e| e.rgb)).transpose()?;
        Ok(MarkStyle {
            color,
            color_id: m.color,
            shape: m.shape,
        })
    }

    pub fn for_palette(palette: &Palette, pool: &ColorPool) -> Result<Vec<Self>> {
        palette.entries.iter().map(|m| MarkStyle::from_marker(m, pool)).collect()
    }

    /// Pool marker for this style when it has no off-pool color.
    pub fn marker(&self) -> Option<Marker> {
        match (self.color, self.color_id) {
            (Some(_), None) => None,
            _ => Some(Marker {
                color: self.color_id,
                shape: self.shape,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Category {
    pub mark: MarkStyle,
    /// Correlation the points were drawn for.
    pub target_r: f64,
    /// Correlation of `points` as rendered.
    pub sample_r: f64,
    /// Data units, recovered from the final pixel positions.
    pub points: Vec<Point>,
    /// Mark centres in pixels.
    pub pixels: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusData {
    pub spec: StimulusSpec,
    pub target_index: usize,
    pub categories: Vec<Category>,
    pub frame: Frame,
    /// Gap the stimulus was built to honour.
    pub gap: f64,
}

impl StimulusData {
    pub fn n(&self) -> usize {
        self.categories.len()
    }

    /// Recomputes every sample correlation from the stored points and checks
    /// the stimulus invariants.
    pub fn verify(&self) -> Result<()> {
        let spec = &self.spec;
        let tol = spec.tolerance;
        let fail = |msg: String| Err(Error::GenerationFailure(msg));
        if self.categories.len() != spec.n || self.target_index >= spec.n {
            return fail("category count does not match spec".into());
        }
        let mut rs = Vec::with_capacity(spec.n);
        for (i, c) in self.categories.iter().enumerate() {
            if c.points.len() != spec.points_per_category || c.pixels.len() != spec.points_per_category {
                return fail(format!("category {i} has {} points", c.points.len()));
            }
            rs.push(sample_r(&c.points)?);
        }
        let t = rs[self.target_index];
        let (lo, hi) = spec.target_r_range;
        if t < lo - tol || t > hi + tol {
            return fail(format!("target r = {t:.4} outside [{lo}, {hi}] ± {tol}"));
        }
        for (i, &r) in rs.iter().enumerate() {
            if i != self.target_index && r > t - self.gap + tol {
                return fail(format!("category {i} r = {r:.4} too close to target r = {t:.4}"));
            }
        }
        let all: Vec<Point> = self.categories.iter().flat_map(|c| c.pixels.iter().copied()).collect();
        for (a, &p) in all.iter().enumerate() {
            for &q in &all[a + 1..] {
                if overlap_area(p, q, spec.mark_px) > 0.0 {
                    return fail(format!("marks overlap at ({:.1}, {:.1})", p.x, p.y));
                }
            }
        }
        Ok(())
    }
}

fn generate(spec: &StimulusSpec, marks: &[MarkStyle], gap: f64) -> Result<StimulusData> {
    spec.validate()?;
    if marks.len() != spec.n {
        return Err(Error::invalid(format!("{} marks for a {}-category stimulus", marks.len(), spec.n)));
    }
    let count = spec.points_per_category;
    let (lo_px, hi_px) = spec.pixel_bounds();
    let declutter = Declutter {
        mark_px: spec.mark_px,
        max_step_px: spec.max_jitter_px,
        min_px: lo_px,
        max_px: hi_px,
        max_passes: 400,
    };
    let mut last_err = None;
    for attempt in 0..MAX_LAYOUT_ATTEMPTS {
        let base = seed::derive(spec.seed, attempt as u64);
        let mut rng = seed::rng(base);
        let target_index = rng.random_range(0..spec.n);
        let (lo, hi) = spec.target_r_range;
        let target_r = if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let target_pts = gen_correlated_points(target_r, count, seed::derive(base, target_index as u64 + 1))?;
        let target_sample = sample_r(&target_pts)?;
        let ceiling = target_sample - gap;
        let floor = spec.distractor_floor.min(ceiling);
        let mut raw: Vec<(f64, Vec<Point>)> = Vec::with_capacity(spec.n);
        for i in 0..spec.n {
            if i == target_index {
                raw.push((target_r, target_pts.clone()));
                continue;
            }
            let r = if ceiling > floor { rng.random_range(floor..=ceiling) } else { ceiling };
            raw.push((r, gen_correlated_points(r, count, seed::derive(base, i as u64 + 1))?));
        }
        let frame = Frame::fit(raw.iter().flat_map(|(_, p)| p.iter()), spec.plot_px, spec.margin_px);
        // Interleave categories so no category is always drawn on top.
        let mut px: Vec<Point> = (0..count)
            .flat_map(|k| raw.iter().map(move |(_, p)| p[k]))
            .map(|p| frame.to_px(p))
            .collect();
        if !declutter.run(&mut px) {
            last_err = Some(Error::GenerationFailure("overlapping marks could not be separated".into()));
            continue;
        }
        let categories: Vec<Category> = raw
            .iter()
            .enumerate()
            .map(|(i, (r, _))| {
                let pixels: Vec<Point> = (0..count).map(|k| px[k * spec.n + i]).collect();
                let points: Vec<Point> = pixels.iter().map(|&p| frame.from_px(p)).collect();
                Ok(Category {
                    mark: marks[i].clone(),
                    target_r: *r,
                    sample_r: sample_r(&points)?,
                    points,
                    pixels,
                })
            })
            .collect::<Result<_>>()?;
        let stim = StimulusData {
            spec: spec.clone(),
            target_index,
            categories,
            frame,
            gap,
        };
        match stim.verify() {
            Ok(()) => return Ok(stim),
            Err(e) => {
                log::debug!("layout attempt {attempt} rejected: {e}");
                last_err = Some(e);
            }
        }
    }
    Err(last_err.unwrap_or_else(|| Error::GenerationFailure("no valid layout".into())))
}

/// Builds a stimulus whose target category is the only one with a
/// correlation in the target range, at least `runner_up_gap` above the rest.
pub fn gen_stimulus(spec: &StimulusSpec, marks: &[MarkStyle]) -> Result<StimulusData> {
    generate(spec, marks, spec.runner_up_gap)
}

/// Two- or three-category stimulus with a wide correlation gap, used to
/// screen inattentive participants.
pub fn gen_engagement_check(spec: &StimulusSpec, marks: &[MarkStyle]) -> Result<StimulusData> {
    if !(2..=3).contains(&spec.n) {
        return Err(Error::invalid(format!("engagement checks use 2 or 3 categories, got {}", spec.n)));
    }
    generate(spec, marks, spec.runner_up_gap.max(ENGAGEMENT_GAP))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn marks(n: usize) -> Vec<MarkStyle> {
        (0..n)
            .map(|i| MarkStyle {
                color: None,
                color_id: None,
                shape: Some(i as u16),
            })
            .collect()
    }

    #[test]
    fn two_categories() {
        let s = gen_stimulus(&StimulusSpec::new(2, 1), &marks(2)).unwrap();
        s.verify().unwrap();
        let t = s.categories[s.target_index].sample_r;
        let other = s.categories[1 - s.target_index].sample_r;
        assert!(t >= 0.78 && other <= t - 0.18);
    }

    #[test]
    fn eight_categories_have_160_points() {
        let s = gen_stimulus(&StimulusSpec::new(8, 2), &marks(8)).unwrap();
        assert_eq!(s.categories.iter().map(|c| c.points.len()).sum::<usize>(), 160);
    }

    #[test]
    fn ten_categories_declutter() {
        for seed in 0..5 {
            gen_stimulus(&StimulusSpec::new(10, seed), &marks(10)).unwrap().verify().unwrap();
        }
    }

    #[test]
    fn engagement_gap() {
        for n in [2, 3] {
            let s = gen_engagement_check(&StimulusSpec::new(n, 7), &marks(n)).unwrap();
            let t = s.categories[s.target_index].sample_r;
            for (i, c) in s.categories.iter().enumerate() {
                if i != s.target_index {
                    assert!(t - c.sample_r >= ENGAGEMENT_GAP - 0.02);
                }
            }
        }
        assert!(gen_engagement_check(&StimulusSpec::new(4, 7), &marks(4)).is_err());
    }

    #[test]
    fn mismatched_marks() {
        assert!(gen_stimulus(&StimulusSpec::new(3, 0), &marks(2)).is_err());
        assert!(gen_stimulus(&StimulusSpec::new(11, 0), &marks(11)).is_err());
    }

    #[test]
    fn deterministic() {
        let a = gen_stimulus(&StimulusSpec::new(5, 11), &marks(5)).unwrap();
        let b = gen_stimulus(&StimulusSpec::new(5, 11), &marks(5)).unwrap();
        assert_eq!(a, b);
    }
}

use std::fmt::Write as _;

use super::StimulusData;
use crate::catalog::{FillClass, ShapeCatalog};
use crate::colorlab::Rgb;
use crate::error::Result;

/// Distance of both axes from the plot edge, in pixels.
pub const AXIS_OFFSET: f64 = 10.0;
const TICK_PX: f64 = 5.0;
const CIRCLE: &str = "M0.5,0A0.5,0.5 0 1,1 0.5,1A0.5,0.5 0 1,1 0.5,0Z";

/// SVG 1.1 document for a stimulus. Color-only categories are drawn as
/// filled circles and shape-only categories in black.
pub fn render_svg(stim: &StimulusData, catalog: &ShapeCatalog) -> Result<String> {
    let spec = &stim.spec;
    let size = spec.plot_px;
    let mut styles = Vec::with_capacity(stim.n());
    for c in &stim.categories {
        let color = c.mark.color.unwrap_or(Rgb::BLACK).to_hex();
        let (path, class) = match c.mark.shape {
            Some(id) => {
                let e = catalog.entry(id)?;
                (e.path.as_str(), e.fill_class)
            }
            None => (CIRCLE, FillClass::Filled),
        };
        let paint = match class {
            FillClass::Filled => format!(r#"fill="{color}" stroke="none""#),
            FillClass::Unfilled => format!(r##"fill="#ffffff" stroke="{color}" stroke-width="1""##),
            FillClass::Open => format!(r#"fill="none" stroke="{color}" stroke-width="1.5""#),
        };
        styles.push((path, paint));
    }

    let mut s = String::with_capacity(256 + 160 * stim.n() * spec.points_per_category);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(s, r##"<rect width="{size}" height="{size}" fill="#ffffff"/>"##);
    let base = size - AXIS_OFFSET;
    let _ = writeln!(s, r##"<g stroke="#000000" stroke-width="1" fill="none">"##);
    let _ = writeln!(s, r#"<line class="axis" x1="{AXIS_OFFSET}" y1="{base}" x2="{base}" y2="{base}"/>"#);
    let _ = writeln!(s, r#"<line class="axis" x1="{AXIS_OFFSET}" y1="{AXIS_OFFSET}" x2="{AXIS_OFFSET}" y2="{base}"/>"#);
    let (lo, hi) = (spec.margin_px, size - spec.margin_px);
    let steps = (spec.ticks_per_axis - 1) as f64;
    for k in 0..spec.ticks_per_axis {
        let t = lo + (hi - lo) * k as f64 / steps;
        let _ = writeln!(s, r#"<line class="tick" x1="{t:.2}" y1="{base}" x2="{t:.2}" y2="{:.2}"/>"#, base + TICK_PX);
        let _ = writeln!(s, r#"<line class="tick" x1="{:.2}" y1="{t:.2}" x2="{AXIS_OFFSET}" y2="{t:.2}"/>"#, AXIS_OFFSET - TICK_PX);
    }
    s.push_str("</g>\n");
    let m = spec.mark_px;
    for k in 0..spec.points_per_category {
        for (i, c) in stim.categories.iter().enumerate() {
            let p = c.pixels[k];
            let (path, paint) = &styles[i];
            let _ = writeln!(
                s,
                r#"<path class="mark" data-category="{i}" d="{path}" transform="translate({:.2},{:.2}) scale({m})" {paint} vector-effect="non-scaling-stroke"/>"#,
                p.x - m / 2.0,
                p.y - m / 2.0,
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::load_default_pools;
    use crate::stimgen::{gen_stimulus, MarkStyle, StimulusSpec};

    #[test]
    fn counts_and_determinism() {
        let (pool, catalog) = load_default_pools().unwrap();
        let marks: Vec<MarkStyle> = (0..2)
            .map(|c| MarkStyle {
                color: Some(pool.entries()[c].rgb),
                color_id: Some(c as u16),
                shape: None,
            })
            .collect();
        let stim = gen_stimulus(&StimulusSpec::new(2, 3), &marks).unwrap();
        let svg = render_svg(&stim, &catalog).unwrap();
        assert_eq!(svg.matches(r#"class="mark""#).count(), 40);
        assert_eq!(svg.matches(r#"class="tick""#).count(), 26);
        assert_eq!(svg.matches(r#"class="axis""#).count(), 2);
        assert!(svg.contains(&pool.entries()[0].rgb.to_hex()));
        assert_eq!(svg, render_svg(&stim, &catalog).unwrap());
    }

    #[test]
    fn fill_classes() {
        let (_, catalog) = load_default_pools().unwrap();
        let marks: Vec<MarkStyle> = [0u16, 13, 26]
            .iter()
            .map(|&s| MarkStyle {
                color: Some(Rgb::new(200, 0, 0)),
                color_id: None,
                shape: Some(s),
            })
            .collect();
        let svg = render_svg(&gen_stimulus(&StimulusSpec::new(3, 1), &marks).unwrap(), &catalog).unwrap();
        assert_eq!(svg.matches(r##"fill="#c80000" stroke="none""##).count(), 20);
        assert_eq!(svg.matches(r##"fill="#ffffff" stroke="#c80000""##).count(), 20);
        assert_eq!(svg.matches(r##"fill="none" stroke="#c80000""##).count(), 20);
    }
}

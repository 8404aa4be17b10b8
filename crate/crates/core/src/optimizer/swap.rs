use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Constraints, Encoding, Palette, ScoredPalette, ScoringContext};
use crate::error::{Error, Result};
use crate::evidence::Marker;

/// Which part of an entry to replace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwapPart {
    Color,
    Shape,
    /// The whole color/shape pairing.
    Marker,
}

impl SwapPart {
    pub fn default_for(encoding: Encoding) -> SwapPart {
        match encoding {
            Encoding::ColorOnly => SwapPart::Color,
            Encoding::ShapeOnly => SwapPart::Shape,
            Encoding::Redundant => SwapPart::Marker,
        }
    }
}

impl FromStr for SwapPart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "color" => Ok(SwapPart::Color),
            "shape" => Ok(SwapPart::Shape),
            "marker" => Ok(SwapPart::Marker),
            other => Err(Error::invalid(format!("unknown swap part {other:?}"))),
        }
    }
}

impl fmt::Display for SwapPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SwapPart::Color => "color",
            SwapPart::Shape => "shape",
            SwapPart::Marker => "marker",
        })
    }
}

/// Replace the element at `position` with the best-scoring alternative.
///
/// The rejected element is added to the returned constraints' exclusions, so
/// it cannot come back while the caller keeps using them. All other entries
/// stay in place and the rank is kept. Ties go to the smallest replacement id.
pub fn swap_element(
    scored: &ScoredPalette,
    position: usize,
    part: Option<SwapPart>,
    ctx: &ScoringContext<'_>,
    constraints: &Constraints,
) -> Result<(ScoredPalette, Constraints)> {
    let palette = &scored.palette;
    palette.validate()?;
    let encoding = palette.encoding;
    let part = part.unwrap_or(SwapPart::default_for(encoding));
    let fits = matches!(
        (encoding, part),
        (Encoding::ColorOnly, SwapPart::Color) | (Encoding::ShapeOnly, SwapPart::Shape) | (Encoding::Redundant, _)
    );
    if !fits {
        return Err(Error::invalid(format!("cannot swap the {part} of a {encoding} palette")));
    }
    let current = *palette
        .entries
        .get(position)
        .ok_or_else(|| Error::invalid(format!("position {position} outside palette of {}", palette.n())))?;

    let req_colors = constraints.all_required_colors();
    let req_shapes = constraints.all_required_shapes();
    let color_required = current.color.is_some_and(|c| req_colors.contains(&c));
    let shape_required = current.shape.is_some_and(|s| req_shapes.contains(&s));
    let blocked = match part {
        SwapPart::Color => color_required,
        SwapPart::Shape => shape_required,
        SwapPart::Marker => color_required || shape_required,
    };
    if blocked {
        return Err(Error::Constraint(format!("{current} at position {position} is required")));
    }

    let mut next = constraints.clone();
    match part {
        SwapPart::Color => {
            next.excluded_colors.insert(current.color.expect("color present"));
        }
        SwapPart::Shape => {
            next.excluded_shapes.insert(current.shape.expect("shape present"));
        }
        SwapPart::Marker => {
            next.excluded_markers.insert((current.color.unwrap(), current.shape.unwrap()));
        }
    }

    let dims = ctx.dims();
    let others: Vec<Marker> = palette
        .entries
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != position)
        .map(|(_, m)| *m)
        .collect();
    let free_colors: Vec<u16> = next
        .available_colors(dims.colors)
        .into_iter()
        .filter(|c| others.iter().all(|m| m.color != Some(*c)))
        .collect();
    let free_shapes: Vec<u16> = next
        .available_shapes(dims.shapes)
        .into_iter()
        .filter(|s| others.iter().all(|m| m.shape != Some(*s)))
        .collect();
    let replacements: Vec<Marker> = match part {
        SwapPart::Color => free_colors
            .iter()
            .map(|&c| Marker {
                color: Some(c),
                shape: current.shape,
            })
            .collect(),
        SwapPart::Shape => free_shapes
            .iter()
            .map(|&s| Marker {
                color: current.color,
                shape: Some(s),
            })
            .collect(),
        SwapPart::Marker => free_colors
            .iter()
            .flat_map(|&c| free_shapes.iter().map(move |&s| Marker::pair(c, s)))
            .collect(),
    };

    let mut best: Option<(Marker, ScoredPalette)> = None;
    for r in replacements {
        if r == current || !next.allows_marker(&r) {
            continue;
        }
        let mut entries = palette.entries.clone();
        entries[position] = r;
        let candidate = Palette { encoding, entries };
        let s = match ctx.score(&candidate) {
            Ok(s) => s,
            Err(Error::MissingEvidence { .. } | Error::MissingIndividualEvidence { .. }) => continue,
            Err(e) => return Err(e),
        };
        if best.as_ref().is_none_or(|(_, b)| s.score > b.score) {
            best = Some((r, s));
        }
    }
    let (_, mut s) = best.ok_or(Error::ExhaustedAlternatives { position })?;
    s.rank = scored.rank;
    Ok((s, next))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{load_default_pools, ColorPool, ShapeCatalog};
    use crate::colorlab::Lab;
    use crate::evidence::PoolDims;
    use crate::optimizer::Model;
    use crate::synthetic::LatentModel;

    fn three_colors() -> (ColorPool, ShapeCatalog) {
        let pool = ColorPool::from_labs(&[Lab::new(30.0, 20.0, 10.0), Lab::new(60.0, -40.0, 30.0), Lab::new(80.0, 0.0, 60.0)]).unwrap();
        let (_, catalog) = load_default_pools().unwrap();
        let catalog = ShapeCatalog::new(catalog.entries()[..3].to_vec()).unwrap();
        (pool, catalog)
    }

    #[test]
    fn unique_alternative_then_exhausted() {
        let (pool, catalog) = three_colors();
        let lm = LatentModel::new(PoolDims { colors: 3, shapes: 3 }, 2);
        let model = Model::new(&lm, &pool, &catalog).unwrap();
        let start = model.score(&Palette::colors(Encoding::ColorOnly, &[0, 1]).unwrap()).unwrap();
        let (swapped, c1) = model.swap(&start, 1, None, &Constraints::default()).unwrap();
        assert_eq!(swapped.palette.color_ids(), vec![0, 2]);
        assert!(c1.excluded_colors.contains(&1));
        let err = model.swap(&swapped, 1, None, &c1).unwrap_err();
        assert!(matches!(err, Error::ExhaustedAlternatives { position: 1 }));
    }

    #[test]
    fn required_element_cannot_be_swapped() {
        let (pool, catalog) = three_colors();
        let lm = LatentModel::new(PoolDims { colors: 3, shapes: 3 }, 2);
        let model = Model::new(&lm, &pool, &catalog).unwrap();
        let start = model.score(&Palette::colors(Encoding::ColorOnly, &[0, 1]).unwrap()).unwrap();
        let mut c = Constraints::default();
        c.required_colors.insert(0);
        assert!(matches!(model.swap(&start, 0, None, &c), Err(Error::Constraint(_))));
        assert!(model.swap(&start, 2, None, &c).is_err());
        assert!(model.swap(&start, 0, Some(SwapPart::Shape), &c).is_err());
    }

    #[test]
    fn marker_swap_excludes_the_pairing() {
        let (pool, catalog) = three_colors();
        let lm = LatentModel::new(PoolDims { colors: 3, shapes: 3 }, 5);
        let model = Model::new(&lm, &pool, &catalog).unwrap();
        let p = Palette::new(Encoding::Redundant, vec![Marker::pair(0, 0), Marker::pair(1, 1)]).unwrap();
        let start = model.score(&p).unwrap();
        let (s, c) = model.swap(&start, 0, None, &Constraints::default()).unwrap();
        assert!(c.excluded_markers.contains(&(0, 0)));
        assert_ne!(s.palette.entries[0], Marker::pair(0, 0));
        assert_eq!(s.palette.entries[1], Marker::pair(1, 1));
    }
}

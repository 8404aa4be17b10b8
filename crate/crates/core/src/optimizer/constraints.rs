use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{check_n, Encoding};
use crate::error::{Error, Result};
use crate::evidence::{Marker, PoolDims};
use crate::{ColorId, ShapeId};

/// Must-include and must-avoid elements plus optional candidate pools.
///
/// `required_markers` pin a color to a shape. Exclusions grow as elements are
/// swapped out and live only as long as the caller keeps this value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constraints {
    pub required_colors: BTreeSet<ColorId>,
    pub required_shapes: BTreeSet<ShapeId>,
    pub required_markers: BTreeSet<(ColorId, ShapeId)>,
    pub excluded_colors: BTreeSet<ColorId>,
    pub excluded_shapes: BTreeSet<ShapeId>,
    pub excluded_markers: BTreeSet<(ColorId, ShapeId)>,
    /// Restricts the colors considered; `None` means the whole pool.
    pub candidate_colors: Option<BTreeSet<ColorId>>,
    pub candidate_shapes: Option<BTreeSet<ShapeId>>,
}

impl Constraints {
    /// Colors that must appear, including those of pinned markers.
    pub fn all_required_colors(&self) -> BTreeSet<ColorId> {
        let mut s = self.required_colors.clone();
        s.extend(self.required_markers.iter().map(|m| m.0));
        s
    }

    pub fn all_required_shapes(&self) -> BTreeSet<ShapeId> {
        let mut s = self.required_shapes.clone();
        s.extend(self.required_markers.iter().map(|m| m.1));
        s
    }

    /// Usable colors: candidates minus exclusions, ascending.
    pub fn available_colors(&self, pool_len: usize) -> Vec<ColorId> {
        available(pool_len, self.candidate_colors.as_ref(), &self.excluded_colors)
    }

    pub fn available_shapes(&self, catalog_len: usize) -> Vec<ShapeId> {
        available(catalog_len, self.candidate_shapes.as_ref(), &self.excluded_shapes)
    }

    pub fn allows_marker(&self, m: &Marker) -> bool {
        match (m.color, m.shape) {
            (Some(c), Some(s)) => !self.excluded_markers.contains(&(c, s)),
            _ => true,
        }
    }

    /// Check feasibility for an `n`-category palette of `encoding`.
    pub fn validate(&self, encoding: Encoding, n: usize, dims: &PoolDims) -> Result<()> {
        check_n(n)?;
        let colors = self.all_required_colors();
        let shapes = self.all_required_shapes();
        for &c in colors
            .iter()
            .chain(&self.excluded_colors)
            .chain(self.candidate_colors.iter().flatten())
        {
            if usize::from(c) >= dims.colors {
                return Err(Error::UnknownId {
                    kind: "color",
                    id: u32::from(c),
                });
            }
        }
        for &s in shapes
            .iter()
            .chain(&self.excluded_shapes)
            .chain(self.candidate_shapes.iter().flatten())
        {
            if usize::from(s) >= dims.shapes {
                return Err(Error::UnknownId {
                    kind: "shape",
                    id: u32::from(s),
                });
            }
        }
        match encoding {
            Encoding::ColorOnly if !shapes.is_empty() => {
                return Err(Error::Constraint("shape requirements given for a color-only palette".into()))
            }
            Encoding::ShapeOnly if !colors.is_empty() => {
                return Err(Error::Constraint("color requirements given for a shape-only palette".into()))
            }
            _ => {}
        }
        if let Some(c) = colors.intersection(&self.excluded_colors).next() {
            return Err(Error::Constraint(format!("color {c} is both required and excluded")));
        }
        if let Some(s) = shapes.intersection(&self.excluded_shapes).next() {
            return Err(Error::Constraint(format!("shape {s} is both required and excluded")));
        }
        if let Some((c, s)) = self.required_markers.intersection(&self.excluded_markers).next() {
            return Err(Error::Constraint(format!("marker c{c}/s{s} is both required and excluded")));
        }
        let pinned_colors: BTreeSet<_> = self.required_markers.iter().map(|m| m.0).collect();
        let pinned_shapes: BTreeSet<_> = self.required_markers.iter().map(|m| m.1).collect();
        if pinned_colors.len() != self.required_markers.len() || pinned_shapes.len() != self.required_markers.len() {
            return Err(Error::Constraint("required markers reuse a color or shape".into()));
        }
        if colors.len() > n || shapes.len() > n {
            return Err(Error::Constraint(format!(
                "{} required colors and {} required shapes exceed n = {n}",
                colors.len(),
                shapes.len()
            )));
        }
        if let Some(cands) = &self.candidate_colors {
            if let Some(c) = colors.difference(cands).next() {
                return Err(Error::Constraint(format!("required color {c} is not a candidate")));
            }
        }
        if let Some(cands) = &self.candidate_shapes {
            if let Some(s) = shapes.difference(cands).next() {
                return Err(Error::Constraint(format!("required shape {s} is not a candidate")));
            }
        }
        if encoding != Encoding::ShapeOnly && self.available_colors(dims.colors).len() < n {
            return Err(Error::Constraint(format!("fewer than {n} colors remain available")));
        }
        if encoding != Encoding::ColorOnly && self.available_shapes(dims.shapes).len() < n {
            return Err(Error::Constraint(format!("fewer than {n} shapes remain available")));
        }
        Ok(())
    }
}

fn available(len: usize, candidates: Option<&BTreeSet<u16>>, excluded: &BTreeSet<u16>) -> Vec<u16> {
    (0..len as u16)
        .filter(|id| candidates.is_none_or(|c| c.contains(id)) && !excluded.contains(id))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIMS: PoolDims = PoolDims { colors: 39, shapes: 39 };

    #[test]
    fn infeasible_sets_rejected() {
        let mut c = Constraints::default();
        c.required_colors = (0..6).collect();
        assert!(matches!(c.validate(Encoding::ColorOnly, 5, &DIMS), Err(Error::Constraint(_))));
        c.validate(Encoding::ColorOnly, 6, &DIMS).unwrap();

        let mut c = Constraints::default();
        c.required_colors.insert(3);
        c.excluded_colors.insert(3);
        assert!(matches!(c.validate(Encoding::ColorOnly, 5, &DIMS), Err(Error::Constraint(_))));

        let mut c = Constraints::default();
        c.required_markers.insert((1, 2));
        c.excluded_shapes.insert(2);
        assert!(matches!(c.validate(Encoding::Redundant, 5, &DIMS), Err(Error::Constraint(_))));

        let mut c = Constraints::default();
        c.required_markers.extend([(1, 2), (1, 3)]);
        assert!(matches!(c.validate(Encoding::Redundant, 5, &DIMS), Err(Error::Constraint(_))));
    }

    #[test]
    fn unknown_ids_and_bad_n() {
        let mut c = Constraints::default();
        c.required_colors.insert(99);
        assert!(matches!(
            c.validate(Encoding::ColorOnly, 5, &DIMS),
            Err(Error::UnknownId { kind: "color", id: 99 })
        ));
        assert!(matches!(
            Constraints::default().validate(Encoding::ColorOnly, 1, &DIMS),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn candidate_pool_limits_availability() {
        let mut c = Constraints::default();
        c.candidate_colors = Some((0..4).collect());
        c.excluded_colors.insert(1);
        assert_eq!(c.available_colors(39), vec![0, 2, 3]);
        assert!(c.validate(Encoding::ColorOnly, 4, &DIMS).is_err());
        c.validate(Encoding::ColorOnly, 3, &DIMS).unwrap();
    }
}

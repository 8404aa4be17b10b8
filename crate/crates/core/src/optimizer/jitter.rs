use rand::Rng;

use crate::catalog::ColorPool;
use crate::colorlab::{ciede2000, in_srgb_gamut, Lab};
use crate::{seed, ColorId, LabColor};

/// Limits on how far a jittered color may move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterBounds {
    pub lightness: f64,
    pub chroma_axis: f64,
    pub max_delta_e: f64,
    pub attempts: usize,
}

impl Default for JitterBounds {
    fn default() -> Self {
        JitterBounds {
            lightness: 5.0,
            chroma_axis: 10.0,
            max_delta_e: 15.0,
            attempts: 1000,
        }
    }
}

/// A random nearby color: |ΔL| ≤ 5, |Δa|, |Δb| ≤ 10, CIEDE2000 ≤ 15 and in
/// the sRGB gamut. Draws are rejected until all hold; after `attempts`
/// failures the input is returned unchanged.
pub fn jitter_color(lab: LabColor, seed: u64) -> LabColor {
    jitter_color_with(lab, seed, &JitterBounds::default())
}

pub fn jitter_color_with(lab: LabColor, seed: u64, bounds: &JitterBounds) -> LabColor {
    let mut rng = seed::rng(seed);
    for _ in 0..bounds.attempts {
        let cand = Lab::new(
            lab.l + rng.random_range(-bounds.lightness..=bounds.lightness),
            lab.a + rng.random_range(-bounds.chroma_axis..=bounds.chroma_axis),
            lab.b + rng.random_range(-bounds.chroma_axis..=bounds.chroma_axis),
        );
        if in_srgb_gamut(cand) && ciede2000(lab, cand) <= bounds.max_delta_e {
            return cand;
        }
    }
    lab
}

/// Pool color closest to `lab` by CIEDE2000, ties to the lowest id.
pub fn nearest_representative(lab: LabColor, pool: &ColorPool) -> ColorId {
    let mut best = (f64::INFINITY, 0);
    for e in pool.entries() {
        let d = ciede2000(lab, e.lab);
        if d < best.0 {
            best = (d, e.id);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::load_default_pools;

    #[test]
    fn reproducible_and_bounded() {
        let c = Lab::new(60.0, 10.0, -20.0);
        assert_eq!(jitter_color(c, 4), jitter_color(c, 4));
        for s in 0..500 {
            let j = jitter_color(c, s);
            assert!((j.l - c.l).abs() <= 5.0 && (j.a - c.a).abs() <= 10.0 && (j.b - c.b).abs() <= 10.0);
            assert!(ciede2000(c, j) <= 15.0 && in_srgb_gamut(j));
        }
    }

    #[test]
    fn gamut_edge_stays_in_gamut() {
        let edge = crate::colorlab::srgb_to_lab::<f64>(crate::colorlab::Rgb { r: 0, g: 0, b: 255 });
        for s in 0..200 {
            assert!(in_srgb_gamut(jitter_color(edge, s)));
        }
    }

    #[test]
    fn pool_colors_map_to_themselves() {
        let (pool, _) = load_default_pools().unwrap();
        for e in pool.entries() {
            assert_eq!(nearest_representative(e.lab, &pool), e.id);
        }
    }

    #[test]
    fn midpoint_tie_goes_to_lower_id() {
        let (dark, light, mid) = (Lab::new(40.0, 0.0, 0.0), Lab::new(60.0, 0.0, 0.0), Lab::new(50.0, 0.0, 0.0));
        assert_eq!(ciede2000(mid, dark), ciede2000(mid, light));
        let pool = ColorPool::from_labs(&[dark, light]).unwrap();
        assert_eq!(nearest_representative(mid, &pool), 0);
        let flipped = ColorPool::from_labs(&[light, dark]).unwrap();
        assert_eq!(nearest_representative(mid, &flipped), 0);
    }
}

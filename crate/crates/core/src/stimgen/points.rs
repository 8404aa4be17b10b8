use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::analysis::pearson;
use crate::error::{Error, Result};
use crate::seed;

/// Accepted distance between a sample correlation and its target.
pub const SAMPLE_TOLERANCE: f64 = 0.02;
/// Draws tried before giving up on a correlation target.
pub const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

pub fn sample_r(points: &[Point]) -> Result<f64> {
    let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
    pearson(&xs, &ys)
}

/// Standard bivariate normal sample with correlation `r_target`, redrawn
/// until the sample correlation is within [`SAMPLE_TOLERANCE`] of the target.
pub fn gen_correlated_points(r_target: f64, count: usize, seed: u64) -> Result<Vec<Point>> {
    if !(r_target.abs() < 1.0) {
        return Err(Error::invalid(format!("target correlation {r_target} must lie in (-1, 1)")));
    }
    if count < 3 {
        return Err(Error::invalid(format!("need at least 3 points, got {count}")));
    }
    let mut rng = seed::rng(seed);
    let k = (1.0 - r_target * r_target).sqrt();
    let mut pts = vec![Point { x: 0.0, y: 0.0 }; count];
    for _ in 0..MAX_ATTEMPTS {
        for p in pts.iter_mut() {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            *p = Point {
                x: z1,
                y: r_target * z1 + k * z2,
            };
        }
        if let Ok(r) = sample_r(&pts) {
            if (r - r_target).abs() <= SAMPLE_TOLERANCE {
                return Ok(pts);
            }
        }
    }
    Err(Error::GenerationFailure(format!(
        "no sample of {count} points within {SAMPLE_TOLERANCE} of r = {r_target} after {MAX_ATTEMPTS} draws"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hits_targets() {
        for (i, &r) in [0.0, 0.5, 0.9, -0.2].iter().enumerate() {
            let pts = gen_correlated_points(r, 20, i as u64).unwrap();
            assert_eq!(pts.len(), 20);
            assert!((sample_r(&pts).unwrap() - r).abs() <= SAMPLE_TOLERANCE);
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(gen_correlated_points(0.85, 20, 5).unwrap(), gen_correlated_points(0.85, 20, 5).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(gen_correlated_points(1.0, 20, 0).is_err());
        assert!(gen_correlated_points(0.5, 2, 0).is_err());
        assert!(gen_correlated_points(f64::NAN, 20, 0).is_err());
    }
}

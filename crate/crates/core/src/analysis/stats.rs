use num_traits::Float;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::seed;

pub fn mean<T: Float>(xs: &[T]) -> Option<T> {
    if xs.is_empty() {
        return None;
    }
    let sum = xs.iter().fold(T::zero(), |a, &b| a + b);
    Some(sum / T::from(xs.len())?)
}

/// Pearson product-moment correlation.
pub fn pearson<T: Float>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!("lengths differ: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::invalid("correlation needs at least two points"));
    }
    let mx = mean(x).unwrap();
    let my = mean(y).unwrap();
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx <= T::zero() {
        return Err(Error::UndefinedCorrelation("first series has zero variance"));
    }
    if syy <= T::zero() {
        return Err(Error::UndefinedCorrelation("second series has zero variance"));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-T::one()).min(T::one()))
}

/// Percentile bootstrap interval for the mean.
pub fn bootstrap_mean_ci(values: &[f64], resamples: usize, confidence: f64, seed: u64) -> Option<(f64, f64)> {
    if values.is_empty() || resamples == 0 {
        return None;
    }
    let mut rng = seed::rng(seed);
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - confidence) / 2.0;
    let at = |q: f64| means[((resamples - 1) as f64 * q).round() as usize];
    Some((at(alpha), at(1.0 - alpha)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_and_inverse() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn five_point_hand_value() {
        // sxy = 6, sxx = 10, syy = 6  =>  r = 6 / sqrt(60)
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 4.0, 5.0, 4.0, 5.0];
        assert!((pearson(&x, &y).unwrap() - 0.774_596_669_241_483_4).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_is_undefined() {
        assert!(matches!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::UndefinedCorrelation(_))));
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let r: f32 = pearson(&[1.0f32, 2.0, 3.0], &[2.0f32, 4.0, 7.0]).unwrap();
        assert!((r - 0.993_399).abs() < 1e-4);
    }

    #[test]
    fn constant_values_give_zero_width() {
        let (lo, hi) = bootstrap_mean_ci(&[0.4; 7], 200, 0.95, 1).unwrap();
        assert_eq!(lo, hi);
        assert!((lo - 0.4).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn affine_invariance(xs in prop::collection::vec(-10.0f64..10.0, 3..20), a in -5.0f64..5.0, b in -5.0f64..5.0, seed in 0u64..1000) {
            prop_assume!(a.abs() > 1e-3);
            let mut rng = crate::seed::rng(seed);
            let ys: Vec<f64> = xs.iter().map(|x| x + rng.random_range(-3.0..3.0)).collect();
            let t: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            if let (Ok(r1), Ok(r2)) = (pearson(&t, &ys), pearson(&xs, &ys)) {
                prop_assert!((r1 - a.signum() * r2).abs() < 1e-9);
            }
        }
    }
}

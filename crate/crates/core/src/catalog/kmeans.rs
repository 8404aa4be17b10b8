use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::colorlab::Lab;
use crate::error::{Error, Result};
use crate::seed;
use crate::LabColor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub max_iterations: usize,
    /// Stop once `|Δinertia| / inertia` falls below this.
    pub relative_tolerance: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            max_iterations: 200,
            relative_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeans {
    /// Centroids snapped to the nearest member of their cluster.
    pub centroids: Vec<LabColor>,
    /// Cluster index of every sample.
    pub labels: Vec<usize>,
    /// Total within-cluster squared distance after each assignment step.
    pub inertia_history: Vec<f64>,
}

fn dist2(x: &LabColor, y: &LabColor) -> f64 {
    let (dl, da, db) = (x.l - y.l, x.a - y.a, x.b - y.b);
    dl * dl + da * da + db * db
}

/// Lloyd's k-means in CIELAB with k-means++ seeding; see [`kmeans_lab_detailed`].
pub fn kmeans_lab(samples: &[LabColor], k: usize, seed: u64) -> Result<Vec<LabColor>> {
    Ok(kmeans_lab_detailed(samples, k, seed, &KMeansConfig::default())?.centroids)
}

pub fn kmeans_lab_detailed(samples: &[LabColor], k: usize, seed: u64, config: &KMeansConfig) -> Result<KMeans> {
    if samples.is_empty() {
        return Err(Error::invalid("k-means needs at least one sample"));
    }
    if k == 0 || k > samples.len() {
        return Err(Error::invalid(format!("k = {k} outside 1..={}", samples.len())));
    }
    let mut rng = seed::rng(seed);
    let mut centroids = plus_plus_seeds(samples, k, &mut rng);
    let mut labels = vec![0usize; samples.len()];
    let mut inertia_history = Vec::new();

    for _ in 0..config.max_iterations.max(1) {
        let inertia = assign(samples, &centroids, &mut labels);
        let converged = inertia_history.last().is_some_and(|&prev: &f64| {
            prev == 0.0 || ((prev - inertia).abs() / prev) < config.relative_tolerance
        });
        inertia_history.push(inertia);
        if converged {
            break;
        }
        update(samples, &labels, &mut centroids);
    }

    // Snap each centroid onto the closest sample of its own cluster.
    let mut best: Vec<Option<(f64, usize)>> = vec![None; k];
    for (i, (s, &c)) in samples.iter().zip(&labels).enumerate() {
        let d = dist2(s, &centroids[c]);
        if best[c].is_none_or(|(bd, _)| d < bd) {
            best[c] = Some((d, i));
        }
    }
    let snapped = centroids
        .iter()
        .zip(&best)
        .map(|(c, b)| match b {
            Some((_, i)) => samples[*i],
            // Empty cluster: fall back to the nearest sample overall.
            None => *samples
                .iter()
                .min_by(|x, y| dist2(x, c).total_cmp(&dist2(y, c)))
                .expect("non-empty samples"),
        })
        .collect();

    Ok(KMeans {
        centroids: snapped,
        labels,
        inertia_history,
    })
}

fn plus_plus_seeds(samples: &[LabColor], k: usize, rng: &mut seed::Rng) -> Vec<LabColor> {
    let mut centroids = Vec::with_capacity(k);
    centroids.push(samples[rng.random_range(0..samples.len())]);
    let mut d2: Vec<f64> = samples.iter().map(|s| dist2(s, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    chosen = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            chosen.expect("positive total weight")
        } else {
            rng.random_range(0..samples.len())
        };
        let c = samples[pick];
        centroids.push(c);
        for (w, s) in d2.iter_mut().zip(samples) {
            *w = w.min(dist2(s, &c));
        }
    }
    centroids
}

fn assign(samples: &[LabColor], centroids: &[LabColor], labels: &mut [usize]) -> f64 {
    let mut inertia = 0.0;
    for (s, label) in samples.iter().zip(labels.iter_mut()) {
        let mut best = (f64::INFINITY, 0usize);
        for (j, c) in centroids.iter().enumerate() {
            let d = dist2(s, c);
            if d < best.0 {
                best = (d, j);
            }
        }
        *label = best.1;
        inertia += best.0;
    }
    inertia
}

fn update(samples: &[LabColor], labels: &[usize], centroids: &mut [LabColor]) {
    let mut sums = vec![(0.0f64, 0.0f64, 0.0f64, 0usize); centroids.len()];
    for (s, &c) in samples.iter().zip(labels) {
        let e = &mut sums[c];
        e.0 += s.l;
        e.1 += s.a;
        e.2 += s.b;
        e.3 += 1;
    }
    for (c, (l, a, b, n)) in centroids.iter_mut().zip(sums) {
        if n > 0 {
            let n = n as f64;
            *c = Lab::new(l / n, a / n, b / n);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> Vec<LabColor> {
        (0..n)
            .map(|i| {
                let t = i as f64 / n as f64 * std::f64::consts::TAU;
                Lab::new(50.0 + (i % 3) as f64, 40.0 * t.cos(), 40.0 * t.sin())
            })
            .collect()
    }

    #[test]
    fn k_equals_len_returns_samples() {
        let s = ring(12);
        let mut got = kmeans_lab(&s, 12, 3).unwrap();
        let mut want = s.clone();
        let key = |c: &LabColor| (c.l.to_bits(), c.a.to_bits(), c.b.to_bits());
        got.sort_by_key(key);
        want.sort_by_key(key);
        assert_eq!(got, want);
    }

    #[test]
    fn single_cluster_snaps_to_first_member() {
        let s = vec![Lab::new(40.0, -10.0, 0.0), Lab::new(40.0, 10.0, 0.0)];
        let c = kmeans_lab(&s, 1, 9).unwrap();
        assert_eq!(c, vec![s[0]]);
    }

    #[test]
    fn rejects_bad_k() {
        let s = ring(4);
        assert!(matches!(kmeans_lab(&s, 5, 0), Err(Error::InvalidArgument(_))));
        assert!(kmeans_lab(&s, 0, 0).is_err());
        assert!(kmeans_lab(&[], 1, 0).is_err());
    }

    #[test]
    fn inertia_never_increases() {
        let s = ring(300);
        let r = kmeans_lab_detailed(&s, 7, 11, &KMeansConfig::default()).unwrap();
        for w in r.inertia_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", r.inertia_history);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let s = ring(200);
        assert_eq!(kmeans_lab(&s, 9, 5).unwrap(), kmeans_lab(&s, 9, 5).unwrap());
    }
}

use crate::colorlab::{jnd_exceeds, JndParams, Lab};
use crate::error::Result;
use crate::LabColor;

use super::{grid_sample_lab, kmeans_lab, GridSpec};

/// Indices of a maximal set of mutually discriminable colors.
///
/// Greedy peeling: while the remaining colors are not all pairwise
/// discriminable, drop the one with the fewest discriminable partners among
/// the remainder (lowest index on ties). Dropped colors are then offered back
/// in index order and kept when they are discriminable from everything
/// already kept, which makes the result maximal under inclusion.
pub fn max_jnd_subset_indices(colors: &[LabColor], mark_size_px: f64, params: &JndParams) -> Result<Vec<usize>> {
    let t = params.thresholds(mark_size_px)?;
    let n = colors.len();
    let adj: Vec<Vec<bool>> = (0..n)
        .map(|i| (0..n).map(|j| i != j && jnd_exceeds(colors[i], colors[j], &t)).collect())
        .collect();

    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = adj.iter().map(|row| row.iter().filter(|&&x| x).count()).collect();
    let mut remaining = n;
    let mut removed = Vec::new();
    while remaining > 1 {
        let (victim, min_deg) = (0..n)
            .filter(|&i| alive[i])
            .map(|i| (i, degree[i]))
            .min_by_key(|&(i, d)| (d, i))
            .expect("remaining > 1");
        if min_deg == remaining - 1 {
            break;
        }
        alive[victim] = false;
        remaining -= 1;
        removed.push(victim);
        for j in 0..n {
            if alive[j] && adj[victim][j] {
                degree[j] -= 1;
            }
        }
    }

    removed.sort_unstable();
    for i in removed {
        if (0..n).all(|j| !alive[j] || adj[i][j]) {
            alive[i] = true;
        }
    }
    Ok((0..n).filter(|&i| alive[i]).collect())
}

pub fn max_jnd_subset(colors: &[LabColor], mark_size_px: f64, params: &JndParams) -> Result<Vec<LabColor>> {
    Ok(max_jnd_subset_indices(colors, mark_size_px, params)?
        .into_iter()
        .map(|i| colors[i])
        .collect())
}

/// Intermediate products of the representative-color pipeline.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub grid_samples: usize,
    pub centroids: Vec<LabColor>,
    /// Centroids that are discriminable from a white background.
    pub visible: Vec<LabColor>,
    pub representatives: Vec<LabColor>,
}

/// Lattice sampling, k-means, background filter, then the maximal
/// discriminable subset.
pub fn derive_representatives(
    grid: &GridSpec,
    k: usize,
    seed: u64,
    mark_size_px: f64,
    params: &JndParams,
) -> Result<Derivation> {
    let samples = grid_sample_lab(grid)?;
    let centroids = kmeans_lab(&samples, k, seed)?;
    let t = params.thresholds(mark_size_px)?;
    let white = Lab::white();
    let visible: Vec<LabColor> = centroids.iter().copied().filter(|&c| jnd_exceeds(c, white, &t)).collect();
    let representatives = max_jnd_subset(&visible, mark_size_px, params)?;
    Ok(Derivation {
        grid_samples: samples.len(),
        centroids,
        visible,
        representatives,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn identical_inputs_collapse_to_one() {
        let c = Lab::new(50.0, 5.0, 5.0);
        let out = max_jnd_subset(&[c; 6], 6.0, &JndParams::default()).unwrap();
        assert_eq!(out, vec![c]);
    }

    #[test]
    fn distant_pair_kept() {
        let a = Lab::new(0.0, 0.0, 0.0);
        let b = Lab::new(100.0, 0.0, 0.0);
        assert_eq!(max_jnd_subset(&[a, b], 6.0, &JndParams::default()).unwrap(), vec![a, b]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn clique_and_maximal(pts in prop::collection::vec((25.0..100.0f64, -60.0..60.0f64, -60.0..60.0f64), 1..40)) {
            let colors: Vec<LabColor> = pts.into_iter().map(|(l, a, b)| Lab::new(l, a, b)).collect();
            let p = JndParams::default();
            let t = p.thresholds(6.0).unwrap();
            let kept = max_jnd_subset_indices(&colors, 6.0, &p).unwrap();
            prop_assert!(!kept.is_empty());
            for (x, &i) in kept.iter().enumerate() {
                for &j in &kept[x + 1..] {
                    prop_assert!(jnd_exceeds(colors[i], colors[j], &t));
                }
            }
            for i in (0..colors.len()).filter(|i| !kept.contains(i)) {
                prop_assert!(kept.iter().any(|&j| !jnd_exceeds(colors[i], colors[j], &t)));
            }
            prop_assert_eq!(kept.clone(), max_jnd_subset_indices(&colors, 6.0, &p).unwrap());
        }
    }
}

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One agglomeration step. Cluster ids follow the usual dendrogram
/// convention: `0..n` are the items, `n + k` is the cluster formed at step `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    /// Cluster of each item, numbered by first appearance.
    pub labels: Vec<usize>,
    pub k: usize,
    /// The full dendrogram down to one cluster.
    pub merges: Vec<Merge>,
}

/// Ward agglomerative clustering cut at `k` clusters.
///
/// Uses the Lance–Williams update on squared Euclidean distances; merge
/// heights are reported as the square root, as common toolkits do. Ties
/// merge the pair with the lowest indices.
pub fn ward_cluster<T: Float>(items: &[Vec<T>], k: usize) -> Result<ClusterResult> {
    let n = items.len();
    if n == 0 {
        return Err(Error::invalid("no items to cluster"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must be in 1..={n}")));
    }
    let dim = items[0].len();
    if items.iter().any(|v| v.len() != dim) {
        return Err(Error::invalid("item vectors differ in length"));
    }
    let to_f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let mut d = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let s: f64 = items[i].iter().zip(&items[j]).map(|(&a, &b)| (to_f(a) - to_f(b)).powi(2)).sum();
            d[i][j] = s;
            d[j][i] = s;
        }
    }
    let mut size = vec![1usize; n];
    let mut active: Vec<bool> = vec![true; n];
    let mut node_id: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut merges = Vec::with_capacity(n - 1);
    let mut labels_at_k = None;
    if k == n {
        labels_at_k = Some(canonical(&members, &active, n));
    }
    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in i + 1..n {
                if active[j] && best.is_none_or(|(bd, _, _)| d[i][j] < bd) {
                    best = Some((d[i][j], i, j));
                }
            }
        }
        let (dij, i, j) = best.expect("two active clusters");
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for m in 0..n {
            if active[m] && m != i && m != j {
                let nm = size[m] as f64;
                let v = ((ni + nm) * d[i][m] + (nj + nm) * d[j][m] - nm * dij) / (ni + nj + nm);
                d[i][m] = v;
                d[m][i] = v;
            }
        }
        active[j] = false;
        size[i] += size[j];
        let moved = std::mem::take(&mut members[j]);
        members[i].extend(moved);
        let (a, b) = (node_id[i].min(node_id[j]), node_id[i].max(node_id[j]));
        merges.push(Merge {
            a,
            b,
            height: dij.max(0.0).sqrt(),
            size: size[i],
        });
        node_id[i] = n + step;
        if n - 1 - step == k {
            labels_at_k = Some(canonical(&members, &active, n));
        }
    }
    Ok(ClusterResult {
        labels: labels_at_k.expect("cut reached"),
        k,
        merges,
    })
}

fn canonical(members: &[Vec<usize>], active: &[bool], n: usize) -> Vec<usize> {
    let mut raw = vec![0usize; n];
    for (c, m) in members.iter().enumerate() {
        if active[c] {
            for &i in m {
                raw[i] = c;
            }
        }
    }
    let mut map: Vec<Option<usize>> = vec![None; n];
    let mut next = 0;
    raw.iter()
        .map(|&c| {
            *map[c].get_or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::Rng;

    #[test]
    fn k_equals_n_is_singletons() {
        let items = vec![vec![0.0], vec![1.0], vec![5.0]];
        let r = ward_cluster(&items, 3).unwrap();
        assert_eq!(r.labels, vec![0, 1, 2]);
        assert_eq!(r.merges.len(), 2);
        assert!(ward_cluster(&items, 4).is_err());
    }

    #[test]
    fn two_separated_groups() {
        let items: Vec<Vec<f64>> = vec![vec![0.0, 0.1], vec![10.0, 10.0], vec![0.1, 0.0], vec![10.1, 9.9], vec![0.05, 0.05]];
        let r = ward_cluster(&items, 2).unwrap();
        assert_eq!(r.labels, vec![0, 1, 0, 1, 0]);
    }

    #[test]
    fn merge_heights_non_decreasing() {
        let mut rng = crate::seed::rng(3);
        let items: Vec<Vec<f64>> = (0..30).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
        let r = ward_cluster(&items, 1).unwrap();
        assert!(r.merges.windows(2).all(|w| w[0].height <= w[1].height + 1e-12));
        assert_eq!(r.merges.last().unwrap().size, 30);
    }

    #[test]
    fn heights_match_known_ward_values() {
        // Points 0, 1, 4 on a line: {0,1} merge at 1, then Ward distance
        // to {4} is sqrt(2 * 2/3 * 3.5^2) = 4.0415.
        let items = vec![vec![0.0], vec![1.0], vec![4.0]];
        let r = ward_cluster(&items, 1).unwrap();
        assert!((r.merges[0].height - 1.0).abs() < 1e-12);
        assert!((r.merges[1].height - (2.0 * 2.0 / 3.0 * 3.5f64 * 3.5).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn partition_invariant_to_order() {
        let mut rng = crate::seed::rng(9);
        let items: Vec<Vec<f64>> = (0..20).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
        let base = ward_cluster(&items, 4).unwrap().labels;
        let mut order: Vec<usize> = (0..20).collect();
        order.shuffle(&mut rng);
        let shuffled: Vec<Vec<f64>> = order.iter().map(|&i| items[i].clone()).collect();
        let labels = ward_cluster(&shuffled, 4).unwrap().labels;
        for a in 0..20 {
            for b in 0..20 {
                assert_eq!(labels[a] == labels[b], base[order[a]] == base[order[b]]);
            }
        }
    }
}

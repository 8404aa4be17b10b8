use itertools::Itertools;

use crate::error::{Error, Result};
use crate::evidence::Marker;
use crate::{ColorId, ShapeId};

/// Cosine similarity of two assignments as flattened 0/1 permutation
/// matrices: the share of positions where they agree.
pub fn cosine_similarity(a: &[usize], b: &[usize]) -> f64 {
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count();
    agree as f64 / a.len() as f64
}

/// Diverse set of color-to-shape pairings.
#[derive(Debug, Clone, PartialEq)]
pub struct Diversified {
    /// `permutations[k][i]` is the index of the shape paired with color `i`.
    pub permutations: Vec<Vec<usize>>,
    pub assignments: Vec<Vec<Marker>>,
    /// Set when fewer than the requested number exist.
    pub note: Option<String>,
}

/// Indices of up to `m` mutually dissimilar permutations of `0..n`.
///
/// For `n <= 3` every permutation is returned. Otherwise the identity comes
/// first and each further pick minimises its maximum agreement with those
/// already chosen, ties going to the lexicographically smallest. Returns
/// `true` alongside when `m` exceeded `n!` and the list was truncated.
pub fn diverse_permutation_indices(n: usize, m: usize) -> Result<(Vec<Vec<usize>>, bool)> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("need n >= 1 and m >= 1"));
    }
    let total = (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k));
    if n <= 3 || total.is_some_and(|t| m >= t) {
        let all: Vec<Vec<usize>> = (0..n).permutations(n).collect();
        let truncated = n > 3 && m > all.len();
        return Ok((all, truncated));
    }
    let mut selected: Vec<Vec<usize>> = vec![(0..n).collect()];
    while selected.len() < m {
        let next = (0..n)
            .find_map(|t| first_within(n, &selected, t))
            .expect("fewer than n! permutations selected, so one remains");
        selected.push(next);
    }
    Ok((selected, false))
}

/// Lexicographically first permutation agreeing with every selected one in at most `t` positions.
fn first_within(n: usize, selected: &[Vec<usize>], t: usize) -> Option<Vec<usize>> {
    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; n];
    let mut agree = vec![0usize; selected.len()];
    if dfs(n, selected, t, &mut perm, &mut used, &mut agree) {
        Some(perm)
    } else {
        None
    }
}

fn dfs(n: usize, selected: &[Vec<usize>], t: usize, perm: &mut Vec<usize>, used: &mut [bool], agree: &mut [usize]) -> bool {
    let pos = perm.len();
    if pos == n {
        return true;
    }
    for v in 0..n {
        if used[v] {
            continue;
        }
        let hits: Vec<usize> = (0..selected.len()).filter(|&s| selected[s][pos] == v).collect();
        if hits.iter().any(|&s| agree[s] + 1 > t) {
            continue;
        }
        hits.iter().for_each(|&s| agree[s] += 1);
        used[v] = true;
        perm.push(v);
        if dfs(n, selected, t, perm, used, agree) {
            return true;
        }
        perm.pop();
        used[v] = false;
        hits.iter().for_each(|&s| agree[s] -= 1);
    }
    false
}

/// Pair `colors[i]` with `shapes[perm[i]]` for a diverse set of permutations.
pub fn diverse_permutations(colors: &[ColorId], shapes: &[ShapeId], m: usize) -> Result<Diversified> {
    if colors.len() != shapes.len() {
        return Err(Error::invalid(format!(
            "{} colors cannot be paired with {} shapes",
            colors.len(),
            shapes.len()
        )));
    }
    let n = colors.len();
    let (permutations, truncated) = diverse_permutation_indices(n, m)?;
    let assignments = permutations
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &k)| Marker::pair(colors[i], shapes[k])).collect())
        .collect();
    let note = truncated.then(|| format!("requested {m} pairings but only {} exist for n = {n}", permutations.len()));
    Ok(Diversified {
        permutations,
        assignments,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_n_returns_everything() {
        let (p2, t2) = diverse_permutation_indices(2, 13).unwrap();
        assert_eq!(p2, vec![vec![0, 1], vec![1, 0]]);
        assert!(!t2);
        assert_eq!(cosine_similarity(&p2[0], &p2[1]), 0.0);
        let (p3, _) = diverse_permutation_indices(3, 6).unwrap();
        assert_eq!(p3.len(), 6);
        assert_eq!(p3.iter().unique().count(), 6);
    }

    #[test]
    fn oversized_request_is_truncated() {
        let d = diverse_permutations(&[0, 1, 2, 3], &[4, 5, 6, 7], 30).unwrap();
        assert_eq!(d.permutations.len(), 24);
        assert!(d.note.is_some());
    }

    #[test]
    fn identity_first_then_disjoint() {
        let (p, _) = diverse_permutation_indices(5, 5).unwrap();
        assert_eq!(p[0], vec![0, 1, 2, 3, 4]);
        for (a, b) in p.iter().tuple_combinations() {
            assert_eq!(cosine_similarity(a, b), 0.0);
        }
    }

    #[test]
    fn cosine_is_one_only_for_identical() {
        assert_eq!(cosine_similarity(&[2, 0, 1], &[2, 0, 1]), 1.0);
        assert!((cosine_similarity(&[0, 1, 2, 3], &[0, 1, 3, 2]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pairs_colors_with_shapes() {
        let d = diverse_permutations(&[7, 9], &[1, 3], 2).unwrap();
        assert_eq!(d.assignments[0], vec![Marker::pair(7, 1), Marker::pair(9, 3)]);
        assert_eq!(d.assignments[1], vec![Marker::pair(7, 3), Marker::pair(9, 1)]);
        assert!(diverse_permutations(&[1, 2], &[1], 2).is_err());
    }

    proptest! {
        #[test]
        fn distinct_and_valid(n in 4usize..=10, m in 1usize..=13) {
            let (p, truncated) = diverse_permutation_indices(n, m).unwrap();
            prop_assert!(!truncated);
            prop_assert_eq!(p.len(), m);
            prop_assert_eq!(p.iter().unique().count(), m);
            for perm in &p {
                let mut s = perm.clone();
                s.sort_unstable();
                prop_assert_eq!(s, (0..n).collect::<Vec<_>>());
            }
        }
    }
}

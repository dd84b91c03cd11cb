use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Structure-disjoint fold assignment: every complex in exactly one fold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldAssignment {
    pub n_folds: usize,
    pub seed: u64,
    pub fold_of: BTreeMap<String, usize>,
}

impl FoldAssignment {
    pub fn fold(&self, complex_id: &str) -> Option<usize> {
        self.fold_of.get(complex_id).copied()
    }

    pub fn complexes_in(&self, fold: usize) -> Vec<&str> {
        self.fold_of
            .iter()
            .filter(|(_, f)| **f == fold)
            .map(|(c, _)| c.as_str())
            .collect()
    }
}

/// Shuffles complexes with `seed`, orders them by descending record count
/// (shuffle order breaks ties) and deals each to the fold currently holding
/// the fewest records (lowest fold index on ties).
pub fn make_folds<'a>(
    complex_ids: impl IntoIterator<Item = &'a str>,
    n_folds: usize,
    seed: u64,
) -> Result<FoldAssignment> {
    if n_folds < 2 {
        return Err(Error::InvalidArgument("need at least 2 folds".into()));
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for id in complex_ids {
        *counts.entry(id).or_default() += 1;
    }
    if counts.len() < n_folds {
        return Err(Error::TooFewComplexes {
            needed: n_folds,
            found: counts.len(),
        });
    }
    let mut complexes: Vec<(&str, usize)> = counts.into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    complexes.shuffle(&mut rng);
    complexes.sort_by_key(|c| std::cmp::Reverse(c.1));

    let mut load = vec![0usize; n_folds];
    let mut fold_of = BTreeMap::new();
    for (id, n) in complexes {
        let fold = (0..n_folds).min_by_key(|&f| (load[f], f)).expect("n_folds ≥ 2");
        load[fold] += n;
        fold_of.insert(id.to_string(), fold);
    }
    Ok(FoldAssignment { n_folds, seed, fold_of })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(sizes: &[(&'static str, usize)]) -> Vec<&'static str> {
        sizes.iter().flat_map(|(id, n)| std::iter::repeat_n(*id, *n)).collect()
    }

    #[test]
    fn one_complex_per_fold() {
        let ids = records(&[("a", 2), ("b", 1), ("c", 4)]);
        let folds = make_folds(ids.iter().copied(), 3, 7).unwrap();
        let mut used: Vec<usize> = folds.fold_of.values().copied().collect();
        used.sort();
        assert_eq!(used, vec![0, 1, 2]);
    }

    #[test]
    fn same_seed_same_assignment() {
        let ids = records(&[("a", 2), ("b", 1), ("c", 4), ("d", 1), ("e", 3)]);
        let f1 = make_folds(ids.iter().copied(), 3, 11).unwrap();
        let f2 = make_folds(ids.iter().copied(), 3, 11).unwrap();
        assert_eq!(f1, f2);
    }

    #[test]
    fn greedy_balance_on_hand_example() {
        // 5 -> f0, 4 -> f1, 3 -> f2, 2 -> f2 (5), 1 -> f1 (5), 1 -> f0 (6)
        let ids = records(&[("a", 5), ("b", 4), ("c", 3), ("d", 2), ("e", 1), ("f", 1)]);
        for seed in 0..20 {
            let folds = make_folds(ids.iter().copied(), 3, seed).unwrap();
            let mut load = [0usize; 3];
            for id in &ids {
                load[folds.fold(id).unwrap()] += 1;
            }
            let spread = load.iter().max().unwrap() - load.iter().min().unwrap();
            assert!(spread <= 2, "seed {seed}: {load:?}");
            assert_eq!(load.iter().max(), Some(&6));
        }
    }

    #[test]
    fn too_few_complexes() {
        let ids = records(&[("a", 5), ("b", 4)]);
        assert!(matches!(
            make_folds(ids.iter().copied(), 3, 0),
            Err(Error::TooFewComplexes { needed: 3, found: 2 })
        ));
    }
}

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{HarError, Result};

use super::Sample;

/// Fold index for every sample, stratified by class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignment: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&i| self.assignment[i] != fold)
            .collect()
    }
}

/// Shuffle each class with a seeded generator and deal its samples
/// round-robin into `k` folds. The dealing position carries over from one
/// class to the next so fold sizes stay balanced overall.
pub fn make_folds(samples: &[Sample], k: usize, seed: u64) -> Result<FoldPlan> {
    make_folds_by_class(samples.iter().map(|s| s.class_index), k, seed)
}

pub(crate) fn make_folds_by_class(
    classes: impl Iterator<Item = usize>,
    k: usize,
    seed: u64,
) -> Result<FoldPlan> {
    if k == 0 {
        return Err(HarError::InvalidArgument("fold count must be at least 1".into()));
    }
    let classes: Vec<usize> = classes.collect();
    let n_classes = classes.iter().max().map_or(0, |m| m + 1);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &c) in classes.iter().enumerate() {
        by_class[c].push(i);
    }
    for (class, members) in by_class.iter().enumerate() {
        if !members.is_empty() && members.len() < k {
            return Err(HarError::InsufficientSamples {
                class,
                count: members.len(),
                k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; classes.len()];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignment[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan { k, assignment, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(classes: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
        make_folds_by_class(classes.iter().copied(), k, seed)
    }

    #[test]
    fn one_per_class_per_fold() {
        let classes: Vec<usize> = (0..16).map(|i| i / 8).collect();
        let p = plan(&classes, 8, 42).unwrap();
        for f in 0..8 {
            let test = p.test_indices(f);
            assert_eq!(test.len(), 2);
            let mut cs: Vec<usize> = test.iter().map(|&i| classes[i]).collect();
            cs.sort_unstable();
            assert_eq!(cs, vec![0, 1]);
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let classes: Vec<usize> = (0..200).map(|i| i % 5).collect();
        assert_eq!(plan(&classes, 8, 1).unwrap(), plan(&classes, 8, 1).unwrap());
        assert_ne!(plan(&classes, 8, 1).unwrap(), plan(&classes, 8, 2).unwrap());
    }

    #[test]
    fn single_fold_holds_everything() {
        let p = plan(&[0, 1, 2, 0], 1, 0).unwrap();
        assert!(p.assignment.iter().all(|&f| f == 0));
        assert_eq!(p.train_indices(0), Vec::<usize>::new());
    }

    #[test]
    fn too_few_samples_in_a_class() {
        let err = plan(&[0, 0, 0, 1], 3, 0).unwrap_err();
        assert!(matches!(err, HarError::InsufficientSamples { class: 1, count: 1, k: 3 }));
    }
}

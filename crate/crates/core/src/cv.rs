//! Fold assignment for cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Splits `0..classes.len()` into `k` test folds stratified by the binary
/// class. Each class is shuffled with `seed`, then the classes are dealt
/// round-robin one after the other, so fold sizes differ by at most one and
/// every class is spread as evenly as possible.
pub fn stratified_folds(classes: &[bool], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidArgument("need at least 2 folds".into()));
    }
    if classes.len() < k {
        return Err(Error::InvalidArgument(format!(
            "{} instances cannot fill {k} folds",
            classes.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..classes.len()).filter(|&i| classes[i]).collect();
    let mut neg: Vec<usize> = (0..classes.len()).filter(|&i| !classes[i]).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut folds = vec![Vec::new(); k];
    for (slot, i) in pos.into_iter().chain(neg).enumerate() {
        folds[slot % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Leave-one-sequence-out: one fold per instance.
pub fn loso_folds(n: usize) -> Result<Vec<Vec<usize>>> {
    if n < 2 {
        return Err(Error::InvalidArgument("leave-one-out needs at least 2 instances".into()));
    }
    Ok((0..n).map(|i| vec![i]).collect())
}

/// Training indices complementing a test fold.
pub fn complement(n: usize, test: &[usize]) -> Vec<usize> {
    let mut held = vec![false; n];
    for &i in test {
        held[i] = true;
    }
    (0..n).filter(|&i| !held[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_partition_and_balance() {
        let classes: Vec<bool> = (0..20).map(|i| i % 3 == 0).collect();
        let folds = stratified_folds(&classes, 3, 9).unwrap();
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for f in &folds {
            let p = f.iter().filter(|&&i| classes[i]).count();
            assert!((2..=3).contains(&p));
        }
    }

    #[test]
    fn too_few_instances() {
        assert!(stratified_folds(&[true, false], 3, 0).is_err());
        assert_eq!(loso_folds(4).unwrap().len(), 4);
        assert_eq!(complement(4, &[1, 3]), vec![0, 2]);
    }
}

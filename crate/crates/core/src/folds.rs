use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A partition of `0..n` into `k` folds of equal size `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPartition {
    assignment: Vec<usize>,
    folds: Vec<Vec<usize>>,
    fold_size: usize,
}

impl FoldPartition {
    /// Builds a partition from explicit fold membership lists.
    pub fn from_folds(n: usize, folds: Vec<Vec<usize>>) -> Result<Self> {
        let k = folds.len();
        if k < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 folds, got {k}"
            )));
        }
        let m = folds[0].len();
        if m == 0 || folds.iter().any(|f| f.len() != m) || k * m != n {
            return Err(Error::FoldsIndivisible { n, k });
        }
        let mut assignment = vec![usize::MAX; n];
        for (fold, members) in folds.iter().enumerate() {
            for &i in members {
                if i >= n || assignment[i] != usize::MAX {
                    return Err(Error::InvalidParameter(format!(
                        "index {i} missing or repeated in folds"
                    )));
                }
                assignment[i] = fold;
            }
        }
        Ok(Self {
            assignment,
            folds,
            fold_size: m,
        })
    }

    /// Singleton folds `{0}, {1}, …`; CV+ over this partition is jackknife+.
    pub fn leave_one_out(n: usize) -> Result<Self> {
        Self::from_folds(n, (0..n).map(|i| vec![i]).collect())
    }

    pub fn num_folds(&self) -> usize {
        self.folds.len()
    }

    pub fn fold_size(&self) -> usize {
        self.fold_size
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Fold index `k(i)` of point `i`.
    pub fn fold_of(&self, i: usize) -> usize {
        self.assignment[i]
    }

    pub fn fold(&self, k: usize) -> &[usize] {
        &self.folds[k]
    }

    pub fn folds(&self) -> &[Vec<usize>] {
        &self.folds
    }
}

/// Uniformly random partition of `0..n` into `k` folds of size `n / k`.
pub fn make_folds(n: usize, k: usize, seed: u64) -> Result<FoldPartition> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    if n == 0 || !n.is_multiple_of(k) {
        return Err(Error::FoldsIndivisible { n, k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let m = n / k;
    let folds = order
        .chunks(m)
        .map(|c| {
            let mut f = c.to_vec();
            f.sort_unstable();
            f
        })
        .collect();
    FoldPartition::from_folds(n, folds)
}

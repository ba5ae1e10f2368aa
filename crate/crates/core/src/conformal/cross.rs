//! Jackknife+ and CV+.

use crate::dataset::Dataset;
use crate::error::{check_alpha, Error, Result};
use crate::folds::FoldPartition;
use crate::model::{BoxedModel, RegressionAlgorithm};
use crate::order_stats::{conformal_rank, select_in_place};
use crate::prediction_set::PredictionSet;

/// Fold-deleted models and their out-of-fold residuals, fitted once and
/// reusable for any number of test points.
#[derive(Debug)]
pub struct CrossConformal {
    models: Vec<BoxedModel>,
    fold_of: Vec<usize>,
    residuals: Vec<f64>,
}

impl CrossConformal {
    pub fn fit(
        train: &Dataset,
        algo: &dyn RegressionAlgorithm,
        folds: &FoldPartition,
    ) -> Result<Self> {
        if train.len() < 2 {
            return Err(Error::TooFewPoints {
                needed: 2,
                got: train.len(),
            });
        }
        if folds.len() != train.len() {
            return Err(Error::FoldMismatch {
                partition: folds.len(),
                data: train.len(),
            });
        }
        let models = algo.fit_fold_deleted(train, folds.folds())?;
        let fold_of: Vec<usize> = (0..train.len()).map(|i| folds.fold_of(i)).collect();
        let residuals = train
            .iter()
            .zip(&fold_of)
            .map(|((x, y), &k)| (y - models[k].predict(x)).abs())
            .collect();
        Ok(Self {
            models,
            fold_of,
            residuals,
        })
    }

    /// `Rᵢ = |Yᵢ − μ̂₋ₛ₍ᵢ₎(Xᵢ)|`.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn models(&self) -> &[BoxedModel] {
        &self.models
    }

    /// Fold-deleted predictions at `x`, one per training point.
    pub fn centers(&self, x: &[f64]) -> Vec<f64> {
        let per_fold: Vec<f64> = self.models.iter().map(|m| m.predict(x)).collect();
        self.fold_of.iter().map(|&k| per_fold[k]).collect()
    }

    pub fn prediction_set(&self, x: &[f64], alpha: f64) -> Result<PredictionSet> {
        check_alpha(alpha)?;
        Ok(plus_interval(&self.centers(x), &self.residuals, alpha))
    }
}

/// `[k-th largest of cᵢ − Rᵢ, k-th smallest of cᵢ + Rᵢ]` with
/// `k = ⌈(1−α)(n+1)⌉`; the real line when `k > n`, empty when the lower
/// endpoint exceeds the upper one.
pub fn plus_interval(centers: &[f64], residuals: &[f64], alpha: f64) -> PredictionSet {
    debug_assert_eq!(centers.len(), residuals.len());
    let n = centers.len();
    let k = conformal_rank(n, alpha);
    if k > n {
        return PredictionSet::real_line();
    }
    let mut lower: Vec<f64> = centers.iter().zip(residuals).map(|(c, r)| c - r).collect();
    let mut upper: Vec<f64> = centers.iter().zip(residuals).map(|(c, r)| c + r).collect();
    let lo = select_in_place(&mut lower, n + 1 - k);
    let hi = select_in_place(&mut upper, k);
    PredictionSet::interval(lo, hi)
}

pub fn jackknife_plus(
    train: &Dataset,
    x_new: &[f64],
    algo: &dyn RegressionAlgorithm,
    alpha: f64,
) -> Result<PredictionSet> {
    check_alpha(alpha)?;
    train.check_dim(x_new)?;
    if train.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: train.len(),
        });
    }
    CrossConformal::fit(train, algo, &FoldPartition::leave_one_out(train.len())?)?
        .prediction_set(x_new, alpha)
}

pub fn cv_plus(
    train: &Dataset,
    x_new: &[f64],
    algo: &dyn RegressionAlgorithm,
    alpha: f64,
    folds: &FoldPartition,
) -> Result<PredictionSet> {
    check_alpha(alpha)?;
    train.check_dim(x_new)?;
    CrossConformal::fit(train, algo, folds)?.prediction_set(x_new, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folds::make_folds;
    use crate::regressors::{Constant, Ridge};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn labels(ys: &[f64]) -> Dataset {
        Dataset::from_flat(1, vec![0.0; ys.len()], ys.to_vec()).unwrap()
    }

    #[test]
    fn constant_zero_example() {
        let train = labels(&[1.0, -2.0, 3.0, -4.0]);
        let set = jackknife_plus(&train, &[0.0], &Constant::zero(), 0.5).unwrap();
        assert_eq!(set, PredictionSet::interval(-3.0, 3.0));
        let folds = make_folds(4, 2, 7).unwrap();
        assert_eq!(
            cv_plus(&train, &[0.0], &Constant::zero(), 0.5, &folds).unwrap(),
            set
        );
    }

    #[test]
    fn overflow_and_errors() {
        let train = labels(&[1.0, 2.0, 3.0]);
        assert!(jackknife_plus(&train, &[0.0], &Constant::zero(), 0.1)
            .unwrap()
            .is_real_line());
        assert!(matches!(
            jackknife_plus(&labels(&[1.0]), &[0.0], &Constant::zero(), 0.1),
            Err(Error::TooFewPoints { .. })
        ));
        let folds = make_folds(4, 2, 1).unwrap();
        assert!(matches!(
            cv_plus(&train, &[0.0], &Constant::zero(), 0.5, &folds),
            Err(Error::FoldMismatch { .. })
        ));
    }

    #[test]
    fn empty_when_endpoints_cross() {
        // k = 1: lower is the largest of cᵢ − Rᵢ, upper the smallest of cᵢ + Rᵢ
        let set = plus_interval(&[-10.0, 10.0, -10.0, 10.0], &[0.1; 4], 0.9);
        assert!(set.is_empty());
    }

    #[test]
    fn cv_fold_count_and_sizes() {
        let folds = make_folds(500, 20, 3).unwrap();
        assert_eq!(folds.num_folds(), 20);
        assert!(folds.folds().iter().all(|f| 500 - f.len() == 475));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn cv_plus_with_singleton_folds_is_jackknife_plus(seed in any::<u64>(), n in 2usize..20, alpha in 0.05f64..0.6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = 3;
            let xs: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>() - 0.5).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0).collect();
            let train = Dataset::from_flat(d, xs, ys).unwrap();
            let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let ridge = Ridge::with_lambda(0.1).unwrap();
            let folds = make_folds(n, n, seed).unwrap();
            prop_assert_eq!(
                jackknife_plus(&train, &x, &ridge, alpha).unwrap(),
                cv_plus(&train, &x, &ridge, alpha, &folds).unwrap()
            );
        }

        #[test]
        fn larger_alpha_never_widens(
            centers in prop::collection::vec(-5.0f64..5.0, 2..30),
            seed in any::<u64>(),
            a1 in 0.01f64..0.99,
            a2 in 0.01f64..0.99,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let residuals: Vec<f64> = centers.iter().map(|_| rng.random::<f64>() * 3.0).collect();
            let (small, large) = (a1.min(a2), a1.max(a2));
            let wide = plus_interval(&centers, &residuals, small);
            let narrow = plus_interval(&centers, &residuals, large);
            prop_assert!(narrow.is_subset_of(&wide));
        }
    }
}

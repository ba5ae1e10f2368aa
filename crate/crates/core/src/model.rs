//! The regression-algorithm contract every interval method is built on.

use std::fmt::Debug;

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::Result;

/// An immutable fitted regression function.
pub trait FittedModel: Send + Sync + Debug {
    fn predict(&self, x: &[f64]) -> f64;

    /// Short human-readable description.
    fn label(&self) -> &str;
}

pub type BoxedModel = Box<dyn FittedModel>;

/// How the fitted model's predictions depend on the label of one extra point
/// appended to the training set, holding everything else fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelResponse {
    /// Predictions ignore labels entirely.
    Independent,
    /// Every prediction is an affine function of the appended label.
    Affine,
    /// No structure assumed.
    General,
}

/// A map from datasets to fitted models.
pub trait RegressionAlgorithm: Send + Sync + Debug {
    fn name(&self) -> &str;

    fn fit(&self, data: &Dataset) -> Result<BoxedModel>;

    /// Randomized algorithms consume the seed; deterministic ones ignore it.
    fn fit_seeded(&self, data: &Dataset, _seed: u64) -> Result<BoxedModel> {
        self.fit(data)
    }

    /// Whether fitting a permuted dataset yields the same model.
    fn is_symmetric(&self) -> bool;

    fn label_response(&self) -> LabelResponse {
        LabelResponse::General
    }

    /// One model per fold, each fitted with that fold removed. Fits run in
    /// parallel; the output is in fold order.
    fn fit_fold_deleted(&self, data: &Dataset, folds: &[Vec<usize>]) -> Result<Vec<BoxedModel>> {
        folds
            .par_iter()
            .map(|f| self.fit(&data.excluding(f)))
            .collect()
    }

    /// Model fitted on `data` plus the point `(x, y)`.
    fn fit_augmented(&self, data: &Dataset, x: &[f64], y: f64) -> Result<BoxedModel> {
        self.fit(&data.with_point(x, y)?)
    }
}

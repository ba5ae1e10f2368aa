use crate::dataset::Dataset;
use crate::error::{check_alpha, Error, Result};
use crate::model::{BoxedModel, RegressionAlgorithm};
use crate::order_stats::{order_stat_index, select_in_place, OrderIndex};
use crate::prediction_set::PredictionSet;

/// Sizes of the training and holdout parts plus the target level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub n0: usize,
    pub n1: usize,
    pub alpha: f64,
}

impl SplitSpec {
    pub fn new(n0: usize, n1: usize, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if n0 == 0 || n1 == 0 {
            return Err(Error::InvalidParameter(format!(
                "split sizes must be positive, got n0={n0}, n1={n1}"
            )));
        }
        Ok(Self { n0, n1, alpha })
    }

    /// `n0 = ⌊n/2⌋`, `n1 = n − n0`.
    pub fn halves(n: usize, alpha: f64) -> Result<Self> {
        Self::new(n / 2, n - n / 2, alpha)
    }

    /// Rank of the holdout residual used as the radius.
    pub fn radius_index(&self) -> OrderIndex {
        order_stat_index(self.n1, self.alpha).expect("validated in constructor")
    }
}

/// A calibrated split-conformal predictor `μ̂(x) ± radius`.
#[derive(Debug)]
pub struct SplitConformal {
    model: BoxedModel,
    radius: f64,
    holdout_residuals: Vec<f64>,
}

impl SplitConformal {
    pub fn model(&self) -> &BoxedModel {
        &self.model
    }

    /// Holdout residual quantile; `+∞` when the rank overflows.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn holdout_residuals(&self) -> &[f64] {
        &self.holdout_residuals
    }

    pub fn prediction_set(&self, x: &[f64]) -> PredictionSet {
        if self.radius.is_infinite() {
            return PredictionSet::real_line();
        }
        let center = self.model.predict(x);
        PredictionSet::interval(center - self.radius, center + self.radius)
    }
}

/// Fits on `train`, calibrates on `holdout`.
pub fn split_conformal(
    train: &Dataset,
    holdout: &Dataset,
    algo: &dyn RegressionAlgorithm,
    alpha: f64,
) -> Result<SplitConformal> {
    check_alpha(alpha)?;
    if train.is_empty() || holdout.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if train.dim() != holdout.dim() {
        return Err(Error::DimensionMismatch {
            expected: train.dim(),
            found: holdout.dim(),
        });
    }
    let model = algo.fit(train)?;
    let holdout_residuals: Vec<f64> = holdout
        .iter()
        .map(|(x, y)| (y - model.predict(x)).abs())
        .collect();
    let radius = match order_stat_index(holdout_residuals.len(), alpha)? {
        OrderIndex::Rank(k) => select_in_place(&mut holdout_residuals.clone(), k),
        OrderIndex::Overflow => f64::INFINITY,
    };
    Ok(SplitConformal {
        model,
        radius,
        holdout_residuals,
    })
}

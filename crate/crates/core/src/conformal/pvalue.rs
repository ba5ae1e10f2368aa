//! Holdout and oracle p-values for a fixed fitted model.
//!
//! For a model fitted without a holdout set `A`,
//! `p_A(x, y) = #{i ∈ A : Rᵢ ≥ |y − μ̂(x)|} / |A|` and the oracle version
//! replaces the holdout by the population, estimated here by a large fresh
//! sample.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::FittedModel;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct HoldoutPValue {
    pub value: f64,
}

/// Fraction of `holdout_residuals` that are `≥ |y − model(x)|`.
pub fn holdout_pvalue(
    holdout_residuals: &[f64],
    model: &dyn FittedModel,
    x: &[f64],
    y: f64,
) -> Result<HoldoutPValue> {
    if holdout_residuals.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let score = (y - model.predict(x)).abs();
    let count = holdout_residuals.iter().filter(|&&r| r >= score).count();
    Ok(HoldoutPValue {
        value: count as f64 / holdout_residuals.len() as f64,
    })
}

/// Sorted residuals of a model on a reference sample, for fast tail queries.
#[derive(Debug, Clone)]
pub struct OracleTail {
    sorted: Vec<f64>,
}

impl OracleTail {
    pub fn from_residuals(mut residuals: Vec<f64>) -> Result<Self> {
        if residuals.is_empty() {
            return Err(Error::EmptyDataset);
        }
        residuals.sort_by(f64::total_cmp);
        Ok(Self { sorted: residuals })
    }

    pub fn from_model(model: &dyn FittedModel, sample: &Dataset) -> Result<Self> {
        Self::from_residuals(
            sample
                .iter()
                .map(|(x, y)| (y - model.predict(x)).abs())
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Empirical `P(R ≥ t)`.
    pub fn tail_at_least(&self, t: f64) -> f64 {
        let below = self.sorted.partition_point(|&r| r < t);
        (self.sorted.len() - below) as f64 / self.sorted.len() as f64
    }

    /// Empirical `P(R > t)`.
    pub fn tail_above(&self, t: f64) -> f64 {
        let at_most = self.sorted.partition_point(|&r| r <= t);
        (self.sorted.len() - at_most) as f64 / self.sorted.len() as f64
    }

    pub fn pvalue(&self, model: &dyn FittedModel, x: &[f64], y: f64) -> f64 {
        self.tail_at_least((y - model.predict(x)).abs())
    }
}

/// Monte Carlo estimate of the oracle p-value from a fresh sample.
pub fn oracle_pvalue(
    model: &dyn FittedModel,
    oracle_sample: &Dataset,
    x: &[f64],
    y: f64,
) -> Result<f64> {
    if oracle_sample.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let score = (y - model.predict(x)).abs();
    let count = oracle_sample
        .iter()
        .filter(|(xi, yi)| (yi - model.predict(xi)).abs() >= score)
        .count();
    Ok(count as f64 / oracle_sample.len() as f64)
}

/// `sup_t [P_oracle(R ≥ t) − P_A(R ≥ t)]`, never below zero.
///
/// Between consecutive holdout values the holdout tail is constant while the
/// oracle tail decreases, so the supremum is approached just above a holdout
/// value `h` and equals `P_oracle(R > h) − P_A(R > h)`.
pub fn sup_pvalue_deviation(holdout_residuals: &[f64], oracle: &OracleTail) -> Result<f64> {
    if holdout_residuals.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut sorted = holdout_residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut best = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let h = sorted[i];
        while i < sorted.len() && sorted[i] == h {
            i += 1;
        }
        let holdout_above = (sorted.len() - i) as f64 / n;
        best = best.max(oracle.tail_above(h) - holdout_above);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regressors::{Constant, LinearModel};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn zero_model() -> Box<dyn FittedModel> {
        use crate::model::RegressionAlgorithm;
        Constant::zero().fit(&Dataset::empty(1)).unwrap()
    }

    #[test]
    fn holdout_examples() {
        let m = zero_model();
        let r = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(
            holdout_pvalue(&r, m.as_ref(), &[0.0], 2.5).unwrap().value,
            0.5
        );
        assert_eq!(
            holdout_pvalue(&r, m.as_ref(), &[0.0], 0.0).unwrap().value,
            1.0
        );
        assert_eq!(
            holdout_pvalue(&r, m.as_ref(), &[0.0], -7.0).unwrap().value,
            0.0
        );
        // ties qualify
        assert_eq!(
            holdout_pvalue(&r, m.as_ref(), &[0.0], 3.0).unwrap().value,
            0.5
        );
        assert!(holdout_pvalue(&[], m.as_ref(), &[0.0], 1.0).is_err());
    }

    #[test]
    fn oracle_examples() {
        let m = zero_model();
        let sample = Dataset::from_flat(1, vec![0.0; 4], vec![1.0, -2.0, 3.0, -4.0]).unwrap();
        assert_eq!(
            oracle_pvalue(m.as_ref(), &sample, &[0.0], 2.5).unwrap(),
            0.5
        );
        assert_eq!(
            oracle_pvalue(m.as_ref(), &sample, &[0.0], 0.0).unwrap(),
            1.0
        );
        let tail = OracleTail::from_model(m.as_ref(), &sample).unwrap();
        assert_eq!(tail.pvalue(m.as_ref(), &[0.0], 2.5), 0.5);
        assert_eq!(tail.pvalue(m.as_ref(), &[0.0], 0.0), 1.0);
        assert!(oracle_pvalue(m.as_ref(), &Dataset::empty(1), &[0.0], 0.0).is_err());
    }

    #[test]
    fn oracle_pvalue_is_super_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let model = LinearModel::new(vec![0.7, -0.2], "fixed");
        let mut draw = |n: usize| {
            let xs: Vec<f64> = (0..2 * n)
                .map(|_| rng.random::<f64>() * 2.0 - 1.0)
                .collect();
            let ys: Vec<f64> = (0..n)
                .map(|i| xs[2 * i] + (rng.random::<f64>() - 0.5))
                .collect();
            Dataset::from_flat(2, xs, ys).unwrap()
        };
        let tail = OracleTail::from_model(&model, &draw(200_000)).unwrap();
        let fresh = draw(20_000);
        let pvals: Vec<f64> = fresh
            .iter()
            .map(|(x, y)| tail.pvalue(&model, x, y))
            .collect();
        for a in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
            let freq = pvals.iter().filter(|&&p| p <= a).count() as f64 / pvals.len() as f64;
            let se = (a * (1.0 - a) / pvals.len() as f64).sqrt();
            assert!(
                freq <= a + 3.0 * se + 1.0 / 200_000f64.sqrt(),
                "a={a}: {freq}"
            );
        }
    }

    /// Scans a dense set of thresholds, including points just above and below
    /// every residual.
    fn brute_sup(holdout: &[f64], oracle: &[f64]) -> f64 {
        let tail =
            |v: &[f64], t: f64| v.iter().filter(|&&r| r >= t).count() as f64 / v.len() as f64;
        let mut ts: Vec<f64> = holdout
            .iter()
            .chain(oracle)
            .flat_map(|&r| [r, r + 1e-9, r - 1e-9])
            .collect();
        ts.push(-1.0);
        ts.push(1e9);
        ts.iter()
            .map(|&t| tail(oracle, t) - tail(holdout, t))
            .fold(0.0, f64::max)
    }

    proptest! {
        #[test]
        fn sup_deviation_matches_threshold_scan(
            holdout in prop::collection::vec(0u8..20, 1..15),
            oracle in prop::collection::vec(0u8..20, 1..40),
        ) {
            let h: Vec<f64> = holdout.iter().map(|&v| v as f64 / 4.0).collect();
            let o: Vec<f64> = oracle.iter().map(|&v| v as f64 / 4.0).collect();
            let fast = sup_pvalue_deviation(&h, &OracleTail::from_residuals(o.clone()).unwrap()).unwrap();
            prop_assert!((fast - brute_sup(&h, &o)).abs() < 1e-12);
        }
    }
}

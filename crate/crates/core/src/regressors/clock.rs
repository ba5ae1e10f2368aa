//! "Clock" adversaries: symmetric, deterministic algorithms whose output
//! flips according to a modular sum of partition-cell indices.
//!
//! The feature space is cut into `M` cells of equal probability and
//! `a(x) ∈ {0, …, M−1}` names the cell of `x`. Both adversaries look only at
//! `Σ a(xᵢ) mod M`, which makes them symmetric, and output either `0` or `2y*`.

use std::fmt;
use std::sync::Arc;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::{BoxedModel, FittedModel, LabelResponse, RegressionAlgorithm};

pub type CdfFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Realizes an equiprobable partition through the CDF of the first feature.
#[derive(Clone)]
pub enum PartitionMap {
    /// First coordinate is `Unif[0, 1]`.
    Uniform01,
    /// First coordinate has the given continuous CDF.
    FirstCoordinateCdf(CdfFn),
}

impl fmt::Debug for PartitionMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionMap::Uniform01 => write!(f, "Uniform01"),
            PartitionMap::FirstCoordinateCdf(_) => write!(f, "FirstCoordinateCdf(..)"),
        }
    }
}

impl PartitionMap {
    fn quantile_level(&self, x: &[f64]) -> f64 {
        let x1 = x.first().copied().unwrap_or(0.0);
        match self {
            PartitionMap::Uniform01 => x1,
            PartitionMap::FirstCoordinateCdf(cdf) => cdf(x1),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClockConfig {
    /// Number of partition cells `M`.
    pub m: usize,
    /// Threshold `M₁ < M`.
    pub m1: usize,
    /// Label scale `y*`, the `(1 − n⁻²)`-quantile of `|Y|`.
    pub y_star: f64,
    pub partition: PartitionMap,
}

impl ClockConfig {
    pub fn new(m: usize, m1: usize, y_star: f64, partition: PartitionMap) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("clock needs M >= 1".into()));
        }
        if m1 >= m {
            return Err(Error::InvalidParameter(format!(
                "clock threshold M1={m1} must be < M={m}"
            )));
        }
        if !(y_star > 0.0 && y_star.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "y* must be positive and finite, got {y_star}"
            )));
        }
        Ok(Self {
            m,
            m1,
            y_star,
            partition,
        })
    }

    /// Cell index `a(x) = min(⌊M·F(x₁)⌋, M−1)`.
    pub fn index(&self, x: &[f64]) -> usize {
        let u = self.partition.quantile_level(x);
        if u.is_nan() || u <= 0.0 {
            return 0;
        }
        let cell = (self.m as f64 * u).floor();
        if cell >= self.m as f64 {
            self.m - 1
        } else {
            cell as usize
        }
    }

    /// `Σ a(xᵢ) mod M` over a dataset.
    pub fn index_sum(&self, data: &Dataset) -> usize {
        (0..data.len()).fold(0, |acc, i| (acc + self.index(data.x(i))) % self.m)
    }
}

pub fn clock_index(x: &[f64], config: &ClockConfig) -> usize {
    config.index(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ClockRule {
    /// `2y*` iff `mod(−a(x) + S, M) < M₁`.
    Full,
    /// `0` iff `mod(a(x) + S, M) < M₁`.
    Jackknife,
}

/// Fitted clock adversary; remembers only `S = Σ a(xᵢ) mod M`.
#[derive(Debug, Clone)]
pub struct ClockModel {
    config: ClockConfig,
    sum_mod: usize,
    rule: ClockRule,
}

impl ClockModel {
    pub fn index_sum(&self) -> usize {
        self.sum_mod
    }
}

impl FittedModel for ClockModel {
    fn predict(&self, x: &[f64]) -> f64 {
        let m = self.config.m;
        let a = self.config.index(x);
        let high = 2.0 * self.config.y_star;
        match self.rule {
            ClockRule::Full => {
                if (self.sum_mod + m - a) % m < self.config.m1 {
                    high
                } else {
                    0.0
                }
            }
            ClockRule::Jackknife => {
                if (self.sum_mod + a) % m < self.config.m1 {
                    0.0
                } else {
                    high
                }
            }
        }
    }

    fn label(&self) -> &str {
        match self.rule {
            ClockRule::Full => "clock-full",
            ClockRule::Jackknife => "clock-jackknife",
        }
    }
}

/// The adversary that defeats training-conditional coverage of full conformal.
#[derive(Debug, Clone)]
pub struct AdversaryFull {
    config: ClockConfig,
}

/// The adversary that defeats training-conditional coverage of jackknife+.
#[derive(Debug, Clone)]
pub struct AdversaryJackknife {
    config: ClockConfig,
}

macro_rules! clock_algorithm {
    ($ty:ident, $rule:expr, $name:literal) => {
        impl $ty {
            pub fn new(config: ClockConfig) -> Self {
                Self { config }
            }

            pub fn config(&self) -> &ClockConfig {
                &self.config
            }

            fn model(&self, sum_mod: usize) -> ClockModel {
                ClockModel {
                    config: self.config.clone(),
                    sum_mod,
                    rule: $rule,
                }
            }
        }

        impl RegressionAlgorithm for $ty {
            fn name(&self) -> &str {
                $name
            }

            fn fit(&self, data: &Dataset) -> Result<BoxedModel> {
                Ok(Box::new(self.model(self.config.index_sum(data))))
            }

            fn is_symmetric(&self) -> bool {
                true
            }

            fn label_response(&self) -> LabelResponse {
                LabelResponse::Independent
            }

            fn fit_fold_deleted(
                &self,
                data: &Dataset,
                folds: &[Vec<usize>],
            ) -> Result<Vec<BoxedModel>> {
                let m = self.config.m;
                let total = self.config.index_sum(data);
                Ok(folds
                    .iter()
                    .map(|fold| {
                        let removed = fold
                            .iter()
                            .fold(0, |acc, &i| (acc + self.config.index(data.x(i))) % m);
                        Box::new(self.model((total + m - removed) % m)) as BoxedModel
                    })
                    .collect())
            }

            fn fit_augmented(&self, data: &Dataset, x: &[f64], _y: f64) -> Result<BoxedModel> {
                data.check_dim(x)?;
                let sum = (self.config.index_sum(data) + self.config.index(x)) % self.config.m;
                Ok(Box::new(self.model(sum)))
            }
        }
    };
}

clock_algorithm!(AdversaryFull, ClockRule::Full, "adversary-full");
clock_algorithm!(
    AdversaryJackknife,
    ClockRule::Jackknife,
    "adversary-jackknife"
);

pub fn adversary_full_fit(data: &Dataset, config: &ClockConfig) -> Result<BoxedModel> {
    AdversaryFull::new(config.clone()).fit(data)
}

pub fn adversary_jackknife_fit(data: &Dataset, config: &ClockConfig) -> Result<BoxedModel> {
    AdversaryJackknife::new(config.clone()).fit(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cfg(m: usize, m1: usize) -> ClockConfig {
        ClockConfig::new(m, m1, 1.0, PartitionMap::Uniform01).unwrap()
    }

    /// Points whose cell indices (M = 10) are exactly `cells`.
    fn cells(cells: &[usize]) -> Dataset {
        let xs = cells.iter().map(|&c| (c as f64 + 0.5) / 10.0).collect();
        Dataset::from_flat(1, xs, vec![0.0; cells.len()]).unwrap()
    }

    fn probe(cell: usize) -> [f64; 1] {
        [(cell as f64 + 0.5) / 10.0]
    }

    #[test]
    fn index_examples() {
        let c = cfg(10, 2);
        assert_eq!(clock_index(&[0.42], &c), 4);
        assert_eq!(clock_index(&[1.0], &c), 9);
        assert_eq!(clock_index(&[0.0], &c), 0);
        assert_eq!(clock_index(&[-0.3], &c), 0);
    }

    #[test]
    fn config_validation() {
        assert!(ClockConfig::new(10, 10, 1.0, PartitionMap::Uniform01).is_err());
        assert!(ClockConfig::new(0, 0, 1.0, PartitionMap::Uniform01).is_err());
        assert!(ClockConfig::new(10, 2, 0.0, PartitionMap::Uniform01).is_err());
    }

    #[test]
    fn full_rule_examples() {
        let c = cfg(10, 2);
        let m = adversary_full_fit(&cells(&[4, 7, 1]), &c).unwrap();
        assert_eq!(m.predict(&probe(1)), 2.0);
        assert_eq!(m.predict(&probe(4)), 0.0);
    }

    #[test]
    fn jackknife_rule_examples() {
        let c = cfg(10, 2);
        let m = adversary_jackknife_fit(&cells(&[4, 7]), &c).unwrap();
        assert_eq!(m.predict(&probe(1)), 2.0);
        assert_eq!(m.predict(&probe(0)), 0.0);
    }

    #[test]
    fn fold_deleted_and_augmented_match_refits() {
        let c = cfg(10, 3);
        let data = cells(&[4, 7, 1, 9, 9, 0, 3]);
        for alg in [
            &AdversaryFull::new(c.clone()) as &dyn RegressionAlgorithm,
            &AdversaryJackknife::new(c.clone()),
        ] {
            let folds = vec![vec![0], vec![2, 5], vec![6]];
            let fast = alg.fit_fold_deleted(&data, &folds).unwrap();
            for (f, model) in folds.iter().zip(&fast) {
                let slow = alg.fit(&data.excluding(f)).unwrap();
                for cell in 0..10 {
                    assert_eq!(model.predict(&probe(cell)), slow.predict(&probe(cell)));
                }
            }
            let aug = alg.fit_augmented(&data, &probe(6), 3.0).unwrap();
            let slow = alg.fit(&data.with_point(&probe(6), 3.0).unwrap()).unwrap();
            for cell in 0..10 {
                assert_eq!(aug.predict(&probe(cell)), slow.predict(&probe(cell)));
            }
        }
    }

    proptest! {
        #[test]
        fn outputs_two_valued_and_permutation_invariant(
            xs in prop::collection::vec(0.0f64..1.0, 1..40),
            probes in prop::collection::vec(0.0f64..1.0, 100),
            m1 in 0usize..7,
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let c = ClockConfig::new(7, m1, 1.5, PartitionMap::Uniform01).unwrap();
            let n = xs.len();
            let data = Dataset::from_flat(1, xs, vec![0.0; n]).unwrap();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled = data.permuted(&perm);
            for fit in [adversary_full_fit, adversary_jackknife_fit] {
                let a = fit(&data, &c).unwrap();
                let b = fit(&shuffled, &c).unwrap();
                for p in &probes {
                    let v = a.predict(&[*p]);
                    prop_assert!(v == 0.0 || v == 3.0);
                    prop_assert_eq!(v, b.predict(&[*p]));
                }
            }
        }
    }
}

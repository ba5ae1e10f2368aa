//! A concrete distribution for the clock adversaries and closed-form
//! prediction sets under them.
//!
//! Features are `Unif[0, 1]` (one coordinate), labels are `Unif(−1, 1)`
//! independent of the features, so `|Y| ~ Unif(0, 1)` and the
//! `(1 − n⁻²)`-quantile of `|Y|` is `y* = 1 − n⁻²`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::events::{compute_m1, events_from_cells, EventReport};
use crate::conformal::{conformal_set_from_lines, plus_interval, ResidualLine};
use crate::dataset::Dataset;
use crate::error::{check_alpha, Error, Result};
use crate::order_stats::conformal_rank;
use crate::prediction_set::PredictionSet;
use crate::regressors::{ClockConfig, PartitionMap};

/// Which conformal method the adversary targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryMethod {
    Full,
    Jackknife,
}

impl AdversaryMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            AdversaryMethod::Full => "full",
            AdversaryMethod::Jackknife => "jk",
        }
    }
}

impl std::str::FromStr for AdversaryMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(AdversaryMethod::Full),
            "jk" | "jackknife" | "jackknife+" => Ok(AdversaryMethod::Jackknife),
            other => Err(Error::InvalidParameter(format!(
                "unknown adversary method `{other}` (expected full or jk)"
            ))),
        }
    }
}

/// `(1 − n⁻²)`-quantile of `|Y|` under the uniform design.
pub fn uniform_design_y_star(n: usize) -> f64 {
    1.0 - 1.0 / (n as f64 * n as f64)
}

/// Clock configuration plus sampler for the uniform design at sample size `n`.
#[derive(Debug, Clone)]
pub struct AdversaryDesign {
    pub n: usize,
    pub alpha: f64,
    pub config: ClockConfig,
}

impl AdversaryDesign {
    pub fn new(n: usize, m: usize, alpha: f64) -> Result<Self> {
        let m1 = compute_m1(n, m, alpha)?;
        let config = ClockConfig::new(m, m1, uniform_design_y_star(n), PartitionMap::Uniform01)?;
        Ok(Self { n, alpha, config })
    }

    pub fn sample(&self, count: usize, rng: &mut impl Rng) -> Dataset {
        let mut xs = Vec::with_capacity(count);
        let mut ys = Vec::with_capacity(count);
        for _ in 0..count {
            xs.push(rng.random::<f64>());
            ys.push(rng.random_range(-1.0..1.0));
        }
        Dataset::from_flat(1, xs, ys).expect("uniform draws are finite")
    }

    /// `M₁ / M`, the chance of the modular event.
    pub fn modular_rate(&self) -> f64 {
        self.config.m1 as f64 / self.config.m as f64
    }
}

/// Prediction sets of the two conformal methods run with their matching
/// clock adversary, sharing the cell indices of the training points.
#[derive(Debug)]
pub struct ClockPredictor<'a> {
    config: &'a ClockConfig,
    labels: &'a [f64],
    cells: Vec<usize>,
    total: usize,
    rank: usize,
    alpha: f64,
    /// Leave-one-out residuals of the jackknife adversary.
    loo_residuals: Vec<f64>,
}

impl<'a> ClockPredictor<'a> {
    pub fn new(train: &'a Dataset, config: &'a ClockConfig, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if train.len() < 2 {
            return Err(Error::TooFewPoints {
                needed: 2,
                got: train.len(),
            });
        }
        let m = config.m;
        let cells: Vec<usize> = (0..train.len()).map(|i| config.index(train.x(i))).collect();
        let total = cells.iter().fold(0, |acc, &c| (acc + c) % m);
        let high = 2.0 * config.y_star;
        // model without point i evaluated at Xᵢ sees mod(aᵢ + S − aᵢ) = S
        let loo_center = if total < config.m1 { 0.0 } else { high };
        let loo_residuals = train
            .labels()
            .iter()
            .map(|y| (y - loo_center).abs())
            .collect();
        Ok(Self {
            config,
            labels: train.labels(),
            cells,
            total,
            rank: conformal_rank(train.len(), alpha),
            alpha,
            loo_residuals,
        })
    }

    pub fn events(&self) -> EventReport {
        events_from_cells(&self.cells, self.labels, self.config, self.alpha)
    }

    fn high(&self) -> f64 {
        2.0 * self.config.y_star
    }

    pub fn set(&self, method: AdversaryMethod, x: &[f64]) -> PredictionSet {
        match method {
            AdversaryMethod::Full => self.full_set(x),
            AdversaryMethod::Jackknife => self.jackknife_set(x),
        }
    }

    /// Full conformal: the augmented fit is label-independent, so every
    /// residual line is flat except the test one.
    pub fn full_set(&self, x: &[f64]) -> PredictionSet {
        let m = self.config.m;
        let a = self.config.index(x);
        let augmented = (self.total + a) % m;
        let predict = |cell: usize| {
            if (augmented + m - cell) % m < self.config.m1 {
                self.high()
            } else {
                0.0
            }
        };
        let lines: Vec<ResidualLine> = self
            .cells
            .iter()
            .zip(self.labels)
            .map(|(&c, y)| ResidualLine::constant(y - predict(c)))
            .collect();
        let test = ResidualLine::new(-predict(a), 1.0);
        conformal_set_from_lines(&lines, test, self.rank)
    }

    pub fn jackknife_set(&self, x: &[f64]) -> PredictionSet {
        let m = self.config.m;
        let a = self.config.index(x);
        let high = self.high();
        let centers: Vec<f64> = self
            .cells
            .iter()
            .map(|&c| {
                let without = (self.total + m - c) % m;
                if (a + without) % m < self.config.m1 {
                    0.0
                } else {
                    high
                }
            })
            .collect();
        plus_interval(&centers, &self.loo_residuals, self.alpha)
    }
}

/// Whether every probe's prediction set lies in `(y*, ∞)`. Requires all three
/// events to hold on `train`.
pub fn collapse_check(
    train: &Dataset,
    config: &ClockConfig,
    alpha: f64,
    method: AdversaryMethod,
    probes: &[Vec<f64>],
) -> Result<bool> {
    let predictor = ClockPredictor::new(train, config, alpha)?;
    let events = predictor.events();
    if !events.all_three {
        return Err(Error::EventsNotSatisfied {
            e_max: events.e_max,
            e_mod: events.e_mod,
            e_unif: events.e_unif,
        });
    }
    for x in probes {
        train.check_dim(x)?;
    }
    Ok(probes
        .iter()
        .all(|x| predictor.set(method, x).lies_above(config.y_star)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{full_conformal_exact, jackknife_plus, SymmetryPolicy};
    use crate::regressors::{AdversaryFull, AdversaryJackknife};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_sets_match_generic_routes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..40 {
            let n = 20 + trial;
            let config = ClockConfig::new(11, trial % 5, 0.9, PartitionMap::Uniform01).unwrap();
            let design = AdversaryDesign {
                n,
                alpha: 0.2,
                config: config.clone(),
            };
            let train = design.sample(n, &mut rng);
            let predictor = ClockPredictor::new(&train, &config, 0.2).unwrap();
            let full = AdversaryFull::new(config.clone());
            let jk = AdversaryJackknife::new(config.clone());
            for _ in 0..10 {
                let x = [rng.random::<f64>()];
                let slow_full =
                    full_conformal_exact(&train, &x, &full, 0.2, SymmetryPolicy::Require).unwrap();
                assert_eq!(predictor.full_set(&x), slow_full);
                assert_eq!(
                    predictor.jackknife_set(&x),
                    jackknife_plus(&train, &x, &jk, 0.2).unwrap()
                );
            }
        }
    }

    #[test]
    fn collapse_requires_events() {
        let design = AdversaryDesign::new(50, 50, 0.1).unwrap();
        let mut train = design.sample(50, &mut ChaCha8Rng::seed_from_u64(1));
        let mut ys = train.labels().to_vec();
        ys[0] = design.config.y_star;
        train = Dataset::from_flat(1, train.features().to_vec(), ys).unwrap();
        let err = collapse_check(
            &train,
            &design.config,
            0.1,
            AdversaryMethod::Full,
            &[vec![0.5]],
        );
        assert!(matches!(
            err,
            Err(Error::EventsNotSatisfied { e_max: false, .. })
        ));
    }

    #[test]
    fn method_parsing() {
        assert_eq!(
            "full".parse::<AdversaryMethod>().unwrap(),
            AdversaryMethod::Full
        );
        assert_eq!(
            "jk".parse::<AdversaryMethod>().unwrap(),
            AdversaryMethod::Jackknife
        );
        assert!("split".parse::<AdversaryMethod>().is_err());
    }

    #[test]
    fn y_star_is_label_quantile() {
        assert_eq!(uniform_design_y_star(10), 0.99);
        let design = AdversaryDesign::new(5000, 5000, 0.1).unwrap();
        assert_eq!(design.config.m1, 206);
        assert!((design.modular_rate() - 0.0412).abs() < 1e-12);
    }
}

//! Trial execution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryDesign, AdversaryMethod, ClockPredictor, EventReport};
use crate::conformal::{
    full_conformal_grid, split_conformal, BatchRequest, DualRidge, GridSpec, SplitSpec,
    SymmetryPolicy,
};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::experiments::config::{ExperimentConfig, FullRoute, Method, Mode};
use crate::experiments::data::{draw_linear_gaussian, random_beta, score_sets};
use crate::folds::make_folds;
use crate::prediction_set::PredictionSet;
use crate::regressors::{Ridge, RidgeConfig};
use crate::seeding::derive_seed;

/// Seed stream reserved for fixed coefficient vectors.
const BETA_STREAM: u64 = u64::MAX;
/// Seed stream reserved for adversary trials.
const ADVERSARY_STREAM: u64 = u64::MAX - 1;

/// Outcome of one method on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub method: Method,
    pub mode: Mode,
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    /// Fraction of test labels outside their prediction sets.
    pub alpha_hat: f64,
    /// Mean Lebesgue measure of the prediction sets (may be infinite).
    pub mean_width: f64,
    pub events: Option<EventReport>,
}

/// Runs every (dimension, trial) pair of `config` on the current rayon pool.
/// The output is ordered by dimension, trial, then method, and does not
/// depend on the number of worker threads.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let dims = config.active_dims();
    let tasks: Vec<(usize, usize)> = dims
        .iter()
        .flat_map(|&d| (0..config.trials).map(move |t| (d, t)))
        .collect();
    let per_task: Vec<Vec<TrialRecord>> = tasks
        .par_iter()
        .map(|&(d, t)| {
            let records = run_single_trial(config, d, t)?;
            log::debug!("trial {t} (d={d}) done");
            Ok(records)
        })
        .collect::<Result<_>>()?;
    Ok(per_task.into_iter().flatten().collect())
}

/// [`run_trials`] on a dedicated pool of `workers` threads.
pub fn run_trials_with_workers(
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<Vec<TrialRecord>> {
    match workers {
        None => run_trials(config),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
            pool.install(|| run_trials(config))
        }
    }
}

/// Seed of trial `trial` at dimension `d`.
pub fn trial_seed(config: &ExperimentConfig, d: usize, trial: usize) -> u64 {
    let stream = if config.mode.is_adversary() {
        ADVERSARY_STREAM
    } else {
        d as u64
    };
    derive_seed(config.seed, stream, trial as u64)
}

/// Training and test sets of one ridge-simulation trial.
pub fn ridge_trial_data(
    config: &ExperimentConfig,
    d: usize,
    trial: usize,
) -> Result<(Dataset, Dataset)> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config, d, trial));
    let beta = if config.fixed_beta {
        random_beta(
            d,
            &mut ChaCha8Rng::seed_from_u64(derive_seed(config.seed, BETA_STREAM, d as u64)),
        )
    } else {
        random_beta(d, &mut rng)
    };
    let train = draw_linear_gaussian(config.n, &beta, &mut rng)?;
    let test = draw_linear_gaussian(config.n_test, &beta, &mut rng)?;
    Ok((train, test))
}

pub fn run_single_trial(
    config: &ExperimentConfig,
    d: usize,
    trial: usize,
) -> Result<Vec<TrialRecord>> {
    match config.mode {
        Mode::RidgeSim => ridge_trial(config, d, trial),
        Mode::AdversaryFull => adversary_trial(config, trial, AdversaryMethod::Full),
        Mode::AdversaryJk => adversary_trial(config, trial, AdversaryMethod::Jackknife),
    }
}

fn ridge_trial(config: &ExperimentConfig, d: usize, trial: usize) -> Result<Vec<TrialRecord>> {
    let (train, test) = ridge_trial_data(config, d, trial)?;
    let ridge = RidgeConfig::new(config.lambda)?;
    let methods = config.active_methods();
    let record = |method, sets: &[PredictionSet]| {
        let (alpha_hat, mean_width) = score_sets(sets, &test);
        TrialRecord {
            trial,
            method,
            mode: config.mode,
            n: config.n,
            d,
            alpha: config.alpha,
            alpha_hat,
            mean_width,
            events: None,
        }
    };

    let exact_full = methods.contains(&Method::Full) && config.full_route == FullRoute::Exact;
    let folds = if methods.contains(&Method::CvPlus) {
        Some(make_folds(
            config.n,
            config.folds,
            derive_seed(trial_seed(config, d, trial), 1, 0),
        )?)
    } else {
        None
    };
    let request = BatchRequest {
        full: exact_full,
        jackknife_plus: methods.contains(&Method::JackknifePlus),
        cv_plus: folds.as_ref(),
    };
    let batch = if request.full || request.jackknife_plus || request.cv_plus.is_some() {
        DualRidge::fit(&train, config.lambda)?.batch_sets(
            test.features(),
            config.alpha,
            &request,
        )?
    } else {
        Default::default()
    };

    let mut out = Vec::with_capacity(methods.len());
    for method in methods {
        let sets = match method {
            Method::Split => {
                let spec = SplitSpec::halves(config.n, config.alpha)?;
                let (fit_part, holdout) = train.split_at(spec.n0);
                let sc = split_conformal(&fit_part, &holdout, &Ridge::new(ridge), config.alpha)?;
                test.iter().map(|(x, _)| sc.prediction_set(x)).collect()
            }
            Method::Full if exact_full => batch.full.clone(),
            Method::Full => {
                let spec = GridSpec::default_for(&train, None)?;
                let grid = GridSpec::new(
                    spec.lo,
                    spec.hi,
                    (spec.hi - spec.lo) / (config.grid_points - 1) as f64,
                )?;
                test.iter()
                    .map(|(x, _)| {
                        full_conformal_grid(
                            &train,
                            x,
                            &Ridge::new(ridge),
                            config.alpha,
                            &grid,
                            SymmetryPolicy::Require,
                        )
                        .map(|g| g.set)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
            Method::JackknifePlus => batch.jackknife_plus.clone(),
            Method::CvPlus => batch.cv_plus.clone(),
        };
        out.push(record(method, &sets));
    }
    Ok(out)
}

fn adversary_trial(
    config: &ExperimentConfig,
    trial: usize,
    method: AdversaryMethod,
) -> Result<Vec<TrialRecord>> {
    let design = AdversaryDesign::new(config.n, config.clock_cells(), config.alpha)?;
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(config, 1, trial));
    let train = design.sample(config.n, &mut rng);
    let test = design.sample(config.n_test, &mut rng);
    let predictor = ClockPredictor::new(&train, &design.config, config.alpha)?;
    let sets: Vec<PredictionSet> = test.iter().map(|(x, _)| predictor.set(method, x)).collect();
    let (alpha_hat, mean_width) = score_sets(&sets, &test);
    Ok(vec![TrialRecord {
        trial,
        method: match method {
            AdversaryMethod::Full => Method::Full,
            AdversaryMethod::Jackknife => Method::JackknifePlus,
        },
        mode: config.mode,
        n: config.n,
        d: 1,
        alpha: config.alpha,
        alpha_hat,
        mean_width,
        events: Some(predictor.events()),
    }])
}

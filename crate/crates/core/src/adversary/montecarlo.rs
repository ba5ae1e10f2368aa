use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::design::AdversaryDesign;
use crate::adversary::events::check_events;
use crate::error::{check_alpha, Error, Result};
use crate::regressors::ClockConfig;
use crate::seeding::derive_seed;

/// Empirical event frequencies over independent training draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventFrequencies {
    pub trials: usize,
    pub p_mod: f64,
    pub p_max: f64,
    pub p_unif: f64,
    pub p_all: f64,
}

/// Frequencies of the three events (and their intersection) over `trials`
/// training sets of size `n` drawn from the uniform design.
pub fn event_rate_montecarlo(
    n: usize,
    config: &ClockConfig,
    alpha: f64,
    trials: usize,
    seed: u64,
) -> Result<EventFrequencies> {
    check_alpha(alpha)?;
    if trials < 100 {
        return Err(Error::InvalidParameter(format!(
            "need at least 100 trials, got {trials}"
        )));
    }
    let design = AdversaryDesign {
        n,
        alpha,
        config: config.clone(),
    };
    let reports: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, t as u64));
            check_events(&design.sample(n, &mut rng), config, alpha)
        })
        .collect::<Result<_>>()?;
    let freq = |f: &dyn Fn(&crate::adversary::EventReport) -> bool| {
        reports.iter().filter(|r| f(r)).count() as f64 / trials as f64
    };
    Ok(EventFrequencies {
        trials,
        p_mod: freq(&|r| r.e_mod),
        p_max: freq(&|r| r.e_max),
        p_unif: freq(&|r| r.e_unif),
        p_all: freq(&|r| r.all_three),
    })
}

/// `sup_{s ∈ [0,1]} |#{Uᵢ < s} − n·s|`.
///
/// The count is a left-continuous step function, so on each piece the
/// deviation is extremal at an end: the value at each sample point, the
/// right limit just past it, and `s = 0, 1`.
pub fn dkw_statistic(uniforms: &[f64]) -> Result<f64> {
    if uniforms.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(bad) = uniforms.iter().find(|u| !(0.0..=1.0).contains(*u)) {
        return Err(Error::InvalidParameter(format!(
            "sample value {bad} outside [0, 1]"
        )));
    }
    let mut sorted = uniforms.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let nf = n as f64;
    // s = 0 gives 0; s = 1 counts everything below 1
    let below_one = sorted.partition_point(|&u| u < 1.0);
    let mut best = (below_one as f64 - nf).abs();
    let mut i = 0;
    while i < n {
        let v = sorted[i];
        let less = i;
        while i < n && sorted[i] == v {
            i += 1;
        }
        best = best.max((less as f64 - nf * v).abs());
        if v < 1.0 {
            best = best.max((i as f64 - nf * v).abs());
        }
    }
    Ok(best)
}

//! Synthetic data and the miscoverage estimator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::prediction_set::PredictionSet;

/// `√10 · U` with `U` uniform on the unit sphere in `ℝᵈ`.
pub fn random_beta(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            let scale = 10f64.sqrt() / norm;
            return g.into_iter().map(|v| v * scale).collect();
        }
    }
}

/// `n` draws of `X ~ N(0, I_d)`, `Y | X ~ N(Xᵀβ, 1)` from `rng`.
pub fn draw_linear_gaussian(n: usize, beta: &[f64], rng: &mut impl Rng) -> Result<Dataset> {
    let d = beta.len();
    if d == 0 {
        return Err(Error::InvalidParameter(
            "coefficient vector must be nonempty".into(),
        ));
    }
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidParameter(
            "coefficients must be finite".into(),
        ));
    }
    let mut xs = Vec::with_capacity(n * d);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let start = xs.len();
        xs.extend((0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let mean: f64 = xs[start..].iter().zip(beta).map(|(x, b)| x * b).sum();
        let noise: f64 = rng.sample(StandardNormal);
        ys.push(mean + noise);
    }
    Dataset::from_flat(d, xs, ys)
}

/// Seeded version of [`draw_linear_gaussian`].
pub fn generate_linear_gaussian(n: usize, d: usize, beta: &[f64], seed: u64) -> Result<Dataset> {
    if beta.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: beta.len(),
        });
    }
    draw_linear_gaussian(n, beta, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Fraction of test points whose label falls outside its prediction set.
pub fn estimate_miscoverage(
    mut set_builder: impl FnMut(&[f64]) -> Result<PredictionSet>,
    test: &Dataset,
) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut missed = 0usize;
    for (x, y) in test.iter() {
        if !set_builder(x)?.contains(y) {
            missed += 1;
        }
    }
    Ok(missed as f64 / test.len() as f64)
}

/// Miscoverage and mean Lebesgue measure of precomputed sets, one per test point.
pub(crate) fn score_sets(sets: &[PredictionSet], test: &Dataset) -> (f64, f64) {
    debug_assert_eq!(sets.len(), test.len());
    let missed = sets
        .iter()
        .zip(test.labels())
        .filter(|(s, y)| !s.contains(**y))
        .count();
    let width = sets.iter().map(PredictionSet::measure).sum::<f64>() / sets.len() as f64;
    (missed as f64 / sets.len() as f64, width)
}

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{check_alpha, Error, Result};
use crate::order_stats::conformal_rank;
use crate::regressors::ClockConfig;

/// Which of the three training-set events hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventReport {
    /// `max |Yᵢ| < y*`.
    pub e_max: bool,
    /// `Σ a(Xᵢ) mod M < M₁`.
    pub e_mod: bool,
    /// Every shifted window of `M − M₁` cells holds at least `⌈(1−α)(n+1)⌉` points.
    pub e_unif: bool,
    pub all_three: bool,
}

impl EventReport {
    pub fn new(e_max: bool, e_mod: bool, e_unif: bool) -> Self {
        Self {
            e_max,
            e_mod,
            e_unif,
            all_three: e_max && e_mod && e_unif,
        }
    }
}

/// `max(0, ⌊M(α − √(2 ln n / n) − 2/n)⌋)`.
pub fn compute_m1(n: usize, m: usize, alpha: f64) -> Result<usize> {
    check_alpha(alpha)?;
    if n < 2 || m < 2 {
        return Err(Error::InvalidParameter(format!(
            "threshold needs n >= 2 and M >= 2, got n={n}, M={m}"
        )));
    }
    let nf = n as f64;
    let level = alpha - (2.0 * nf.ln() / nf).sqrt() - 2.0 / nf;
    let raw = (m as f64 * level).floor();
    Ok(if raw <= 0.0 {
        0
    } else {
        (raw as usize).min(m - 1)
    })
}

/// Cell counts `h[c] = #{i : a(Xᵢ) = c}`.
pub(crate) fn cell_histogram(cells: &[usize], m: usize) -> Vec<usize> {
    let mut hist = vec![0usize; m];
    for &c in cells {
        hist[c] += 1;
    }
    hist
}

/// Smallest count over all `m` of `#{i : mod(aᵢ + m, M) < M − M₁}`.
///
/// For shift `m` the qualifying cells form the cyclic window of length
/// `M − M₁` starting at `mod(−m, M)`, so all shifts are covered by one pass
/// of a circular sliding sum.
pub(crate) fn min_window_count(hist: &[usize], m1: usize) -> usize {
    let m = hist.len();
    let len = m - m1;
    let mut window: usize = hist[..len].iter().sum();
    let mut best = window;
    for start in 1..m {
        window = window + hist[(start + len - 1) % m] - hist[start - 1];
        best = best.min(window);
    }
    best
}

pub fn check_events(train: &Dataset, config: &ClockConfig, alpha: f64) -> Result<EventReport> {
    check_alpha(alpha)?;
    let cells: Vec<usize> = (0..train.len()).map(|i| config.index(train.x(i))).collect();
    Ok(events_from_cells(&cells, train.labels(), config, alpha))
}

pub(crate) fn events_from_cells(
    cells: &[usize],
    labels: &[f64],
    config: &ClockConfig,
    alpha: f64,
) -> EventReport {
    let m = config.m;
    let e_max = labels.iter().all(|y| y.abs() < config.y_star);
    let sum = cells.iter().fold(0, |acc, &c| (acc + c) % m);
    let e_mod = sum < config.m1;
    let need = conformal_rank(cells.len(), alpha);
    let e_unif = min_window_count(&cell_histogram(cells, m), config.m1) >= need;
    EventReport::new(e_max, e_mod, e_unif)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regressors::PartitionMap;
    use proptest::prelude::*;

    fn cfg(m: usize, m1: usize) -> ClockConfig {
        ClockConfig::new(m, m1, 1.0, PartitionMap::Uniform01).unwrap()
    }

    fn cells_data(cells: &[usize], m: usize, ys: &[f64]) -> Dataset {
        let xs = cells.iter().map(|&c| (c as f64 + 0.5) / m as f64).collect();
        Dataset::from_flat(1, xs, ys.to_vec()).unwrap()
    }

    #[test]
    fn modular_event_examples() {
        let c = cfg(10, 2);
        let r = check_events(&cells_data(&[4, 7, 1], 10, &[0.0; 3]), &c, 0.1).unwrap();
        assert!(!r.e_mod);
        let r = check_events(&cells_data(&[4, 7, 0], 10, &[0.0; 3]), &c, 0.1).unwrap();
        assert!(r.e_mod);
        assert!(r.e_max);
        let r = check_events(&cells_data(&[4, 7, 0], 10, &[0.0, 1.0, 0.0]), &c, 0.1).unwrap();
        assert!(!r.e_max && !r.all_three);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(compute_m1(5000, 5000, 0.1).unwrap(), 206);
        assert_eq!(compute_m1(2000, 2000, 0.1).unwrap(), 23);
        assert_eq!(compute_m1(100, 100, 0.1).unwrap(), 0);
        assert!(compute_m1(1, 10, 0.1).is_err());
    }

    #[test]
    fn threshold_independent_evaluation() {
        // M(α − √(2 ln n/n) − 2/n) evaluated term by term in a different order
        for (n, m) in [
            (5000usize, 5000usize),
            (2000, 2000),
            (10_000, 300),
            (800, 64),
        ] {
            let nf = n as f64;
            let slack = (2.0 * nf.ln()).sqrt() / nf.sqrt() + 2.0 / nf;
            let expected = ((0.1 - slack) * m as f64).floor().max(0.0) as usize;
            assert_eq!(compute_m1(n, m, 0.1).unwrap(), expected);
        }
    }

    proptest! {
        #[test]
        fn threshold_monotone_and_below_m(n in 2usize..20_000, m in 2usize..5000, a in 0.01f64..0.98) {
            let m1 = compute_m1(n, m, a).unwrap();
            prop_assert!(m1 < m);
            prop_assert!(compute_m1(n, m, a + 0.01).unwrap() >= m1);
            if m1 > 0 {
                prop_assert!(compute_m1(n + 1, m, a).unwrap() >= m1);
            }
        }

        #[test]
        fn sliding_window_matches_direct_count(
            cells in prop::collection::vec(0usize..12, 1..60),
            m1 in 0usize..12,
            alpha in 0.05f64..0.9,
        ) {
            let m = 12;
            let c = cfg(m, m1);
            let report = events_from_cells(&cells, &vec![0.0; cells.len()], &c, alpha);
            let need = conformal_rank(cells.len(), alpha);
            let direct = |shift: i64| {
                cells.iter().filter(|&&a| (a as i64 + shift).rem_euclid(m as i64) < (m - m1) as i64).count()
            };
            let all_shifts = (0..m as i64).all(|s| direct(s) >= need);
            prop_assert_eq!(report.e_unif, all_shifts);
            // shifts outside 0..M, including the one used against a test point
            let total: i64 = cells.iter().map(|&a| a as i64).sum();
            for s in [-total - 1, -total - 7, 3 * m as i64 + 5, -1] {
                if report.e_unif {
                    prop_assert!(direct(s) >= need);
                }
            }
        }
    }
}

//! Full conformal prediction.
//!
//! Two routes are provided. The grid route refits the algorithm at every
//! candidate label. The exact route applies to algorithms whose fitted values
//! are affine in the candidate label `y`: every residual is then `|a + b·y|`
//! and the conformal set can be read off the crossing points of the test
//! residual with the training residuals.

use crate::dataset::Dataset;
use crate::error::{check_alpha, Error, Result};
use crate::model::{LabelResponse, RegressionAlgorithm};
use crate::order_stats::{conformal_rank, kth_smallest, select_in_place};
use crate::prediction_set::{Interval, PredictionSet};

/// Guard on the number of grid points.
pub const MAX_GRID_POINTS: f64 = 1e7;

/// A signed residual `r(y) = intercept + slope·y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualLine {
    pub intercept: f64,
    pub slope: f64,
}

impl ResidualLine {
    pub fn new(intercept: f64, slope: f64) -> Self {
        Self { intercept, slope }
    }

    pub fn constant(value: f64) -> Self {
        Self {
            intercept: value,
            slope: 0.0,
        }
    }

    pub fn abs_at(&self, y: f64) -> f64 {
        (self.intercept + self.slope * y).abs()
    }
}

/// Whether the algorithm may be used by full conformal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymmetryPolicy {
    /// Reject algorithms that do not declare symmetry.
    #[default]
    Require,
    /// Run anyway; the marginal guarantee no longer applies.
    AllowAsymmetric,
}

fn check_symmetry(algo: &dyn RegressionAlgorithm, policy: SymmetryPolicy) -> Result<()> {
    if policy == SymmetryPolicy::Require && !algo.is_symmetric() {
        return Err(Error::NotSymmetric(algo.name().to_string()));
    }
    Ok(())
}

/// Exact conformal set from residual lines.
///
/// `y` is kept iff `|r_test(y)|` is at most the `rank`-th smallest of all
/// `n + 1` absolute residuals, which is the same as
/// `#{j : |r_j(y)| < |r_test(y)|} < rank`.
pub fn conformal_set_from_lines(
    train: &[ResidualLine],
    test: ResidualLine,
    rank: usize,
) -> PredictionSet {
    let n = train.len();
    if rank > n {
        return PredictionSet::real_line();
    }
    if train.iter().all(|l| l.slope == 0.0) {
        let mut abs: Vec<f64> = train.iter().map(|l| l.intercept.abs()).collect();
        let q = select_in_place(&mut abs, rank);
        return band_around_line(test, q);
    }

    // Each training line contributes the open set {y : |r_j(y)| < |r_test(y)|},
    // i.e. {(r_j − r_test)(r_j + r_test) < 0}: at most two open intervals.
    let mut initial = 0usize;
    let mut events: Vec<(f64, Event)> = Vec::with_capacity(4 * n);
    let mut add = |lo: f64, hi: f64, initial: &mut usize| {
        if lo == f64::NEG_INFINITY {
            *initial += 1;
        } else {
            events.push((lo, Event::Start));
        }
        if hi != f64::INFINITY {
            events.push((hi, Event::End));
        }
    };
    for line in train {
        let (p0, p1) = (line.intercept - test.intercept, line.slope - test.slope);
        let (s0, s1) = (line.intercept + test.intercept, line.slope + test.slope);
        for (lo, hi) in negative_product_set(p0, p1, s0, s1).into_iter().flatten() {
            add(lo, hi, &mut initial);
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut pieces: Vec<Interval> = Vec::new();
    let mut open_from: Option<f64> = if initial < rank {
        Some(f64::NEG_INFINITY)
    } else {
        None
    };
    let mut active = initial;
    let mut i = 0;
    while i < events.len() {
        let pos = events[i].0;
        let (mut starts, mut ends) = (0usize, 0usize);
        while i < events.len() && events[i].0 == pos {
            match events[i].1 {
                Event::Start => starts += 1,
                Event::End => ends += 1,
            }
            i += 1;
        }
        let at_point = active - ends;
        let after = at_point + starts;
        match (open_from, at_point < rank, after < rank) {
            (Some(_), true, true) | (None, false, false) => {}
            (Some(lo), true, false) => {
                pieces.push(Interval::new(lo, pos));
                open_from = None;
            }
            (None, true, true) => open_from = Some(pos),
            (None, true, false) => pieces.push(Interval::new(pos, pos)),
            // at_point never exceeds the count on either side
            (Some(lo), false, _) => {
                pieces.push(Interval::new(lo, pos));
                open_from = None;
            }
            (None, false, true) => open_from = Some(pos),
        }
        active = after;
    }
    if let Some(lo) = open_from {
        pieces.push(Interval::new(lo, f64::INFINITY));
    }
    PredictionSet::from_intervals(pieces)
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Start,
    End,
}

/// `{y : |test(y)| ≤ q}`.
fn band_around_line(test: ResidualLine, q: f64) -> PredictionSet {
    if test.slope == 0.0 {
        return if test.intercept.abs() <= q {
            PredictionSet::real_line()
        } else {
            PredictionSet::empty()
        };
    }
    let a = (-q - test.intercept) / test.slope;
    let b = (q - test.intercept) / test.slope;
    PredictionSet::interval(a.min(b), a.max(b))
}

/// Open set where `(p0 + p1·y)(s0 + s1·y) < 0`, as up to two intervals.
fn negative_product_set(p0: f64, p1: f64, s0: f64, s1: f64) -> [Option<(f64, f64)>; 2] {
    const ALL: (f64, f64) = (f64::NEG_INFINITY, f64::INFINITY);
    match (p1 == 0.0, s1 == 0.0) {
        (true, true) => [(p0 * s0 < 0.0).then_some(ALL), None],
        (true, false) | (false, true) => {
            let (c, b0, b1) = if p1 == 0.0 {
                (p0, s0, s1)
            } else {
                (s0, p0, p1)
            };
            if c == 0.0 {
                return [None, None];
            }
            let t = -b0 / b1;
            // c·b1·(y − t) < 0
            if c.signum() * b1.signum() > 0.0 {
                [Some((f64::NEG_INFINITY, t)), None]
            } else {
                [Some((t, f64::INFINITY)), None]
            }
        }
        (false, false) => {
            let (t1, t2) = (-p0 / p1, -s0 / s1);
            let (lo, hi) = (t1.min(t2), t1.max(t2));
            if p1.signum() * s1.signum() > 0.0 {
                [(lo < hi).then_some((lo, hi)), None]
            } else {
                [Some((f64::NEG_INFINITY, lo)), Some((hi, f64::INFINITY))]
            }
        }
    }
}

/// Exact full conformal for algorithms whose predictions are affine in the
/// appended label. Costs two augmented fits (one if labels are ignored).
pub fn full_conformal_exact(
    train: &Dataset,
    x_new: &[f64],
    algo: &dyn RegressionAlgorithm,
    alpha: f64,
    policy: SymmetryPolicy,
) -> Result<PredictionSet> {
    check_alpha(alpha)?;
    check_symmetry(algo, policy)?;
    train.check_dim(x_new)?;
    let response = algo.label_response();
    if response == LabelResponse::General {
        return Err(Error::InvalidParameter(format!(
            "algorithm `{}` is not affine in the label; use the grid route",
            algo.name()
        )));
    }
    let at_zero = algo.fit_augmented(train, x_new, 0.0)?;
    let at_one = match response {
        LabelResponse::Independent => None,
        _ => Some(algo.fit_augmented(train, x_new, 1.0)?),
    };
    let slope_of = |x: &[f64], p0: f64| at_one.as_ref().map_or(0.0, |m| m.predict(x) - p0);

    let lines: Vec<ResidualLine> = train
        .iter()
        .map(|(x, y)| {
            let p0 = at_zero.predict(x);
            ResidualLine::new(y - p0, -slope_of(x, p0))
        })
        .collect();
    let p0 = at_zero.predict(x_new);
    let test = ResidualLine::new(-p0, 1.0 - slope_of(x_new, p0));
    Ok(conformal_set_from_lines(
        &lines,
        test,
        conformal_rank(train.len(), alpha),
    ))
}

/// A uniform grid `lo, lo + step, …` not exceeding `hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub resolution: f64,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, resolution: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!(
                "grid bounds must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid resolution must be positive, got {resolution}"
            )));
        }
        let spec = Self { lo, hi, resolution };
        if spec.points_f64() > MAX_GRID_POINTS {
            return Err(Error::GridTooLarge(spec.points_f64()));
        }
        Ok(spec)
    }

    /// `[ȳ − 5·IQR, ȳ + 5·IQR]` of the training labels, widened to cover
    /// `±3·y*` when given, with 2000 steps.
    pub fn default_for(train: &Dataset, y_star: Option<f64>) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let ys = train.labels();
        let n = ys.len();
        let mean = ys.iter().sum::<f64>() / n as f64;
        let q1 = kth_smallest(ys, (n as f64 * 0.25).ceil().max(1.0) as usize)?;
        let q3 = kth_smallest(ys, (n as f64 * 0.75).ceil().max(1.0) as usize)?;
        let iqr = if q3 > q1 { q3 - q1 } else { 1.0 };
        let (mut lo, mut hi) = (mean - 5.0 * iqr, mean + 5.0 * iqr);
        if let Some(ys) = y_star {
            lo = lo.min(-3.0 * ys);
            hi = hi.max(3.0 * ys);
        }
        Self::new(lo, hi, (hi - lo) / 2000.0)
    }

    fn points_f64(&self) -> f64 {
        ((self.hi - self.lo) / self.resolution).floor() + 1.0
    }

    pub fn len(&self) -> usize {
        self.points_f64() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.resolution
    }
}

/// Grid full-conformal output.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConformalSet {
    pub set: PredictionSet,
    /// The first or last grid value was included, so the true set may extend
    /// past the grid.
    pub touches_boundary: bool,
}

/// Full conformal by refitting at every grid label. Each maximal run of kept
/// grid values `[g_a, g_b]` is reported as `[g_a − step, g_b + step]`.
pub fn full_conformal_grid(
    train: &Dataset,
    x_new: &[f64],
    algo: &dyn RegressionAlgorithm,
    alpha: f64,
    grid: &GridSpec,
    policy: SymmetryPolicy,
) -> Result<GridConformalSet> {
    check_alpha(alpha)?;
    check_symmetry(algo, policy)?;
    train.check_dim(x_new)?;
    let rank = conformal_rank(train.len(), alpha);
    let count = grid.len();
    let mut keep = vec![false; count];
    let mut scratch = Vec::with_capacity(train.len() + 1);
    for (i, slot) in keep.iter_mut().enumerate() {
        let y = grid.value(i);
        if rank > train.len() {
            *slot = true;
            continue;
        }
        let model = algo.fit_augmented(train, x_new, y)?;
        scratch.clear();
        scratch.extend(train.iter().map(|(x, yi)| (yi - model.predict(x)).abs()));
        let test_score = (y - model.predict(x_new)).abs();
        scratch.push(test_score);
        *slot = test_score <= select_in_place(&mut scratch, rank);
    }

    let step = grid.resolution;
    let mut pieces = Vec::new();
    let mut i = 0;
    while i < count {
        if keep[i] {
            let start = i;
            while i + 1 < count && keep[i + 1] {
                i += 1;
            }
            pieces.push(Interval::new(
                grid.value(start) - step,
                grid.value(i) + step,
            ));
        }
        i += 1;
    }
    Ok(GridConformalSet {
        set: PredictionSet::from_intervals(pieces),
        touches_boundary: keep[0] || keep[count - 1],
    })
}

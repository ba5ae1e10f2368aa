//! Order-statistic helpers shared by every interval construction.

use crate::error::{check_alpha, Error, Result};

/// Result of the conformal rank computation `⌈(1−α)(n+1)⌉`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderIndex {
    /// A 1-based rank no larger than the number of items.
    Rank(usize),
    /// The rank exceeds the number of items; callers treat the quantile as +∞.
    Overflow,
}

impl OrderIndex {
    pub fn rank(self) -> Option<usize> {
        match self {
            OrderIndex::Rank(k) => Some(k),
            OrderIndex::Overflow => None,
        }
    }
}

/// `⌈(1−α)(n_items+1)⌉`, or [`OrderIndex::Overflow`] when it exceeds `n_items`.
pub fn order_stat_index(n_items: usize, alpha: f64) -> Result<OrderIndex> {
    check_alpha(alpha)?;
    if n_items == 0 {
        return Err(Error::EmptyDataset);
    }
    let k = conformal_rank(n_items, alpha);
    Ok(if k <= n_items {
        OrderIndex::Rank(k)
    } else {
        OrderIndex::Overflow
    })
}

/// Raw `⌈(1−α)(n+1)⌉` without the overflow check.
///
/// The product is nudged down by a few ulps before the ceiling so that exact
/// products like `0.9 * 10` are not pushed to the next integer by rounding.
pub(crate) fn conformal_rank(n: usize, alpha: f64) -> usize {
    let prod = (1.0 - alpha) * (n as f64 + 1.0);
    let rounded = prod.round();
    if (prod - rounded).abs() <= 1e-9 * prod.max(1.0) {
        rounded as usize
    } else {
        prod.ceil() as usize
    }
}

/// The `k`-th smallest value (1-based), counting multiplicity.
pub fn kth_smallest(values: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > values.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: values.len(),
        });
    }
    let mut buf = values.to_vec();
    Ok(select_in_place(&mut buf, k))
}

/// The `k`-th largest value (1-based), counting multiplicity.
pub fn kth_largest(values: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > values.len() {
        return Err(Error::IndexOutOfRange {
            index: k,
            len: values.len(),
        });
    }
    let mut buf = values.to_vec();
    let n = buf.len();
    Ok(select_in_place(&mut buf, n + 1 - k))
}

/// Selection on a scratch buffer the caller no longer needs in order.
pub(crate) fn select_in_place(buf: &mut [f64], k: usize) -> f64 {
    let (_, v, _) = buf.select_nth_unstable_by(k - 1, f64::total_cmp);
    *v
}

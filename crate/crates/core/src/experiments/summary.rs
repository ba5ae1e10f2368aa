//! Aggregation of trial records per (method, dimension).

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::config::Method;
use crate::experiments::runner::TrialRecord;

pub const HISTOGRAM_BINS: usize = 20;

/// Empirical CDF: `f[i]` is the fraction of values `≤ x[i]`, over distinct `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ecdf {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
}

impl Ecdf {
    pub fn from_values(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let (mut x, mut f) = (Vec::new(), Vec::new());
        for (i, v) in sorted.iter().enumerate() {
            if i + 1 < sorted.len() && sorted[i + 1] == *v {
                continue;
            }
            x.push(*v);
            f.push((i + 1) as f64 / n);
        }
        Self { x, f }
    }
}

/// Equal-width bins on `[0, 1]`; the last bin is closed on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn unit_interval(values: &[f64], bins: usize) -> Self {
        let edges = (0..=bins).map(|i| i as f64 / bins as f64).collect();
        let mut counts = vec![0usize; bins];
        for &v in values {
            let b = ((v * bins as f64).floor().max(0.0) as usize).min(bins - 1);
            counts[b] += 1;
        }
        Self { edges, counts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub d: usize,
    pub trials: usize,
    pub alpha: f64,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub frac_gt_alpha: f64,
    pub frac_gt_alpha_plus_0_05: f64,
    pub frac_gt_0_2: f64,
    pub frac_gt_0_99: f64,
    pub mean_width: f64,
    pub ecdf: Ecdf,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryReport {
    pub rows: Vec<SummaryRow>,
}

impl SummaryReport {
    pub fn row(&self, method: Method, d: usize) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.method == method && r.d == d)
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(
            w,
            "method,d,mean,median,max,frac_gt_alpha,frac_gt_0.2,frac_gt_0.99"
        )?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.method,
                r.d,
                r.mean,
                r.median,
                r.max,
                r.frac_gt_alpha,
                r.frac_gt_0_2,
                r.frac_gt_0_99
            )?;
        }
        Ok(())
    }

    pub fn write_json(&self, w: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Groups records by (method, d) in order of first appearance.
pub fn summarize(records: &[TrialRecord]) -> Result<SummaryReport> {
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut keys: Vec<(Method, usize)> = Vec::new();
    for r in records {
        if !keys.contains(&(r.method, r.d)) {
            keys.push((r.method, r.d));
        }
    }
    let rows = keys
        .into_iter()
        .map(|(method, d)| {
            let group: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.method == method && r.d == d)
                .collect();
            let values: Vec<f64> = group.iter().map(|r| r.alpha_hat).collect();
            let alpha = group[0].alpha;
            let n = values.len() as f64;
            let frac_gt = |t: f64| values.iter().filter(|&&v| v > t).count() as f64 / n;
            SummaryRow {
                method,
                d,
                trials: values.len(),
                alpha,
                mean: values.iter().sum::<f64>() / n,
                median: median(&values),
                max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                frac_gt_alpha: frac_gt(alpha),
                frac_gt_alpha_plus_0_05: frac_gt(alpha + 0.05),
                frac_gt_0_2: frac_gt(0.2),
                frac_gt_0_99: frac_gt(0.99),
                mean_width: group.iter().map(|r| r.mean_width).sum::<f64>() / n,
                ecdf: Ecdf::from_values(&values),
                histogram: Histogram::unit_interval(&values, HISTOGRAM_BINS),
            }
        })
        .collect();
    Ok(SummaryReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::Mode;
    use proptest::prelude::*;

    fn rec(method: Method, d: usize, alpha_hat: f64) -> TrialRecord {
        TrialRecord {
            trial: 0,
            method,
            mode: Mode::RidgeSim,
            n: 10,
            d,
            alpha: 0.1,
            alpha_hat,
            mean_width: 1.0,
            events: None,
        }
    }

    #[test]
    fn single_record() {
        let s = summarize(&[rec(Method::Split, 5, 0.1)]).unwrap();
        let r = &s.rows[0];
        assert_eq!((r.mean, r.median, r.max), (0.1, 0.1, 0.1));
    }

    #[test]
    fn two_records() {
        let s = summarize(&[rec(Method::Split, 5, 0.0), rec(Method::Split, 5, 0.2)]).unwrap();
        let r = &s.rows[0];
        assert!((r.mean - 0.1).abs() < 1e-15);
        assert_eq!(r.ecdf.x, vec![0.0, 0.2]);
        assert_eq!(r.ecdf.f, vec![0.5, 1.0]);
        assert_eq!(r.frac_gt_alpha, 0.5);
        assert_eq!(r.frac_gt_0_2, 0.0);
    }

    #[test]
    fn groups_in_first_seen_order() {
        let recs = [
            rec(Method::Full, 3, 0.1),
            rec(Method::Split, 3, 0.2),
            rec(Method::Full, 3, 0.3),
        ];
        let s = summarize(&recs).unwrap();
        assert_eq!(s.rows.len(), 2);
        assert_eq!(s.rows[0].method, Method::Full);
        assert_eq!(s.rows[0].trials, 2);
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn csv_header() {
        let s = summarize(&[rec(Method::CvPlus, 500, 0.05)]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "method,d,mean,median,max,frac_gt_alpha,frac_gt_0.2,frac_gt_0.99\ncv+,500,0.05,0.05,0.05,0,0,0\n"
        );
    }

    proptest! {
        #[test]
        fn ecdf_and_histogram_invariants(values in prop::collection::vec(0.0f64..=1.0, 1..200)) {
            let e = Ecdf::from_values(&values);
            prop_assert!(e.f.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(e.x.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(*e.f.last().unwrap(), 1.0);
            prop_assert!(e.f[0] > 0.0);
            let h = Histogram::unit_interval(&values, HISTOGRAM_BINS);
            prop_assert_eq!(h.counts.iter().sum::<usize>(), values.len());
        }
    }
}

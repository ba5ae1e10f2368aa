//! Simulation harness: data generation, trial execution, aggregation and
//! CSV/JSON output.

mod config;
mod data;
mod runner;
mod summary;

use std::io::Write;

pub use config::{ExperimentConfig, FullRoute, Method, Mode, GRID_REFIT_BUDGET};
pub use data::{draw_linear_gaussian, estimate_miscoverage, generate_linear_gaussian, random_beta};
pub use runner::{
    ridge_trial_data, run_single_trial, run_trials, run_trials_with_workers, trial_seed,
    TrialRecord,
};
pub use summary::{median, summarize, Ecdf, Histogram, SummaryReport, SummaryRow, HISTOGRAM_BINS};

use crate::error::Result;

pub const TRIALS_CSV_HEADER: &str =
    "trial,method,mode,n,d,alpha,alpha_hat,mean_width,e_max,e_mod,e_unif";

/// Writes trial records as CSV; event flags are `0`/`1`, or empty when absent.
pub fn write_trials_csv(records: &[TrialRecord], mut w: impl Write) -> Result<()> {
    writeln!(w, "{TRIALS_CSV_HEADER}")?;
    let flag = |b: bool| if b { "1" } else { "0" };
    for r in records {
        let (e_max, e_mod, e_unif) = match r.events {
            Some(e) => (flag(e.e_max), flag(e.e_mod), flag(e.e_unif)),
            None => ("", "", ""),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.trial,
            r.method,
            r.mode,
            r.n,
            r.d,
            r.alpha,
            r.alpha_hat,
            r.mean_width,
            e_max,
            e_mod,
            e_unif
        )?;
    }
    Ok(())
}

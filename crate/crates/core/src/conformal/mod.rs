//! Conformal prediction sets: split, full, jackknife+ and CV+.

mod cross;
mod full;
mod pvalue;
mod ridge_engine;
mod split;

pub use cross::{cv_plus, jackknife_plus, plus_interval, CrossConformal};
pub use full::{
    conformal_set_from_lines, full_conformal_exact, full_conformal_grid, GridConformalSet,
    GridSpec, ResidualLine, SymmetryPolicy, MAX_GRID_POINTS,
};
pub use pvalue::{holdout_pvalue, oracle_pvalue, sup_pvalue_deviation, HoldoutPValue, OracleTail};
pub use ridge_engine::{full_conformal_ridge_exact, BatchRequest, BatchSets, DualRidge};
pub use split::{split_conformal, SplitConformal, SplitSpec};

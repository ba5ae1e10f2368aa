//! Distribution-free predictive inference: split conformal, full conformal,
//! jackknife+ and CV+, together with tools for studying their
//! training-conditional coverage.

pub mod adversary;
pub mod bounds;
pub mod cli;
pub mod conformal;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod folds;
pub mod model;
pub mod order_stats;
pub mod prediction_set;
pub mod regressors;
pub mod seeding;

pub use dataset::{DataPoint, Dataset};
pub use error::{Error, Result};
pub use folds::{make_folds, FoldPartition};
pub use model::{BoxedModel, FittedModel, LabelResponse, RegressionAlgorithm};
pub use order_stats::{kth_largest, kth_smallest, order_stat_index, OrderIndex};
pub use prediction_set::{Interval, PredictionSet};

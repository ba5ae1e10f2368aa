//! Concrete regression algorithms.

mod clock;
mod constant;
mod ridge;

pub use clock::{
    adversary_full_fit, adversary_jackknife_fit, clock_index, AdversaryFull, AdversaryJackknife,
    CdfFn, ClockConfig, ClockModel, PartitionMap,
};
pub use constant::{constant_fit, Constant, ConstantModel};
pub(crate) use ridge::add_diagonal;
pub use ridge::{ridge_fit, LinearModel, Ridge, RidgeConfig, RidgeSolver};

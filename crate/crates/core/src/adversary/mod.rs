//! Event detectors and Monte Carlo checks for the clock adversaries.

mod design;
mod events;
mod montecarlo;

pub use design::{
    collapse_check, uniform_design_y_star, AdversaryDesign, AdversaryMethod, ClockPredictor,
};
pub use events::{check_events, compute_m1, EventReport};
pub use montecarlo::{dkw_statistic, event_rate_montecarlo, EventFrequencies};

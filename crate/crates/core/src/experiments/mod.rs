//! Error estimation, bound evaluation and rate bookkeeping.

pub mod bounds;
mod estimate;
mod rates;
mod report;
pub mod stats;

pub use bounds::BoundCatalog;
pub use estimate::{
    adversarial_pair, concentration_experiment, concentration_sweep, estimate_false_id,
    estimate_missed_id, ErrorEstimate, PairSampling, Regime, Verdict, RESOLUTION_FLOOR,
};
pub use rates::{rate_report, rr_build, RateReport};
pub use report::ReportRecord;

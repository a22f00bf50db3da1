//! Headless reproduction of the localization-process comparison: CHI,
//! fingerprinting and crowdsourcing error curves and their expense.

pub mod approach;
pub mod process;
pub mod report;

pub use approach::{expense, Approach, ApproachConfig, CostParams};
pub use process::{
    checkpoints, collection_events, random_walk_policy, run_process, ErrorSample, Measurement, DEFAULT_CHECKPOINT_EVERY,
};
pub use report::{
    error_vs_expense, first_time_below, run_eval, CurveRow, EvalResult, ExpenseRow, DEFAULT_ERROR_TARGETS,
};

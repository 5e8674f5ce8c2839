//! Empirical Walsh coefficients, subtree weights and the thresholded tree traversal.

mod coefficients;
mod complexity;
mod config;
mod kernel;
mod reference;
mod schedule;
mod traversal;

pub(crate) use coefficients::empirical_sign_sums;
pub use coefficients::{
    child_weights, empirical_coefficient, empirical_coefficients_dense, weight_direct,
    weight_indirect,
};
pub use complexity::complexity_alpha_bound;
pub use config::{
    Comparison, DirectSwitch, QueuePolicy, TraversalConfig, TraversalStats, DEFAULT_CALL_LIMIT,
};
pub(crate) use kernel::coefficient_from_sum;
pub use kernel::{DIRECT_BLOCK_CAP, MAX_BRANCH_BITS};
pub use reference::{retained_set_reference, termwise_set, REFERENCE_MAX_DIM};
pub use schedule::{ScheduleKind, ThresholdSchedule};
pub use traversal::rwt_estimate;
